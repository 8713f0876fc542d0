#pragma once

#include <string>

#include "polyfield/extract.hpp"
#include "polyfield/mosaic.hpp"

namespace polyfield {

struct SvgOptions {
    const GrayImage* background = nullptr;
    bool fill = true;
    /// Output pixels per domain unit.
    double scale = 4.0;
};

/// Deterministic SVG: optional embedded background raster, one filled path per
/// face (palette indexed by colour), one polyline per edge. Coordinates are
/// domain units times 100, rounded to integers.
std::string render_svg(const Mosaic& m, const SvgOptions& opt = {});

/// Grey raster with `scale` pixels per domain unit: each pixel takes the grey
/// level of its cell's colour, pixels touching an edge are black.
GrayImage render_raster(const Mosaic& m, int scale);

std::string base64(const std::vector<std::uint8_t>& bytes);

} // namespace polyfield
