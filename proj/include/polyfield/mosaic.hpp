#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polyfield/geometry.hpp"

namespace polyfield {

using Colour = int;  // labels 1..k

/// Pixel colours of a rows x cols lattice, row-major.
struct PixelArray {
    int rows = 0;
    int cols = 0;
    std::vector<Colour> colours;

    Colour at(int row, int col) const { return colours[static_cast<std::size_t>(row * cols + col)]; }
    Colour& at(int row, int col) { return colours[static_cast<std::size_t>(row * cols + col)]; }
    bool operator==(const PixelArray&) const = default;
};

/// Coloured configuration on a tessellation: one colour per cell, a segment
/// is active iff its two cells differ. Faces are the classes of cells joined
/// through inactive segments.
class Mosaic {
public:
    Mosaic(TessellationPtr t, int k, Colour fill = 1);
    Mosaic(TessellationPtr t, int k, std::vector<Colour> cell_colours);

    /// Arbitrary (possibly inadmissible) state for validation and I/O.
    static Mosaic raw(TessellationPtr t, int k, std::vector<Colour> cell_colours, const std::vector<int>& active);

    const Tessellation& tessellation() const { return *tess_; }
    const TessellationPtr& tessellation_ptr() const { return tess_; }
    int k() const { return k_; }

    Colour colour(int cell) const { return colours_[static_cast<std::size_t>(cell)]; }
    const std::vector<Colour>& colours() const { return colours_; }
    bool active(int segment) const { return active_[static_cast<std::size_t>(segment)] != 0; }
    std::vector<int> active_segments() const;
    std::size_t active_count() const;

    /// Recolours one cell and refreshes the activity of its boundary segments.
    void set_colour(int cell, Colour c);
    /// Recomputes all segment activity from the cell colours.
    void refresh();

    bool operator==(const Mosaic& o) const { return colours_ == o.colours_ && active_ == o.active_ && k_ == o.k_; }

private:
    TessellationPtr tess_;
    int k_;
    std::vector<Colour> colours_;
    std::vector<std::uint8_t> active_;
};

enum class VertexKind : std::uint8_t { None, Through, V, T, X, Dangling };

/// Degree pattern of γ at an interior node.
VertexKind classify_node(const Mosaic& m, int node);

struct Edge {
    int line = -1;
    std::vector<int> segments;        ///< in time order
    std::vector<int> interior_nodes;  ///< nodes strictly inside the edge
};

struct MosaicStats {
    int n_v = 0;
    int n_t = 0;
    int n_x = 0;
    int boundary_vertices = 0;
    std::vector<Edge> edges;
    std::vector<Edge> primary_edges;
    std::vector<int> nodes_on_gamma;
    std::vector<int> edge_of_segment;     ///< -1 when inactive
    std::vector<int> primary_of_edge;
};

/// Throws AdmissibilityViolation when an interior node has degree 1.
MosaicStats analyze(const Mosaic& m);

enum class ViolationKind : std::uint8_t { AdjacentSameColour, InconsistentFace, BadDegree, BadColour };

struct Violation {
    ViolationKind kind;
    int location;  ///< segment, node or cell id depending on kind
    std::string message;
};

std::string_view to_string(ViolationKind kind);

/// Empty when admissible.
std::vector<Violation> validate(const Mosaic& m);

Mosaic pixels_to_mosaic(const PixelArray& p, const TessellationPtr& t, int k);
PixelArray mosaic_to_pixels(const Mosaic& m);

/// Cells reachable from `cell` without crossing an active segment.
std::vector<int> face_cells(const Mosaic& m, int cell);

} // namespace polyfield
