#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "polyfield/model.hpp"

namespace polyfield {

/// Bumped on any incompatible change of the JSON documents below.
inline constexpr int kFormatVersion = 1;

/// {"format_version", "kind": "tessellation", "domain": [[x, y], ...],
///  "lines": [{"a", "b", "c", "activity"}], "lattice": {"rows", "cols"}?}
nlohmann::json tessellation_to_json(const Tessellation& t);
/// Lattices are rebuilt as lattices so that cell ids stay pixel indices.
/// Throws Parse on malformed input.
TessellationPtr tessellation_from_json(const nlohmann::json& j);

/// Mosaic document: the tessellation, k, cell colours, the active segments and
/// vertex counts; `model` records alpha_v when given. Lattice mosaics also
/// carry their row-major pixel array.
nlohmann::json mosaic_to_json(const Mosaic& m, const ModelParams* model = nullptr);

struct LoadedMosaic {
    Mosaic mosaic;
    std::optional<double> alpha_v;
};

/// Throws Parse on malformed input, InvalidArgument on bad colours. With
/// `raw` the stored active segments are kept as given instead of being
/// recomputed from the colours, so that inconsistent files can be validated.
LoadedMosaic mosaic_from_json(const nlohmann::json& j, bool raw = false);

nlohmann::json read_json(const std::string& path);
/// Pretty-printed with a trailing newline.
void write_text(const std::string& path, const std::string& text);
std::string dump(const nlohmann::json& j);

} // namespace polyfield
