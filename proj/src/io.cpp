#include "polyfield/io.hpp"

#include <fstream>
#include <sstream>

#include "polyfield/error.hpp"

namespace polyfield {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::Parse, std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorCode::Parse, std::string("field '") + key + "' has the wrong type");
    }
}

void check_header(const json& j, const char* kind) {
    if (field<int>(j, "format_version") != kFormatVersion) {
        throw Error(ErrorCode::Parse, "unsupported format_version " + j.at("format_version").dump());
    }
    if (field<std::string>(j, "kind") != kind) throw Error(ErrorCode::Parse, std::string("expected a ") + kind + " document");
}

} // namespace

json tessellation_to_json(const Tessellation& t) {
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "tessellation";
    json verts = json::array();
    for (const auto& v : t.domain().vertices()) verts.push_back({v.x, v.y});
    j["domain"] = {{"rectangle", t.domain().is_rectangle()}, {"vertices", verts}};
    json lines = json::array();
    for (const auto& l : t.lines()) lines.push_back({{"a", l.a}, {"b", l.b}, {"c", l.c}, {"activity", l.activity}});
    j["lines"] = lines;
    if (t.lattice()) j["lattice"] = {{"rows", t.lattice()->rows}, {"cols", t.lattice()->cols}};
    return j;
}

TessellationPtr tessellation_from_json(const json& j) {
    check_header(j, "tessellation");
    const auto lines_j = field<json>(j, "lines");
    if (!lines_j.is_array()) throw Error(ErrorCode::Parse, "'lines' must be an array");
    std::vector<Line> lines;
    for (const auto& l : lines_j) {
        lines.push_back(Line::from_coefficients(static_cast<int>(lines.size()), field<double>(l, "a"), field<double>(l, "b"),
                                                field<double>(l, "c"), field<double>(l, "activity")));
    }
    if (j.contains("lattice")) {
        const int rows = field<int>(j["lattice"], "rows"), cols = field<int>(j["lattice"], "cols");
        std::vector<double> acts;
        for (const auto& l : lines) acts.push_back(l.activity);
        return build_lattice(rows, cols, acts);
    }
    const auto dom = field<json>(j, "domain");
    std::vector<Point> verts;
    for (const auto& v : field<json>(dom, "vertices")) {
        if (!v.is_array() || v.size() != 2) throw Error(ErrorCode::Parse, "domain vertices must be [x, y] pairs");
        verts.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    Domain domain = Domain::polygon(verts);
    if (field<bool>(dom, "rectangle")) {
        domain = Domain::rectangle(domain.min_x(), domain.min_y(), domain.max_x(), domain.max_y());
    }
    return build_tessellation(std::move(lines), std::move(domain));
}

json mosaic_to_json(const Mosaic& m, const ModelParams* model) {
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "mosaic";
    j["k"] = m.k();
    if (model) j["model"] = {{"alpha_v", model->alpha_v}};
    j["tessellation"] = tessellation_to_json(m.tessellation());
    j["cells"] = m.colours();
    j["active_segments"] = m.active_segments();
    if (validate(m).empty()) {
        const auto st = analyze(m);
        j["vertices"] = {{"V", st.n_v}, {"T", st.n_t}, {"X", st.n_x}, {"boundary", st.boundary_vertices}};
    }
    if (m.tessellation().is_lattice()) {
        const auto px = mosaic_to_pixels(m);
        json rows = json::array();
        for (int r = 0; r < px.rows; ++r) {
            json row = json::array();
            for (int c = 0; c < px.cols; ++c) row.push_back(px.at(r, c));
            rows.push_back(row);
        }
        j["pixels"] = rows;
    }
    return j;
}

LoadedMosaic mosaic_from_json(const json& j, bool raw) {
    check_header(j, "mosaic");
    auto t = tessellation_from_json(field<json>(j, "tessellation"));
    const int k = field<int>(j, "k");
    const auto cells = field<std::vector<Colour>>(j, "cells");
    if (cells.size() != t->cell_count()) {
        throw Error(ErrorCode::Parse, "mosaic has " + std::to_string(cells.size()) + " cells, tessellation has " +
                                          std::to_string(t->cell_count()));
    }
    LoadedMosaic out{raw ? Mosaic::raw(t, k, cells, field<std::vector<int>>(j, "active_segments")) : Mosaic(t, k, cells),
                     std::nullopt};
    if (j.contains("model")) out.alpha_v = field<double>(j["model"], "alpha_v");
    return out;
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Parse, path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    out << text;
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

} // namespace polyfield
