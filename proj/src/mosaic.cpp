#include "polyfield/mosaic.hpp"

#include <algorithm>
#include <string>

#include "polyfield/error.hpp"

namespace polyfield {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

void check_k(int k) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "colour count must be positive");
}

} // namespace

Mosaic::Mosaic(TessellationPtr t, int k, Colour fill)
    : tess_(std::move(t)), k_(k), colours_(tess_->cell_count(), fill), active_(tess_->segment_count(), 0) {
    check_k(k);
    if (fill < 1 || fill > k) throw Error(ErrorCode::InvalidArgument, "fill colour out of range");
}

Mosaic::Mosaic(TessellationPtr t, int k, std::vector<Colour> cell_colours)
    : tess_(std::move(t)), k_(k), colours_(std::move(cell_colours)), active_(tess_->segment_count(), 0) {
    check_k(k);
    if (colours_.size() != tess_->cell_count()) {
        throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(tess_->cell_count()) +
                                                      " cell colours, got " + std::to_string(colours_.size()));
    }
    for (Colour c : colours_) {
        if (c < 1 || c > k) throw Error(ErrorCode::InvalidArgument, "cell colour out of range");
    }
    refresh();
}

Mosaic Mosaic::raw(TessellationPtr t, int k, std::vector<Colour> cell_colours, const std::vector<int>& active) {
    Mosaic m(std::move(t), k, 1);
    if (cell_colours.size() != m.tess_->cell_count()) {
        throw Error(ErrorCode::DimensionMismatch, "cell colour count does not match the tessellation");
    }
    m.colours_ = std::move(cell_colours);
    for (int s : active) {
        if (s < 0 || idx(s) >= m.active_.size()) throw Error(ErrorCode::InvalidArgument, "segment id out of range");
        m.active_[idx(s)] = 1;
    }
    return m;
}

std::vector<int> Mosaic::active_segments() const {
    std::vector<int> out;
    for (std::size_t s = 0; s < active_.size(); ++s) {
        if (active_[s]) out.push_back(static_cast<int>(s));
    }
    return out;
}

std::size_t Mosaic::active_count() const {
    return static_cast<std::size_t>(std::count(active_.begin(), active_.end(), std::uint8_t{1}));
}

void Mosaic::set_colour(int cell, Colour c) {
    colours_[idx(cell)] = c;
    for (int s : tess_->cells()[idx(cell)].segments) {
        const auto& seg = tess_->segments()[idx(s)];
        active_[idx(s)] = colours_[idx(seg.cell_pos)] != colours_[idx(seg.cell_neg)];
    }
}

void Mosaic::refresh() {
    const auto& segs = tess_->segments();
    for (std::size_t s = 0; s < segs.size(); ++s) {
        active_[s] = colours_[idx(segs[s].cell_pos)] != colours_[idx(segs[s].cell_neg)];
    }
}

VertexKind classify_node(const Mosaic& m, int node) {
    const auto& n = m.tessellation().nodes()[idx(node)];
    const bool ii = m.active(n.in_i), oi = m.active(n.out_i);
    const bool ij = m.active(n.in_j), oj = m.active(n.out_j);
    const int degree = ii + oi + ij + oj;
    switch (degree) {
    case 0: return VertexKind::None;
    case 1: return VertexKind::Dangling;
    case 2: return ((ii && oi) || (ij && oj)) ? VertexKind::Through : VertexKind::V;
    case 3: return VertexKind::T;
    default: return VertexKind::X;
    }
}

MosaicStats analyze(const Mosaic& m) {
    const auto& t = m.tessellation();
    MosaicStats st;
    st.edge_of_segment.assign(t.segment_count(), -1);
    std::vector<VertexKind> kind(t.node_count());
    for (std::size_t n = 0; n < t.node_count(); ++n) {
        kind[n] = classify_node(m, static_cast<int>(n));
        switch (kind[n]) {
        case VertexKind::Dangling:
            throw Error(ErrorCode::AdmissibilityViolation, "node " + std::to_string(n) + " has degree 1");
        case VertexKind::V: ++st.n_v; break;
        case VertexKind::T: ++st.n_t; break;
        case VertexKind::X: ++st.n_x; break;
        default: break;
        }
        if (kind[n] != VertexKind::None) st.nodes_on_gamma.push_back(static_cast<int>(n));
    }
    for (std::size_t l = 0; l < t.line_count(); ++l) {
        const auto& segs = t.line_segments(static_cast<int>(l));
        Edge* primary = nullptr;
        Edge* edge = nullptr;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            const int s = segs[i];
            if (!m.active(s)) {
                primary = nullptr;
                edge = nullptr;
                continue;
            }
            const int tail = t.segments()[idx(s)].tail_node;
            if (tail < 0) {
                ++st.boundary_vertices;
            }
            const bool breaks = tail >= 0 && (kind[idx(tail)] == VertexKind::T || kind[idx(tail)] == VertexKind::X);
            if (primary == nullptr) {
                st.primary_edges.push_back({static_cast<int>(l), {}, {}});
                primary = &st.primary_edges.back();
            } else {
                primary->interior_nodes.push_back(tail);
            }
            if (edge == nullptr || breaks) {
                st.edges.push_back({static_cast<int>(l), {}, {}});
                st.primary_of_edge.push_back(static_cast<int>(st.primary_edges.size()) - 1);
                edge = &st.edges.back();
            } else {
                edge->interior_nodes.push_back(tail);
            }
            primary->segments.push_back(s);
            edge->segments.push_back(s);
            st.edge_of_segment[idx(s)] = static_cast<int>(st.edges.size()) - 1;
            if (t.segments()[idx(s)].head_node < 0) ++st.boundary_vertices;
        }
    }
    return st;
}

std::string_view to_string(ViolationKind kind) {
    switch (kind) {
    case ViolationKind::AdjacentSameColour: return "AdjacentSameColour";
    case ViolationKind::InconsistentFace: return "InconsistentFace";
    case ViolationKind::BadDegree: return "BadDegree";
    case ViolationKind::BadColour: return "BadColour";
    }
    return "Unknown";
}

std::vector<Violation> validate(const Mosaic& m) {
    const auto& t = m.tessellation();
    std::vector<Violation> out;
    for (std::size_t c = 0; c < t.cell_count(); ++c) {
        if (m.colour(static_cast<int>(c)) < 1 || m.colour(static_cast<int>(c)) > m.k()) {
            out.push_back({ViolationKind::BadColour, static_cast<int>(c), "cell " + std::to_string(c) + " colour out of range"});
        }
    }
    for (std::size_t s = 0; s < t.segment_count(); ++s) {
        const auto& seg = t.segments()[s];
        const bool differ = m.colour(seg.cell_pos) != m.colour(seg.cell_neg);
        if (m.active(static_cast<int>(s)) && !differ) {
            out.push_back({ViolationKind::AdjacentSameColour, static_cast<int>(s),
                           "faces across segment " + std::to_string(s) + " share colour " +
                               std::to_string(m.colour(seg.cell_pos))});
        } else if (!m.active(static_cast<int>(s)) && differ) {
            out.push_back({ViolationKind::InconsistentFace, static_cast<int>(s),
                           "face changes colour across inactive segment " + std::to_string(s)});
        }
    }
    for (std::size_t n = 0; n < t.node_count(); ++n) {
        if (classify_node(m, static_cast<int>(n)) == VertexKind::Dangling) {
            out.push_back({ViolationKind::BadDegree, static_cast<int>(n),
                           "interior vertex at node " + std::to_string(n) + " has degree 1"});
        }
    }
    return out;
}

Mosaic pixels_to_mosaic(const PixelArray& p, const TessellationPtr& t, int k) {
    const auto& shape = t->lattice();
    if (!shape) throw Error(ErrorCode::NotALattice, "pixel conversion needs a lattice tessellation");
    if (shape->rows != p.rows || shape->cols != p.cols ||
        p.colours.size() != static_cast<std::size_t>(p.rows) * static_cast<std::size_t>(p.cols)) {
        throw Error(ErrorCode::DimensionMismatch, "pixel array " + std::to_string(p.rows) + "x" + std::to_string(p.cols) +
                                                      " does not match lattice " + std::to_string(shape->rows) + "x" +
                                                      std::to_string(shape->cols));
    }
    std::vector<Colour> cells(t->cell_count());
    for (int r = 0; r < p.rows; ++r) {
        for (int c = 0; c < p.cols; ++c) cells[idx(shape->pixel(r, c))] = p.at(r, c);
    }
    return Mosaic(t, k, std::move(cells));
}

PixelArray mosaic_to_pixels(const Mosaic& m) {
    const auto& shape = m.tessellation().lattice();
    if (!shape) throw Error(ErrorCode::NotALattice, "pixel conversion needs a lattice tessellation");
    PixelArray p{shape->rows, shape->cols, std::vector<Colour>(m.colours().size())};
    for (int r = 0; r < p.rows; ++r) {
        for (int c = 0; c < p.cols; ++c) p.at(r, c) = m.colour(shape->pixel(r, c));
    }
    return p;
}

std::vector<int> face_cells(const Mosaic& m, int cell) {
    const auto& t = m.tessellation();
    std::vector<std::uint8_t> seen(t.cell_count(), 0);
    std::vector<int> out{cell};
    seen[idx(cell)] = 1;
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (int s : t.cells()[idx(out[i])].segments) {
            if (m.active(s)) continue;
            const int o = t.segments()[idx(s)].other_cell(out[i]);
            if (!seen[idx(o)]) {
                seen[idx(o)] = 1;
                out.push_back(o);
            }
        }
    }
    return out;
}

} // namespace polyfield
