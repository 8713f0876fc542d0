#include "polyfield/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "polyfield/error.hpp"

namespace polyfield {

double distance(Point p, Point q) { return std::hypot(p.x - q.x, p.y - q.y); }

Line Line::from_coefficients(int id, double a, double b, double c, double activity) {
    const double norm = std::hypot(a, b);
    if (!(norm > 0.0) || !std::isfinite(norm) || !std::isfinite(c)) {
        throw Error(ErrorCode::InvalidArgument, "line " + std::to_string(id) + " has a degenerate normal");
    }
    if (!(activity > 0.0 && activity < 1.0)) {
        throw Error(ErrorCode::InvalidArgument,
                    "line " + std::to_string(id) + " activity must lie in (0, 1), got " + std::to_string(activity));
    }
    a /= norm;
    b /= norm;
    c /= norm;
    if (a < 0.0 || (a == 0.0 && b < 0.0)) {
        a = -a;
        b = -b;
        c = -c;
    }
    if (a == 0.0) a = 0.0;  // drop negative zero
    return Line{id, a, b, c, activity};
}

// ---------------------------------------------------------------------------
// Domain

Domain Domain::rectangle(double x0, double y0, double x1, double y1) {
    if (!(x1 > x0) || !(y1 > y0)) {
        throw Error(ErrorCode::DegenerateDomain, "rectangle must have positive width and height");
    }
    Domain d = polygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
    d.rectangle_ = true;
    return d;
}

Domain Domain::polygon(std::vector<Point> vertices) {
    if (vertices.size() < 3) {
        throw Error(ErrorCode::DegenerateDomain, "domain polygon needs at least three vertices");
    }
    for (const auto& v : vertices) {
        if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
            throw Error(ErrorCode::DegenerateDomain, "domain vertex is not finite");
        }
    }
    double area2 = 0.0;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        area2 += cross(vertices[i], vertices[(i + 1) % vertices.size()]);
    }
    if (std::abs(area2) <= kGeometricTolerance) {
        throw Error(ErrorCode::DegenerateDomain, "domain polygon has empty interior");
    }
    if (area2 < 0.0) std::reverse(vertices.begin(), vertices.end());
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point e0 = vertices[(i + 1) % n] - vertices[i];
        const Point e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
        if (std::hypot(e0.x, e0.y) <= kGeometricTolerance) {
            throw Error(ErrorCode::DegenerateDomain, "domain polygon has repeated vertices");
        }
        if (cross(e0, e1) < -kGeometricTolerance) {
            throw Error(ErrorCode::DegenerateDomain, "domain polygon is not convex");
        }
    }
    Domain d;
    d.vertices_ = std::move(vertices);
    return d;
}

double Domain::inside_distance(Point p) const {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point v = vertices_[i];
        const Point e = vertices_[(i + 1) % n] - v;
        const double len = std::hypot(e.x, e.y);
        const Point inward{-e.y / len, e.x / len};
        best = std::min(best, dot(inward, p - v));
    }
    return best;
}

double Domain::min_x() const {
    return std::min_element(vertices_.begin(), vertices_.end(), [](Point p, Point q) { return p.x < q.x; })->x;
}
double Domain::max_x() const {
    return std::max_element(vertices_.begin(), vertices_.end(), [](Point p, Point q) { return p.x < q.x; })->x;
}
double Domain::min_y() const {
    return std::min_element(vertices_.begin(), vertices_.end(), [](Point p, Point q) { return p.y < q.y; })->y;
}
double Domain::max_y() const {
    return std::max_element(vertices_.begin(), vertices_.end(), [](Point p, Point q) { return p.y < q.y; })->y;
}

// ---------------------------------------------------------------------------
// Tessellation

double Tessellation::time_of(Point p) const {
    return p.x * std::cos(rotation_) + p.y * std::sin(rotation_);
}

double Tessellation::space_of(Point p) const {
    return -p.x * std::sin(rotation_) + p.y * std::cos(rotation_);
}

int Tessellation::event_position(EventKind kind, int index) const {
    const auto& table = kind == EventKind::Entry ? entry_event_pos_ : node_event_pos_;
    return table.at(static_cast<std::size_t>(index));
}

namespace {

using SignKey = std::vector<std::uint64_t>;

SignKey sign_key(const std::vector<Line>& lines, Point p, int own_line, bool own_positive) {
    SignKey key((lines.size() + 63) / 64, 0);
    for (std::size_t l = 0; l < lines.size(); ++l) {
        bool positive;
        if (static_cast<int>(l) == own_line) {
            positive = own_positive;
        } else {
            positive = lines[l].signed_distance(p) > 0.0;
        }
        if (positive) key[l / 64] |= (std::uint64_t{1} << (l % 64));
    }
    return key;
}

bool key_bit(const SignKey& key, std::size_t l) { return (key[l / 64] >> (l % 64)) & 1U; }

/// Keeps the part of `poly` where sign * signed_distance >= 0.
std::vector<Point> clip_half_plane(const std::vector<Point>& poly, const Line& line, double sign) {
    std::vector<Point> out;
    out.reserve(poly.size() + 1);
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point p = poly[i];
        const Point q = poly[(i + 1) % n];
        const double dp = sign * line.signed_distance(p);
        const double dq = sign * line.signed_distance(q);
        if (dp >= 0.0) out.push_back(p);
        if ((dp > 0.0 && dq < 0.0) || (dp < 0.0 && dq > 0.0)) {
            const double s = dp / (dp - dq);
            out.push_back(p + s * (q - p));
        }
    }
    return out;
}

double min_time(const Tessellation& t, const std::vector<Point>& poly) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : poly) best = std::min(best, t.time_of(p));
    return best;
}

bool frame_is_degenerate(const std::vector<Line>& lines, const Domain& domain, double rotation) {
    const double cs = std::cos(rotation);
    const double sn = std::sin(rotation);
    for (const auto& l : lines) {
        const Point d = l.direction();
        if (std::abs(d.x * cs + d.y * sn) < 1e-12) return true;
    }
    const auto& v = domain.vertices();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point e = v[(i + 1) % v.size()] - v[i];
        if (std::abs(e.x * cs + e.y * sn) < 1e-12 * std::hypot(e.x, e.y)) return true;
    }
    return false;
}

} // namespace

int Tessellation::locate(Point p) const {
    if (domain_.inside_distance(p) <= 0.0) return -1;
    for (const auto& l : lines_) {
        if (std::abs(l.signed_distance(p)) <= kGeometricTolerance) return -1;
    }
    if (lattice_) {
        const int row = static_cast<int>(std::floor(p.y));
        const int col = static_cast<int>(std::floor(p.x));
        if (row < 0 || col < 0 || row >= lattice_->rows || col >= lattice_->cols) return -1;
        return lattice_->pixel(row, col);
    }
    if (lines_.empty()) return 0;
    const auto it = cell_index_.find(sign_key(lines_, p, -1, false));
    return it == cell_index_.end() ? -1 : it->second;
}

class TessellationBuilder {
public:
    static TessellationPtr build(std::vector<Line> lines, Domain domain, std::optional<LatticeShape> lattice) {
        for (std::size_t i = 0; i < lines.size(); ++i) {
            const auto& l = lines[i];
            lines[i] = Line::from_coefficients(l.id, l.a, l.b, l.c, l.activity);
        }
        if (!frame_is_degenerate(lines, domain, 0.0) && !lattice) {
            try {
                return attempt(lines, domain, 0.0, lattice);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::TieBreakFailure) throw;
            }
        }
        if (frame_is_degenerate(lines, domain, kCanonicalRotation)) {
            throw Error(ErrorCode::TieBreakFailure, "a line or boundary edge is parallel to the spatial axis after rotation");
        }
        return attempt(lines, domain, kCanonicalRotation, lattice);
    }

private:
    struct Crossing {
        double time;
        Point position;
        int node;  // -1 for entry / exit
    };

    static TessellationPtr attempt(const std::vector<Line>& lines, const Domain& domain, double rotation,
                                   const std::optional<LatticeShape>& lattice) {
        auto t = std::make_shared<Tessellation>();
        t->lines_ = lines;
        t->domain_ = domain;
        t->rotation_ = rotation;
        t->lattice_ = lattice;
        const std::size_t nl = lines.size();

        // Boundary crossings of every line.
        std::vector<std::pair<Point, Point>> chords(nl);
        for (std::size_t l = 0; l < nl; ++l) chords[l] = clip_line(*t, lines[l]);

        // Interior nodes.
        struct RawNode {
            Point p;
            double time;
            int i, j;
        };
        std::vector<RawNode> raw;
        for (std::size_t i = 0; i < nl; ++i) {
            for (std::size_t j = i + 1; j < nl; ++j) {
                const Line& li = lines[i];
                const Line& lj = lines[j];
                const double det = li.a * lj.b - lj.a * li.b;
                if (std::abs(det) < 1e-14) {
                    if (std::abs(li.c - lj.c) <= kGeometricTolerance) {
                        throw Error(ErrorCode::InvalidArgument, "lines " + std::to_string(li.id) + " and " +
                                                                    std::to_string(lj.id) + " coincide");
                    }
                    continue;
                }
                const Point p{(li.c * lj.b - lj.c * li.b) / det, (li.a * lj.c - lj.a * li.c) / det};
                const double d = domain.inside_distance(p);
                if (std::abs(d) <= kGeometricTolerance) {
                    throw Error(ErrorCode::NodeOnBoundary, "lines " + std::to_string(li.id) + " and " +
                                                               std::to_string(lj.id) + " meet on the boundary");
                }
                if (d > 0.0) raw.push_back({p, t->time_of(p), static_cast<int>(i), static_cast<int>(j)});
            }
        }
        std::sort(raw.begin(), raw.end(), [](const RawNode& a, const RawNode& b) { return a.time < b.time; });
        t->nodes_.resize(raw.size());
        for (std::size_t n = 0; n < raw.size(); ++n) {
            auto& node = t->nodes_[n];
            node.position = raw[n].p;
            node.time = raw[n].time;
            node.line_i = raw[n].i;
            node.line_j = raw[n].j;
        }

        // Per-line crossing sequences and segments.
        std::vector<std::vector<Crossing>> along(nl);
        for (std::size_t l = 0; l < nl; ++l) {
            along[l].push_back({t->time_of(chords[l].first), chords[l].first, -1});
            along[l].push_back({t->time_of(chords[l].second), chords[l].second, -1});
        }
        for (std::size_t n = 0; n < t->nodes_.size(); ++n) {
            const auto& node = t->nodes_[n];
            along[static_cast<std::size_t>(node.line_i)].push_back({node.time, node.position, static_cast<int>(n)});
            along[static_cast<std::size_t>(node.line_j)].push_back({node.time, node.position, static_cast<int>(n)});
        }
        t->line_segments_.assign(nl, {});
        t->entries_.resize(nl);
        t->exits_.resize(nl);
        for (std::size_t l = 0; l < nl; ++l) {
            auto& seq = along[l];
            std::sort(seq.begin(), seq.end(), [](const Crossing& a, const Crossing& b) { return a.time < b.time; });
            if (seq.front().node != -1 || seq.back().node != -1) {
                throw Error(ErrorCode::TieBreakFailure,
                            "line " + std::to_string(lines[l].id) + " has a node tied in time with its boundary crossing");
            }
            for (std::size_t s = 0; s + 1 < seq.size(); ++s) {
                if (distance(seq[s].position, seq[s + 1].position) <= kGeometricTolerance) {
                    throw Error(ErrorCode::ThreeConcurrentLines,
                                "three lines meet near (" + std::to_string(seq[s].position.x) + ", " +
                                    std::to_string(seq[s].position.y) + ")");
                }
                if (!(seq[s + 1].time > seq[s].time)) {
                    throw Error(ErrorCode::TieBreakFailure, "crossings on line " + std::to_string(lines[l].id) +
                                                                " share a time coordinate");
                }
                Segment seg;
                seg.line = static_cast<int>(l);
                seg.tail_node = seq[s].node;
                seg.head_node = seq[s + 1].node;
                seg.from = seq[s].position;
                seg.to = seq[s + 1].position;
                seg.length = distance(seg.from, seg.to);
                const int id = static_cast<int>(t->segments_.size());
                t->segments_.push_back(seg);
                t->line_segments_[l].push_back(id);
                if (seg.tail_node >= 0) set_node_segment(t->nodes_[static_cast<std::size_t>(seg.tail_node)], seg.line, id, false);
                if (seg.head_node >= 0) set_node_segment(t->nodes_[static_cast<std::size_t>(seg.head_node)], seg.line, id, true);
            }
            t->entries_[l].position = seq.front().position;
            t->entries_[l].time = seq.front().time;
            t->entries_[l].segment = t->line_segments_[l].front();
            t->exits_[l].position = seq.back().position;
            t->exits_[l].time = seq.back().time;
            t->exits_[l].segment = t->line_segments_[l].back();
        }

        assign_cells(*t);
        assign_events(*t);
        return t;
    }

    static std::pair<Point, Point> clip_line(const Tessellation& t, const Line& line) {
        const Point d = line.direction();
        const Point p0{line.a * line.c, line.b * line.c};
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        const auto& v = t.domain_.vertices();
        const std::size_t n = v.size();
        bool misses = false;
        for (std::size_t i = 0; i < n; ++i) {
            const Point e = v[(i + 1) % n] - v[i];
            const Point inward{-e.y, e.x};
            const double num = dot(inward, p0 - v[i]);
            const double den = dot(inward, d);
            if (std::abs(den) < 1e-15 * std::hypot(e.x, e.y)) {
                if (num < 0.0) misses = true;
                continue;
            }
            const double s = -num / den;
            if (den > 0.0) {
                lo = std::max(lo, s);
            } else {
                hi = std::min(hi, s);
            }
        }
        if (misses || !(hi - lo > kGeometricTolerance)) {
            throw Error(ErrorCode::LineMissesDomain, "line " + std::to_string(line.id) + " does not cross the domain");
        }
        const Point a = p0 + lo * d;
        const Point b = p0 + hi * d;
        if (t.domain_.inside_distance(0.5 * (a + b)) <= kGeometricTolerance) {
            throw Error(ErrorCode::LineMissesDomain, "line " + std::to_string(line.id) + " runs along the boundary");
        }
        return t.time_of(a) <= t.time_of(b) ? std::make_pair(a, b) : std::make_pair(b, a);
    }

    static void set_node_segment(Node& node, int line, int seg, bool incoming) {
        if (line == node.line_i) {
            (incoming ? node.in_i : node.out_i) = seg;
        } else {
            (incoming ? node.in_j : node.out_j) = seg;
        }
    }

    static int common_cell(const Segment& a, const Segment& b) {
        if (b.borders(a.cell_pos)) return a.cell_pos;
        if (b.borders(a.cell_neg)) return a.cell_neg;
        throw Error(ErrorCode::TieBreakFailure, "segments around a node share no cell");
    }

    static void assign_cells(Tessellation& t) {
        const auto& lines = t.lines_;
        std::vector<std::vector<Point>> polys;
        if (lines.empty()) {
            polys.push_back(t.domain_.vertices());
        } else if (t.lattice_) {
            const auto shape = *t.lattice_;
            polys.resize(static_cast<std::size_t>(shape.rows * shape.cols));
            for (int c = 0; c < shape.cols; ++c) {
                for (int r = 0; r < shape.rows; ++r) {
                    const double x = c, y = r;
                    polys[static_cast<std::size_t>(shape.pixel(r, c))] = {{x, y}, {x + 1, y}, {x + 1, y + 1}, {x, y + 1}};
                }
            }
            for (auto& seg : t.segments_) {
                const Line& l = lines[static_cast<std::size_t>(seg.line)];
                const Point mid = 0.5 * (seg.from + seg.to);
                const Point n{l.a, l.b};
                const Point pp = mid + 0.25 * n;
                const Point pn = mid - 0.25 * n;
                seg.cell_pos = shape.pixel(static_cast<int>(std::floor(pp.y)), static_cast<int>(std::floor(pp.x)));
                seg.cell_neg = shape.pixel(static_cast<int>(std::floor(pn.y)), static_cast<int>(std::floor(pn.x)));
            }
        } else {
            std::map<SignKey, int> index;
            std::vector<SignKey> keys;
            auto lookup = [&](SignKey key) {
                const auto it = index.find(key);
                if (it != index.end()) return it->second;
                const int id = static_cast<int>(keys.size());
                index.emplace(key, id);
                keys.push_back(std::move(key));
                return id;
            };
            for (auto& seg : t.segments_) {
                const Point mid = 0.5 * (seg.from + seg.to);
                seg.cell_pos = lookup(sign_key(lines, mid, seg.line, true));
                seg.cell_neg = lookup(sign_key(lines, mid, seg.line, false));
            }
            polys.resize(keys.size());
            for (std::size_t c = 0; c < keys.size(); ++c) {
                std::vector<Point> poly = t.domain_.vertices();
                for (std::size_t l = 0; l < lines.size() && !poly.empty(); ++l) {
                    poly = clip_half_plane(poly, lines[l], key_bit(keys[c], l) ? 1.0 : -1.0);
                }
                polys[c] = std::move(poly);
            }
            t.cell_index_ = std::move(index);
        }

        // Birth events, identified through each cell's earliest point.
        const std::size_t nc = polys.size();
        std::vector<double> tmin(nc);
        for (std::size_t c = 0; c < nc; ++c) tmin[c] = min_time(t, polys[c]);
        std::vector<std::optional<Event>> birth(nc);
        std::vector<int> birth_count(nc, 0);
        for (std::size_t n = 0; n < t.nodes_.size(); ++n) {
            const auto& node = t.nodes_[n];
            const int right = common_cell(t.segments_[static_cast<std::size_t>(node.out_i)],
                                          t.segments_[static_cast<std::size_t>(node.out_j)]);
            birth[static_cast<std::size_t>(right)] = Event{EventKind::Node, static_cast<int>(n), node.time};
            ++birth_count[static_cast<std::size_t>(right)];
        }
        const double scale = std::max({1.0, std::abs(t.domain_.max_x() - t.domain_.min_x()),
                                       std::abs(t.domain_.max_y() - t.domain_.min_y())});
        const double eps = kGeometricTolerance * scale;
        for (std::size_t l = 0; l < t.entries_.size(); ++l) {
            const auto& seg = t.segments_[static_cast<std::size_t>(t.entries_[l].segment)];
            const double te = t.entries_[l].time;
            const bool pos_new = tmin[static_cast<std::size_t>(seg.cell_pos)] >= te - eps;
            const bool neg_new = tmin[static_cast<std::size_t>(seg.cell_neg)] >= te - eps;
            if (pos_new == neg_new) {
                throw Error(ErrorCode::TieBreakFailure,
                            "cannot order the cells at the entry of line " + std::to_string(lines[l].id));
            }
            const int fresh = pos_new ? seg.cell_pos : seg.cell_neg;
            birth[static_cast<std::size_t>(fresh)] = Event{EventKind::Entry, static_cast<int>(l), te};
            ++birth_count[static_cast<std::size_t>(fresh)];
        }
        int initial = -1;
        for (std::size_t c = 0; c < nc; ++c) {
            if (birth_count[c] > 1) {
                throw Error(ErrorCode::TieBreakFailure, "a cell is born at two events");
            }
            if (birth_count[c] == 0) {
                if (initial != -1) throw Error(ErrorCode::TieBreakFailure, "more than one cell lacks a birth event");
                initial = static_cast<int>(c);
            }
        }
        if (initial == -1) throw Error(ErrorCode::TieBreakFailure, "no initial cell");

        // Chronological renumbering.
        std::vector<int> order(nc);
        std::iota(order.begin(), order.end(), 0);
        auto birth_time = [&](int c) {
            return birth[static_cast<std::size_t>(c)] ? birth[static_cast<std::size_t>(c)]->time
                                                       : -std::numeric_limits<double>::infinity();
        };
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return birth_time(a) < birth_time(b); });
        std::vector<int> rank(nc);
        for (std::size_t i = 0; i < nc; ++i) rank[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
        if (t.lattice_) {
            for (std::size_t i = 0; i < nc; ++i) {
                if (rank[i] != static_cast<int>(i)) {
                    throw Error(ErrorCode::TieBreakFailure, "lattice cells are not born in column-major order");
                }
            }
        }
        t.cells_.resize(nc);
        for (std::size_t c = 0; c < nc; ++c) {
            auto& cell = t.cells_[static_cast<std::size_t>(rank[c])];
            cell.polygon = std::move(polys[c]);
            cell.birth = birth[c];
            cell.birth_time = birth[c] ? birth[c]->time : tmin[c];
        }
        for (auto& [key, id] : t.cell_index_) id = rank[static_cast<std::size_t>(id)];
        for (std::size_t s = 0; s < t.segments_.size(); ++s) {
            auto& seg = t.segments_[s];
            seg.cell_pos = rank[static_cast<std::size_t>(seg.cell_pos)];
            seg.cell_neg = rank[static_cast<std::size_t>(seg.cell_neg)];
            t.cells_[static_cast<std::size_t>(seg.cell_pos)].segments.push_back(static_cast<int>(s));
            t.cells_[static_cast<std::size_t>(seg.cell_neg)].segments.push_back(static_cast<int>(s));
        }

        for (auto& node : t.nodes_) {
            const auto& in_i = t.segments_[static_cast<std::size_t>(node.in_i)];
            const auto& in_j = t.segments_[static_cast<std::size_t>(node.in_j)];
            node.left = common_cell(in_i, in_j);
            node.across_i = in_i.other_cell(node.left);
            node.across_j = in_j.other_cell(node.left);
            node.right = common_cell(t.segments_[static_cast<std::size_t>(node.out_i)],
                                     t.segments_[static_cast<std::size_t>(node.out_j)]);
        }
        for (std::size_t l = 0; l < t.entries_.size(); ++l) {
            auto& entry = t.entries_[l];
            const auto& seg = t.segments_[static_cast<std::size_t>(entry.segment)];
            const auto& b = t.cells_[static_cast<std::size_t>(seg.cell_pos)].birth;
            const bool pos_fresh = b && b->kind == EventKind::Entry && b->index == static_cast<int>(l);
            entry.fresh = pos_fresh ? seg.cell_pos : seg.cell_neg;
            entry.prior = pos_fresh ? seg.cell_neg : seg.cell_pos;
        }
    }

    static void assign_events(Tessellation& t) {
        auto& events = t.events_;
        for (std::size_t l = 0; l < t.entries_.size(); ++l) {
            events.push_back({EventKind::Entry, static_cast<int>(l), t.entries_[l].time});
        }
        for (std::size_t n = 0; n < t.nodes_.size(); ++n) {
            events.push_back({EventKind::Node, static_cast<int>(n), t.nodes_[n].time});
        }
        std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.time < b.time; });
        for (std::size_t e = 1; e < events.size(); ++e) {
            if (!(events[e].time - events[e - 1].time > kGeometricTolerance)) {
                throw Error(ErrorCode::TieBreakFailure, "two events share a time coordinate");
            }
        }
        t.entry_event_pos_.assign(t.entries_.size(), -1);
        t.node_event_pos_.assign(t.nodes_.size(), -1);
        for (std::size_t e = 0; e < events.size(); ++e) {
            const int pos = static_cast<int>(e);
            if (events[e].kind == EventKind::Entry) {
                t.entry_event_pos_[static_cast<std::size_t>(events[e].index)] = pos;
                t.cells_[static_cast<std::size_t>(t.entries_[static_cast<std::size_t>(events[e].index)].prior)]
                    .dependents.push_back(pos);
            } else {
                t.node_event_pos_[static_cast<std::size_t>(events[e].index)] = pos;
                const auto& node = t.nodes_[static_cast<std::size_t>(events[e].index)];
                for (int c : {node.left, node.across_i, node.across_j}) {
                    t.cells_[static_cast<std::size_t>(c)].dependents.push_back(pos);
                }
            }
        }
    }
};

TessellationPtr build_tessellation(std::vector<Line> lines, Domain domain) {
    return TessellationBuilder::build(std::move(lines), std::move(domain), std::nullopt);
}

TessellationPtr build_lattice(int rows, int cols, std::span<const double> activities) {
    if (rows < 1 || cols < 1) {
        throw Error(ErrorCode::DimensionMismatch, "lattice dimensions must be at least 1x1");
    }
    const std::size_t expected = static_cast<std::size_t>(rows + cols - 2);
    if (activities.size() != expected) {
        throw Error(ErrorCode::DimensionMismatch, "lattice " + std::to_string(rows) + "x" + std::to_string(cols) +
                                                      " needs " + std::to_string(expected) + " activities, got " +
                                                      std::to_string(activities.size()));
    }
    std::vector<Line> lines;
    lines.reserve(expected);
    int id = 0;
    for (int r = 1; r < rows; ++r, ++id) {
        lines.push_back(Line::from_coefficients(id, 0.0, 1.0, r, activities[static_cast<std::size_t>(id)]));
    }
    for (int c = 1; c < cols; ++c, ++id) {
        lines.push_back(Line::from_coefficients(id, 1.0, 0.0, c, activities[static_cast<std::size_t>(id)]));
    }
    return TessellationBuilder::build(std::move(lines), Domain::rectangle(0.0, 0.0, cols, rows),
                                      LatticeShape{rows, cols});
}

TessellationPtr build_lattice(int rows, int cols, double activity) {
    const std::vector<double> acts(static_cast<std::size_t>(std::max(0, rows + cols - 2)), activity);
    return build_lattice(rows, cols, acts);
}

std::vector<Event> chronological_events(const Tessellation& t) { return t.events(); }

} // namespace polyfield
