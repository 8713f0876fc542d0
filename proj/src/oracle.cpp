#include "polyfield/oracle.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "polyfield/error.hpp"

namespace polyfield {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }


std::vector<int> digits_of(std::size_t index, int k, std::size_t cells) {
    std::vector<int> d(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        d[c] = static_cast<int>(index % static_cast<std::size_t>(k));
        index /= static_cast<std::size_t>(k);
    }
    return d;
}

} // namespace

PixelArray ExactTable::state(std::size_t index) const {
    const auto d = digits_of(index, k, static_cast<std::size_t>(rows * cols));
    PixelArray p{rows, cols, std::vector<Colour>(d.size())};
    for (int c = 0; c < cols; ++c) {
        for (int r = 0; r < rows; ++r) p.at(r, c) = 1 + d[idx(c * rows + r)];
    }
    return p;
}

std::size_t ExactTable::index_of(const PixelArray& p) const {
    std::size_t index = 0;
    for (int c = cols - 1; c >= 0; --c) {
        for (int r = rows - 1; r >= 0; --r) index = index * static_cast<std::size_t>(k) + static_cast<std::size_t>(p.at(r, c) - 1);
    }
    return index;
}

std::size_t state_index(const Mosaic& m) {
    std::size_t index = 0;
    const auto& c = m.colours();
    for (std::size_t i = c.size(); i-- > 0;) index = index * static_cast<std::size_t>(m.k()) + static_cast<std::size_t>(c[i] - 1);
    return index;
}

ExactTable enumerate_exact(int rows, int cols, const ModelParams& p, std::span<const double> activities,
                           const GibbsModifier* modifier, std::uint64_t cap) {
    auto t = build_lattice(rows, cols, activities);
    ExactTable table;
    table.rows = rows;
    table.cols = cols;
    table.k = p.k;
    double max_w = -kInfinity;
    enumerate_log_weights(t, p, modifier, cap, [&](const Mosaic&, double w) {
        table.log_weights.push_back(w);
        if (w > max_w) max_w = w;
    });
    table.probabilities.resize(table.log_weights.size());
    for (std::size_t i = 0; i < table.log_weights.size(); ++i) table.probabilities[i] = std::exp(table.log_weights[i] - max_w);
    const double s = compensated_sum(table.probabilities);
    table.z = std::exp(max_w) * s;
    for (auto& q : table.probabilities) q /= s;
    table.z_closed_form = modifier ? std::nan("") : partition_function(*t, p);
    return table;
}

std::vector<double> sub_activities(int rows, int cols, std::span<const double> activities, int row0, int col0,
                                   int sub_rows, int sub_cols) {
    if (row0 < 0 || col0 < 0 || sub_rows < 1 || sub_cols < 1 || row0 + sub_rows > rows || col0 + sub_cols > cols) {
        throw Error(ErrorCode::InvalidArgument, "sub-rectangle outside the lattice");
    }
    std::vector<double> out;
    for (int r = row0 + 1; r < row0 + sub_rows; ++r) out.push_back(activities[idx(r - 1)]);
    for (int c = col0 + 1; c < col0 + sub_cols; ++c) out.push_back(activities[idx(rows - 1 + c - 1)]);
    return out;
}

ExactTable marginal(const ExactTable& table, int row0, int col0, int sub_rows, int sub_cols) {
    if (row0 < 0 || col0 < 0 || sub_rows < 1 || sub_cols < 1 || row0 + sub_rows > table.rows ||
        col0 + sub_cols > table.cols) {
        throw Error(ErrorCode::InvalidArgument, "sub-rectangle outside the lattice");
    }
    const std::size_t cells = static_cast<std::size_t>(table.rows * table.cols);
    std::vector<std::size_t> mult(cells, 0);
    std::size_t sub_states = 1;
    for (int i = 0; i < sub_rows * sub_cols; ++i) sub_states *= static_cast<std::size_t>(table.k);
    for (int c = 0; c < sub_cols; ++c) {
        for (int r = 0; r < sub_rows; ++r) {
            std::size_t m = 1;
            for (int e = 0; e < c * sub_rows + r; ++e) m *= static_cast<std::size_t>(table.k);
            mult[idx((col0 + c) * table.rows + row0 + r)] = m;
        }
    }
    ExactTable out;
    out.rows = sub_rows;
    out.cols = sub_cols;
    out.k = table.k;
    out.probabilities.assign(sub_states, 0.0);
    std::vector<int> d(cells, 0);
    std::size_t sub = 0;
    for (std::size_t i = 0; i < table.size(); ++i) {
        out.probabilities[sub] += table.probabilities[i];
        for (std::size_t c = 0; c < cells; ++c) {
            if (d[c] + 1 < table.k) {
                ++d[c];
                sub += mult[c];
                break;
            }
            sub -= mult[c] * static_cast<std::size_t>(d[c]);
            d[c] = 0;
        }
    }
    out.log_weights.resize(sub_states);
    for (std::size_t i = 0; i < sub_states; ++i) out.log_weights[i] = std::log(out.probabilities[i]);
    out.z = 1.0;
    out.z_closed_form = std::nan("");
    return out;
}

double tv_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "distributions have different supports");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return 0.5 * s;
}

double factorised_probability(const PixelArray& x, const ModelParams& p, std::span<const double> activities) {
    const int rows = x.rows;
    const int k = p.k;
    const double k1 = k - 1;
    auto pi_h = [&](int r) { return activities[idx(r - 1)]; };             // line between rows r-1 and r
    auto pi_v = [&](int c) { return activities[idx(rows - 1 + c - 1)]; };  // line between cols c-1 and c
    auto boundary = [&](Colour prev, Colour cur, double pi) {
        return cur == prev ? 1.0 / (1.0 + pi) : pi / ((1.0 + pi) * k1);
    };
    double prob = 1.0 / k;
    for (int c = 0; c < x.cols; ++c) {
        for (int r = 0; r < rows; ++r) {
            if (r == 0 && c == 0) continue;
            const Colour xx = x.at(r, c);
            if (c == 0) {
                prob *= boundary(x.at(r - 1, 0), xx, pi_h(r));
                continue;
            }
            if (r == 0) {
                prob *= boundary(x.at(0, c - 1), xx, pi_v(c));
                continue;
            }
            const Colour u = x.at(r - 1, c - 1);  // diagonal predecessor
            const Colour v = x.at(r, c - 1);      // left neighbour
            const Colour w = x.at(r - 1, c);      // lower neighbour
            const double ph = pi_h(r), pv = pi_v(c);
            double f;
            if (u == v && u == w) {
                const double b = p.alpha_v * ph * pv / k1;
                f = xx == u ? 1.0 - b : b / k1;
            } else if (u == v) {
                // only the edge between u and w arrives, running along the vertical line
                f = xx == w ? 1.0 - p.epsilon * ph : xx == u ? p.alpha_v * ph / k1 : p.alpha_t * ph / k1;
            } else if (u == w) {
                f = xx == v ? 1.0 - p.epsilon * pv : xx == u ? p.alpha_v * pv / k1 : p.alpha_t * pv / k1;
            } else if (v == w) {
                f = xx == v ? p.alpha_v : p.alpha_x / k1;
            } else {
                f = (xx == v || xx == w) ? p.alpha_t : p.alpha_x / k1;
            }
            prob *= f;
        }
    }
    return prob;
}

double factorisation_check(int rows, int cols, const ModelParams& p, std::span<const double> activities,
                           std::uint64_t cap) {
    const auto table = enumerate_exact(rows, cols, p, activities, nullptr, cap);
    double worst = 0.0;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const double f = factorised_probability(table.state(i), p, activities);
        worst = std::max(worst, std::abs(f - table.probabilities[i]));
    }
    return worst;
}

std::vector<double> segment_activity_probabilities(const ExactTable& table, const Tessellation& t) {
    std::vector<double> out(t.segment_count(), 0.0);
    const std::size_t cells = t.cell_count();
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto d = digits_of(i, table.k, cells);
        for (std::size_t s = 0; s < out.size(); ++s) {
            const auto& seg = t.segments()[s];
            if (d[idx(seg.cell_pos)] != d[idx(seg.cell_neg)]) out[s] += table.probabilities[i];
        }
    }
    return out;
}

void write_csv(const ExactTable& table, std::ostream& out) {
    // Shortest round-trip text; the closed-form normalizer when there is one.
    const auto num = [](double v) {
        char buf[32];
        const auto r = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, r.ptr);
    };
    const std::string z = num(std::isnan(table.z_closed_form) ? table.z : table.z_closed_form);
    out << "state,pixels,log_weight,probability,z\n";
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto p = table.state(i);
        std::string px;
        for (int r = 0; r < p.rows; ++r) {
            if (r) px += '/';
            for (int c = 0; c < p.cols; ++c) px += std::to_string(p.at(r, c));
        }
        out << i << ',' << px << ',' << num(table.log_weights[i]) << ',' << num(table.probabilities[i]) << ',' << z << '\n';
    }
}

} // namespace polyfield
