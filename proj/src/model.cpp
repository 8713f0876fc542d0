#include "polyfield/model.hpp"

#include <cmath>
#include <string>

#include "polyfield/error.hpp"

namespace polyfield {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

/// count * (-log arg) with 0 * inf = 0.
double count_cost(int count, double arg) {
    if (count == 0) return 0.0;
    if (!(arg > 0.0)) return kInfinity;
    return -static_cast<double>(count) * std::log(arg);
}

double neg_log_or_inf(double arg) { return arg > 0.0 ? -std::log(arg) : kInfinity; }

} // namespace

ModelParams derive_params(int k, double alpha_v) {
    if (k < 2) throw Error(ErrorCode::InvalidArgument, "k must be at least 2");
    if (!(alpha_v >= 0.0 && alpha_v <= 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha_v must lie in [0, 1]");
    ModelParams p;
    p.k = k;
    p.alpha_v = alpha_v;
    p.alpha_x = 1.0 - alpha_v;
    const double k1 = k - 1;
    p.alpha_t = (1.0 - p.alpha_x * (k - 2) / k1) / 2.0;
    p.epsilon = alpha_v / k1 + p.alpha_t * (k - 2) / k1;
    return p;
}

double interior_birth_probability(const ModelParams& p, double pi1, double pi2) {
    return p.alpha_v * pi1 * pi2 / (p.k - 1);
}

double interior_birth_probability(const Tessellation& t, const ModelParams& p, int node) {
    const auto& n = t.nodes()[idx(node)];
    return interior_birth_probability(p, t.lines()[idx(n.line_i)].activity, t.lines()[idx(n.line_j)].activity);
}

double hamiltonian_phi(const MosaicStats& st, const Tessellation& t, const ModelParams& p) {
    const double k1 = p.k - 1;
    double phi = count_cost(st.n_v, p.alpha_v) + count_cost(st.n_t, k1 * p.alpha_t) +
                 count_cost(st.n_x, k1 * p.alpha_x);
    if (!std::isfinite(phi)) return kInfinity;
    phi += static_cast<double>(st.edges.size()) * std::log(k1);
    for (const auto& e : st.edges) {
        for (int n : e.interior_nodes) {
            const auto& node = t.nodes()[idx(n)];
            const int other = node.line_i == e.line ? node.line_j : node.line_i;
            phi -= std::log(1.0 - p.epsilon * t.lines()[idx(other)].activity);
        }
    }
    for (int n : st.nodes_on_gamma) phi += std::log(1.0 - interior_birth_probability(t, p, n));
    return phi;
}

double hamiltonian_phi(const Mosaic& m, const ModelParams& p) {
    return hamiltonian_phi(analyze(m), m.tessellation(), p);
}

double primary_log_activity(const MosaicStats& st, const Tessellation& t) {
    double s = 0.0;
    for (const auto& e : st.primary_edges) s += std::log(t.lines()[idx(e.line)].activity);
    return s;
}

double log_weight(const Mosaic& m, const ModelParams& p) {
    return LocalWeights(m.tessellation(), p).log_weight(m);
}

double log_partition_function(const Tessellation& t, const ModelParams& p) {
    double z = std::log(static_cast<double>(p.k));
    for (const auto& l : t.lines()) z += std::log1p(l.activity);
    for (std::size_t n = 0; n < t.node_count(); ++n) {
        z -= std::log1p(-interior_birth_probability(t, p, static_cast<int>(n)));
    }
    return z;
}

double compensated_sum(std::span<const double> xs) {
    double sum = 0.0, carry = 0.0;
    for (double x : xs) {
        const double t = sum + x;
        carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    return sum + carry;
}

double partition_function(const Tessellation& t, const ModelParams& p) { return std::exp(log_partition_function(t, p)); }

// ---------------------------------------------------------------------------

LocalWeights::LocalWeights(const Tessellation& t, const ModelParams& p) : t_(&t), params_(p) {
    for (const auto& l : t.lines()) log_pi_.push_back(std::log(l.activity));
    for (const auto& n : t.nodes()) {
        const double pi = t.lines()[idx(n.line_i)].activity;
        const double pj = t.lines()[idx(n.line_j)].activity;
        node_log_vacant_.push_back(std::log1p(-interior_birth_probability(p, pi, pj)));
        through_i_.push_back(std::log1p(-p.epsilon * pj));
        through_j_.push_back(std::log1p(-p.epsilon * pi));
    }
    const double lk1 = std::log(static_cast<double>(p.k - 1));
    half_log_k1_ = 0.5 * lk1;
    v_cost_ = neg_log_or_inf(p.alpha_v) + lk1;
    t_cost_ = neg_log_or_inf((p.k - 1) * p.alpha_t) + 1.5 * lk1;
    x_cost_ = neg_log_or_inf((p.k - 1) * p.alpha_x) + 2.0 * lk1;
}

PointTerm LocalWeights::node_term(const Mosaic& m, int node) const {
    const auto& n = t_->nodes()[idx(node)];
    const bool ii = m.active(n.in_i), oi = m.active(n.out_i);
    const bool ij = m.active(n.in_j), oj = m.active(n.out_j);
    PointTerm term;
    if (oi && !ii) term.log_pi += log_pi_[idx(n.line_i)];
    if (oj && !ij) term.log_pi += log_pi_[idx(n.line_j)];
    const int degree = ii + oi + ij + oj;
    if (degree == 0) return term;
    const double vacant = node_log_vacant_[idx(node)];
    switch (degree) {
    case 1: term.phi = kInfinity; break;
    case 2:
        if (ii && oi) {
            term.phi = vacant - through_i_[idx(node)];
        } else if (ij && oj) {
            term.phi = vacant - through_j_[idx(node)];
        } else {
            term.phi = vacant + v_cost_;
        }
        break;
    case 3: term.phi = vacant + t_cost_; break;
    default: term.phi = vacant + x_cost_; break;
    }
    return term;
}

PointTerm LocalWeights::entry_term(const Mosaic& m, int line) const {
    if (!m.active(t_->entries()[idx(line)].segment)) return {};
    return {half_log_k1_, log_pi_[idx(line)]};
}

PointTerm LocalWeights::exit_term(const Mosaic& m, int line) const {
    if (!m.active(t_->exits()[idx(line)].segment)) return {};
    return {half_log_k1_, 0.0};
}

double LocalWeights::phi(const Mosaic& m) const {
    double phi = 0.0;
    for (std::size_t n = 0; n < t_->node_count(); ++n) phi += node_term(m, static_cast<int>(n)).phi;
    for (std::size_t l = 0; l < t_->line_count(); ++l) {
        phi += entry_term(m, static_cast<int>(l)).phi + exit_term(m, static_cast<int>(l)).phi;
    }
    return phi;
}

double LocalWeights::log_weight(const Mosaic& m) const {
    double phi = 0.0;
    double lp = 0.0;
    for (std::size_t n = 0; n < t_->node_count(); ++n) {
        const auto term = node_term(m, static_cast<int>(n));
        phi += term.phi;
        lp += term.log_pi;
    }
    for (std::size_t l = 0; l < t_->line_count(); ++l) {
        const auto a = entry_term(m, static_cast<int>(l));
        phi += a.phi + exit_term(m, static_cast<int>(l)).phi;
        lp += a.log_pi;
    }
    if (!std::isfinite(phi)) return -kInfinity;
    return lp - phi;
}

// ---------------------------------------------------------------------------

void enumerate_log_weights(const TessellationPtr& t, const ModelParams& p, const GibbsModifier* modifier,
                           std::uint64_t cap, const std::function<void(const Mosaic&, double)>& visit) {
    const std::size_t cells = t->cell_count();
    double states = 1.0;
    for (std::size_t c = 0; c < cells; ++c) {
        states *= p.k;
        if (states > static_cast<double>(cap)) {
            throw Error(ErrorCode::EnumerationTooLarge,
                        std::to_string(p.k) + "^" + std::to_string(cells) + " states exceed the cap of " + std::to_string(cap));
        }
    }
    const LocalWeights lw(*t, p);
    Mosaic m(t, p.k, 1);
    while (true) {
        double w = lw.log_weight(m);
        if (modifier && std::isfinite(w)) w -= modifier->evaluate(m);
        visit(m, w);
        std::size_t c = 0;
        while (c < cells && m.colour(static_cast<int>(c)) == p.k) {
            m.set_colour(static_cast<int>(c), 1);
            ++c;
        }
        if (c == cells) break;
        m.set_colour(static_cast<int>(c), m.colour(static_cast<int>(c)) + 1);
    }
}

double log_unnormalized(const Mosaic& m, const ModelParams& p, const GibbsModifier* modifier) {
    double w = log_weight(m, p);
    if (modifier && std::isfinite(w)) w -= modifier->evaluate(m);
    return w;
}

double probability(const Mosaic& m, const ModelParams& p, const GibbsModifier* modifier, std::uint64_t cap) {
    const double w = log_unnormalized(m, p, modifier);
    if (!std::isfinite(w)) return 0.0;
    if (!modifier) return std::exp(w - log_partition_function(m.tessellation(), p));
    double max_w = -kInfinity;
    std::vector<double> all;
    enumerate_log_weights(m.tessellation_ptr(), p, modifier, cap, [&](const Mosaic&, double lw) {
        all.push_back(lw);
        if (lw > max_w) max_w = lw;
    });
    for (double& lw : all) lw = std::exp(lw - max_w);
    return std::exp(w - max_w) / compensated_sum(all);
}

} // namespace polyfield
