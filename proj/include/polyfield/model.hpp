#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "polyfield/mosaic.hpp"

namespace polyfield {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
/// Default cap on the number of states visited by exhaustive enumeration.
inline constexpr std::uint64_t kEnumerationCap = 1'000'000;

struct ModelParams {
    int k = 2;
    double alpha_v = 1.0;
    double alpha_x = 0.0;
    double alpha_t = 0.5;
    double epsilon = 1.0;
};

/// Neumaier-compensated sum; enumeration tables reach 4^9 terms, where plain
/// accumulation drifts past 1e-12 relative.
double compensated_sum(std::span<const double> xs);

/// Throws InvalidArgument unless k >= 2 and alpha_v in [0, 1].
ModelParams derive_params(int k, double alpha_v);

/// Probability of a birth at a vacant interior node.
double interior_birth_probability(const ModelParams& p, double pi1, double pi2);
double interior_birth_probability(const Tessellation& t, const ModelParams& p, int node);

/// Hamiltonian from the global vertex/edge statistics.
double hamiltonian_phi(const MosaicStats& st, const Tessellation& t, const ModelParams& p);
double hamiltonian_phi(const Mosaic& m, const ModelParams& p);

/// Sum of log(pi) over primary edges.
double primary_log_activity(const MosaicStats& st, const Tessellation& t);

/// log( exp(-phi) * prod pi ); -inf for forbidden configurations.
double log_weight(const Mosaic& m, const ModelParams& p);

double log_partition_function(const Tessellation& t, const ModelParams& p);
double partition_function(const Tessellation& t, const ModelParams& p);

/// Extra Hamiltonian term H(γ̂). Implementations must be finite on every
/// admissible mosaic.
class GibbsModifier {
public:
    virtual ~GibbsModifier() = default;
    virtual double evaluate(const Mosaic& m) const = 0;
    /// When true, evaluate(m) == sum of segment_term over active segments.
    virtual bool segment_local() const { return false; }
    virtual double segment_term(const Tessellation& /*t*/, int /*segment*/) const { return 0.0; }
};

/// H = weight * (number of active segments).
class SegmentCountModifier final : public GibbsModifier {
public:
    explicit SegmentCountModifier(double weight = 1.0) : weight_(weight) {}
    double evaluate(const Mosaic& m) const override { return weight_ * static_cast<double>(m.active_count()); }
    bool segment_local() const override { return true; }
    double segment_term(const Tessellation&, int) const override { return weight_; }

private:
    double weight_;
};

/// Per-point decomposition of the log-weight. Every term depends only on the
/// segment activity around one node, entry or exit, which makes local deltas
/// cheap. phi is the Hamiltonian share, log_pi the primary-edge share.
struct PointTerm {
    double phi = 0.0;
    double log_pi = 0.0;
};

class LocalWeights {
public:
    LocalWeights(const Tessellation& t, const ModelParams& p);

    PointTerm node_term(const Mosaic& m, int node) const;
    PointTerm entry_term(const Mosaic& m, int line) const;
    PointTerm exit_term(const Mosaic& m, int line) const;

    double phi(const Mosaic& m) const;
    double log_weight(const Mosaic& m) const;

    const ModelParams& params() const { return params_; }

private:
    const Tessellation* t_;
    ModelParams params_;
    std::vector<double> log_pi_;
    std::vector<double> node_log_vacant_;   ///< log(1 - q)
    std::vector<double> through_i_;         ///< log(1 - eps * pi_j) for a run along line_i
    std::vector<double> through_j_;
    double half_log_k1_ = 0.0;
    double v_cost_ = 0.0;
    double t_cost_ = 0.0;
    double x_cost_ = 0.0;
};

/// Visits every cell colouring of t once (mixed radix, cell 0 fastest) with its
/// log-weight, -inf when forbidden. Throws EnumerationTooLarge above `cap`.
void enumerate_log_weights(const TessellationPtr& t, const ModelParams& p, const GibbsModifier* modifier,
                           std::uint64_t cap, const std::function<void(const Mosaic&, double)>& visit);

/// Normalized probability. Without a modifier Z is the closed form; with one
/// it is summed by enumeration (EnumerationTooLarge beyond `cap`).
double probability(const Mosaic& m, const ModelParams& p, const GibbsModifier* modifier = nullptr,
                   std::uint64_t cap = kEnumerationCap);

/// log weight minus the modifier; usable when enumeration is infeasible.
double log_unnormalized(const Mosaic& m, const ModelParams& p, const GibbsModifier* modifier = nullptr);

} // namespace polyfield
