#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "polyfield/dynamics.hpp"

namespace polyfield {

/// Mosaic plus one latent birth bit per interior node. At a node not reached
/// by any trajectory the bit says whether a birth happened there; at a node
/// reached by a trajectory a set bit is a discarded birth.
struct ChainState {
    Mosaic mosaic;
    std::vector<std::uint8_t> births;
    double clock = 0.0;

    /// Start state with no discarded births.
    static ChainState from_mosaic(Mosaic m);
    static ChainState from_sweep(const SweepState& s);

    std::vector<int> discarded_births() const;
    std::vector<int> realized_births() const;
    /// Lines whose entry point carries a realized boundary birth.
    std::vector<int> boundary_births() const;

    /// Bits agree with the colouring at every node not reached by a trajectory.
    bool consistent() const;
};

/// Node reached by at least one arriving trajectory.
bool node_hit(const Mosaic& m, int node);

enum class SegmentLabel : std::uint8_t { Plus, Minus, Changed, Old };

/// Plus: switched on. Minus: switched off. Changed: active before and after
/// with a recoloured side. Old: otherwise.
std::vector<SegmentLabel> classify_segments(const Mosaic& before, const Mosaic& after);

struct SiteRates {
    double birth = 0.0;
    double death = 1.0;
};

/// Sites are the chronological events: entries and interior nodes.
SiteRates site_rates(const Tessellation& t, const ModelParams& p, const Event& site);
bool site_occupied(const ChainState& s, const Event& site);

enum class FlipKind : std::uint8_t { Birth, Death };

/// Undo record of one edit.
struct Change {
    std::vector<std::pair<int, Colour>> cells;         ///< (cell, previous colour)
    std::vector<std::pair<int, std::uint8_t>> bits;    ///< (node, previous bit)
    bool empty() const { return cells.empty() && bits.empty(); }
};

void revert(ChainState& s, const Change& c);

/// Toggles the birth at `site` and propagates the consequences forward in
/// time. Decisions whose local inputs are unchanged are kept; the others are
/// redrawn from the local law. Throws IllegalFlip when `kind` does not match
/// the occupancy of the site.
Change apply_flip(ChainState& s, const ModelParams& p, const Event& site, FlipKind kind, Chooser& chooser);

/// Recolours the face containing `cell` when no neighbouring face has colour
/// `c`; the graph is unchanged. Returns an empty change otherwise.
Change recolour_face(ChainState& s, int cell, Colour c);

/// Recolours one cell; latent bits at nodes newly reached by a trajectory are
/// drawn afresh, bits at nodes left vacant follow the colouring.
Change recolour_cell(ChainState& s, const ModelParams& p, int cell, Colour c, Stream& rng);

struct Target {
    ModelParams params;
    const GibbsModifier* modifier = nullptr;
    double scale = 1.0;  ///< inverse temperature applied to the modifier
};

enum class StepKind : std::uint8_t { Birth, Death, FaceRecolour, CellRecolour, Null };

std::string_view to_string(StepKind k);

struct StepRecord {
    double clock = 0.0;
    StepKind kind = StepKind::Null;
    int site = -1;
    double delta_phi = 0.0;
    double delta_h = 0.0;
    bool accepted = false;
};

/// Continuous-time birth-death-recolour chain. One Poisson clock runs at the
/// constant bound tau + sum_s max(1, birth_rate_s); each tick picks a site or
/// a recolour and thins to the actual rate.
class Chain {
public:
    Chain(ChainState initial, Target target, double tau, std::uint64_t seed);

    StepRecord step();

    const ChainState& state() const { return state_; }
    const Target& target() const { return target_; }
    void set_scale(double scale);

    double log_weight() const { return log_weight_; }
    double phi() const { return phi_; }
    /// Unscaled modifier value.
    double modifier_value() const { return h_; }
    double rate_bound() const { return lambda_; }
    std::uint64_t steps() const { return steps_; }

    /// Full recomputation of the cached weight terms, for cross-checks.
    void recompute();

private:
    struct Delta {
        double log_weight = 0.0;
        double phi = 0.0;
        double h = 0.0;
    };
    Delta measure(const Change& c);
    bool accept_modifier(double delta_h);
    StepRecord flip_step(int site);
    StepRecord recolour_step(bool face);

    ChainState state_;
    Target target_;
    double tau_;
    Stream rng_;
    LocalWeights weights_;
    std::vector<double> site_bound_;   ///< max(1, birth rate)
    std::vector<double> site_prefix_;
    std::vector<double> site_birth_;
    bool uniform_sites_ = true;
    double lambda_ = 0.0;
    double log_weight_ = 0.0;
    double phi_ = 0.0;
    double h_ = 0.0;
    std::uint64_t steps_ = 0;
    std::vector<std::uint8_t> mark_;
};

/// Exact stationary law of the augmented state, as a log weight.
double augmented_log_weight(const ChainState& s, const ModelParams& p);

struct AnnealSchedule {
    double beta_start = 0.1;
    double beta_end = 100.0;
    double multiplier = 0.0;  ///< 0 selects (beta_end / beta_start)^(1 / sweeps)
    int sweeps = 500;

    double resolved_multiplier() const;
    /// Throws InvalidArgument on an inconsistent schedule.
    void validate() const;
};

struct TracePoint {
    int sweep;
    double beta;
    double score;
    double best;
};

struct AnnealResult {
    Mosaic best;
    double best_score;
    std::vector<TracePoint> trace;
};

/// Simulated annealing of exp(-phi) * prod(pi) * exp(-beta * H). Returns the
/// visited state minimizing -log w + beta_end * H.
AnnealResult anneal(const ChainState& initial, const ModelParams& p, const GibbsModifier& modifier,
                    const AnnealSchedule& schedule, double tau, std::uint64_t seed);

} // namespace polyfield
