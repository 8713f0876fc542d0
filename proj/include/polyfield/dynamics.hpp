#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "polyfield/model.hpp"
#include "polyfield/random.hpp"

namespace polyfield {

enum class Move : std::uint8_t {
    Initial,      ///< colour of the initial cell
    NoBirth,      ///< vacant site stays empty
    Birth,        ///< vacant site emits trajectories
    Continue,     ///< single trajectory goes straight on
    Turn,         ///< single trajectory switches to the other line
    Split,        ///< single trajectory splits in two
    BothDie,      ///< equal colours on both sides of a collision
    Cross,        ///< both trajectories continue, equal outer colours
    SurviveI,     ///< only the trajectory on line_i continues
    SurviveJ,
    BothSurvive,  ///< both continue, outer colours differ
};

std::string_view to_string(Move m);

/// One branch of a local decision: the colour given to the cell born at the
/// event and its probability.
struct Outcome {
    Move move;
    Colour colour;
    double probability;
};

enum class Situation : std::uint8_t { Vacant, HitI, HitJ, Collision };

Situation node_situation(Colour left, Colour across_i, Colour across_j);

/// Conditional law of the colour of the cell born at an interior node, given
/// the three cells before it. Zero-probability branches are omitted.
void node_law(const ModelParams& p, double pi_i, double pi_j, Colour left, Colour across_i, Colour across_j,
              std::vector<Outcome>& out);
void entry_law(const ModelParams& p, double pi, Colour prior, std::vector<Outcome>& out);
void initial_law(const ModelParams& p, std::vector<Outcome>& out);
/// Uniform over the colours differing from `a` and `b` (pass b = a for one exclusion).
void fresh_colour_law(int k, Colour a, Colour b, Move move, std::vector<Outcome>& out);

/// Source of every random decision. `event` is a chronological event
/// position, or -1 for the initial colour.
class Chooser {
public:
    virtual ~Chooser() = default;
    virtual std::size_t choose(int event, std::span<const Outcome> law) = 0;
    /// Latent birth attempt at a node already reached by a trajectory.
    virtual bool latent_birth(int event, double q) = 0;
};

/// Inversion sampling with one keyed substream per event.
class KeyedChooser final : public Chooser {
public:
    explicit KeyedChooser(std::uint64_t seed) : seed_(seed) {}
    std::size_t choose(int event, std::span<const Outcome> law) override;
    bool latent_birth(int event, double q) override;

private:
    std::uint64_t seed_;
};

/// Inversion sampling from one sequential stream.
class StreamChooser final : public Chooser {
public:
    explicit StreamChooser(Stream& rng) : rng_(&rng) {}
    std::size_t choose(int event, std::span<const Outcome> law) override;
    bool latent_birth(int event, double q) override;

private:
    Stream* rng_;
};

std::size_t invert(std::span<const Outcome> law, double u);

enum class BirthStatus : std::uint8_t {
    Realized,   ///< birth happened
    Absent,     ///< no birth drawn at a vacant site
    Discarded,  ///< birth drawn but pre-empted by an arriving trajectory
    Preempted,  ///< site reached by a trajectory, no birth drawn
};

struct BirthRecord {
    int event;
    BirthStatus status;
    Move move;
};

/// State of the chronological sweep. Cells are coloured as they are born;
/// unborn cells hold colour 0.
class SweepState {
public:
    /// Draws the initial colour.
    SweepState(TessellationPtr t, ModelParams p, Chooser& chooser);

    const Tessellation& tessellation() const { return *t_; }
    const ModelParams& params() const { return p_; }
    int next_event() const { return next_; }
    bool finished() const { return static_cast<std::size_t>(next_) == t_->events().size(); }
    const std::vector<Colour>& colours() const { return colours_; }
    const std::vector<BirthRecord>& birth_log() const { return log_; }
    /// Latent birth bit per interior node (1 for realized or discarded births).
    const std::vector<std::uint8_t>& node_births() const { return node_births_; }

    /// Per line, the segment crossing the current time slice when it carries a
    /// live trajectory, else -1.
    std::vector<int> frontier() const;
    /// Colours of the cells met by the current time slice, bottom to top.
    std::vector<Colour> colour_profile() const;

    /// Throws InvalidArgument before the sweep has finished.
    Mosaic mosaic() const;

private:
    friend void node_update(SweepState& s, const Event& event, Chooser& chooser);
    double slice_time() const;

    TessellationPtr t_;
    ModelParams p_;
    int next_ = 0;
    std::vector<Colour> colours_;
    std::vector<BirthRecord> log_;
    std::vector<std::uint8_t> node_births_;
    std::vector<Outcome> scratch_;
};

/// Applies one birth / E4 / collision decision. Throws OutOfOrderEvent unless
/// `event` is the next chronological event.
void node_update(SweepState& s, const Event& event, Chooser& chooser);

/// Runs the full sweep.
SweepState sweep(TessellationPtr t, const ModelParams& p, Chooser& chooser);
Mosaic sample_exact(TessellationPtr t, const ModelParams& p, std::uint64_t seed);

} // namespace polyfield
