#include "polyfield/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "polyfield/error.hpp"

namespace polyfield {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

void push(std::vector<Outcome>& out, Move m, Colour c, double prob) {
    if (prob > 0.0) out.push_back({m, c, prob});
}

} // namespace

std::string_view to_string(Move m) {
    switch (m) {
    case Move::Initial: return "initial";
    case Move::NoBirth: return "no-birth";
    case Move::Birth: return "birth";
    case Move::Continue: return "continue";
    case Move::Turn: return "turn";
    case Move::Split: return "split";
    case Move::BothDie: return "both-die";
    case Move::Cross: return "cross";
    case Move::SurviveI: return "survive-i";
    case Move::SurviveJ: return "survive-j";
    case Move::BothSurvive: return "both-survive";
    }
    return "unknown";
}

Situation node_situation(Colour left, Colour across_i, Colour across_j) {
    const bool hit_i = left != across_i;
    const bool hit_j = left != across_j;
    if (hit_i && hit_j) return Situation::Collision;
    if (hit_i) return Situation::HitI;
    if (hit_j) return Situation::HitJ;
    return Situation::Vacant;
}

void fresh_colour_law(int k, Colour a, Colour b, Move move, std::vector<Outcome>& out) {
    const int n = k - 1 - (a != b ? 1 : 0);
    out.clear();
    for (Colour c = 1; c <= k; ++c) {
        if (c != a && c != b) out.push_back({move, c, 1.0 / n});
    }
}

void node_law(const ModelParams& p, double pi_i, double pi_j, Colour left, Colour across_i, Colour across_j,
              std::vector<Outcome>& out) {
    out.clear();
    const int k = p.k;
    const double k1 = k - 1;
    switch (node_situation(left, across_i, across_j)) {
    case Situation::Vacant: {
        const double q = interior_birth_probability(p, pi_i, pi_j);
        push(out, Move::NoBirth, left, 1.0 - q);
        for (Colour c = 1; c <= k; ++c) {
            if (c != left) push(out, Move::Birth, c, q / k1);
        }
        break;
    }
    case Situation::HitI:
    case Situation::HitJ: {
        const bool on_i = left != across_i;
        const Colour through = on_i ? across_i : across_j;
        const double pi_other = on_i ? pi_j : pi_i;
        push(out, Move::Continue, through, 1.0 - p.epsilon * pi_other);
        push(out, Move::Turn, left, p.alpha_v * pi_other / k1);
        for (Colour c = 1; c <= k; ++c) {
            if (c != left && c != through) push(out, Move::Split, c, p.alpha_t * pi_other / k1);
        }
        break;
    }
    case Situation::Collision:
        if (across_i == across_j) {
            push(out, Move::BothDie, across_i, p.alpha_v);
            for (Colour c = 1; c <= k; ++c) {
                if (c != across_i) push(out, Move::Cross, c, p.alpha_x / k1);
            }
        } else {
            push(out, Move::SurviveI, across_i, p.alpha_t);
            push(out, Move::SurviveJ, across_j, p.alpha_t);
            for (Colour c = 1; c <= k; ++c) {
                if (c != across_i && c != across_j) push(out, Move::BothSurvive, c, p.alpha_x / k1);
            }
        }
        break;
    }
}

void entry_law(const ModelParams& p, double pi, Colour prior, std::vector<Outcome>& out) {
    out.clear();
    push(out, Move::NoBirth, prior, 1.0 / (1.0 + pi));
    for (Colour c = 1; c <= p.k; ++c) {
        if (c != prior) push(out, Move::Birth, c, pi / ((1.0 + pi) * (p.k - 1)));
    }
}

void initial_law(const ModelParams& p, std::vector<Outcome>& out) {
    out.clear();
    for (Colour c = 1; c <= p.k; ++c) out.push_back({Move::Initial, c, 1.0 / p.k});
}

std::size_t invert(std::span<const Outcome> law, double u) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < law.size(); ++i) {
        acc += law[i].probability;
        if (u < acc) return i;
    }
    return law.size() - 1;
}

std::size_t KeyedChooser::choose(int event, std::span<const Outcome> law) {
    Stream s(derive_key(seed_, static_cast<std::uint64_t>(event + 1), 0));
    return invert(law, s.uniform());
}

bool KeyedChooser::latent_birth(int event, double q) {
    Stream s(derive_key(seed_, static_cast<std::uint64_t>(event + 1), 1));
    return s.uniform() < q;
}

std::size_t StreamChooser::choose(int, std::span<const Outcome> law) { return invert(law, rng_->uniform()); }

bool StreamChooser::latent_birth(int, double q) { return rng_->uniform() < q; }

// ---------------------------------------------------------------------------

SweepState::SweepState(TessellationPtr t, ModelParams p, Chooser& chooser)
    : t_(std::move(t)), p_(p), colours_(t_->cell_count(), 0), node_births_(t_->node_count(), 0) {
    initial_law(p_, scratch_);
    const auto& o = scratch_[chooser.choose(-1, scratch_)];
    colours_[idx(t_->initial_cell())] = o.colour;
}

double SweepState::slice_time() const {
    const auto& ev = t_->events();
    if (next_ == 0) return -kInfinity;
    return ev[idx(next_ - 1)].time;
}

std::vector<int> SweepState::frontier() const {
    const auto& t = *t_;
    const double now = slice_time();
    std::vector<int> out(t.line_count(), -1);
    auto processed = [&](int node) { return node < 0 || t.event_position(EventKind::Node, node) < next_; };
    for (std::size_t l = 0; l < t.line_count(); ++l) {
        if (t.event_position(EventKind::Entry, static_cast<int>(l)) >= next_) continue;
        if (!(t.exits()[l].time > now)) continue;
        for (int s : t.line_segments(static_cast<int>(l))) {
            const auto& seg = t.segments()[idx(s)];
            const bool head_done = seg.head_node >= 0 && processed(seg.head_node);
            if (processed(seg.tail_node) && !head_done) {
                if (colours_[idx(seg.cell_pos)] != colours_[idx(seg.cell_neg)]) out[l] = s;
                break;
            }
        }
    }
    return out;
}

std::vector<Colour> SweepState::colour_profile() const {
    const auto& t = *t_;
    const auto& ev = t.events();
    if (next_ == 0) return {colours_[idx(t.initial_cell())]};
    const double now = slice_time();
    const double gap = finished() ? 1e-6 : std::min(1e-6, ev[idx(next_)].time - now);
    const double ts = now + 0.5 * gap;
    const double cs = std::cos(t.rotation()), sn = std::sin(t.rotation());

    // chord of the slice through the domain
    std::vector<Point> chord;
    const auto& v = t.domain().vertices();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point a = v[i], b = v[(i + 1) % v.size()];
        const double ta = t.time_of(a) - ts, tb = t.time_of(b) - ts;
        if ((ta < 0.0) != (tb < 0.0)) chord.push_back(a + (ta / (ta - tb)) * (b - a));
    }
    if (chord.size() < 2) return {};
    const Point dir{-sn, cs};
    std::vector<double> cuts{t.space_of(chord[0]), t.space_of(chord[1])};
    std::sort(cuts.begin(), cuts.end());
    const double lo = cuts[0], hi = cuts[1];
    const Point origin = ts * Point{cs, sn};
    for (const auto& line : t.lines()) {
        const double den = line.a * dir.x + line.b * dir.y;
        if (std::abs(den) < 1e-15) continue;
        const double s = (line.c - line.a * origin.x - line.b * origin.y) / den;
        if (s > lo && s < hi) cuts.push_back(s);
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<Colour> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double s = 0.5 * (cuts[i] + cuts[i + 1]);
        const int cell = t.locate(origin + s * dir);
        if (cell >= 0) out.push_back(colours_[idx(cell)]);
    }
    return out;
}

Mosaic SweepState::mosaic() const {
    if (!finished()) throw Error(ErrorCode::InvalidArgument, "sweep has not finished");
    return Mosaic(t_, p_.k, colours_);
}

void node_update(SweepState& s, const Event& event, Chooser& chooser) {
    const auto& t = *s.t_;
    const auto& events = t.events();
    if (s.finished() || events[idx(s.next_)].kind != event.kind || events[idx(s.next_)].index != event.index) {
        throw Error(ErrorCode::OutOfOrderEvent, "event is not the next chronological event");
    }
    const int pos = s.next_;
    auto& law = s.scratch_;
    if (event.kind == EventKind::Entry) {
        const auto& entry = t.entries()[idx(event.index)];
        const Colour prior = s.colours_[idx(entry.prior)];
        entry_law(s.p_, t.lines()[idx(event.index)].activity, prior, law);
        const auto o = law[chooser.choose(pos, law)];
        s.colours_[idx(entry.fresh)] = o.colour;
        s.log_.push_back({pos, o.move == Move::Birth ? BirthStatus::Realized : BirthStatus::Absent, o.move});
    } else {
        const auto& node = t.nodes()[idx(event.index)];
        const Colour left = s.colours_[idx(node.left)];
        const Colour ai = s.colours_[idx(node.across_i)];
        const Colour aj = s.colours_[idx(node.across_j)];
        const double pi = t.lines()[idx(node.line_i)].activity;
        const double pj = t.lines()[idx(node.line_j)].activity;
        node_law(s.p_, pi, pj, left, ai, aj, law);
        const auto o = law[chooser.choose(pos, law)];
        s.colours_[idx(node.right)] = o.colour;
        BirthStatus status;
        if (node_situation(left, ai, aj) == Situation::Vacant) {
            status = o.move == Move::Birth ? BirthStatus::Realized : BirthStatus::Absent;
        } else {
            // the collision / E4 decision comes first; the birth attempt is then moot
            const bool attempt = chooser.latent_birth(pos, interior_birth_probability(s.p_, pi, pj));
            status = attempt ? BirthStatus::Discarded : BirthStatus::Preempted;
        }
        s.node_births_[idx(event.index)] = status == BirthStatus::Realized || status == BirthStatus::Discarded;
        s.log_.push_back({pos, status, o.move});
    }
    ++s.next_;
}

SweepState sweep(TessellationPtr t, const ModelParams& p, Chooser& chooser) {
    SweepState s(t, p, chooser);
    for (const auto& e : t->events()) node_update(s, e, chooser);
    return s;
}

Mosaic sample_exact(TessellationPtr t, const ModelParams& p, std::uint64_t seed) {
    KeyedChooser chooser(seed);
    return sweep(std::move(t), p, chooser).mosaic();
}

} // namespace polyfield
