#include "polyfield/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <string>

#include "polyfield/error.hpp"

namespace polyfield {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

struct NodeInputs {
    Colour left, across_i, across_j;
};

bool same_key(const NodeInputs& a, bool bit_a, const NodeInputs& b, bool bit_b) {
    const Situation sa = node_situation(a.left, a.across_i, a.across_j);
    if (sa != node_situation(b.left, b.across_i, b.across_j)) return false;
    switch (sa) {
    case Situation::Vacant: return a.left == b.left && bit_a == bit_b;
    case Situation::HitI: return a.left == b.left && a.across_i == b.across_i;
    case Situation::HitJ: return a.left == b.left && a.across_j == b.across_j;
    case Situation::Collision: return a.across_i == b.across_i && a.across_j == b.across_j;
    }
    return false;
}

/// Per-thread scratch for the forward propagation.
struct Scratch {
    std::vector<Colour> saved;
    std::vector<std::uint8_t> queued;
    std::vector<int> touched;

    void fit(std::size_t cells, std::size_t events) {
        if (saved.size() < cells) saved.resize(cells, 0);
        if (queued.size() < events) queued.resize(events, 0);
    }
};

thread_local Scratch scratch;

} // namespace

// ---------------------------------------------------------------------------
// ChainState

ChainState ChainState::from_mosaic(Mosaic m) {
    ChainState s{std::move(m), {}, 0.0};
    const auto& t = s.mosaic.tessellation();
    s.births.assign(t.node_count(), 0);
    for (std::size_t n = 0; n < t.node_count(); ++n) {
        const auto& node = t.nodes()[n];
        if (!node_hit(s.mosaic, static_cast<int>(n))) s.births[n] = s.mosaic.colour(node.right) != s.mosaic.colour(node.left);
    }
    return s;
}

ChainState ChainState::from_sweep(const SweepState& sw) {
    ChainState s{sw.mosaic(), sw.node_births(), 0.0};
    return s;
}

std::vector<int> ChainState::discarded_births() const {
    std::vector<int> out;
    for (std::size_t n = 0; n < births.size(); ++n) {
        if (births[n] && node_hit(mosaic, static_cast<int>(n))) out.push_back(static_cast<int>(n));
    }
    return out;
}

std::vector<int> ChainState::realized_births() const {
    std::vector<int> out;
    for (std::size_t n = 0; n < births.size(); ++n) {
        if (births[n] && !node_hit(mosaic, static_cast<int>(n))) out.push_back(static_cast<int>(n));
    }
    return out;
}

std::vector<int> ChainState::boundary_births() const {
    std::vector<int> out;
    const auto& t = mosaic.tessellation();
    for (std::size_t l = 0; l < t.line_count(); ++l) {
        if (mosaic.active(t.entries()[l].segment)) out.push_back(static_cast<int>(l));
    }
    return out;
}

bool ChainState::consistent() const {
    const auto& t = mosaic.tessellation();
    if (births.size() != t.node_count()) return false;
    for (std::size_t n = 0; n < t.node_count(); ++n) {
        if (node_hit(mosaic, static_cast<int>(n))) continue;
        const auto& node = t.nodes()[n];
        if ((births[n] != 0) != (mosaic.colour(node.right) != mosaic.colour(node.left))) return false;
    }
    return true;
}

bool node_hit(const Mosaic& m, int node) {
    const auto& n = m.tessellation().nodes()[idx(node)];
    return m.active(n.in_i) || m.active(n.in_j);
}

std::vector<SegmentLabel> classify_segments(const Mosaic& before, const Mosaic& after) {
    const auto& t = before.tessellation();
    std::vector<SegmentLabel> out(t.segment_count(), SegmentLabel::Old);
    for (std::size_t s = 0; s < out.size(); ++s) {
        const int id = static_cast<int>(s);
        const bool a = before.active(id), b = after.active(id);
        const auto& seg = t.segments()[s];
        if (!a && b) {
            out[s] = SegmentLabel::Plus;
        } else if (a && !b) {
            out[s] = SegmentLabel::Minus;
        } else if (a && b && (before.colour(seg.cell_pos) != after.colour(seg.cell_pos) ||
                              before.colour(seg.cell_neg) != after.colour(seg.cell_neg))) {
            out[s] = SegmentLabel::Changed;
        }
    }
    return out;
}

SiteRates site_rates(const Tessellation& t, const ModelParams& p, const Event& site) {
    if (site.kind == EventKind::Entry) return {t.lines()[idx(site.index)].activity, 1.0};
    const double q = interior_birth_probability(t, p, site.index);
    return {q / (1.0 - q), 1.0};
}

bool site_occupied(const ChainState& s, const Event& site) {
    if (site.kind == EventKind::Entry) {
        return s.mosaic.active(s.mosaic.tessellation().entries()[idx(site.index)].segment);
    }
    return s.births[idx(site.index)] != 0;
}

void revert(ChainState& s, const Change& c) {
    for (auto it = c.cells.rbegin(); it != c.cells.rend(); ++it) s.mosaic.set_colour(it->first, it->second);
    for (auto it = c.bits.rbegin(); it != c.bits.rend(); ++it) s.births[idx(it->first)] = it->second;
}

// ---------------------------------------------------------------------------
// Birth / death propagation

Change apply_flip(ChainState& s, const ModelParams& p, const Event& site, FlipKind kind, Chooser& chooser) {
    const auto& t = s.mosaic.tessellation();
    const bool occupied = site_occupied(s, site);
    if ((kind == FlipKind::Birth) == occupied) {
        throw Error(ErrorCode::IllegalFlip, std::string(kind == FlipKind::Birth ? "birth" : "death") +
                                                " requested at a site that is " + (occupied ? "occupied" : "vacant"));
    }
    const int site_pos = t.event_position(site.kind, site.index);
    auto& sc = scratch;
    sc.fit(t.cell_count(), t.events().size());
    Change change;
    if (site.kind == EventKind::Node) {
        change.bits.push_back({site.index, s.births[idx(site.index)]});
        s.births[idx(site.index)] ^= 1;
    }

    std::priority_queue<int, std::vector<int>, std::greater<>> heap;
    std::vector<int> queued_list;
    auto enqueue = [&](int pos) {
        if (!sc.queued[idx(pos)]) {
            sc.queued[idx(pos)] = 1;
            queued_list.push_back(pos);
            heap.push(pos);
        }
    };
    auto old_colour = [&](int cell) {
        const Colour c = sc.saved[idx(cell)];
        return c != 0 ? c : s.mosaic.colour(cell);
    };
    auto assign = [&](int cell, Colour c) {
        const Colour cur = s.mosaic.colour(cell);
        if (cur == c) return;
        if (sc.saved[idx(cell)] == 0) {
            sc.saved[idx(cell)] = cur;
            sc.touched.push_back(cell);
        }
        change.cells.push_back({cell, cur});
        s.mosaic.set_colour(cell, c);
        for (int d : t.cells()[idx(cell)].dependents) enqueue(d);
    };

    std::vector<Outcome> law;
    enqueue(site_pos);
    while (!heap.empty()) {
        const int pos = heap.top();
        heap.pop();
        const Event& ev = t.events()[idx(pos)];
        const bool toggled = pos == site_pos;
        if (ev.kind == EventKind::Entry) {
            const auto& entry = t.entries()[idx(ev.index)];
            const Colour prior_old = old_colour(entry.prior);
            const Colour prior_new = s.mosaic.colour(entry.prior);
            const bool bit_old = s.mosaic.colour(entry.fresh) != prior_old;
            const bool bit_new = bit_old != toggled;
            if (prior_old == prior_new && bit_old == bit_new) continue;
            if (!bit_new) {
                assign(entry.fresh, prior_new);
            } else {
                fresh_colour_law(p.k, prior_new, prior_new, Move::Birth, law);
                assign(entry.fresh, law[chooser.choose(pos, law)].colour);
            }
        } else {
            const auto& node = t.nodes()[idx(ev.index)];
            const NodeInputs before{old_colour(node.left), old_colour(node.across_i), old_colour(node.across_j)};
            const NodeInputs after{s.mosaic.colour(node.left), s.mosaic.colour(node.across_i),
                                   s.mosaic.colour(node.across_j)};
            const bool bit_new = s.births[idx(ev.index)] != 0;
            const bool bit_old = bit_new != toggled;
            if (same_key(before, bit_old, after, bit_new)) continue;
            if (node_situation(after.left, after.across_i, after.across_j) == Situation::Vacant) {
                if (!bit_new) {
                    assign(node.right, after.left);
                } else {
                    fresh_colour_law(p.k, after.left, after.left, Move::Birth, law);
                    assign(node.right, law[chooser.choose(pos, law)].colour);
                }
            } else {
                node_law(p, t.lines()[idx(node.line_i)].activity, t.lines()[idx(node.line_j)].activity, after.left,
                         after.across_i, after.across_j, law);
                assign(node.right, law[chooser.choose(pos, law)].colour);
            }
        }
    }
    for (int pos : queued_list) sc.queued[idx(pos)] = 0;
    for (int c : sc.touched) sc.saved[idx(c)] = 0;
    sc.touched.clear();
    return change;
}

// ---------------------------------------------------------------------------
// Recolouring

Change recolour_face(ChainState& s, int cell, Colour c) {
    Change change;
    if (s.mosaic.colour(cell) == c) return change;
    const auto face = face_cells(s.mosaic, cell);
    const auto& t = s.mosaic.tessellation();
    for (int f : face) {
        for (int seg : t.cells()[idx(f)].segments) {
            if (s.mosaic.active(seg) && s.mosaic.colour(t.segments()[idx(seg)].other_cell(f)) == c) return change;
        }
    }
    for (int f : face) {
        change.cells.push_back({f, s.mosaic.colour(f)});
        s.mosaic.set_colour(f, c);
    }
    return change;
}

Change recolour_cell(ChainState& s, const ModelParams& p, int cell, Colour c, Stream& rng) {
    Change change;
    if (s.mosaic.colour(cell) == c) return change;
    const auto& t = s.mosaic.tessellation();
    std::vector<int> nodes;
    for (int seg : t.cells()[idx(cell)].segments) {
        for (int n : {t.segments()[idx(seg)].tail_node, t.segments()[idx(seg)].head_node}) {
            if (n >= 0 && std::find(nodes.begin(), nodes.end(), n) == nodes.end()) nodes.push_back(n);
        }
    }
    std::sort(nodes.begin(), nodes.end());
    std::vector<std::uint8_t> hit_before(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) hit_before[i] = node_hit(s.mosaic, nodes[i]);
    change.cells.push_back({cell, s.mosaic.colour(cell)});
    s.mosaic.set_colour(cell, c);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const int n = nodes[i];
        const auto& node = t.nodes()[idx(n)];
        std::uint8_t bit = s.births[idx(n)];
        if (!node_hit(s.mosaic, n)) {
            bit = s.mosaic.colour(node.right) != s.mosaic.colour(node.left);
        } else if (!hit_before[i]) {
            bit = rng.uniform() < interior_birth_probability(t, p, n);
        }
        if (bit != s.births[idx(n)]) {
            change.bits.push_back({n, s.births[idx(n)]});
            s.births[idx(n)] = bit;
        }
    }
    return change;
}

double augmented_log_weight(const ChainState& s, const ModelParams& p) {
    double w = log_weight(s.mosaic, p);
    const auto& t = s.mosaic.tessellation();
    for (std::size_t n = 0; n < t.node_count(); ++n) {
        if (!node_hit(s.mosaic, static_cast<int>(n))) continue;
        const double q = interior_birth_probability(t, p, static_cast<int>(n));
        w += s.births[n] ? std::log(q) : std::log1p(-q);
    }
    return w;
}

// ---------------------------------------------------------------------------
// Chain

std::string_view to_string(StepKind k) {
    switch (k) {
    case StepKind::Birth: return "birth";
    case StepKind::Death: return "death";
    case StepKind::FaceRecolour: return "face-recolour";
    case StepKind::CellRecolour: return "cell-recolour";
    case StepKind::Null: return "null";
    }
    return "unknown";
}

Chain::Chain(ChainState initial, Target target, double tau, std::uint64_t seed)
    : state_(std::move(initial)),
      target_(target),
      tau_(tau),
      rng_(derive_key(seed, 0x636861696eULL)),
      weights_(state_.mosaic.tessellation(), target.params) {
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw Error(ErrorCode::InvalidArgument, "recolour rate must be finite and >= 0");
    if (target.params.k != state_.mosaic.k()) throw Error(ErrorCode::InvalidArgument, "colour count mismatch");
    if (!state_.consistent()) throw Error(ErrorCode::InvalidArgument, "latent births disagree with the mosaic");
    const auto& t = state_.mosaic.tessellation();
    const int k = target.params.k;
    double sum = 0.0;
    for (const auto& ev : t.events()) {
        const double r = site_rates(t, target.params, ev).birth;
        if (ev.kind == EventKind::Node && k > 2 && r > 1.0 / (k - 2) + 1e-12) {
            throw Error(ErrorCode::InvalidArgument, "interior birth rate exceeds 1/(k-2)");
        }
        site_birth_.push_back(r);
        site_bound_.push_back(std::max(1.0, r));
        uniform_sites_ = uniform_sites_ && r <= 1.0;
        sum += site_bound_.back();
        site_prefix_.push_back(sum);
    }
    lambda_ = tau_ + sum;
    if (!(lambda_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "chain has no events (no sites and zero recolour rate)");
    mark_.assign(t.node_count() + 2 * t.line_count(), 0);
    recompute();
    if (!std::isfinite(log_weight_)) throw Error(ErrorCode::InvalidArgument, "initial mosaic has zero probability");
}

void Chain::recompute() {
    log_weight_ = weights_.log_weight(state_.mosaic);
    phi_ = weights_.phi(state_.mosaic);
    h_ = target_.modifier ? target_.modifier->evaluate(state_.mosaic) : 0.0;
}

void Chain::set_scale(double scale) { target_.scale = scale; }

Chain::Delta Chain::measure(const Change& c) {
    const auto& t = state_.mosaic.tessellation();
    const std::size_t nn = t.node_count();
    const std::size_t nl = t.line_count();
    std::vector<int> points;  // node id, nn + line (entry), nn + nl + line (exit)
    std::vector<int> segs;
    for (const auto& [cell, old] : c.cells) {
        for (int s : t.cells()[idx(cell)].segments) {
            segs.push_back(s);
            const auto& seg = t.segments()[idx(s)];
            const int a = seg.tail_node >= 0 ? seg.tail_node : static_cast<int>(nn) + seg.line;
            const int b = seg.head_node >= 0 ? seg.head_node : static_cast<int>(nn + nl) + seg.line;
            for (int x : {a, b}) {
                if (!mark_[idx(x)]) {
                    mark_[idx(x)] = 1;
                    points.push_back(x);
                }
            }
        }
    }
    std::sort(segs.begin(), segs.end());
    segs.erase(std::unique(segs.begin(), segs.end()), segs.end());
    for (int x : points) mark_[idx(x)] = 0;

    auto sum_points = [&](double& phi, double& lp) {
        phi = 0.0;
        lp = 0.0;
        for (int x : points) {
            PointTerm term;
            if (x < static_cast<int>(nn)) {
                term = weights_.node_term(state_.mosaic, x);
            } else if (x < static_cast<int>(nn + nl)) {
                term = weights_.entry_term(state_.mosaic, x - static_cast<int>(nn));
            } else {
                term = weights_.exit_term(state_.mosaic, x - static_cast<int>(nn + nl));
            }
            phi += term.phi;
            lp += term.log_pi;
        }
    };
    const bool local_h = target_.modifier && target_.modifier->segment_local();
    auto sum_h = [&] {
        double h = 0.0;
        for (int s : segs) {
            if (state_.mosaic.active(s)) h += target_.modifier->segment_term(t, s);
        }
        return h;
    };

    double phi_after, lp_after, phi_before, lp_before;
    sum_points(phi_after, lp_after);
    const double h_after_local = local_h ? sum_h() : 0.0;
    std::vector<std::pair<int, Colour>> fresh;
    fresh.reserve(c.cells.size());
    for (const auto& [cell, old] : c.cells) fresh.push_back({cell, state_.mosaic.colour(cell)});
    for (auto it = c.cells.rbegin(); it != c.cells.rend(); ++it) state_.mosaic.set_colour(it->first, it->second);
    sum_points(phi_before, lp_before);
    const double h_before_local = local_h ? sum_h() : 0.0;
    // every cell appears once in a change, so any order restores the final state
    for (const auto& [cell, colour] : fresh) state_.mosaic.set_colour(cell, colour);

    Delta d;
    if (!std::isfinite(phi_after)) {
        d.phi = kInfinity;
        d.log_weight = -kInfinity;
    } else {
        d.phi = phi_after - phi_before;
        d.log_weight = (lp_after - phi_after) - (lp_before - phi_before);
    }
    if (target_.modifier) {
        d.h = local_h ? h_after_local - h_before_local : target_.modifier->evaluate(state_.mosaic) - h_;
    }
    return d;
}

bool Chain::accept_modifier(double delta_h) {
    if (!target_.modifier) return true;
    const double x = target_.scale * delta_h;
    if (x <= 0.0) return true;
    return rng_.uniform() < std::exp(-x);
}

StepRecord Chain::flip_step(int site_pos) {
    const auto& t = state_.mosaic.tessellation();
    const Event& site = t.events()[idx(site_pos)];
    const bool occupied = site_occupied(state_, site);
    const double rate = occupied ? 1.0 : site_birth_[idx(site_pos)];
    StepRecord rec;
    rec.site = site_pos;
    rec.kind = occupied ? StepKind::Death : StepKind::Birth;
    if (!(rng_.uniform() * site_bound_[idx(site_pos)] < rate)) {
        rec.kind = StepKind::Null;
        return rec;
    }
    StreamChooser chooser(rng_);
    const Change change = apply_flip(state_, target_.params, site, occupied ? FlipKind::Death : FlipKind::Birth, chooser);
    const Delta d = measure(change);
    rec.delta_phi = d.phi;
    rec.delta_h = d.h;
    if (!std::isfinite(d.log_weight) || !accept_modifier(d.h)) {
        revert(state_, change);
        return rec;
    }
    rec.accepted = true;
    log_weight_ += d.log_weight;
    phi_ += d.phi;
    h_ += d.h;
    return rec;
}

StepRecord Chain::recolour_step(bool face) {
    const auto& t = state_.mosaic.tessellation();
    const int k = target_.params.k;
    StepRecord rec;
    rec.kind = face ? StepKind::FaceRecolour : StepKind::CellRecolour;
    const int cell = static_cast<int>(rng_.below(t.cell_count()));
    Change change;
    if (face) {
        const Colour c = 1 + static_cast<Colour>(rng_.below(static_cast<std::uint64_t>(k)));
        change = recolour_face(state_, cell, c);
    } else {
        Colour c = 1 + static_cast<Colour>(rng_.below(static_cast<std::uint64_t>(k - 1)));
        if (c >= state_.mosaic.colour(cell)) ++c;
        change = recolour_cell(state_, target_.params, cell, c, rng_);
    }
    if (change.empty()) return rec;
    const Delta d = measure(change);
    rec.delta_phi = d.phi;
    rec.delta_h = d.h;
    bool ok = std::isfinite(d.log_weight);
    if (ok && d.log_weight < 0.0) ok = rng_.uniform() < std::exp(d.log_weight);
    if (ok) ok = accept_modifier(d.h);
    if (!ok) {
        revert(state_, change);
        return rec;
    }
    rec.accepted = true;
    log_weight_ += d.log_weight;
    phi_ += d.phi;
    h_ += d.h;
    return rec;
}

StepRecord Chain::step() {
    ++steps_;
    const double u = rng_.uniform() * lambda_;
    state_.clock += -std::log1p(-rng_.uniform()) / lambda_;
    StepRecord rec;
    if (u < tau_) {
        rec = recolour_step(rng_.uniform() < 0.5);
    } else {
        const double v = u - tau_;
        int site;
        if (uniform_sites_) {
            site = std::min(static_cast<int>(v), static_cast<int>(site_prefix_.size()) - 1);
        } else {
            site = static_cast<int>(std::upper_bound(site_prefix_.begin(), site_prefix_.end(), v) - site_prefix_.begin());
            site = std::min(site, static_cast<int>(site_prefix_.size()) - 1);
        }
        rec = flip_step(site);
    }
    rec.clock = state_.clock;
    return rec;
}

// ---------------------------------------------------------------------------
// Annealing

double AnnealSchedule::resolved_multiplier() const {
    if (multiplier > 0.0) return multiplier;
    return std::pow(beta_end / beta_start, 1.0 / sweeps);
}

void AnnealSchedule::validate() const {
    if (!(beta_start > 0.0) || !(beta_end >= beta_start) || !std::isfinite(beta_end)) {
        throw Error(ErrorCode::InvalidArgument, "annealing needs 0 < beta_start <= beta_end");
    }
    if (sweeps < 1) throw Error(ErrorCode::InvalidArgument, "annealing needs at least one sweep");
    const double m = resolved_multiplier();
    if (beta_end > beta_start && !(m > 1.0)) throw Error(ErrorCode::InvalidArgument, "multiplier must exceed 1");
    if (std::pow(m, sweeps) * beta_start < beta_end * (1.0 - 1e-9)) {
        throw Error(ErrorCode::InvalidArgument, "schedule does not reach beta_end");
    }
}

AnnealResult anneal(const ChainState& initial, const ModelParams& p, const GibbsModifier& modifier,
                    const AnnealSchedule& schedule, double tau, std::uint64_t seed) {
    schedule.validate();
    Chain chain(initial, Target{p, &modifier, schedule.beta_start}, tau, seed);
    const auto per_sweep = static_cast<std::uint64_t>(std::max(1.0, std::ceil(chain.rate_bound())));
    const double m = schedule.resolved_multiplier();
    auto score = [&] { return -chain.log_weight() + schedule.beta_end * chain.modifier_value(); };
    AnnealResult result{chain.state().mosaic, score(), {}};
    double beta = schedule.beta_start;
    for (int sweep = 0; sweep < schedule.sweeps; ++sweep) {
        chain.set_scale(std::min(beta, schedule.beta_end));
        for (std::uint64_t e = 0; e < per_sweep; ++e) {
            if (!chain.step().accepted) continue;
            const double sc = score();
            if (sc < result.best_score - 1e-12) {
                result.best_score = sc;
                result.best = chain.state().mosaic;
            }
        }
        chain.recompute();
        result.trace.push_back({sweep, chain.target().scale, score(), result.best_score});
        beta *= m;
    }
    return result;
}

} // namespace polyfield
