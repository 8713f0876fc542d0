#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "polyfield/error.hpp"
#include "polyfield/mcmc.hpp"
#include "polyfield/oracle.hpp"

using namespace polyfield;

namespace {

/// Follows a prescribed prefix of branch indices, then takes branch 0, and
/// records the branching factors so that every path can be enumerated.
class ScriptChooser final : public Chooser {
public:
    explicit ScriptChooser(std::vector<std::size_t> prefix) : taken_(std::move(prefix)) {}
    std::size_t choose(int, std::span<const Outcome> law) override {
        if (pos_ >= taken_.size()) taken_.push_back(0);
        const std::size_t i = taken_[pos_];
        sizes_.push_back(law.size());
        prob_ *= law[i].probability;
        ++pos_;
        return i;
    }
    bool latent_birth(int, double) override { return false; }

    std::vector<std::size_t> taken_;
    std::vector<std::size_t> sizes_;
    double prob_ = 1.0;
    std::size_t pos_ = 0;
};

using Key = std::pair<std::size_t, std::vector<std::uint8_t>>;

Key key_of(const ChainState& s) { return {state_index(s.mosaic), s.births}; }

/// All outcomes of one flip with their probabilities.
std::map<Key, double> flip_outcomes(const ChainState& s, const ModelParams& p, const Event& site) {
    std::map<Key, double> out;
    std::vector<std::size_t> prefix;
    const FlipKind kind = site_occupied(s, site) ? FlipKind::Death : FlipKind::Birth;
    while (true) {
        ChainState copy = s;
        ScriptChooser ch(prefix);
        apply_flip(copy, p, site, kind, ch);
        CHECK(validate(copy.mosaic).empty());
        CHECK(copy.consistent());
        out[key_of(copy)] += ch.prob_;
        std::size_t i = ch.taken_.size();
        while (i > 0 && ch.taken_[i - 1] + 1 >= ch.sizes_[i - 1]) --i;
        if (i == 0) break;
        prefix.assign(ch.taken_.begin(), ch.taken_.begin() + static_cast<std::ptrdiff_t>(i));
        ++prefix.back();
    }
    return out;
}

/// Every augmented state of a lattice with positive weight.
std::vector<ChainState> augmented_states(const TessellationPtr& t, const ModelParams& p) {
    std::vector<ChainState> out;
    enumerate_log_weights(t, p, nullptr, kEnumerationCap, [&](const Mosaic& m, double w) {
        if (!std::isfinite(w)) return;
        const auto base = ChainState::from_mosaic(m);
        std::vector<int> hit;
        for (std::size_t n = 0; n < t->node_count(); ++n) {
            if (node_hit(m, static_cast<int>(n))) hit.push_back(static_cast<int>(n));
        }
        for (std::size_t mask = 0; mask < (std::size_t{1} << hit.size()); ++mask) {
            ChainState s = base;
            for (std::size_t b = 0; b < hit.size(); ++b) s.births[static_cast<std::size_t>(hit[b])] = (mask >> b) & 1U;
            if (std::isfinite(augmented_log_weight(s, p))) out.push_back(s);
        }
    });
    return out;
}

void check_detailed_balance(int rows, int cols, std::vector<double> acts, const ModelParams& p) {
    auto t = build_lattice(rows, cols, acts);
    const auto states = augmented_states(t, p);
    std::map<Key, double> weight;
    for (const auto& s : states) weight[key_of(s)] = augmented_log_weight(s, p);
    std::map<std::tuple<Key, Key, int>, double> flow;
    for (const auto& s : states) {
        const Key from = key_of(s);
        for (std::size_t e = 0; e < t->events().size(); ++e) {
            const auto& site = t->events()[e];
            const double rate = site_occupied(s, site) ? 1.0 : site_rates(*t, p, site).birth;
            if (rate == 0.0) continue;  // never fires
            for (const auto& [to, prob] : flip_outcomes(s, p, site)) {
                REQUIRE(weight.count(to) == 1);
                flow[{from, to, static_cast<int>(e)}] += std::exp(weight[from]) * rate * prob;
            }
        }
    }
    double worst = 0.0;
    for (const auto& [k, f] : flow) {
        const auto it = flow.find({std::get<1>(k), std::get<0>(k), std::get<2>(k)});
        const double back = it == flow.end() ? 0.0 : it->second;
        worst = std::max(worst, std::abs(f - back) / std::max(f, back));
    }
    CHECK(worst < 1e-12);
}

} // namespace

TEST_CASE("site rates") {
    auto t = build_lattice(2, 2, 0.5);
    const auto p = derive_params(3, 0.5);
    const auto& ev = t->events();
    CHECK(site_rates(*t, p, ev[0]).birth == doctest::Approx(0.5));
    CHECK(site_rates(*t, p, ev[2]).birth == doctest::Approx(1.0 / 15.0).epsilon(1e-14));
    CHECK(site_rates(*t, p, ev[2]).death == 1.0);
    for (int k = 3; k <= 6; ++k) {
        const auto q = derive_params(k, 1.0);
        auto tt = build_lattice(2, 2, 0.99);
        CHECK(site_rates(*tt, q, tt->events()[2]).birth <= 1.0 / (k - 2));
    }
}

TEST_CASE("illegal flips") {
    auto t = build_lattice(2, 2, 0.5);
    const auto p = derive_params(3, 0.5);
    auto s = ChainState::from_mosaic(Mosaic(t, 3, 1));
    KeyedChooser ch(1);
    try {
        apply_flip(s, p, t->events()[0], FlipKind::Death, ch);
        FAIL("expected IllegalFlip");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IllegalFlip);
    }
}

TEST_CASE("boundary birth on an empty mosaic") {
    auto t = build_lattice(4, 4, 0.5);
    const auto p = derive_params(3, 0.5);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto s = ChainState::from_mosaic(Mosaic(t, 3, 1));
        KeyedChooser ch(seed);
        const auto before = s.mosaic;
        const auto change = apply_flip(s, p, t->events()[0], FlipKind::Birth, ch);
        CHECK(validate(s.mosaic).empty());
        CHECK(s.consistent());
        CHECK(s.mosaic.active(t->entries()[0].segment));
        const auto labels = classify_segments(before, s.mosaic);
        for (auto l : labels) CHECK(l != SegmentLabel::Minus);
        revert(s, change);
        CHECK(s.mosaic == before);
    }
}

TEST_CASE("birth pre-empted by a trajectory is discarded") {
    auto t = build_lattice(2, 2, 0.5);
    const auto p = derive_params(3, 0.5);
    // realized birth at the node, nothing else
    auto s = ChainState::from_mosaic(pixels_to_mosaic({2, 2, {1, 1, 1, 2}}, t, 3));
    REQUIRE(s.realized_births().size() == 1);
    // add a boundary birth on the horizontal line: its trajectory reaches the node
    KeyedChooser ch(5);
    apply_flip(s, p, t->events()[0], FlipKind::Birth, ch);
    CHECK(node_hit(s.mosaic, 0));
    CHECK(s.discarded_births().size() == 1);
    CHECK(s.realized_births().empty());
    const auto c = s.mosaic.colours();
    if (analyze(s.mosaic).n_t == 1) {
        CHECK(c[3] != c[0]);
        CHECK(c[3] != c[1]);
    }
}

TEST_CASE("detailed balance of the flip dynamics") {
    check_detailed_balance(2, 2, {0.5, 0.5}, derive_params(3, 0.5));
    check_detailed_balance(2, 2, {0.3, 0.8}, derive_params(4, 0.2));
    check_detailed_balance(3, 2, {0.35, 0.6, 0.45}, derive_params(3, 0.7));
    check_detailed_balance(3, 3, {0.35, 0.6, 0.45, 0.7}, derive_params(2, 1.0));
    check_detailed_balance(2, 3, {0.55, 0.25, 0.65}, derive_params(3, 0.0));
}

TEST_CASE("detailed balance under random parameters") {
    Stream rng(derive_key(2024, 5));
    for (int trial = 0; trial < 6; ++trial) {
        const int k = 2 + static_cast<int>(rng.below(3));
        const double av = rng.uniform();
        std::vector<double> acts{0.05 + 0.9 * rng.uniform(), 0.05 + 0.9 * rng.uniform(), 0.05 + 0.9 * rng.uniform()};
        check_detailed_balance(2, 3, acts, derive_params(k, av));
    }
}

TEST_CASE("chain bookkeeping stays exact") {
    auto t = build_lattice(5, 5, 0.5);
    const auto p = derive_params(4, 0.5);
    SegmentCountModifier h(0.3);
    Chain chain(ChainState::from_mosaic(Mosaic(t, 4, 1)), Target{p, &h, 1.0}, 3.0, 17);
    for (int i = 0; i < 20000; ++i) {
        chain.step();
        if (i % 997 == 0) {
            const double lw = chain.log_weight(), phi = chain.phi(), hv = chain.modifier_value();
            CHECK(validate(chain.state().mosaic).empty());
            CHECK(chain.state().consistent());
            chain.recompute();
            CHECK(lw == doctest::Approx(chain.log_weight()).epsilon(1e-9));
            CHECK(phi == doctest::Approx(chain.phi()).epsilon(1e-9));
            CHECK(hv == doctest::Approx(chain.modifier_value()).epsilon(1e-9));
            CHECK(chain.phi() == doctest::Approx(hamiltonian_phi(chain.state().mosaic, p)).epsilon(1e-9));
        }
    }
}

TEST_CASE("chain law on 2x2") {
    auto t = build_lattice(2, 2, 0.5);
    const auto p = derive_params(3, 0.5);
    const auto table = enumerate_exact(2, 2, p, std::vector<double>{0.5, 0.5});
    Chain chain(ChainState::from_mosaic(Mosaic(t, 3, 1)), Target{p}, 1.0, 99);
    std::vector<double> freq(table.size(), 0.0);
    const int burn = 100000, n = 1000000;
    for (int i = 0; i < burn; ++i) chain.step();
    for (int i = 0; i < n; ++i) {
        chain.step();
        freq[state_index(chain.state().mosaic)] += 1.0 / n;
    }
    CHECK(tv_distance(freq, table.probabilities) < 0.03);
}

TEST_CASE("modifier acceptance") {
    auto t = build_lattice(1, 1, std::vector<double>{});
    const auto p = derive_params(3, 0.5);
    // zero modifier: every face recolour to a new colour is accepted
    struct Zero final : GibbsModifier {
        double evaluate(const Mosaic&) const override { return 0.0; }
    } zero;
    Chain chain(ChainState::from_mosaic(Mosaic(t, 3, 1)), Target{p, &zero, 1.0}, 1.0, 3);
    int proposals = 0, accepted = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto r = chain.step();
        if (r.kind == StepKind::CellRecolour) {
            ++proposals;
            accepted += r.accepted;
        }
    }
    CHECK(proposals > 0);
    CHECK(accepted == proposals);

    // delta H = log 2 on every move away from colour 1
    struct Prefer final : GibbsModifier {
        double evaluate(const Mosaic& m) const override { return m.colour(0) == 1 ? 0.0 : std::log(2.0); }
    } prefer;
    Chain c2(ChainState::from_mosaic(Mosaic(t, 3, 1)), Target{p, &prefer, 1.0}, 1.0, 4);
    int away = 0, away_ok = 0;
    for (int i = 0; i < 200000; ++i) {
        const bool from_one = c2.state().mosaic.colour(0) == 1;
        const auto r = c2.step();
        if (from_one && r.kind == StepKind::CellRecolour) {
            ++away;
            away_ok += r.accepted;
        }
    }
    const double rate = static_cast<double>(away_ok) / away;
    CHECK(std::abs(rate - 0.5) < 4.0 * std::sqrt(0.25 / away));
}

TEST_CASE("modified chain law on 2x2") {
    auto t = build_lattice(2, 2, 0.5);
    const auto p = derive_params(3, 0.5);
    const SegmentCountModifier h(1.0);
    const auto table = enumerate_exact(2, 2, p, std::vector<double>{0.5, 0.5}, &h);
    Chain chain(ChainState::from_mosaic(Mosaic(t, 3, 1)), Target{p, &h, 1.0}, 1.0, 7);
    std::vector<double> freq(table.size(), 0.0);
    const int n = 1000000;
    for (int i = 0; i < n / 10; ++i) chain.step();
    for (int i = 0; i < n; ++i) {
        chain.step();
        freq[state_index(chain.state().mosaic)] += 1.0 / n;
    }
    CHECK(tv_distance(freq, table.probabilities) < 0.03);
}

TEST_CASE("annealing schedule validation") {
    AnnealSchedule s;
    CHECK_NOTHROW(s.validate());
    CHECK(std::pow(s.resolved_multiplier(), s.sweeps) * s.beta_start == doctest::Approx(100.0));
    AnnealSchedule bad{10.0, 1.0, 0.0, 10};
    CHECK_THROWS_AS(bad.validate(), Error);
    AnnealSchedule slow{0.1, 100.0, 1.001, 10};
    CHECK_THROWS_AS(slow.validate(), Error);
}

TEST_CASE("annealing recovers a planted optimum") {
    auto t = build_lattice(3, 3, 0.5);
    const auto p = derive_params(3, 0.5);
    const Mosaic planted = pixels_to_mosaic({3, 3, {1, 1, 2, 3, 1, 2, 3, 3, 2}}, t, 3);
    struct Hamming final : GibbsModifier {
        const Mosaic* target;
        double evaluate(const Mosaic& m) const override {
            double d = 0.0;
            for (std::size_t c = 0; c < m.colours().size(); ++c) d += m.colours()[c] != target->colours()[c];
            return 5.0 * d;
        }
    } h;
    h.target = &planted;
    AnnealSchedule schedule{0.1, 100.0, 0.0, 200};
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto r = anneal(ChainState::from_mosaic(Mosaic(t, 3, 1)), p, h, schedule, 50.0, seed);
        hits += r.best == planted;
        CHECK(r.trace.size() == 200);
    }
    CHECK(hits >= 95);
}

TEST_CASE("annealing with a zero modifier keeps a flat trace") {
    auto t = build_lattice(3, 3, 0.5);
    const auto p = derive_params(3, 0.5);
    const SegmentCountModifier zero(0.0);
    const auto r = anneal(ChainState::from_mosaic(Mosaic(t, 3, 1)), p, zero, AnnealSchedule{0.1, 100.0, 0.0, 20}, 2.0, 1);
    for (const auto& tp : r.trace) CHECK(std::isfinite(tp.score));
    CHECK(validate(r.best).empty());
}
