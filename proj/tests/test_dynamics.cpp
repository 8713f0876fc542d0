#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "polyfield/dynamics.hpp"
#include "polyfield/error.hpp"
#include "polyfield/oracle.hpp"

using namespace polyfield;

namespace {

/// Takes the first branch with the requested move; falls back to branch 0.
class MoveChooser final : public Chooser {
public:
    explicit MoveChooser(std::map<int, Move> moves, Colour initial = 1) : moves_(std::move(moves)), initial_(initial) {}
    std::size_t choose(int event, std::span<const Outcome> law) override {
        if (event < 0) return static_cast<std::size_t>(initial_ - 1);
        const auto it = moves_.find(event);
        for (std::size_t i = 0; it != moves_.end() && i < law.size(); ++i) {
            if (law[i].move == it->second) return i;
        }
        return 0;
    }
    bool latent_birth(int, double) override { return false; }

private:
    std::map<int, Move> moves_;
    Colour initial_;
};

double law_sum(const std::vector<Outcome>& law) {
    double s = 0.0;
    for (const auto& o : law) s += o.probability;
    return s;
}

} // namespace

TEST_CASE("local laws sum to one") {
    std::vector<Outcome> law;
    for (int k = 2; k <= 5; ++k) {
        for (double av : {0.0, 0.3, 1.0}) {
            const auto p = derive_params(k, av);
            for (Colour l = 1; l <= k; ++l) {
                for (Colour a = 1; a <= k; ++a) {
                    for (Colour b = 1; b <= k; ++b) {
                        node_law(p, 0.35, 0.8, l, a, b, law);
                        CHECK(law_sum(law) == doctest::Approx(1.0).epsilon(1e-14));
                        for (const auto& o : law) CHECK(o.probability > 0.0);
                    }
                }
                entry_law(p, 0.4, l, law);
                CHECK(law_sum(law) == doctest::Approx(1.0).epsilon(1e-14));
            }
        }
    }
    // k = 2 never offers a split
    node_law(derive_params(2, 0.5), 0.5, 0.5, 1, 2, 1, law);
    for (const auto& o : law) CHECK(o.move != Move::Split);
}

TEST_CASE("collision with equal outer colours: both die") {
    auto t = build_lattice(2, 2, 0.5);
    const auto p = derive_params(3, 0.5);
    // initial colour 1, births at both entries give colour 2 to both fresh cells
    MoveChooser ch({{0, Move::Birth}, {1, Move::Birth}, {2, Move::BothDie}});
    SweepState s(t, p, ch);
    node_update(s, t->events()[0], ch);
    node_update(s, t->events()[1], ch);
    const auto before = s.frontier();
    CHECK(before[0] >= 0);
    CHECK(before[1] >= 0);
    CHECK(s.colours()[1] == s.colours()[2]);
    node_update(s, t->events()[2], ch);
    CHECK(s.colours()[3] == s.colours()[1]);
    const auto after = s.frontier();
    CHECK(after[0] == -1);
    CHECK(after[1] == -1);
    CHECK(s.birth_log().back().move == Move::BothDie);
    CHECK(validate(s.mosaic()).empty());
    CHECK(analyze(s.mosaic()).n_v == 1);
}

TEST_CASE("single trajectory split") {
    auto t = build_lattice(2, 2, 0.5);
    const auto p = derive_params(3, 0.5);
    MoveChooser ch({{0, Move::Birth}, {1, Move::NoBirth}, {2, Move::Split}});
    const auto s = sweep(t, p, ch);
    const auto& c = s.colours();
    // cell 1 is above the horizontal line, cell 3 is the fresh cell
    CHECK(c[1] != c[0]);
    CHECK(c[3] != c[0]);
    CHECK(c[3] != c[1]);
    const auto fr = s.frontier();
    (void)fr;
    CHECK(analyze(s.mosaic()).n_t == 1);
}

TEST_CASE("vacant node without birth changes only the log") {
    auto t = build_lattice(2, 2, 0.5);
    const auto p = derive_params(3, 0.5);
    MoveChooser ch({{0, Move::NoBirth}, {1, Move::NoBirth}, {2, Move::NoBirth}});
    SweepState s(t, p, ch);
    node_update(s, t->events()[0], ch);
    node_update(s, t->events()[1], ch);
    const auto profile = s.colour_profile();
    const auto frontier = s.frontier();
    node_update(s, t->events()[2], ch);
    CHECK(s.birth_log().back().status == BirthStatus::Absent);
    CHECK(s.frontier() == frontier);
    CHECK(s.colour_profile() == profile);
    CHECK(s.mosaic().active_count() == 0);
}

TEST_CASE("out of order events are rejected") {
    auto t = build_lattice(2, 2, 0.5);
    KeyedChooser ch(3);
    SweepState s(t, derive_params(3, 0.5), ch);
    try {
        node_update(s, t->events()[2], ch);
        FAIL("expected OutOfOrderEvent");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::OutOfOrderEvent);
    }
}

TEST_CASE("profile and frontier agree during a sweep") {
    auto t = build_lattice(4, 5, 0.6);
    const auto p = derive_params(4, 0.5);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        KeyedChooser ch(seed);
        SweepState s(t, p, ch);
        for (const auto& e : t->events()) {
            node_update(s, e, ch);
            const auto prof = s.colour_profile();
            const auto fr = s.frontier();
            int live = 0;
            for (int f : fr) live += f >= 0;
            int changes = 0;
            for (std::size_t i = 1; i < prof.size(); ++i) changes += prof[i] != prof[i - 1];
            CHECK(changes == live);
        }
    }
}

TEST_CASE("1x1 initial colour is uniform") {
    auto t = build_lattice(1, 1, std::vector<double>{});
    const int k = 4, n = 100000;
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(sample_exact(t, derive_params(k, 0.5), derive_key(1, i)).colour(0) - 1)];
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - n / 4.0) * (c - n / 4.0) / (n / 4.0);
    CHECK(chi2 < 16.27);  // 0.999 quantile, 3 dof
}

TEST_CASE("samples are admissible and respect degeneracies") {
    auto t = build_lattice(5, 5, 0.5);
    for (int k = 2; k <= 4; ++k) {
        for (double av : {0.0, 0.5, 1.0}) {
            const auto p = derive_params(k, av);
            for (int i = 0; i < 2000; ++i) {
                const auto m = sample_exact(t, p, derive_key(7, static_cast<std::uint64_t>(k * 100000 + i), static_cast<std::uint64_t>(av * 4)));
                CHECK(validate(m).empty());
                const auto st = analyze(m);
                if (av == 0.0) CHECK(st.n_v == 0);
                if (av == 1.0) CHECK(st.n_x == 0);
                if (k == 2) CHECK(st.n_t == 0);
            }
        }
    }
}

TEST_CASE("sampler is deterministic") {
    auto t = build_lattice(6, 6, 0.5);
    const auto p = derive_params(3, 0.5);
    CHECK(sample_exact(t, p, 42) == sample_exact(t, p, 42));
}

TEST_CASE("empirical law on 2x2") {
    auto t = build_lattice(2, 2, 0.5);
    const auto p = derive_params(3, 0.5);
    const auto table = enumerate_exact(2, 2, p, std::vector<double>{0.5, 0.5});
    const int n = 200000;
    std::vector<double> freq(table.size(), 0.0);
    for (int i = 0; i < n; ++i) freq[state_index(sample_exact(t, p, derive_key(11, i)))] += 1.0 / n;
    CHECK(tv_distance(freq, table.probabilities) < 0.02);
}
