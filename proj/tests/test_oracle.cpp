#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "polyfield/error.hpp"
#include "polyfield/oracle.hpp"

using namespace polyfield;

TEST_CASE("2x2 anchor table") {
    const std::vector<double> acts{0.5, 0.5};
    const auto table = enumerate_exact(2, 2, derive_params(3, 0.5), acts);
    CHECK(table.size() == 81);
    CHECK(table.z == doctest::Approx(7.2).epsilon(1e-13));
    CHECK(table.z_closed_form == doctest::Approx(7.2).epsilon(1e-13));
    double s = 0.0;
    for (double p : table.probabilities) s += p;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(table.probabilities[table.index_of({2, 2, {1, 1, 1, 1}})] == doctest::Approx(5.0 / 36.0).epsilon(1e-13));
    CHECK(table.probabilities[table.index_of({2, 2, {1, 2, 1, 2}})] == doctest::Approx(25.0 / 864.0).epsilon(1e-13));
    for (std::size_t i = 0; i < table.size(); ++i) CHECK(table.index_of(table.state(i)) == i);
}

TEST_CASE("1x1 table is uniform") {
    const auto table = enumerate_exact(1, 1, derive_params(4, 0.3), std::vector<double>{});
    REQUIRE(table.size() == 4);
    for (double p : table.probabilities) CHECK(p == doctest::Approx(0.25));
}

TEST_CASE("two colour checkerboards are forbidden") {
    const auto table = enumerate_exact(2, 2, derive_params(2, 1.0), std::vector<double>{0.5, 0.5});
    CHECK(table.probabilities[table.index_of({2, 2, {1, 2, 2, 1}})] == 0.0);
    CHECK(table.probabilities[table.index_of({2, 2, {2, 1, 1, 2}})] == 0.0);
    CHECK(table.z == doctest::Approx(6.0));
}

TEST_CASE("enumeration cap") {
    try {
        enumerate_exact(4, 4, derive_params(3, 0.5), std::vector<double>(6, 0.5));
        FAIL("expected EnumerationTooLarge");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EnumerationTooLarge);
    }
}

TEST_CASE("marginals") {
    const std::vector<double> acts{0.5, 0.5};
    const auto p = derive_params(3, 0.5);
    const auto table = enumerate_exact(2, 2, p, acts);
    const auto left = marginal(table, 0, 0, 2, 1);
    const auto direct = enumerate_exact(2, 1, p, sub_activities(2, 2, acts, 0, 0, 2, 1));
    CHECK(tv_distance(left.probabilities, direct.probabilities) < 1e-14);
    const auto pixel = marginal(table, 1, 1, 1, 1);
    for (double q : pixel.probabilities) CHECK(q == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    const auto full = marginal(table, 0, 0, 2, 2);
    CHECK(tv_distance(full.probabilities, table.probabilities) < 1e-15);
    CHECK_THROWS_AS(marginal(table, 1, 0, 2, 1), Error);
}

TEST_CASE("tv distance") {
    const std::vector<double> a{0.2, 0.3, 0.5};
    CHECK(tv_distance(a, a) == 0.0);
    CHECK(tv_distance(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 1.0);
    const int n = 7;
    std::vector<double> u(n, 1.0 / n), pm(n, 0.0);
    pm[3] = 1.0;
    CHECK(tv_distance(u, pm) == doctest::Approx(1.0 - 1.0 / n));
    CHECK_THROWS_AS(tv_distance(a, u), Error);
}

TEST_CASE("factorisation") {
    CHECK(factorisation_check(2, 2, derive_params(3, 0.5), std::vector<double>{0.5, 0.5}) < 1e-12);
    CHECK(factorisation_check(3, 2, derive_params(2, 1.0), std::vector<double>{0.5, 0.5, 0.5}) < 1e-12);
    CHECK(factorisation_check(3, 3, derive_params(3, 0.25), std::vector<double>{0.3, 0.7, 0.5, 0.6}) < 1e-12);
    CHECK(factorisation_check(2, 3, derive_params(4, 0.0), std::vector<double>{0.3, 0.7, 0.5}) < 1e-12);

    // vacant interior node keeping its colour
    const auto p = derive_params(3, 0.5);
    const std::vector<double> acts{0.4, 0.6};
    const double mono = factorised_probability({2, 2, {1, 1, 1, 1}}, p, acts);
    const double expect = (1.0 / 3.0) / (1.4 * 1.6) * (1.0 - 0.5 * 0.4 * 0.6 / 2.0);
    CHECK(mono == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("segment activity probability equals pi/(1+pi)") {
    const std::vector<double> acts{0.3, 0.7, 0.45, 0.6};
    for (auto [k, av] : {std::pair{2, 1.0}, std::pair{3, 0.5}, std::pair{4, 0.0}}) {
        const auto table = enumerate_exact(3, 3, derive_params(k, av), acts);
        const auto t = build_lattice(3, 3, acts);
        const auto probs = segment_activity_probabilities(table, *t);
        for (std::size_t s = 0; s < probs.size(); ++s) {
            const double pi = acts[static_cast<std::size_t>(t->segments()[s].line)];
            CHECK(probs[s] == doctest::Approx(pi / (1.0 + pi)).epsilon(1e-12));
        }
    }
}

TEST_CASE("csv export") {
    const auto table = enumerate_exact(2, 2, derive_params(3, 0.5), std::vector<double>{0.5, 0.5});
    std::ostringstream os;
    write_csv(table, os);
    std::istringstream is(os.str());
    std::string line;
    int rows = 0;
    std::getline(is, line);
    CHECK(line == "state,pixels,log_weight,probability,z");
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 81);
}
