#include <vector>

#include "doctest.h"
#include "polyfield/error.hpp"
#include "polyfield/mosaic.hpp"
#include "polyfield/random.hpp"

using namespace polyfield;

namespace {

PixelArray pixels(int rows, int cols, std::vector<Colour> c) { return PixelArray{rows, cols, std::move(c)}; }

} // namespace

TEST_CASE("monochrome 2x2") {
    auto t = build_lattice(2, 2, 0.5);
    const auto m = pixels_to_mosaic(pixels(2, 2, {2, 2, 2, 2}), t, 3);
    CHECK(m.active_count() == 0);
    CHECK(face_cells(m, 0).size() == 4);
    const auto st = analyze(m);
    CHECK(st.edges.empty());
    CHECK(st.nodes_on_gamma.empty());
}

TEST_CASE("checkerboard 2x2") {
    auto t = build_lattice(2, 2, 0.5);
    const auto m = pixels_to_mosaic(pixels(2, 2, {1, 2, 2, 1}), t, 3);
    CHECK(m.active_count() == 4);
    const auto st = analyze(m);
    CHECK(st.n_x == 1);
    CHECK(st.n_v + st.n_t == 0);
    CHECK(st.edges.size() == 4);
    CHECK(st.primary_edges.size() == 2);
    CHECK(st.boundary_vertices == 4);
    CHECK(validate(m).empty());
}

TEST_CASE("left/right split 2x2") {
    auto t = build_lattice(2, 2, 0.5);
    const auto m = pixels_to_mosaic(pixels(2, 2, {1, 2, 1, 2}), t, 3);
    const auto st = analyze(m);
    CHECK(st.n_v == 0);
    CHECK(st.n_t == 0);
    CHECK(st.n_x == 0);
    REQUIRE(st.edges.size() == 1);
    CHECK(st.edges[0].line == 1);
    CHECK(st.edges[0].segments.size() == 2);
    CHECK(st.edges[0].interior_nodes.size() == 1);
    CHECK(st.primary_edges.size() == 1);
    CHECK(st.nodes_on_gamma.size() == 1);
}

TEST_CASE("T and V vertices on 2x2") {
    auto t = build_lattice(2, 2, 0.5);
    // one distinct pixel in a corner: a V vertex
    auto v = analyze(pixels_to_mosaic(pixels(2, 2, {1, 1, 1, 2}), t, 3));
    CHECK(v.n_v == 1);
    CHECK(v.edges.size() == 2);
    CHECK(v.primary_edges.size() == 2);
    // three colours: a T vertex
    auto tt = analyze(pixels_to_mosaic(pixels(2, 2, {1, 2, 3, 3}), t, 3));
    CHECK(tt.n_t == 1);
    CHECK(tt.edges.size() == 3);
    CHECK(tt.primary_edges.size() == 2);
}

TEST_CASE("round trip") {
    auto t = build_lattice(2, 2, 0.5);
    const auto p = pixels(2, 2, {1, 2, 2, 1});
    CHECK(mosaic_to_pixels(pixels_to_mosaic(p, t, 3)) == p);
    const Mosaic empty(t, 3, 2);
    CHECK(mosaic_to_pixels(empty) == pixels(2, 2, {2, 2, 2, 2}));

    Stream rng(derive_key(99, 1));
    for (int trial = 0; trial < 10000; ++trial) {
        const int rows = 1 + static_cast<int>(rng.below(5));
        const int cols = 1 + static_cast<int>(rng.below(5));
        auto lt = build_lattice(rows, cols, 0.5);
        PixelArray q{rows, cols, {}};
        for (int i = 0; i < rows * cols; ++i) q.colours.push_back(1 + static_cast<int>(rng.below(4)));
        const auto m = pixels_to_mosaic(q, lt, 4);
        CHECK(mosaic_to_pixels(m) == q);
        if (trial % 100 == 0) {
            CHECK(validate(m).empty());
            CHECK(pixels_to_mosaic(mosaic_to_pixels(m), lt, 4) == m);
        }
    }
}

TEST_CASE("dimension mismatch and non-lattice") {
    auto t = build_lattice(2, 2, 0.5);
    CHECK_THROWS_AS(pixels_to_mosaic(pixels(2, 3, {1, 1, 1, 1, 1, 1}), t, 3), Error);
    auto g = build_tessellation({Line::from_coefficients(0, 1, 0.3, 0.5, 0.5)}, Domain::rectangle(0, 0, 1, 1));
    try {
        mosaic_to_pixels(Mosaic(g, 3, 1));
        FAIL("expected NotALattice");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotALattice);
    }
}

TEST_CASE("validate reports violations") {
    auto t = build_lattice(2, 2, 0.5);
    // active segment between two cells of the same colour
    auto same = Mosaic::raw(t, 3, {1, 1, 1, 1}, {0});
    auto v = validate(same);
    REQUIRE(!v.empty());
    CHECK(v[0].kind == ViolationKind::AdjacentSameColour);

    // a segment dangling into the node: degree 1 interior vertex
    const auto& node = t->nodes()[0];
    auto dangling = Mosaic::raw(t, 3, {1, 2, 1, 1}, {node.in_i});
    bool bad_degree = false;
    for (const auto& x : validate(dangling)) bad_degree |= x.kind == ViolationKind::BadDegree;
    CHECK(bad_degree);
    CHECK_THROWS_AS(analyze(dangling), Error);
}

TEST_CASE("k=2 exhaustive 3x3 has no T vertex") {
    auto t = build_lattice(3, 3, 0.5);
    for (int s = 0; s < 512; ++s) {
        PixelArray p{3, 3, {}};
        for (int i = 0; i < 9; ++i) p.colours.push_back(1 + ((s >> i) & 1));
        const auto st = analyze(pixels_to_mosaic(p, t, 2));
        CHECK(st.n_t == 0);
        std::size_t seg_total = 0;
        for (const auto& e : st.edges) seg_total += e.segments.size();
        CHECK(seg_total == pixels_to_mosaic(p, t, 2).active_count());
        CHECK(st.primary_edges.size() <= st.edges.size());
        for (std::size_t e = 0; e < st.edges.size(); ++e) {
            const auto& pe = st.primary_edges[static_cast<std::size_t>(st.primary_of_edge[e])];
            CHECK(pe.line == st.edges[e].line);
        }
    }
}
