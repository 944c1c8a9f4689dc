#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rwi/graph.hpp"
#include "rwi/potential.hpp"
#include "rwi/rng.hpp"

using namespace rwi;

namespace {

// Monte Carlo oracle for the exterior collapse: excursion of a birth-death
// walk with outward probability p, started one step out; returns the
// frequency of coming back before drifting `horizon` steps away.
double excursion_return_frequency(double p_out, long n, int horizon, std::uint64_t seed) {
    RngStream rng(seed, 9);
    long returned = 0;
    for (long i = 0; i < n; ++i) {
        int depth = 1;
        while (depth > 0 && depth < horizon) depth += rng.uniform() < p_out ? 1 : -1;
        if (depth == 0) ++returned;
    }
    return static_cast<double>(returned) / static_cast<double>(n);
}

}  // namespace

TEST_CASE("build_graph: definitional cases") {
    // single absorbing vertex
    auto g1 = build_graph({}, {{0, 1.0}});
    CHECK(g1.size() == 1);
    CHECK(g1.total_weight(0) == doctest::Approx(1.0));
    CHECK(g1.kill_probability(0) == doctest::Approx(1.0));

    // two-vertex path with unit kills
    auto g2 = build_graph({{0, 1, 1.0}}, {{0, 1.0}, {1, 1.0}});
    CHECK(g2.total_weight(0) == doctest::Approx(2.0));
    CHECK(g2.transition_probability(0, 1) == doctest::Approx(0.5));
    CHECK(g2.kill_probability(1) == doctest::Approx(0.5));
}

TEST_CASE("build_graph: rejects bad inputs") {
    CHECK_THROWS_WITH_AS(build_graph({{0, 1, 1.0}, {1, 0, 2.0}}, {{0, 1.0}}),
                         doctest::Contains("asymmetric duplicate"), std::invalid_argument);
    CHECK_THROWS_AS(build_graph({{0, 1, 1.0}, {1, 0, 1.0}}, {{0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(build_graph({{0, 1, -1.0}}, {{0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(build_graph({{0, 1, 0.0}}, {{0, 1.0}}), std::invalid_argument);
    // disconnected: two components
    CHECK_THROWS_WITH_AS(build_graph({{0, 1, 1.0}, {2, 3, 1.0}}, {{0, 1.0}}),
                         doctest::Contains("not connected"), std::invalid_argument);
    // no absorption anywhere
    CHECK_THROWS_WITH_AS(build_graph({{0, 1, 1.0}}, {}), doctest::Contains("kill"),
                         std::invalid_argument);
}

TEST_CASE("biased chain: structure and collapse weights") {
    auto bz = make_biased_z(1);
    CHECK(bz.exterior_return_prob == doctest::Approx(0.5));
    const auto& g = bz.graph;
    CHECK(g.size() == 3);
    VertexId zero = g.vertex_by_label("0");
    CHECK(g.total_weight(zero) == doctest::Approx(2.0));
    CHECK(g.transition_probability(zero, g.vertex_by_label("1")) == doctest::Approx(0.5));
    CHECK(g.transition_probability(zero, g.vertex_by_label("-1")) == doctest::Approx(0.5));
    // collapsed boundary: outward weight 2 splits evenly
    VertexId right = g.vertex_by_label("1");
    CHECK(g.self_loop_weight(right) == doctest::Approx(1.0));
    CHECK(g.kill_weight(right) == doctest::Approx(1.0));
    CHECK(g.total_weight(right) == doctest::Approx(3.0));
    CHECK(g.ends().has_value());

    CHECK_THROWS_AS(make_biased_z(0), std::invalid_argument);
}

TEST_CASE("biased chain: escape probability from 0 matches gambler's ruin") {
    // closed form: 2 * (1/2) * (1 - q/p) with p = 2/3
    const double closed_form = 2.0 * 0.5 * (1.0 - 0.5);
    auto bz = make_biased_z(2);
    VertexId zero = bz.graph.vertex_by_label("0");
    auto esc = escape_probability(bz.graph, VertexSet({zero}));
    CHECK(esc[zero] == doctest::Approx(closed_form).epsilon(1e-12));
}

TEST_CASE("biased chain: exterior return probability against MC excursions") {
    double freq = excursion_return_frequency(2.0 / 3.0, 100000, 60, 42);
    double se = std::sqrt(0.5 * 0.5 / 100000.0);
    CHECK(std::abs(freq - 0.5) < 4.0 * se);
}

TEST_CASE("regular tree: structure and collapse weights") {
    auto g = make_regular_tree(2, 1);
    CHECK(g.size() == 3);
    VertexId leaf = g.vertex_by_label("r.0");
    // outward weight 2 splits into kill 2*(1-1/2) and self-loop 2*(1/2)
    CHECK(g.kill_weight(leaf) == doctest::Approx(1.0));
    CHECK(g.self_loop_weight(leaf) == doctest::Approx(1.0));
    CHECK(g.total_weight(leaf) == doctest::Approx(3.0));

    CHECK(make_regular_tree(3, 2).size() == 13);
    CHECK_THROWS_AS(make_regular_tree(2, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_regular_tree(1, 2), std::invalid_argument);
}

TEST_CASE("regular tree: collapse return probability against MC excursions") {
    // depth-walk below a leaf of the b-ary tree escapes with bias b/(b+1)
    for (int b : {2, 3}) {
        double p_out = static_cast<double>(b) / (b + 1.0);
        double expected = 1.0 / b;
        double freq = excursion_return_frequency(p_out, 100000, 60, 17 + b);
        double se = std::sqrt(expected * (1.0 - expected) / 100000.0);
        CHECK(std::abs(freq - expected) < 4.0 * se);
    }
}

TEST_CASE("lattice box: halo and capacity trend") {
    auto g0 = make_lattice_box(3, 0);
    CHECK(g0.size() == 1);
    CHECK(g0.kill_weight(0) == doctest::Approx(6.0));
    CHECK(equilibrium(g0, VertexSet({0})).capacity == doctest::Approx(6.0));

    CHECK_THROWS_AS(make_lattice_box(2, 3), std::invalid_argument);

    // cap({0}) decreases with the radius toward the infinite-lattice value
    // 6*(1 - 0.340537...) ~ 3.9568; Richardson in 1/R pins it to ~2e-2
    auto cap_at = [](int radius) {
        auto g = make_lattice_box(3, radius);
        VertexId origin = g.vertex_by_label("(0,0,0)");
        return equilibrium(g, VertexSet({origin})).capacity;
    };
    double cap5 = cap_at(5), cap10 = cap_at(10);
    const double infinite_value = 6.0 * (1.0 - 0.3405373296);
    CHECK(cap10 < cap5);
    CHECK(cap10 > infinite_value);
    double extrapolated = 2.0 * cap10 - cap5;
    CHECK(std::abs(extrapolated - infinite_value) < 0.02);
}

TEST_CASE("row sums: transition probabilities plus kill equal one") {
    std::vector<KilledWeightedGraph> graphs;
    graphs.push_back(make_biased_z(4).graph);
    graphs.push_back(make_regular_tree(3, 3));
    graphs.push_back(make_lattice_box(3, 2));
    for (const auto& g : graphs) {
        for (std::size_t v = 0; v < g.size(); ++v) {
            VertexId x = static_cast<VertexId>(v);
            double total = g.kill_probability(x);
            for (const auto& [y, w] : g.neighbors(x)) total += w / g.total_weight(x);
            CHECK(std::abs(total - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("exterior collapse is exact across truncation radii") {
    // hitting probabilities of {0} agree between the radius-4 and radius-7
    // graphs on the common window
    auto small = make_biased_z(4).graph;
    auto large = make_biased_z(7).graph;
    auto hs = hitting(small, VertexSet({small.vertex_by_label("0")}));
    auto hl = hitting(large, VertexSet({large.vertex_by_label("0")}));
    for (int c = -4; c <= 4; ++c) {
        VertexId vs = small.vertex_by_label(std::to_string(c));
        VertexId vl = large.vertex_by_label(std::to_string(c));
        CHECK(std::abs(hs.probability[vs] - hl.probability[vl]) < 1e-10);
    }
}

TEST_CASE("tree collapse is exact across truncation depths") {
    auto small = make_regular_tree(2, 2);
    auto large = make_regular_tree(2, 4);
    auto hs = hitting(small, VertexSet({small.vertex_by_label("r")}));
    auto hl = hitting(large, VertexSet({large.vertex_by_label("r")}));
    for (std::size_t v = 0; v < small.size(); ++v) {
        const std::string& lab = small.label(static_cast<VertexId>(v));
        VertexId vl = large.vertex_by_label(lab);
        REQUIRE(vl >= 0);
        CHECK(std::abs(hs.probability[v] - hl.probability[vl]) < 1e-10);
    }
}

TEST_CASE("lattice capacity is non-increasing under radius doubling") {
    auto cap_at = [](int radius) {
        auto g = make_lattice_box(3, radius);
        VertexId origin = g.vertex_by_label("(0,0,0)");
        return equilibrium(g, VertexSet({origin})).capacity;
    };
    CHECK(cap_at(4) <= cap_at(2) + 1e-12);
    CHECK(cap_at(8) <= cap_at(4) + 1e-12);
}

TEST_CASE("exhaustions: construction and validation") {
    auto biased = make_exhaustion("biased_z", {1, 2, 3});
    REQUIRE(biased.levels.size() == 3);
    CHECK(biased.levels[0].window.size() == 3);
    CHECK(biased.levels[2].window.size() == 7);
    for (std::size_t i = 1; i < biased.levels.size(); ++i)
        CHECK(biased.levels[i].window.size() > biased.levels[i - 1].window.size());
    CHECK(biased.vertex_at(1, "0") >= 0);

    auto tree = make_exhaustion("tree", {1, 2}, 2);
    CHECK(tree.levels[0].window.size() == 3);
    CHECK(tree.levels[1].window.size() == 7);

    CHECK_THROWS_AS(make_exhaustion("biased_z", {2, 1}), std::invalid_argument);
    CHECK_THROWS_AS(make_exhaustion("nope", {1, 2}), std::invalid_argument);
}

TEST_CASE("graph files: round trip preserves weights exactly") {
    auto bz = make_biased_z(3).graph;
    std::stringstream buf;
    save_graph(bz, buf);
    auto loaded = load_graph(buf);
    REQUIRE(loaded.size() == bz.size());
    for (std::size_t v = 0; v < bz.size(); ++v) {
        VertexId x = static_cast<VertexId>(v);
        CHECK(loaded.kill_weight(x) == bz.kill_weight(x));
        CHECK(loaded.self_loop_weight(x) == bz.self_loop_weight(x));
        CHECK(loaded.total_weight(x) == bz.total_weight(x));
        CHECK(loaded.label(x) == bz.label(x));
    }
    REQUIRE(loaded.ends().has_value());
    CHECK(loaded.ends()->first == bz.ends()->first);

    // awkward but representable weights survive the 17-digit round trip
    auto g = build_graph({{0, 1, 1.0 / 3.0}, {1, 2, std::nextafter(2.0, 3.0)}},
                         {{0, 0.1}, {2, 1e-7}});
    std::stringstream buf2;
    save_graph(g, buf2);
    auto loaded2 = load_graph(buf2);
    CHECK(loaded2.edge_weight(0, 1) == 1.0 / 3.0);
    CHECK(loaded2.edge_weight(1, 2) == std::nextafter(2.0, 3.0));
    CHECK(loaded2.kill_weight(2) == 1e-7);
}

TEST_CASE("graph files: loader diagnostics") {
    std::stringstream no_header("edge 0 1 1.0\n");
    CHECK_THROWS_AS(load_graph(no_header), std::runtime_error);
    std::stringstream bad("vertices 2\nedge 0 x 1.0\n");
    CHECK_THROWS_AS(load_graph(bad), std::runtime_error);
    std::stringstream with_comments("# a comment\nvertices 2\nedge 0 1 1.5\nkill 0 2.0\n");
    auto g = load_graph(with_comments);
    CHECK(g.edge_weight(0, 1) == 1.5);
    CHECK(g.kill_weight(0) == 2.0);
}
