#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rwi/graph.hpp"
#include "rwi/potential.hpp"
#include "rwi/rng.hpp"
#include "rwi/sampler.hpp"

using namespace rwi;

namespace {

KilledWeightedGraph two_path() { return build_graph({{0, 1, 1.0}}, {{0, 1.0}, {1, 1.0}}); }

KilledWeightedGraph random8(std::uint64_t seed) {
    RngStream rng(seed, 3);
    std::vector<WeightedEdge> edges;
    for (int i = 0; i < 8; ++i)
        edges.push_back({static_cast<VertexId>(i), static_cast<VertexId>((i + 1) % 8),
                         rng.uniform(0.5, 2.0)});
    edges.push_back({0, 4, rng.uniform(0.5, 2.0)});
    edges.push_back({2, 6, rng.uniform(0.5, 2.0)});
    return build_graph(edges, {{1, rng.uniform(0.5, 1.5)}, {5, rng.uniform(0.5, 1.5)}});
}

VertexSet tree_ball(const KilledWeightedGraph& g, int depth) {
    std::vector<VertexId> ids;
    for (std::size_t v = 0; v < g.size(); ++v) {
        const auto& lab = g.label(static_cast<VertexId>(v));
        if (std::count(lab.begin(), lab.end(), '.') <= depth)
            ids.push_back(static_cast<VertexId>(v));
    }
    return VertexSet(std::move(ids));
}

}  // namespace

TEST_CASE("escape probabilities on the two-vertex path") {
    auto g = build_graph({}, {{0, 1.0}});
    CHECK(escape_probability(g, VertexSet({0}))[0] == doctest::Approx(1.0));

    auto path = two_path();
    // first-step analysis: 1/2 kill + 1/2 * 1/2 absorbed from the far side
    auto esc_u = escape_probability(path, VertexSet({0}));
    CHECK(esc_u[0] == doctest::Approx(0.75).epsilon(1e-13));
    auto esc_uv = escape_probability(path, VertexSet({0, 1}));
    CHECK(esc_uv[0] == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(esc_uv[1] == doctest::Approx(0.5).epsilon(1e-13));

    CHECK_THROWS_AS(escape_probability(path, VertexSet{}), std::invalid_argument);
}

TEST_CASE("equilibrium measures and capacities") {
    auto g = build_graph({}, {{0, 1.0}});
    CHECK(equilibrium(g, VertexSet({0})).capacity == doctest::Approx(1.0));

    auto path = two_path();
    auto one = equilibrium(path, VertexSet({0}));
    auto both = equilibrium(path, VertexSet({0, 1}));
    CHECK(one.capacity == doctest::Approx(1.5).epsilon(1e-13));
    CHECK(both.capacity == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(one.capacity <= both.capacity + 1e-12);
    CHECK(both.boundary.size() == 2);
    CHECK(one.harmonic.mass(0) == doctest::Approx(1.0));
}

TEST_CASE("hitting probabilities and entry laws") {
    auto bz = make_biased_z(7).graph;
    VertexId zero = bz.vertex_by_label("0");
    auto hit = hitting(bz, VertexSet({zero}));
    CHECK(hit.probability[zero] == doctest::Approx(1.0));
    CHECK(hit.entry_distribution(zero).mass(zero) == doctest::Approx(1.0));
    // gambler's ruin: P_n[hit 0] = (q/p)^n = 2^-n
    for (int n : {1, 2, 3, 5}) {
        VertexId v = bz.vertex_by_label(std::to_string(n));
        CHECK(hit.probability[v] == doctest::Approx(std::ldexp(1.0, -n)).epsilon(1e-11));
    }
    // entry mass accounts for the full hitting probability
    VertexId three = bz.vertex_by_label("3");
    CHECK(hit.entry_distribution(three).total() ==
          doctest::Approx(hit.probability[three]).epsilon(1e-12));
}

TEST_CASE("green matrix values and reversibility") {
    auto g = build_graph({}, {{0, 1.0}});
    CHECK(greens(g).g(0, 0) == doctest::Approx(1.0));

    auto path = two_path();
    auto gm = greens(path);
    // return probability 1/4 gives the geometric series 4/3
    CHECK(gm.g(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-13));
    CHECK(gm.g(0, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-13));

    for (const auto& graph : {make_biased_z(3).graph, make_regular_tree(2, 3), random8(5)}) {
        auto green = greens(graph);
        double worst = 0.0;
        for (std::size_t x = 0; x < graph.size(); ++x)
            for (std::size_t y = 0; y < graph.size(); ++y)
                worst = std::max(worst,
                                 std::abs(graph.total_weight(static_cast<VertexId>(x)) *
                                              green.g(static_cast<long>(x), static_cast<long>(y)) -
                                          graph.total_weight(static_cast<VertexId>(y)) *
                                              green.g(static_cast<long>(y), static_cast<long>(x))));
        CHECK(worst < 1e-10);
        for (std::size_t x = 0; x < graph.size(); ++x)
            CHECK(green.g(static_cast<long>(x), static_cast<long>(x)) >= 1.0 - 1e-12);
    }

    SolverOptions tiny;
    tiny.dense_limit = 2;
    CHECK_THROWS_AS(greens(make_biased_z(2).graph, tiny), std::invalid_argument);
}

TEST_CASE("last-exit distribution: exact values and MC frequencies") {
    auto path = two_path();
    VertexSet both({0, 1});
    auto law = last_exit_distribution(path, both, 0);
    CHECK(law.mass(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
    CHECK(law.mass(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK(law.total() == doctest::Approx(1.0).epsilon(1e-12));  // x inside L

    auto singleton = last_exit_distribution(path, VertexSet({1}), 0);
    CHECK(singleton.mass(1) == doctest::Approx(singleton.total()));

    // Monte Carlo last-visit frequencies as the independent oracle
    ForwardSampler forward(path);
    RngStream rng(11, 0);
    const long n = 100000;
    long at_u = 0;
    for (long i = 0; i < n; ++i) {
        auto p = forward.sample(0, rng);
        for (std::size_t k = p.vertices.size(); k-- > 0;)
            if (both.contains(p.vertices[k])) {
                if (p.vertices[k] == 0) ++at_u;
                break;
            }
    }
    double freq = static_cast<double>(at_u) / n;
    double se = std::sqrt((2.0 / 3.0) * (1.0 / 3.0) / n);
    CHECK(std::abs(freq - 2.0 / 3.0) < 4.0 * se);
}

TEST_CASE("hinge measure: exact values, symmetry, marginals") {
    auto g = build_graph({}, {{0, 1.0}});
    auto single = hinge(g, VertexSet({0}));
    CHECK(single.value(0, 0) == doctest::Approx(1.0));  // cap of the singleton

    auto path = two_path();
    auto hm = hinge(path, VertexSet({0, 1}));
    CHECK(hm.value(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
    CHECK(hm.value(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK(hm.value(1, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    // row sum equals the equilibrium weight
    CHECK(hm.value(0, 0) + hm.value(0, 1) == doctest::Approx(1.0).epsilon(1e-12));

    // MC oracle for the hinge frequencies
    WindowSampler sampler(path, VertexSet({0, 1}));
    RngStream rng(12, 0);
    const long n = 100000;
    std::map<std::pair<VertexId, VertexId>, long> freq;
    long total = 0;
    for (long i = 0; i < n; ++i) {
        auto s = sampler.sample(rng);
        for (const auto& t : s.trajectories) {
            ++freq[hinge_couple(t, s.window)];
            ++total;
        }
    }
    for (auto [couple, expected] : std::vector<std::pair<std::pair<VertexId, VertexId>, double>>{
             {{0, 0}, 1.0 / 3.0}, {{0, 1}, 1.0 / 6.0}, {{1, 0}, 1.0 / 6.0}, {{1, 1}, 1.0 / 3.0}}) {
        double got = static_cast<double>(freq[couple]) / total;
        double se = std::sqrt(expected * (1 - expected) / total);
        CHECK(std::abs(got - expected) < 4.0 * se);
    }
}

TEST_CASE("hinge invariants across the corpus") {
    struct Entry {
        KilledWeightedGraph graph;
        VertexSet window;
    };
    std::vector<Entry> corpus;
    corpus.push_back({two_path(), VertexSet({0, 1})});
    {
        auto g = make_biased_z(3).graph;
        std::vector<VertexId> w;
        for (int c = -1; c <= 1; ++c) w.push_back(g.vertex_by_label(std::to_string(c)));
        corpus.push_back({std::move(g), VertexSet(w)});
    }
    corpus.push_back({make_regular_tree(2, 3), tree_ball(make_regular_tree(2, 3), 1)});
    corpus.push_back({random8(5), VertexSet({0, 1, 2})});

    for (const auto& [graph, window] : corpus) {
        auto prof = equilibrium(graph, window);
        auto hm = hinge(graph, window);
        CHECK(hm.max_asymmetry() <= 1e-10 * std::max(1.0, prof.capacity));
        CHECK(std::abs(hm.total() - prof.capacity) < 1e-10);
        for (std::size_t i = 0; i < hm.boundary.size(); ++i)
            CHECK(std::abs(hm.h.row(static_cast<long>(i)).sum() - prof.e[hm.boundary[i]]) <
                  1e-10);
    }
}

TEST_CASE("consistency pushforward equals the inner equilibrium measure") {
    auto path = two_path();
    VertexSet u({0}), uv({0, 1});
    auto push = consistency_pushforward(path, u, uv);
    CHECK(push[0] == doctest::Approx(1.5).epsilon(1e-12));  // cap({u})

    // K = L is the identity
    auto self = consistency_pushforward(path, uv, uv);
    auto e = equilibrium(path, uv);
    CHECK(self[0] == doctest::Approx(e.e[0]).epsilon(1e-12));
    CHECK(self[1] == doctest::Approx(e.e[1]).epsilon(1e-12));

    auto bz = make_biased_z(3).graph;
    VertexSet k({bz.vertex_by_label("0")});
    std::vector<VertexId> lv;
    for (int c = -1; c <= 1; ++c) lv.push_back(bz.vertex_by_label(std::to_string(c)));
    auto push_bz = consistency_pushforward(bz, k, VertexSet(lv));
    auto ek = equilibrium(bz, k);
    for (VertexId v : k) CHECK(std::abs(push_bz[v] - ek.e[v]) < 1e-10);

    CHECK_THROWS_AS(consistency_pushforward(path, uv, u), std::invalid_argument);
}

TEST_CASE("harmonic hitting ratio: P_harm_L[hit K] = cap(K) / cap(L)") {
    auto bz = make_biased_z(4).graph;
    VertexSet K({bz.vertex_by_label("0")});
    std::vector<VertexId> lv;
    for (int c = -2; c <= 2; ++c) lv.push_back(bz.vertex_by_label(std::to_string(c)));
    VertexSet L(lv);
    auto prof_L = equilibrium(bz, L);
    auto prof_K = equilibrium(bz, K);
    auto hit = hitting(bz, K);
    double acc = 0.0;
    for (const auto& [x, w] : prof_L.harmonic.entries())
        acc += w * hit.probability[static_cast<VertexId>(x)];
    CHECK(acc == doctest::Approx(prof_K.capacity / prof_L.capacity).epsilon(1e-12));
}

TEST_CASE("capacity is monotone under set inclusion") {
    auto g = random8(5);
    VertexSet a({0}), b({0, 2}), c({0, 2, 4, 6});
    double ca = equilibrium(g, a).capacity;
    double cb = equilibrium(g, b).capacity;
    double cc = equilibrium(g, c).capacity;
    CHECK(ca <= cb + 1e-12);
    CHECK(cb <= cc + 1e-12);
}

TEST_CASE("conditional hitting given the last exit point") {
    auto bz = make_biased_z(6).graph;
    std::vector<VertexId> lv;
    for (int c = -4; c <= 4; ++c) lv.push_back(bz.vertex_by_label(std::to_string(c)));
    VertexSet L(lv);
    VertexId zero = bz.vertex_by_label("0");
    // from x itself the value is 1
    CHECK(conditional_hit_given_last_exit(bz, L, zero, zero, bz.vertex_by_label("4")) ==
          doctest::Approx(1.0));
    // a path from -n whose last window visit is +n has to cross 0
    CHECK(conditional_hit_given_last_exit(bz, L, zero, bz.vertex_by_label("-4"),
                                          bz.vertex_by_label("4")) ==
          doctest::Approx(1.0).epsilon(1e-10));

    // sibling leaves: the value sits below the 2^-(n-1) scale and decreases
    double previous = 1.0;
    for (int n : {2, 3, 4}) {
        auto g = make_regular_tree(2, n + 2);
        VertexSet ball = tree_ball(g, n);
        std::string base = "r";
        for (int d = 1; d < n; ++d) base += ".0";
        double value = conditional_hit_given_last_exit(g, ball, g.vertex_by_label("r"),
                                                       g.vertex_by_label(base + ".0"),
                                                       g.vertex_by_label(base + ".1"));
        CHECK(value < std::ldexp(1.0, -(n - 1)));
        CHECK(value < previous);
        previous = value;
    }
}

TEST_CASE("restricted equilibrium: direction atoms on the biased chain") {
    const double closed_form = 0.25;  // 2 * (1/4) * (1/2)
    for (int radius : {8, 10}) {
        auto bz = make_biased_z(radius).graph;
        VertexSet k({bz.vertex_by_label("0")});
        auto lr = restricted_equilibrium(bz, k, Direction::ToMinusInfinity,
                                         Direction::ToPlusInfinity);
        CHECK(std::abs(lr.capacity - closed_form) < 1e-10);
        // same value for ++ by the symmetry of this chain
        auto rr = restricted_equilibrium(bz, k, Direction::ToPlusInfinity,
                                         Direction::ToPlusInfinity);
        CHECK(std::abs(rr.capacity - closed_form) < 1e-10);
    }

    // one-sided windows: cap_{+ -> +} grows as the window eats the drift
    auto bz = make_biased_z(8).graph;
    double prev = 0.0;
    for (int n : {0, 1, 2, 3}) {
        std::vector<VertexId> w;
        for (int c = 0; c <= n; ++c) w.push_back(bz.vertex_by_label(std::to_string(c)));
        auto r = restricted_equilibrium(bz, VertexSet(w), Direction::ToPlusInfinity,
                                        Direction::ToPlusInfinity);
        CHECK(r.capacity > prev);
        prev = r.capacity;
    }

    CHECK_THROWS_AS(
        restricted_equilibrium(two_path(), VertexSet({0}), Direction::ToMinusInfinity,
                               Direction::ToPlusInfinity),
        std::invalid_argument);
}

TEST_CASE("flow energies bound twice the inverse capacity") {
    auto path = two_path();
    VertexSet K({0});
    const double cap = equilibrium(path, K).capacity;  // 3/2

    // the half-and-half flow from the worked example
    Flow split;
    split.set(0, kGhost, 0.5);
    split.set(0, 1, 0.5);
    split.set(1, kGhost, 0.5);
    double energy = flow_energy_bound(path, K, split);
    CHECK(energy == doctest::Approx(1.5).epsilon(1e-13));
    CHECK(energy >= 2.0 / cap - 1e-10);

    // the harmonic flow attains the bound
    Flow best = harmonic_flow(path, K);
    CHECK(flow_energy_bound(path, K, best) == doctest::Approx(2.0 / cap).epsilon(1e-8));

    // violations are reported specifically
    Flow bad_div;
    bad_div.set(0, 1, 1.0);  // vertex 1 accumulates flow
    CHECK_THROWS_WITH_AS(flow_energy_bound(path, K, bad_div),
                         doctest::Contains("divergence"), std::invalid_argument);

    Flow bad_total;
    bad_total.set(0, kGhost, 0.25);
    CHECK_THROWS_WITH_AS(flow_energy_bound(path, K, bad_total), doctest::Contains("total"),
                         std::invalid_argument);

    Flow bad_edge;
    bad_edge.set(0, 7, 1.0);
    CHECK_THROWS_AS(flow_energy_bound(path, K, bad_edge), std::invalid_argument);

    Flow bad_internal;
    bad_internal.set(0, 1, 0.5);
    bad_internal.set(0, kGhost, 0.5);
    bad_internal.set(1, kGhost, 0.5);
    CHECK_THROWS_WITH_AS(flow_energy_bound(path, VertexSet({0, 1}), bad_internal),
                         doctest::Contains("internal"), std::invalid_argument);
}

TEST_CASE("harmonic flow is optimal among valid flows") {
    auto g = random8(5);
    VertexSet K({0});
    const double cap = equilibrium(g, K).capacity;
    Flow base = harmonic_flow(g, K);
    CHECK(flow_energy_bound(g, K, base) == doctest::Approx(2.0 / cap).epsilon(1e-8));

    // cycle perturbations stay valid and can only raise the energy
    RngStream rng(99, 0);
    for (int trial = 0; trial < 20; ++trial) {
        Flow perturbed = base;
        double delta = rng.uniform(-0.3, 0.3);
        for (int i = 0; i < 8; ++i) {
            VertexId u = static_cast<VertexId>(i), v = static_cast<VertexId>((i + 1) % 8);
            perturbed.set(u, v, base.get(u, v) + delta);
        }
        double energy = flow_energy_bound(g, K, perturbed);
        CHECK(energy >= 2.0 / cap - 1e-10);
    }
}
