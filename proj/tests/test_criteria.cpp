#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rwi/criteria.hpp"
#include "rwi/graph.hpp"
#include "rwi/potential.hpp"

using namespace rwi;

namespace {

KilledWeightedGraph two_path() { return build_graph({{0, 1, 1.0}}, {{0, 1.0}, {1, 1.0}}); }

}  // namespace

TEST_CASE("weak criterion vanishes on every family") {
    // biased chain: e_L(+-n) = 2^(n-1) while P[hit 0] = 2^-n, so the terms
    // die once the hitting probability crosses eps
    auto biased = make_exhaustion("biased_z", {2, 3, 4, 5, 6});
    auto trace = weak_criterion(biased, "0", 0.1);
    CHECK(trace.verdict == Verdict::VanishingTrend);
    REQUIRE(trace.records.size() == 5);
    // closed forms: 2 * 2^(n-1) * (2^-n - 0.1)+ at n = 2, 3; zero afterwards
    CHECK(trace.records[0].value == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(trace.records[1].value == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(trace.records[2].value == doctest::Approx(0.0));

    auto tree = make_exhaustion("tree", {2, 3, 4, 5}, 2);
    auto tree_trace = weak_criterion(tree, "r", 0.1);
    CHECK(tree_trace.verdict == Verdict::VanishingTrend);
    // sphere mass 2^n vertices, unit weight each, hitting 2^-n
    CHECK(tree_trace.records[0].value == doctest::Approx(4.0 * 0.15).epsilon(1e-12));

    // eps beyond every probability kills every term
    auto unit = weak_criterion(biased, "0", 1.0);
    for (const auto& rec : unit.records) CHECK(rec.value == doctest::Approx(0.0));

    CHECK_THROWS_AS(weak_criterion(biased, "0", 0.0), std::invalid_argument);
}

TEST_CASE("weak criterion: aux column carries the cap-identity residual") {
    auto biased = make_exhaustion("biased_z", {2, 3, 4});
    auto trace = weak_criterion(biased, "0", 0.3);
    for (const auto& rec : trace.records) CHECK(rec.aux_residual < 1e-10);
}

TEST_CASE("strong criterion: biased chain is bounded below by the crossing mass") {
    auto biased = make_exhaustion("biased_z", {2, 3, 4, 5, 6, 7, 8});
    auto trace = strong_criterion(biased, "0", 0.5);
    CHECK(trace.verdict == Verdict::BoundedBelow);
    // the (-n,+n) and (+n,-n) hinges carry mass 1/4 each with conditional
    // hitting probability exactly 1, giving the floor 2*(1/4)*(1-eps)
    for (const auto& rec : trace.records) CHECK(rec.value >= 0.5 * (1.0 - 0.5) - 1e-9);
    // at the tail the value is exactly the crossing contribution
    CHECK(trace.records.back().value == doctest::Approx(0.25).epsilon(1e-9));

    // crossing hinge mass itself pins to 1/4 at every level
    for (std::size_t li = 0; li < biased.levels.size(); ++li) {
        const auto& level = biased.levels[li];
        auto hm = hinge(level.graph, level.window);
        VertexId lo = biased.vertex_at(li, std::to_string(-level.level));
        VertexId hi = biased.vertex_at(li, std::to_string(level.level));
        CHECK(hm.value(lo, hi) == doctest::Approx(0.25).epsilon(1e-10));
        CHECK(hm.value(hi, lo) == doctest::Approx(0.25).epsilon(1e-10));
    }
}

TEST_CASE("strong criterion: the tree is bounded below as well") {
    // The tree chain is not tail-trivial: hinge pairs with endpoints in the
    // two root subtrees have conditional hitting probability exactly 1 (every
    // tree path between the subtrees crosses the root) and carry total mass
    // 2*(1/4) at every depth, so the sum cannot vanish.
    auto tree = make_exhaustion("tree", {2, 3, 4, 5, 6}, 2);
    auto trace = strong_criterion(tree, "r", 0.3);
    CHECK(trace.verdict == Verdict::BoundedBelow);
    for (const auto& rec : trace.records) CHECK(rec.value >= 0.5 * (1.0 - 0.3) - 1e-9);
    // value is flat across depths: only the depth-0 and depth-1 junctions
    // survive eps = 0.3, and their masses are level-independent
    CHECK(trace.records.front().value ==
          doctest::Approx(trace.records.back().value).epsilon(1e-9));
}

TEST_CASE("short exhaustions stay inconclusive") {
    auto two = make_exhaustion("biased_z", {2, 3});
    CHECK(strong_criterion(two, "0", 0.3).verdict == Verdict::Inconclusive);
    CHECK(atom_flow(two, Direction::ToMinusInfinity, Direction::ToPlusInfinity).verdict ==
          Verdict::Inconclusive);
}

TEST_CASE("strong criterion: eps at or above one empties the sum") {
    auto biased = make_exhaustion("biased_z", {2, 3, 4});
    auto trace = strong_criterion(biased, "0", 1.0);
    for (const auto& rec : trace.records) CHECK(rec.value == doctest::Approx(0.0));
}

TEST_CASE("cap identity holds along exhaustions") {
    // hand value on the two-vertex path: 1*1 + 1*(1/2) = 3/2 = cap({u})
    auto path = two_path();
    auto prof = equilibrium(path, VertexSet({0, 1}));
    auto hit = hitting(path, VertexSet({0}));
    double acc = 0.0;
    for (VertexId v : prof.boundary) acc += prof.e[v] * hit.probability[v];
    CHECK(acc == doctest::Approx(1.5).epsilon(1e-12));

    for (const auto& family :
         {make_exhaustion("biased_z", {2, 3, 4, 5}), make_exhaustion("tree", {1, 2, 3}, 2)}) {
        std::string x = family.family == "tree" ? "r" : "0";
        for (double r : cap_identity(family, x)) CHECK(r < 1e-10);
    }

    auto biased = make_exhaustion("biased_z", {2, 3});
    CHECK_THROWS_AS(cap_identity(biased, "-9"), std::invalid_argument);
}

TEST_CASE("atom flow: the crossing count is a nontrivial invariant") {
    auto biased = make_exhaustion("biased_z", {1, 2, 3, 4, 5});
    auto lr = atom_flow(biased, Direction::ToMinusInfinity, Direction::ToPlusInfinity);
    CHECK(lr.verdict == Verdict::FiniteLimit);
    CHECK(lr.nontrivial_flow);  // 0 < 1/4 < infinity: the zero-one law fails
    for (const auto& rec : lr.records) CHECK(rec.value == doctest::Approx(0.25).epsilon(1e-10));

    auto rr = atom_flow(biased, Direction::ToPlusInfinity, Direction::ToPlusInfinity);
    CHECK(rr.verdict == Verdict::Diverging);
    // restriction monotonicity for every atom pair
    for (auto A : {Direction::ToMinusInfinity, Direction::ToPlusInfinity})
        for (auto B : {Direction::ToMinusInfinity, Direction::ToPlusInfinity}) {
            auto t = atom_flow(biased, A, B);
            for (std::size_t i = 1; i < t.records.size(); ++i)
                CHECK(t.records[i].value >= t.records[i - 1].value - 1e-12);
        }

    auto tree = make_exhaustion("tree", {1, 2}, 2);
    CHECK_THROWS_AS(atom_flow(tree, Direction::ToMinusInfinity, Direction::ToPlusInfinity),
                    std::invalid_argument);
}

TEST_CASE("singleton hinge identity") {
    auto path = two_path();
    CHECK(hinge_identity_check(path, VertexSet({0, 1}), 0) < 1e-12);

    auto bz = make_biased_z(3).graph;
    std::vector<VertexId> lv;
    for (int c = -2; c <= 2; ++c) lv.push_back(bz.vertex_by_label(std::to_string(c)));
    CHECK(hinge_identity_check(bz, VertexSet(lv), bz.vertex_by_label("0")) < 1e-10);

    auto tree = make_regular_tree(2, 3);
    std::vector<VertexId> ball;
    for (std::size_t v = 0; v < tree.size(); ++v) {
        const auto& lab = tree.label(static_cast<VertexId>(v));
        if (std::count(lab.begin(), lab.end(), '.') <= 2)
            ball.push_back(static_cast<VertexId>(v));
    }
    CHECK(hinge_identity_check(tree, VertexSet(ball), tree.vertex_by_label("r")) < 1e-10);

    CHECK_THROWS_AS(hinge_identity_check(path, VertexSet({0}), 1), std::invalid_argument);
}

TEST_CASE("tilted last-exit law is a probability") {
    auto bz = make_biased_z(3).graph;
    std::vector<VertexId> lv;
    for (int c = -2; c <= 2; ++c) lv.push_back(bz.vertex_by_label(std::to_string(c)));
    PotentialSolver solver(bz);
    auto law = solver.last_exit_given_no_return(VertexSet(lv), bz.vertex_by_label("0"));
    CHECK(law.total() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("trace serialization") {
    auto biased = make_exhaustion("biased_z", {2, 3, 4, 5});
    auto trace = weak_criterion(biased, "0", 0.3);

    std::ostringstream csv;
    trace.write_csv(csv);
    const std::string text = csv.str();
    CHECK(text.rfind("level,eps,value,cap,aux_residual", 0) == 0);
    std::size_t lines = std::count(text.begin(), text.end(), '\n');
    CHECK(lines == trace.records.size() + 1);

    std::ostringstream report;
    trace.write_report(report);
    CHECK(report.str().find("verdict vanishing-trend") != std::string::npos);
    CHECK(report.str().find("vanish_threshold") != std::string::npos);
}
