#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rwi/config.hpp"
#include "rwi/graph.hpp"
#include "rwi/stats.hpp"

using namespace rwi;

namespace {

ExperimentConfig cfg(std::initializer_list<std::pair<const std::string, std::string>> kv) {
    return ExperimentConfig(std::map<std::string, std::string>(kv));
}

std::string strip_timing(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("wall_seconds", 0) != 0) out << line << "\n";
    return out.str();
}

}  // namespace

TEST_CASE("config parsing: flat key-value lines") {
    std::istringstream in(
        "# experiment\n"
        "op vacancy\n"
        "graph biased_z\n"
        "radius 3   # trailing comment\n"
        "K 0\n"
        "samples 1000\n"
        "levels 1,2,3\n");
    auto c = ExperimentConfig::parse(in);
    CHECK(c.get("op") == "vacancy");
    CHECK(c.integer("radius") == 3);
    CHECK(c.integer_or("seed", 7) == 7);
    CHECK(c.list("levels") == std::vector<std::string>{"1", "2", "3"});
    CHECK_THROWS_AS(c.get("missing"), std::runtime_error);

    std::istringstream bad("key_without_value\n");
    CHECK_THROWS_AS(ExperimentConfig::parse(bad), std::runtime_error);
}

TEST_CASE("config graph materialization") {
    auto g = graph_from_config(cfg({{"graph", "biased_z"}, {"radius", "2"}}));
    CHECK(g.size() == 5);
    auto K = set_from_config(cfg({{"graph", "x"}, {"K", "-1,0,1"}}), g, "K");
    CHECK(K.size() == 3);
    CHECK_THROWS_AS(graph_from_config(cfg({{"graph", "heptagon"}})), std::runtime_error);
}

TEST_CASE("vacancy test against exact references") {
    // single vertex: cap 1 so the reference is e^-1
    auto r1 = vacancy_test(cfg({{"graph", "lattice"},
                                {"radius", "0"},
                                {"dimension", "3"},
                                {"K", "(0,0,0)"},
                                {"samples", "20000"},
                                {"seed", "5"}}));
    CHECK(r1.reference == doctest::Approx(std::exp(-6.0)).epsilon(1e-12));
    CHECK(r1.pass);

    // biased chain, K = {0}: cap 1
    auto r2 = vacancy_test(cfg({{"graph", "biased_z"},
                                {"radius", "3"},
                                {"K", "0"},
                                {"samples", "20000"},
                                {"seed", "6"}}));
    CHECK(r2.reference == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(r2.pass);

    // level u = 2 scales the rate
    auto r3 = vacancy_test(cfg({{"graph", "biased_z"},
                                {"radius", "3"},
                                {"K", "0"},
                                {"level", "2"},
                                {"samples", "20000"},
                                {"seed", "7"}}));
    CHECK(r3.reference == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
    CHECK(r3.pass);
}

TEST_CASE("fkg test: catalog pairs") {
    // f = g = single-vertex indicator carries its exact Bernoulli variance
    auto r = fkg_test(cfg({{"graph", "biased_z"},
                           {"radius", "3"},
                           {"K", "0"},
                           {"f", "contains:0"},
                           {"g", "contains:0"},
                           {"samples", "20000"},
                           {"seed", "8"}}));
    double p = 1.0 - std::exp(-1.0);
    CHECK(r.reference == doctest::Approx(p * (1.0 - p)).epsilon(1e-12));
    CHECK(r.pass);

    // a constant functional has zero covariance with anything
    auto rc = fkg_test(cfg({{"graph", "biased_z"},
                            {"radius", "3"},
                            {"K", "-1,0,1"},
                            {"f", "min_visits:-1+1"},
                            {"g", "one"},
                            {"samples", "10000"},
                            {"seed", "9"}}));
    CHECK(rc.estimate == doctest::Approx(0.0));
    CHECK(rc.pass);

    // outside the certified catalog: rejected, monotonicity is semantic
    CHECK_THROWS_AS(fkg_test(cfg({{"graph", "biased_z"},
                                  {"radius", "3"},
                                  {"K", "0"},
                                  {"f", "parity:0"},
                                  {"g", "one"},
                                  {"samples", "100"}})),
                    std::invalid_argument);
}

TEST_CASE("consistency test: restriction statistics") {
    auto r = consistency_test(cfg({{"graph", "biased_z"},
                                   {"radius", "4"},
                                   {"K", "0"},
                                   {"L", "-2,-1,0,1,2"},
                                   {"samples", "20000"},
                                   {"seed", "10"}}));
    CHECK(r.pass);
    // K = L degenerates but must still pass
    auto rd = consistency_test(cfg({{"graph", "biased_z"},
                                    {"radius", "4"},
                                    {"K", "-1,0,1"},
                                    {"L", "-1,0,1"},
                                    {"samples", "5000"},
                                    {"seed", "11"}}));
    CHECK(rd.pass);
}

TEST_CASE("chi-square merges sparse cells") {
    // expected counts below the floor get pooled
    auto law = DiscreteDistribution::probability({{0, 0.70}, {1, 0.15}, {2, 0.15}});
    std::map<std::int64_t, long> observed{{0, 14}, {1, 3}, {2, 3}};
    auto chi = chi_square_gof(observed, law, 20);
    CHECK(chi.merged_cells > 0);
    CHECK(chi.p_value > 0.001);

    std::map<std::int64_t, long> off_support{{0, 19}, {7, 1}};
    CHECK_THROWS_AS(chi_square_gof(off_support, law, 20), std::invalid_argument);
    std::map<std::int64_t, long> short_count{{0, 3}};
    CHECK_THROWS_AS(chi_square_gof(short_count, law, 20), std::invalid_argument);
}

TEST_CASE("poisson dispersion flags the right departures") {
    RngStream rng(123, 0);
    std::vector<long> good, shifted;
    for (int i = 0; i < 20000; ++i) {
        good.push_back(rng.poisson(2.0));
        shifted.push_back(rng.poisson(2.0) + 1);
    }
    auto ok = poisson_dispersion(good, 2.0);
    CHECK(std::abs(ok.z_mean) < 4.0);
    CHECK(std::abs(ok.z_dispersion) < 4.0);
    auto off = poisson_dispersion(shifted, 2.0);
    CHECK(std::abs(off.z_mean) > 4.0);        // mean 3 against rate 2
    CHECK(std::abs(off.z_dispersion) > 4.0);  // dispersion 2/3
}

TEST_CASE("rng streams look uniform and mutually independent") {
    const long n = 200000;
    RngStream a(2025, 0);
    RngStream b = a.substream(1);
    RngStream c = a.substream(2);
    double sum = 0.0, sum_sq = 0.0, lag = 0.0, cross_bc = 0.0;
    double prev = a.uniform();
    double mb = 0.0, mc = 0.0;
    std::vector<double> vb(n), vc(n);
    for (long i = 0; i < n; ++i) {
        double u = a.uniform();
        sum += u;
        sum_sq += u * u;
        lag += (u - 0.5) * (prev - 0.5);
        prev = u;
        vb[i] = b.uniform();
        vc[i] = c.uniform();
        mb += vb[i];
        mc += vc[i];
    }
    mb /= n;
    mc /= n;
    for (long i = 0; i < n; ++i) cross_bc += (vb[i] - mb) * (vc[i] - mc);

    double mean = sum / n;
    double var = sum_sq / n - mean * mean;
    // U(0,1): mean 1/2 (se = 1/sqrt(12 n)), variance 1/12
    CHECK(std::abs(mean - 0.5) < 4.0 / std::sqrt(12.0 * n));
    CHECK(std::abs(var - 1.0 / 12.0) < 0.001);
    // correlations scaled by 1/12 have se ~ 1/(12 sqrt(n))
    CHECK(std::abs(lag / n) < 4.0 / (12.0 * std::sqrt(static_cast<double>(n))));
    CHECK(std::abs(cross_bc / n) < 4.0 / (12.0 * std::sqrt(static_cast<double>(n))));
}

TEST_CASE("poisson draws have the right first two moments") {
    RngStream rng(321, 0);
    for (double mean : {0.3, 2.0, 40.0}) {
        const long n = 100000;
        double s = 0.0, s2 = 0.0;
        for (long i = 0; i < n; ++i) {
            double k = static_cast<double>(rng.poisson(mean));
            s += k;
            s2 += k * k;
        }
        double m = s / n;
        double v = s2 / n - m * m;
        CHECK(std::abs(m - mean) < 4.0 * std::sqrt(mean / n));
        // var(sample variance) of Poisson ~ (2 mean^2 + mean) / n
        CHECK(std::abs(v - mean) < 4.0 * std::sqrt((2.0 * mean * mean + mean) / n));
    }
}

TEST_CASE("mc_collect is deterministic across thread counts") {
    RngStream base(77, 0);
    auto observe = [](RngStream& rng) { return rng.uniform(); };
    auto serial = mc_collect(4096, base, observe, 1);
    auto parallel = mc_collect(4096, base, observe, 4);
    CHECK(serial == parallel);
}

TEST_CASE("run dispatch: artifacts and exit codes") {
    std::ostringstream log;
    int code = run(cfg({{"op", "frobnicate"}}), log);
    CHECK(code == 2);
    CHECK(log.str().find("frobnicate") != std::string::npos);

    std::ostringstream log2;
    CHECK(run(cfg({{"graph", "biased_z"}}), log2) == 2);  // no op at all

    std::ostringstream log3;
    code = run(cfg({{"op", "vacancy"},
                    {"graph", "biased_z"},
                    {"radius", "3"},
                    {"K", "0"},
                    {"samples", "5000"},
                    {"seed", "3"}}),
               log3);
    CHECK(code == 0);
    CHECK(log3.str().find("pass 1") != std::string::npos);

    // identical seeds give byte-identical reports apart from timing
    std::ostringstream a, b;
    auto c = cfg({{"op", "vacancy"},
                  {"graph", "biased_z"},
                  {"radius", "3"},
                  {"K", "0"},
                  {"samples", "5000"},
                  {"seed", "4"}});
    run(c, a);
    run(c, b);
    CHECK(strip_timing(a.str()) == strip_timing(b.str()));

    // criteria path writes a trace with a verdict
    std::ostringstream log4;
    code = run(cfg({{"op", "weak"},
                    {"graph", "biased_z"},
                    {"levels", "2,3,4,5"},
                    {"x", "0"},
                    {"eps", "0.3"}}),
               log4);
    CHECK(code == 0);
    CHECK(log4.str().find("verdict vanishing-trend") != std::string::npos);

    std::ostringstream log5;
    code = run(cfg({{"op", "hinge_identity"},
                    {"graph", "biased_z"},
                    {"radius", "3"},
                    {"L", "-2,-1,0,1,2"},
                    {"x", "0"}}),
               log5);
    CHECK(code == 0);
}

TEST_CASE("functional catalog parsing") {
    auto g = make_biased_z(3).graph;
    std::vector<VertexId> w;
    for (int c = -1; c <= 1; ++c) w.push_back(g.vertex_by_label(std::to_string(c)));
    VertexSet window(w);
    CHECK_NOTHROW(parse_functional("contains:0", g, window));
    CHECK_NOTHROW(parse_functional("min_visits:-1+0+1", g, window));
    CHECK_NOTHROW(parse_functional("traj_atleast:0:2", g, window));
    CHECK_NOTHROW(parse_functional("one", g, window));
    CHECK_THROWS_AS(parse_functional("contains:3", g, window), std::invalid_argument);
    CHECK_THROWS_AS(parse_functional("median:0", g, window), std::invalid_argument);
}

TEST_CASE("stat report serialization puts timing last") {
    StatReport r;
    r.name = "demo";
    r.estimate = 0.25;
    r.pass = true;
    std::ostringstream out;
    r.write(out);
    auto text = out.str();
    CHECK(text.rfind("name demo", 0) == 0);
    auto pos = text.find("wall_seconds");
    CHECK(pos != std::string::npos);
    CHECK(text.find('\n', pos) == text.size() - 1);
}
