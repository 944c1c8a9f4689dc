#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "rwi/config.hpp"
#include "rwi/criteria.hpp"
#include "rwi/graph.hpp"
#include "rwi/potential.hpp"
#include "rwi/sampler.hpp"
#include "rwi/suite.hpp"

namespace {

// shared graph source flags: either a generator family or a graph file
struct GraphArgs {
    std::string family = "biased_z";
    int radius = 3;
    int depth = 3;
    int branching = 2;
    int dimension = 3;
    std::string file;

    void attach(CLI::App* cmd) {
        cmd->add_option("--family", family, "biased_z | tree | lattice")
            ->default_val(family);
        cmd->add_option("--radius", radius, "radius for biased_z / lattice");
        cmd->add_option("--depth", depth, "depth for tree");
        cmd->add_option("--branching", branching, "branching for tree");
        cmd->add_option("--dimension", dimension, "dimension for lattice (>= 3)");
        cmd->add_option("--in", file, "load a graph file instead of generating");
    }

    rwi::KilledWeightedGraph build() const {
        if (!file.empty()) return rwi::load_graph(file);
        if (family == "biased_z") return rwi::make_biased_z(radius).graph;
        if (family == "tree") return rwi::make_regular_tree(branching, depth);
        if (family == "lattice") return rwi::make_lattice_box(dimension, radius);
        throw CLI::ValidationError("--family", "unknown family '" + family + "'");
    }
};

rwi::VertexSet parse_set(const rwi::KilledWeightedGraph& g, const std::string& spec) {
    std::vector<rwi::VertexId> ids;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        rwi::VertexId v = g.vertex_by_label(tok);
        if (v < 0) v = static_cast<rwi::VertexId>(std::stol(tok));
        ids.push_back(v);
    }
    return rwi::VertexSet(std::move(ids));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"random interlacements on finite killed weighted graphs"};
    app.require_subcommand(1);

    // ---- graph: build, validate, write -----------------------------------
    auto* graph_cmd = app.add_subcommand("graph", "build or validate a graph, write it to disk");
    GraphArgs graph_args;
    graph_args.attach(graph_cmd);
    std::string graph_out;
    graph_cmd->add_option("--out", graph_out, "write the graph file here");

    // ---- potential: equilibrium / hinge / green dumps ---------------------
    auto* pot_cmd = app.add_subcommand("potential", "exact potential theory for a vertex set");
    GraphArgs pot_args;
    pot_args.attach(pot_cmd);
    std::string pot_set, pot_out;
    pot_cmd->add_option("--set", pot_set, "window K as comma-separated labels or ids")
        ->required();
    pot_cmd->add_option("--out", pot_out, "prefix for CSV artifacts");

    // ---- sample: trajectory and field dumps -------------------------------
    auto* sample_cmd = app.add_subcommand("sample", "draw one window sample and dump it");
    GraphArgs sample_args;
    sample_args.attach(sample_cmd);
    std::string sample_set, sample_out, sample_levels;
    std::uint64_t sample_seed = 1;
    sample_cmd->add_option("--set", sample_set, "window K")->required();
    sample_cmd->add_option("--seed", sample_seed, "rng seed");
    sample_cmd->add_option("--levels", sample_levels, "comma-separated level marks");
    sample_cmd->add_option("--out", sample_out, "trajectory dump path");

    // ---- criteria: traces --------------------------------------------------
    auto* crit_cmd = app.add_subcommand("criteria", "zero-one law criterion traces");
    std::string crit_family = "biased_z", crit_op = "weak", crit_x = "0", crit_levels = "2,3,4,5,6";
    double crit_eps = 0.1;
    int crit_param = 0;
    std::string crit_out, crit_A = "minus", crit_B = "plus";
    crit_cmd->add_option("--family", crit_family, "biased_z | tree | lattice");
    crit_cmd->add_option("--op", crit_op, "strong | weak | cap_identity | atom_flow");
    crit_cmd->add_option("--x", crit_x, "anchor vertex label");
    crit_cmd->add_option("--levels", crit_levels, "comma-separated exhaustion levels");
    crit_cmd->add_option("--eps", crit_eps, "criterion epsilon");
    crit_cmd->add_option("--param", crit_param, "branching / dimension");
    crit_cmd->add_option("--A", crit_A, "atom direction: minus | plus");
    crit_cmd->add_option("--B", crit_B, "atom direction: minus | plus");
    crit_cmd->add_option("--out", crit_out, "trace CSV path");

    // ---- test: config-driven statistical runs ------------------------------
    auto* test_cmd = app.add_subcommand("test", "run a statistical test from a config file");
    std::string test_config;
    std::uint64_t test_seed = 0;
    long test_samples = 0;
    std::string test_out;
    test_cmd->add_option("--config", test_config, "flat key-value config file")->required();
    test_cmd->add_option("--seed", test_seed, "override the config seed");
    test_cmd->add_option("--samples", test_samples, "override the config sample count");
    test_cmd->add_option("--out", test_out, "override the config output path");

    // ---- suite: full verification battery ----------------------------------
    auto* suite_cmd = app.add_subcommand("suite", "run the full verification battery");
    rwi::SuiteOptions suite_opts;
    suite_cmd->add_option("--seed", suite_opts.seed, "rng seed");
    suite_cmd->add_option("--out", suite_opts.out_dir, "artifact directory")
        ->default_val(suite_opts.out_dir);
    suite_cmd->add_option("--scale", suite_opts.sample_scale,
                          "scale factor on Monte Carlo sample counts");
    suite_cmd->add_flag("--skip-determinism",
                        [&suite_opts](std::int64_t) { suite_opts.include_determinism = false; },
                        "skip the repeated-run determinism criterion");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*graph_cmd) {
            auto g = graph_args.build();
            std::cout << "vertices " << g.size() << "\n";
            std::cout << "edges " << g.edges().size() << "\n";
            double kills = 0;
            for (std::size_t v = 0; v < g.size(); ++v)
                kills += g.kill_weight(static_cast<rwi::VertexId>(v));
            std::cout << "total_kill_weight " << rwi::format_g17(kills) << "\n";
            if (!graph_out.empty()) rwi::save_graph(g, graph_out);
            return 0;
        }
        if (*pot_cmd) {
            auto g = pot_args.build();
            auto K = parse_set(g, pot_set);
            rwi::PotentialSolver solver(g);
            auto prof = solver.equilibrium(K);
            auto hm = solver.hinge(K);
            std::cout << "cap " << rwi::format_g17(prof.capacity) << "\n";
            std::cout << "boundary " << prof.boundary.size() << "\n";
            std::cout << "hinge_mass " << rwi::format_g17(hm.total()) << "\n";
            if (!pot_out.empty()) {
                std::ofstream e(pot_out + "equilibrium.csv");
                rwi::write_measure_csv(e, prof.e);
                std::ofstream h(pot_out + "hinge.csv");
                rwi::write_matrix_csv(h, hm);
                std::ofstream harm(pot_out + "harmonic.csv");
                rwi::write_measure_csv(harm, prof.harmonic);
            }
            return 0;
        }
        if (*sample_cmd) {
            auto g = sample_args.build();
            auto K = parse_set(g, sample_set);
            rwi::RngStream rng(sample_seed, 0);
            rwi::WindowSampler sampler(g, K);
            rwi::WindowSample s;
            if (sample_levels.empty()) {
                s = sampler.sample(rng);
            } else {
                std::vector<double> levels;
                std::stringstream ss(sample_levels);
                std::string tok;
                while (std::getline(ss, tok, ',')) levels.push_back(std::stod(tok));
                s = sampler.sample_levels(levels, rng).back().second;
            }
            std::cout << "trajectories " << s.trajectories.size() << "\n";
            if (!sample_out.empty()) {
                std::ofstream out(sample_out);
                rwi::write_trajectories(out, s);
                std::ofstream fields(sample_out + ".fields.csv");
                rwi::write_fields_csv(fields, s.fields);
            } else {
                rwi::write_trajectories(std::cout, s);
            }
            return 0;
        }
        if (*crit_cmd) {
            std::map<std::string, std::string> kv{{"graph", crit_family},
                                                  {"op", crit_op},
                                                  {"levels", crit_levels},
                                                  {"x", crit_x},
                                                  {"eps", rwi::format_g17(crit_eps)},
                                                  {"A", crit_A},
                                                  {"B", crit_B}};
            if (crit_param > 0) kv["param"] = std::to_string(crit_param);
            if (!crit_out.empty()) kv["out"] = crit_out;
            return rwi::run(rwi::ExperimentConfig(kv), std::cout);
        }
        if (*test_cmd) {
            auto cfg = rwi::ExperimentConfig::parse_file(test_config);
            if (test_seed != 0) cfg.set("seed", std::to_string(test_seed));
            if (test_samples != 0) cfg.set("samples", std::to_string(test_samples));
            if (!test_out.empty()) cfg.set("out", test_out);
            return rwi::run(cfg, std::cout);
        }
        if (*suite_cmd) {
            auto outcomes = rwi::run_acceptance_suite(suite_opts);
            int failures = rwi::print_outcomes(outcomes, std::cout);
            return failures == 0 ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
