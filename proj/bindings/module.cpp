#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "rwi/config.hpp"
#include "rwi/coupling.hpp"
#include "rwi/criteria.hpp"
#include "rwi/graph.hpp"
#include "rwi/potential.hpp"
#include "rwi/rng.hpp"
#include "rwi/sampler.hpp"
#include "rwi/stats.hpp"
#include "rwi/suite.hpp"

namespace py = pybind11;
using namespace rwi;

namespace {

std::vector<std::pair<DiscreteDistribution::Key, double>> dict_to_mass(const py::dict& d) {
    std::vector<std::pair<DiscreteDistribution::Key, double>> mass;
    for (auto item : d)
        mass.push_back({item.first.cast<DiscreteDistribution::Key>(),
                        item.second.cast<double>()});
    return mass;
}

py::dict mass_to_dict(const DiscreteDistribution& d) {
    py::dict out;
    for (const auto& [key, value] : d.entries()) out[py::int_(key)] = value;
    return out;
}

ExperimentConfig config_from_dict(const py::dict& d) {
    std::map<std::string, std::string> kv;
    for (auto item : d) kv[py::str(item.first)] = py::str(item.second);
    return ExperimentConfig(std::move(kv));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "random interlacements on finite killed weighted graphs";

    // ---- graphs ------------------------------------------------------------
    py::class_<VertexSet>(m, "VertexSet")
        .def(py::init<std::vector<VertexId>>())
        .def("__contains__", &VertexSet::contains)
        .def("__len__", &VertexSet::size)
        .def("ids", &VertexSet::ids)
        .def("subset_of", &VertexSet::subset_of)
        .def("__repr__", [](const VertexSet& s) {
            std::ostringstream out;
            out << "VertexSet([";
            for (std::size_t i = 0; i < s.size(); ++i) out << (i ? "," : "") << s.ids()[i];
            out << "])";
            return out.str();
        });
    py::implicitly_convertible<py::list, VertexSet>();

    py::class_<KilledWeightedGraph>(m, "KilledWeightedGraph")
        .def("__len__", &KilledWeightedGraph::size)
        .def("kill_weight", &KilledWeightedGraph::kill_weight)
        .def("self_loop_weight", &KilledWeightedGraph::self_loop_weight)
        .def("total_weight", &KilledWeightedGraph::total_weight)
        .def("edge_weight", &KilledWeightedGraph::edge_weight)
        .def("transition_probability", &KilledWeightedGraph::transition_probability)
        .def("kill_probability", &KilledWeightedGraph::kill_probability)
        .def("label", &KilledWeightedGraph::label)
        .def("vertex_by_label", &KilledWeightedGraph::vertex_by_label)
        .def("ends", &KilledWeightedGraph::ends)
        .def("neighbors", &KilledWeightedGraph::neighbors)
        .def("all_vertices", &KilledWeightedGraph::all_vertices)
        .def("save",
             [](const KilledWeightedGraph& g, const std::string& path) { save_graph(g, path); })
        .def("__repr__", [](const KilledWeightedGraph& g) {
            return "KilledWeightedGraph(" + std::to_string(g.size()) + " vertices, " +
                   std::to_string(g.edges().size()) + " edges)";
        });

    m.def("build_graph",
          [](const std::vector<std::tuple<VertexId, VertexId, double>>& edges,
             const std::vector<std::pair<VertexId, double>>& kills) {
              std::vector<WeightedEdge> es;
              for (auto [u, v, w] : edges) es.push_back({u, v, w});
              return build_graph(es, kills);
          },
          py::arg("edges"), py::arg("kills"));
    m.def("make_biased_z", [](int radius) {
        auto bz = make_biased_z(radius);
        return py::make_tuple(std::move(bz.graph), bz.exterior_return_prob);
    });
    m.def("make_regular_tree", &make_regular_tree, py::arg("branching"), py::arg("depth"));
    m.def("make_lattice_box", &make_lattice_box, py::arg("dimension"), py::arg("radius"));
    m.def("load_graph", py::overload_cast<const std::string&>(&load_graph));

    py::class_<ExhaustionLevel>(m, "ExhaustionLevel")
        .def_readonly("level", &ExhaustionLevel::level)
        .def_readonly("graph", &ExhaustionLevel::graph)
        .def_readonly("window", &ExhaustionLevel::window);
    py::class_<ExhaustionFamily>(m, "ExhaustionFamily")
        .def_readonly("family", &ExhaustionFamily::family)
        .def_readonly("levels", &ExhaustionFamily::levels)
        .def("vertex_at", &ExhaustionFamily::vertex_at);
    m.def("make_exhaustion", &make_exhaustion, py::arg("family"), py::arg("levels"),
          py::arg("param") = 0, py::arg("buffer") = 2);

    // ---- potential theory ----------------------------------------------------
    py::class_<SolverOptions>(m, "SolverOptions")
        .def(py::init<>())
        .def_readwrite("dense_limit", &SolverOptions::dense_limit)
        .def_readwrite("cg_tolerance", &SolverOptions::cg_tolerance)
        .def_readwrite("boundary_threshold", &SolverOptions::boundary_threshold);

    py::class_<DiscreteDistribution>(m, "DiscreteDistribution")
        .def_static("probability",
                    [](const py::dict& d) {
                        return DiscreteDistribution::probability(dict_to_mass(d));
                    })
        .def_static("measure",
                    [](const py::dict& d) { return DiscreteDistribution::measure(dict_to_mass(d)); })
        .def("mass", &DiscreteDistribution::mass)
        .def("total", &DiscreteDistribution::total)
        .def("normalized", &DiscreteDistribution::normalized)
        .def("shifted", &DiscreteDistribution::shifted)
        .def("sample", &DiscreteDistribution::sample)
        .def("as_dict", &mass_to_dict)
        .def("__len__", &DiscreteDistribution::support_size);

    py::class_<EquilibriumProfile>(m, "EquilibriumProfile")
        .def_readonly("capacity", &EquilibriumProfile::capacity)
        .def_readonly("e", &EquilibriumProfile::e)
        .def_readonly("boundary", &EquilibriumProfile::boundary)
        .def_readonly("harmonic", &EquilibriumProfile::harmonic);

    py::class_<HingeMeasure>(m, "HingeMeasure")
        .def_readonly("boundary", &HingeMeasure::boundary)
        .def_readonly("matrix", &HingeMeasure::h)
        .def("value", &HingeMeasure::value)
        .def("total", &HingeMeasure::total)
        .def("max_asymmetry", &HingeMeasure::max_asymmetry)
        .def("couple_law", &HingeMeasure::couple_law);

    py::class_<GreenMatrix>(m, "GreenMatrix")
        .def_readonly("matrix", &GreenMatrix::g)
        .def("__call__", &GreenMatrix::operator());

    py::class_<HittingResult>(m, "HittingResult")
        .def_readonly("probability", &HittingResult::probability)
        .def("entry_distribution", &HittingResult::entry_distribution);

    py::class_<RestrictedEquilibrium>(m, "RestrictedEquilibrium")
        .def_readonly("capacity", &RestrictedEquilibrium::capacity)
        .def_readonly("e", &RestrictedEquilibrium::e);

    py::enum_<Direction>(m, "Direction")
        .value("MINUS", Direction::ToMinusInfinity)
        .value("PLUS", Direction::ToPlusInfinity);

    py::class_<Flow>(m, "Flow")
        .def(py::init<>())
        .def("set", &Flow::set)
        .def("get", &Flow::get);
    m.attr("GHOST") = py::int_(kGhost);

    m.def("escape_probability", &escape_probability, py::arg("graph"), py::arg("K"),
          py::arg("options") = SolverOptions{});
    m.def("equilibrium", &equilibrium, py::arg("graph"), py::arg("K"),
          py::arg("options") = SolverOptions{});
    m.def("hitting", &hitting, py::arg("graph"), py::arg("K"),
          py::arg("options") = SolverOptions{});
    m.def("greens", &greens, py::arg("graph"), py::arg("options") = SolverOptions{});
    m.def("last_exit_distribution", &last_exit_distribution, py::arg("graph"), py::arg("L"),
          py::arg("x"), py::arg("conditional") = false, py::arg("options") = SolverOptions{});
    m.def("hinge", &hinge, py::arg("graph"), py::arg("K"), py::arg("options") = SolverOptions{});
    m.def("consistency_pushforward", &consistency_pushforward, py::arg("graph"), py::arg("K"),
          py::arg("L"), py::arg("options") = SolverOptions{});
    m.def("conditional_hit_given_last_exit", &conditional_hit_given_last_exit, py::arg("graph"),
          py::arg("L"), py::arg("x"), py::arg("from_vertex"), py::arg("exit_point"),
          py::arg("options") = SolverOptions{});
    m.def("restricted_equilibrium", &restricted_equilibrium, py::arg("graph"), py::arg("K"),
          py::arg("A"), py::arg("B"), py::arg("options") = SolverOptions{});
    m.def("flow_energy_bound", &flow_energy_bound, py::arg("graph"), py::arg("K"),
          py::arg("flow"));
    m.def("harmonic_flow", &harmonic_flow, py::arg("graph"), py::arg("K"),
          py::arg("options") = SolverOptions{});

    // ---- coupling / total variation -----------------------------------------
    m.def("tv", [](const DiscreteDistribution& p, const DiscreteDistribution& q) {
        return tv(p, q).value;
    });
    m.def("poisson_shift_tv", [](double lambda) {
        auto r = poisson_shift_tv(lambda);
        return py::make_tuple(r.exact, r.bound);
    });
    m.def("poisson_truncated", &poisson_truncated, py::arg("mean"), py::arg("tail") = 1e-15);
    m.def("optimal_coupling", &optimal_coupling);
    m.def("ppp_gap", &ppp_gap);
    m.def("ppp_tv_upper", &ppp_tv_upper);
    m.def("ppp_tv_lower_grid", &ppp_tv_lower_grid, py::arg("eps"), py::arg("a"),
          py::arg("lambda_step") = 1e-3, py::arg("p_step") = 1e-3);

    // ---- sampling ------------------------------------------------------------
    py::class_<RngStream>(m, "RngStream")
        .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"), py::arg("stream") = 0)
        .def("uniform", py::overload_cast<>(&RngStream::uniform))
        .def("poisson", &RngStream::poisson)
        .def("substream", &RngStream::substream);

    py::class_<FinitePath>(m, "FinitePath")
        .def_readonly("vertices", &FinitePath::vertices)
        .def_property_readonly("killed", [](const FinitePath& p) {
            return p.terminal == FinitePath::Terminal::Killed;
        });

    py::class_<LabeledTrajectory>(m, "LabeledTrajectory")
        .def_readonly("entry", &LabeledTrajectory::entry)
        .def_readonly("backward", &LabeledTrajectory::backward)
        .def_readonly("forward", &LabeledTrajectory::forward)
        .def_readonly("level", &LabeledTrajectory::level);

    py::class_<OccupationFields>(m, "OccupationFields")
        .def_readonly("window", &OccupationFields::window)
        .def_property_readonly("indicator",
                               [](const OccupationFields& f) {
                                   std::vector<int> out(f.indicator.begin(), f.indicator.end());
                                   return out;
                               })
        .def_readonly("trajectory_count", &OccupationFields::trajectory_count)
        .def_readonly("visit_count", &OccupationFields::visit_count)
        .def("visited", &OccupationFields::visited)
        .def("trajectories_at", &OccupationFields::trajectories_at)
        .def("visits_at", &OccupationFields::visits_at);

    py::class_<WindowSample>(m, "WindowSample")
        .def_readonly("window", &WindowSample::window)
        .def_readonly("trajectories", &WindowSample::trajectories)
        .def_readonly("fields", &WindowSample::fields)
        .def("__len__", [](const WindowSample& s) { return s.trajectories.size(); });

    py::class_<SamplerOptions>(m, "SamplerOptions")
        .def(py::init<>())
        .def_readwrite("step_budget", &SamplerOptions::step_budget)
        .def_readwrite("rejection_budget", &SamplerOptions::rejection_budget);

    py::class_<WindowSampler>(m, "WindowSampler")
        .def(py::init<const KilledWeightedGraph&, VertexSet, SamplerOptions, SolverOptions>(),
             py::arg("graph"), py::arg("window"), py::arg("sampler_options") = SamplerOptions{},
             py::arg("solver_options") = SolverOptions{}, py::keep_alive<1, 2>())
        .def("profile", &WindowSampler::profile, py::return_value_policy::reference_internal)
        .def("sample", &WindowSampler::sample)
        .def("sample_at_level", &WindowSampler::sample_at_level)
        .def("sample_levels", &WindowSampler::sample_levels)
        .def("sample_hinge_process", &WindowSampler::sample_hinge_process)
        .def("hinge_measure", &WindowSampler::hinge_measure,
             py::return_value_policy::reference_internal)
        .def("bridge_acceptance", &WindowSampler::bridge_acceptance)
        .def("sample_bridge", &WindowSampler::sample_bridge);

    py::class_<WindowExtender>(m, "WindowExtender")
        .def(py::init<const KilledWeightedGraph&, VertexSet, VertexSet, SamplerOptions,
                      SolverOptions>(),
             py::arg("graph"), py::arg("from_window"), py::arg("to_window"),
             py::arg("sampler_options") = SamplerOptions{},
             py::arg("solver_options") = SolverOptions{}, py::keep_alive<1, 2>())
        .def("extend", &WindowExtender::extend)
        .def("added_intensity", &WindowExtender::added_intensity)
        .def("entry_acceptance", &WindowExtender::entry_acceptance);

    m.def("sample_forward", &sample_forward, py::arg("graph"), py::arg("x"), py::arg("rng"),
          py::arg("options") = SamplerOptions{});
    m.def("sample_no_return", &sample_no_return, py::arg("graph"), py::arg("K"), py::arg("x"),
          py::arg("rng"), py::arg("options") = SamplerOptions{});
    m.def("sample_window", &sample_window, py::arg("graph"), py::arg("K"), py::arg("rng"),
          py::arg("options") = SamplerOptions{});
    m.def("sample_hinge_process", &sample_hinge_process, py::arg("graph"), py::arg("K"),
          py::arg("rng"), py::arg("options") = SamplerOptions{});
    m.def("sample_bridge", &sample_bridge, py::arg("graph"), py::arg("K"), py::arg("x"),
          py::arg("y"), py::arg("rng"), py::arg("options") = SamplerOptions{});
    m.def("extend_window", &extend_window, py::arg("graph"), py::arg("K"), py::arg("L"),
          py::arg("sample"), py::arg("rng"), py::arg("options") = SamplerOptions{});
    m.def("sample_levels", &sample_levels, py::arg("graph"), py::arg("K"), py::arg("levels"),
          py::arg("rng"), py::arg("options") = SamplerOptions{});
    m.def("occupation_fields",
          py::overload_cast<const WindowSample&>(&occupation_fields));
    m.def("hinge_couple", &hinge_couple);
    m.def("reanchor", &reanchor);

    // ---- criteria --------------------------------------------------------------
    py::class_<CriterionThresholds>(m, "CriterionThresholds")
        .def(py::init<>())
        .def_readwrite("vanish_threshold", &CriterionThresholds::vanish_threshold)
        .def_readwrite("floor_threshold", &CriterionThresholds::floor_threshold)
        .def_readwrite("increment_tol", &CriterionThresholds::increment_tol);

    py::class_<CriterionRecord>(m, "CriterionRecord")
        .def_readonly("level", &CriterionRecord::level)
        .def_readonly("eps", &CriterionRecord::eps)
        .def_readonly("value", &CriterionRecord::value)
        .def_readonly("capacity", &CriterionRecord::capacity)
        .def_readonly("aux_residual", &CriterionRecord::aux_residual);

    py::class_<CriterionTrace>(m, "CriterionTrace")
        .def_readonly("family", &CriterionTrace::family)
        .def_readonly("op", &CriterionTrace::op)
        .def_readonly("records", &CriterionTrace::records)
        .def_readonly("nontrivial_flow", &CriterionTrace::nontrivial_flow)
        .def_property_readonly("verdict",
                               [](const CriterionTrace& t) { return to_string(t.verdict); })
        .def("csv", [](const CriterionTrace& t) {
            std::ostringstream out;
            t.write_csv(out);
            return out.str();
        })
        .def("report", [](const CriterionTrace& t) {
            std::ostringstream out;
            t.write_report(out);
            return out.str();
        });

    m.def("strong_criterion", &strong_criterion, py::arg("exhaustion"), py::arg("x"),
          py::arg("eps"), py::arg("thresholds") = CriterionThresholds{},
          py::arg("options") = SolverOptions{});
    m.def("weak_criterion", &weak_criterion, py::arg("exhaustion"), py::arg("x"), py::arg("eps"),
          py::arg("thresholds") = CriterionThresholds{}, py::arg("options") = SolverOptions{});
    m.def("cap_identity", &cap_identity, py::arg("exhaustion"), py::arg("x"),
          py::arg("options") = SolverOptions{});
    m.def("atom_flow", &atom_flow, py::arg("exhaustion"), py::arg("A"), py::arg("B"),
          py::arg("thresholds") = CriterionThresholds{}, py::arg("options") = SolverOptions{});
    m.def("hinge_identity_check", &hinge_identity_check, py::arg("graph"), py::arg("L"),
          py::arg("x"), py::arg("options") = SolverOptions{});

    // ---- harness ----------------------------------------------------------------
    py::class_<StatReport>(m, "StatReport")
        .def_readonly("name", &StatReport::name)
        .def_readonly("estimate", &StatReport::estimate)
        .def_readonly("std_error", &StatReport::std_error)
        .def_readonly("reference", &StatReport::reference)
        .def_readonly("provenance", &StatReport::provenance)
        .def_readonly("z", &StatReport::z)
        .def_readonly("pass_", &StatReport::pass)
        .def_readonly("samples", &StatReport::samples)
        .def_readonly("note", &StatReport::note)
        .def("__repr__", [](const StatReport& r) {
            std::ostringstream out;
            r.write(out);
            return out.str();
        });

    m.def("vacancy_test", [](const py::dict& d) { return vacancy_test(config_from_dict(d)); });
    m.def("fkg_test", [](const py::dict& d) { return fkg_test(config_from_dict(d)); });
    m.def("consistency_test",
          [](const py::dict& d) { return consistency_test(config_from_dict(d)); });
    m.def("run_experiment", [](const py::dict& d) {
        std::ostringstream log;
        int code = run(config_from_dict(d), log);
        return py::make_tuple(code, log.str());
    });

    py::class_<SuiteOptions>(m, "SuiteOptions")
        .def(py::init<>())
        .def_readwrite("seed", &SuiteOptions::seed)
        .def_readwrite("out_dir", &SuiteOptions::out_dir)
        .def_readwrite("sample_scale", &SuiteOptions::sample_scale)
        .def_readwrite("include_determinism", &SuiteOptions::include_determinism);
    py::class_<CriterionOutcome>(m, "CriterionOutcome")
        .def_readonly("index", &CriterionOutcome::index)
        .def_readonly("name", &CriterionOutcome::name)
        .def_readonly("pass_", &CriterionOutcome::pass)
        .def_readonly("detail", &CriterionOutcome::detail);
    m.def("run_acceptance_suite", &run_acceptance_suite);
}
