#include "rwi/config.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "rwi/potential.hpp"
#include "rwi/sampler.hpp"

namespace rwi {

namespace {

double elapsed_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ss(line);
        std::string key;
        if (!(ss >> key)) continue;
        std::string value, word;
        while (ss >> word) {
            if (!value.empty()) value += " ";
            value += word;
        }
        if (value.empty()) throw std::runtime_error("config key '" + key + "' has no value");
        kv[key] = value;
    }
    return ExperimentConfig(std::move(kv));
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config '" + path + "'");
    return parse(in);
}

const std::string& ExperimentConfig::get(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw std::runtime_error("config is missing key '" + key + "'");
    return it->second;
}

std::string ExperimentConfig::get_or(const std::string& key, const std::string& fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

double ExperimentConfig::number(const std::string& key) const { return std::stod(get(key)); }
double ExperimentConfig::number_or(const std::string& key, double fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : std::stod(it->second);
}
long ExperimentConfig::integer(const std::string& key) const { return std::stol(get(key)); }
long ExperimentConfig::integer_or(const std::string& key, long fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : std::stol(it->second);
}

std::vector<std::string> ExperimentConfig::list(const std::string& key) const {
    // comma-separated, but commas inside parentheses belong to the token
    // (lattice labels look like "(0,0,0)")
    std::vector<std::string> out;
    const std::string& raw = get(key);
    std::string tok;
    int depth = 0;
    for (char c : raw) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
            if (!tok.empty()) out.push_back(tok);
            tok.clear();
        } else {
            tok += c;
        }
    }
    if (!tok.empty()) out.push_back(tok);
    return out;
}

KilledWeightedGraph graph_from_config(const ExperimentConfig& cfg) {
    const std::string family = cfg.get("graph");
    if (family == "biased_z") return make_biased_z(static_cast<int>(cfg.integer("radius"))).graph;
    if (family == "tree")
        return make_regular_tree(static_cast<int>(cfg.integer_or("branching", 2)),
                                 static_cast<int>(cfg.integer("depth")));
    if (family == "lattice")
        return make_lattice_box(static_cast<int>(cfg.integer_or("dimension", 3)),
                                static_cast<int>(cfg.integer("radius")));
    if (family == "file") return load_graph(cfg.get("path"));
    throw std::runtime_error("unknown graph family '" + family + "'");
}

namespace {

VertexId resolve_vertex(const KilledWeightedGraph& graph, const std::string& token) {
    VertexId v = graph.vertex_by_label(token);
    if (v >= 0) return v;
    try {
        v = static_cast<VertexId>(std::stol(token));
    } catch (...) {
        throw std::runtime_error("vertex '" + token + "' is neither a label nor an id");
    }
    if (v < 0 || static_cast<std::size_t>(v) >= graph.size())
        throw std::runtime_error("vertex id " + token + " out of range");
    return v;
}

}  // namespace

VertexSet set_from_config(const ExperimentConfig& cfg, const KilledWeightedGraph& graph,
                          const std::string& key) {
    std::vector<VertexId> ids;
    for (const auto& tok : cfg.list(key)) ids.push_back(resolve_vertex(graph, tok));
    return VertexSet(std::move(ids));
}

VertexId vertex_from_config(const ExperimentConfig& cfg, const KilledWeightedGraph& graph,
                            const std::string& key) {
    return resolve_vertex(graph, cfg.get(key));
}

ExhaustionFamily exhaustion_from_config(const ExperimentConfig& cfg) {
    std::vector<int> levels;
    for (const auto& tok : cfg.list("levels")) levels.push_back(std::stoi(tok));
    return make_exhaustion(cfg.get("graph"), levels, static_cast<int>(cfg.integer_or("param", 0)),
                           static_cast<int>(cfg.integer_or("buffer", 2)));
}

// ---------------------------------------------------------------------------

StatReport vacancy_test(const ExperimentConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    KilledWeightedGraph graph = graph_from_config(cfg);
    VertexSet K = set_from_config(cfg, graph, "K");
    const long n = cfg.integer_or("samples", 100000);
    const std::uint64_t seed = static_cast<std::uint64_t>(cfg.integer_or("seed", 1));
    const double sigma = cfg.number_or("sigma", 4.0);
    const double level = cfg.number_or("level", 1.0);

    WindowSampler sampler(graph, K);
    double reference = std::exp(-level * sampler.profile().capacity);

    RngStream base(seed, 0);
    auto empties = mc_collect(n, base, [&](RngStream& rng) {
        return sampler.sample_at_level(level, rng).trajectories.empty() ? 1.0 : 0.0;
    });
    long hits = 0;
    for (double e : empties) hits += e > 0.5 ? 1 : 0;

    StatReport r = binomial_report("vacancy", hits, n, reference,
                                   "exact solve: exp(-u cap(K))", sigma);
    r.seed = seed;
    r.note = "level " + format_g17(level) + " cap " + format_g17(sampler.profile().capacity);
    r.wall_seconds = elapsed_since(t0);
    return r;
}

StatReport fkg_test(const ExperimentConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    KilledWeightedGraph graph = graph_from_config(cfg);
    VertexSet K = set_from_config(cfg, graph, "K");
    const long n = cfg.integer_or("samples", 100000);
    const std::uint64_t seed = static_cast<std::uint64_t>(cfg.integer_or("seed", 1));
    const double sigma = cfg.number_or("sigma", 4.0);

    FieldFunctional f = parse_functional(cfg.get("f"), graph, K);
    FieldFunctional g = parse_functional(cfg.get("g"), graph, K);

    WindowSampler sampler(graph, K);
    RngStream base(seed, 1);
    auto rows = mc_collect_rows(n, base, 2, [&](RngStream& rng, std::vector<double>& row) {
        WindowSample s = sampler.sample(rng);
        row[0] = f.eval(s.fields);
        row[1] = g.eval(s.fields);
    });
    std::vector<double> fv(rows.size()), gv(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        fv[i] = rows[i][0];
        gv[i] = rows[i][1];
    }
    auto cov = covariance(fv, gv);

    StatReport r;
    r.name = "fkg " + f.spec + " ~ " + g.spec;
    r.estimate = cov.covariance;
    r.std_error = cov.std_error;
    r.samples = n;
    r.seed = seed;
    r.sigma = sigma;
    r.two_sided = false;
    // the inequality asserts Cov >= 0; noise may only push it slightly below
    r.z = cov.std_error > 0.0 ? cov.covariance / cov.std_error : 0.0;
    r.pass = r.z >= -sigma;
    r.provenance = "none (one-sided nonnegativity)";

    // f = g = indicator{v visited}: the covariance is a Bernoulli variance
    if (f.spec == g.spec && f.spec.rfind("contains:", 0) == 0 &&
        f.spec.find('+') == std::string::npos) {
        VertexSet v({resolve_vertex(graph, f.spec.substr(std::string("contains:").size()))});
        double p = 1.0 - std::exp(-equilibrium(graph, v).capacity);
        r.reference = p * (1.0 - p);
        r.provenance = "closed form p(1-p), p = 1 - exp(-cap({v}))";
        if (cov.std_error > 0.0 && std::abs(cov.covariance - r.reference) > sigma * cov.std_error)
            r.pass = false;
    }
    r.wall_seconds = elapsed_since(t0);
    return r;
}

StatReport consistency_test(const ExperimentConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    KilledWeightedGraph graph = graph_from_config(cfg);
    VertexSet K = set_from_config(cfg, graph, "K");
    VertexSet L = set_from_config(cfg, graph, "L");
    if (!K.subset_of(L)) throw std::runtime_error("consistency_test: K must be nested in L");
    const long n = cfg.integer_or("samples", 100000);
    const std::uint64_t seed = static_cast<std::uint64_t>(cfg.integer_or("seed", 1));
    const double sigma = cfg.number_or("sigma", 4.0);
    const double p_floor = cfg.number_or("p_floor", 0.001);

    WindowSampler sampler(graph, L);
    EquilibriumProfile prof_K = equilibrium(graph, K);

    RngStream base(seed, 2);
    auto rows = mc_collect_rows(n, base, 2, [&](RngStream& rng, std::vector<double>& row) {
        WindowSample s = sampler.sample(rng);
        long hits = 0;
        VertexId first_entry = -1;
        for (const auto& t : s.trajectories) {
            if (!trajectory_hits(t, K)) continue;
            ++hits;
            if (first_entry < 0) first_entry = reanchor(t, K).entry;
        }
        row[0] = static_cast<double>(hits);
        row[1] = static_cast<double>(first_entry);
    });

    std::map<std::int64_t, long> entries;
    std::vector<long> counts;
    counts.reserve(rows.size());
    long entry_total = 0;
    for (const auto& row : rows) {
        counts.push_back(static_cast<long>(row[0]));
        if (row[1] >= 0.0) {
            ++entries[static_cast<std::int64_t>(row[1])];
            ++entry_total;
        }
    }
    auto chi = chi_square_gof(entries, prof_K.harmonic, entry_total);
    auto disp = poisson_dispersion(counts, prof_K.capacity);

    StatReport r;
    r.name = "consistency restriction";
    r.estimate = chi.p_value;
    r.reference = p_floor;
    r.provenance = "exact solve: harm_K and cap(K)";
    r.samples = n;
    r.seed = seed;
    r.sigma = sigma;
    r.two_sided = true;
    r.z = std::max(std::abs(disp.z_mean), std::abs(disp.z_dispersion));
    r.pass = chi.p_value > p_floor && std::abs(disp.z_mean) <= sigma &&
             std::abs(disp.z_dispersion) <= sigma;
    std::ostringstream note;
    note << "chi2 " << format_g17(chi.statistic) << " dof " << chi.dof << " merged "
         << chi.merged_cells << " z_mean " << format_g17(disp.z_mean) << " z_disp "
         << format_g17(disp.z_dispersion);
    r.note = note.str();
    r.wall_seconds = elapsed_since(t0);
    return r;
}

// ---------------------------------------------------------------------------

namespace {

void write_report_artifact(const std::string& path, const StatReport& report) {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report '" + path + "'");
    report.write(out);
}

int finish(std::ostream& log, const StatReport& report, const std::string& out_path) {
    write_report_artifact(out_path, report);
    report.write(log);
    return report.pass ? 0 : 1;
}

}  // namespace

int run(const ExperimentConfig& cfg, std::ostream& log) {
    std::string op;
    try {
        op = cfg.get("op");
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 2;
    }
    const std::string out_path = cfg.get_or("out", "");

    try {
        if (op == "vacancy") return finish(log, vacancy_test(cfg), out_path);
        if (op == "fkg") return finish(log, fkg_test(cfg), out_path);
        if (op == "consistency") return finish(log, consistency_test(cfg), out_path);

        if (op == "strong" || op == "weak" || op == "atom_flow") {
            ExhaustionFamily exh = exhaustion_from_config(cfg);
            CriterionThresholds th;
            th.vanish_threshold = cfg.number_or("vanish_threshold", th.vanish_threshold);
            th.floor_threshold = cfg.number_or("floor_threshold", th.floor_threshold);
            th.increment_tol = cfg.number_or("increment_tol", th.increment_tol);
            CriterionTrace trace;
            if (op == "strong")
                trace = strong_criterion(exh, cfg.get("x"), cfg.number("eps"), th);
            else if (op == "weak")
                trace = weak_criterion(exh, cfg.get("x"), cfg.number("eps"), th);
            else {
                auto dir = [](const std::string& s) {
                    if (s == "minus" || s == "-inf") return Direction::ToMinusInfinity;
                    if (s == "plus" || s == "+inf") return Direction::ToPlusInfinity;
                    throw std::runtime_error("direction must be minus/plus");
                };
                trace = atom_flow(exh, dir(cfg.get("A")), dir(cfg.get("B")), th);
            }
            if (!out_path.empty()) {
                std::ofstream csv(out_path);
                if (!csv) throw std::runtime_error("cannot write '" + out_path + "'");
                trace.write_csv(csv);
            }
            trace.write_report(log);
            return 0;
        }
        if (op == "cap_identity") {
            ExhaustionFamily exh = exhaustion_from_config(cfg);
            auto residuals = cap_identity(exh, cfg.get("x"));
            double tol = cfg.number_or("tol", 1e-10);
            bool ok = true;
            for (std::size_t i = 0; i < residuals.size(); ++i) {
                log << "residual_at_" << exh.levels[i].level << " " << format_g17(residuals[i])
                    << "\n";
                if (residuals[i] > tol) ok = false;
            }
            log << "pass " << (ok ? 1 : 0) << "\n";
            return ok ? 0 : 1;
        }
        if (op == "hinge_identity") {
            KilledWeightedGraph graph = graph_from_config(cfg);
            VertexSet L = set_from_config(cfg, graph, "L");
            VertexId x = vertex_from_config(cfg, graph, "x");
            double residual = hinge_identity_check(graph, L, x);
            double tol = cfg.number_or("tol", 1e-10);
            log << "max_residual " << format_g17(residual) << "\n";
            log << "pass " << (residual <= tol ? 1 : 0) << "\n";
            return residual <= tol ? 0 : 1;
        }
        if (op == "equilibrium") {
            KilledWeightedGraph graph = graph_from_config(cfg);
            VertexSet K = set_from_config(cfg, graph, "K");
            auto prof = equilibrium(graph, K);
            log << "cap " << format_g17(prof.capacity) << "\n";
            if (!out_path.empty()) {
                std::ofstream out(out_path);
                write_measure_csv(out, prof.e);
            }
            return 0;
        }
        if (op == "hinge") {
            KilledWeightedGraph graph = graph_from_config(cfg);
            VertexSet K = set_from_config(cfg, graph, "K");
            auto hm = hinge(graph, K);
            log << "mass " << format_g17(hm.total()) << "\n";
            if (!out_path.empty()) {
                std::ofstream out(out_path);
                write_matrix_csv(out, hm);
            }
            return 0;
        }
        if (op == "sample") {
            KilledWeightedGraph graph = graph_from_config(cfg);
            VertexSet K = set_from_config(cfg, graph, "K");
            RngStream rng(static_cast<std::uint64_t>(cfg.integer_or("seed", 1)), 0);
            WindowSampler sampler(graph, K);
            WindowSample s = sampler.sample(rng);
            log << "trajectories " << s.trajectories.size() << "\n";
            if (!out_path.empty()) {
                std::ofstream out(out_path);
                write_trajectories(out, s);
                std::ofstream fields(out_path + ".fields.csv");
                write_fields_csv(fields, s.fields);
            }
            return 0;
        }
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 1;
    }
    log << "error: unknown operation '" << op << "'\n";
    return 2;
}

}  // namespace rwi
