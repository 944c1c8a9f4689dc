#include "rwi/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "rwi/graph.hpp"

namespace rwi {

void StatReport::write(std::ostream& out) const {
    out << "name " << name << "\n";
    out << "estimate " << format_g17(estimate) << "\n";
    out << "std_error " << format_g17(std_error) << "\n";
    out << "reference " << format_g17(reference) << "\n";
    out << "provenance " << provenance << "\n";
    out << "z " << format_g17(z) << "\n";
    out << "sigma " << format_g17(sigma) << "\n";
    out << "two_sided " << (two_sided ? 1 : 0) << "\n";
    out << "pass " << (pass ? 1 : 0) << "\n";
    out << "samples " << samples << "\n";
    out << "seed " << seed << "\n";
    if (!note.empty()) out << "note " << note << "\n";
    out << "wall_seconds " << format_g17(wall_seconds) << "\n";
}

ChiSquareResult chi_square_gof(const std::map<std::int64_t, long>& observed,
                               const DiscreteDistribution& law, long n, double min_expected) {
    if (!law.is_probability())
        throw std::invalid_argument("chi_square_gof: law must be a probability");
    long observed_total = 0;
    for (const auto& [key, count] : observed) {
        if (law.mass(key) <= 0.0)
            throw std::invalid_argument("chi_square_gof: observed key " + std::to_string(key) +
                                        " has zero probability under the law");
        observed_total += count;
    }
    if (observed_total != n)
        throw std::invalid_argument("chi_square_gof: counts do not add up to the sample size");

    struct Cell {
        double expected;
        double got;
    };
    std::vector<Cell> cells;
    for (const auto& [key, p] : law.entries()) {
        auto it = observed.find(key);
        cells.push_back({p * static_cast<double>(n),
                         static_cast<double>(it == observed.end() ? 0 : it->second)});
    }
    std::sort(cells.begin(), cells.end(),
              [](const Cell& a, const Cell& b) { return a.expected < b.expected; });

    ChiSquareResult res;
    res.samples = n;
    // pool the low-expectation cells from the bottom up
    std::vector<Cell> merged;
    Cell pool{0.0, 0.0};
    for (const auto& c : cells) {
        if (pool.expected < min_expected) {
            pool.expected += c.expected;
            pool.got += c.got;
            ++res.merged_cells;
        } else {
            merged.push_back(c);
        }
    }
    if (pool.expected > 0.0) merged.push_back(pool);
    if (res.merged_cells == 1) res.merged_cells = 0;  // a single cell was not really pooled

    if (merged.size() < 2) {
        res.dof = 0;
        res.p_value = 1.0;
        return res;
    }
    double stat = 0.0;
    for (const auto& c : merged) {
        double d = c.got - c.expected;
        stat += d * d / c.expected;
    }
    res.statistic = stat;
    res.dof = static_cast<int>(merged.size()) - 1;
    boost::math::chi_squared dist(res.dof);
    res.p_value = boost::math::cdf(boost::math::complement(dist, stat));
    return res;
}

DispersionResult poisson_dispersion(const std::vector<long>& counts, double lambda) {
    if (counts.size() < 2) throw std::invalid_argument("poisson_dispersion: need >= 2 samples");
    const long n = static_cast<long>(counts.size());
    double mean = 0.0;
    for (long c : counts) mean += static_cast<double>(c);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (long c : counts) {
        double d = static_cast<double>(c) - mean;
        var += d * d;
    }
    var /= static_cast<double>(n - 1);

    DispersionResult res;
    res.mean = mean;
    res.variance = var;
    res.dispersion = mean > 0.0 ? var / mean : 1.0;
    res.z_mean = (mean - lambda) / std::sqrt(lambda / static_cast<double>(n));
    res.z_dispersion = (res.dispersion - 1.0) / std::sqrt(2.0 / static_cast<double>(n - 1));
    res.samples = n;
    return res;
}

std::vector<std::vector<double>> mc_collect_rows(
    long n, const RngStream& base, std::size_t width,
    const std::function<void(RngStream&, std::vector<double>&)>& observe, int threads) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(n),
                                          std::vector<double>(width, 0.0));
    int workers = threads > 0 ? threads
                              : static_cast<int>(std::min(8u, std::thread::hardware_concurrency()));
    if (workers < 1) workers = 1;

    auto run_chunk = [&](long lo, long hi) {
        for (long i = lo; i < hi; ++i) {
            RngStream replica = base.substream(static_cast<std::uint64_t>(i));
            observe(replica, rows[static_cast<std::size_t>(i)]);
        }
    };
    if (workers == 1 || n < 512) {
        run_chunk(0, n);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
        long chunk = (n + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            long lo = w * chunk, hi = std::min<long>(n, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&, lo, hi, w] {
                try {
                    run_chunk(lo, hi);
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    return rows;
}

std::vector<double> mc_collect(long n, const RngStream& base,
                               const std::function<double(RngStream&)>& observe, int threads) {
    auto rows = mc_collect_rows(
        n, base, 1, [&](RngStream& rng, std::vector<double>& row) { row[0] = observe(rng); },
        threads);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[0]);
    return out;
}

MomentSummary summarize(const std::vector<double>& values) {
    MomentSummary s;
    s.n = static_cast<long>(values.size());
    if (s.n == 0) return s;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(s.n);
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(std::max<long>(1, s.n - 1));
    s.mean = mean;
    s.std_error = std::sqrt(var / static_cast<double>(s.n));
    return s;
}

CovarianceSummary covariance(const std::vector<double>& f, const std::vector<double>& g) {
    if (f.size() != g.size() || f.size() < 2)
        throw std::invalid_argument("covariance: mismatched or tiny samples");
    const long n = static_cast<long>(f.size());
    double fm = 0.0, gm = 0.0;
    for (long i = 0; i < n; ++i) {
        fm += f[i];
        gm += g[i];
    }
    fm /= static_cast<double>(n);
    gm /= static_cast<double>(n);

    // products (f - fbar)(g - gbar); their sample mean estimates the
    // covariance and their spread gives its standard error
    double cov = 0.0;
    std::vector<double> w(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        w[static_cast<std::size_t>(i)] = (f[i] - fm) * (g[i] - gm);
        cov += w[static_cast<std::size_t>(i)];
    }
    cov /= static_cast<double>(n - 1);
    double var_w = 0.0;
    for (double v : w) var_w += (v - cov) * (v - cov);
    var_w /= static_cast<double>(n - 1);

    CovarianceSummary s;
    s.covariance = cov;
    s.std_error = std::sqrt(var_w / static_cast<double>(n));
    s.n = n;
    return s;
}

StatReport binomial_report(const std::string& name, long hits, long n, double reference,
                           const std::string& provenance, double sigma) {
    StatReport r;
    r.name = name;
    r.samples = n;
    r.estimate = static_cast<double>(hits) / static_cast<double>(n);
    r.reference = reference;
    r.provenance = provenance;
    r.std_error = std::sqrt(reference * (1.0 - reference) / static_cast<double>(n));
    r.z = r.std_error > 0.0 ? (r.estimate - reference) / r.std_error : 0.0;
    r.sigma = sigma;
    r.two_sided = true;
    r.pass = std::abs(r.z) <= sigma;
    return r;
}

FieldFunctional parse_functional(const std::string& spec, const KilledWeightedGraph& graph,
                                 const VertexSet& window) {
    auto resolve = [&](const std::string& token) {
        VertexId v = graph.vertex_by_label(token);
        if (v < 0) {
            try {
                v = static_cast<VertexId>(std::stol(token));
            } catch (...) {
                throw std::invalid_argument("unknown vertex '" + token + "'");
            }
        }
        if (!window.contains(v))
            throw std::invalid_argument("vertex '" + token + "' is not in the window");
        return v;
    };
    auto split = [](const std::string& s, char sep) {
        std::vector<std::string> parts;
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, sep)) parts.push_back(tok);
        return parts;
    };

    FieldFunctional f;
    f.spec = spec;
    if (spec == "one") {
        f.eval = [](const OccupationFields&) { return 1.0; };
        return f;
    }
    auto colon = spec.find(':');
    std::string kind = colon == std::string::npos ? spec : spec.substr(0, colon);
    std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);

    if (kind == "contains") {
        std::vector<VertexId> vs;
        for (const auto& tok : split(rest, '+')) vs.push_back(resolve(tok));
        if (vs.empty()) throw std::invalid_argument("contains: needs at least one vertex");
        f.eval = [vs](const OccupationFields& fields) {
            for (VertexId v : vs)
                if (!fields.visited(v)) return 0.0;
            return 1.0;
        };
    } else if (kind == "min_visits") {
        std::vector<VertexId> vs;
        for (const auto& tok : split(rest, '+')) vs.push_back(resolve(tok));
        if (vs.empty()) throw std::invalid_argument("min_visits: needs at least one vertex");
        f.eval = [vs](const OccupationFields& fields) {
            long m = fields.visits_at(vs[0]);
            for (VertexId v : vs) m = std::min(m, fields.visits_at(v));
            return static_cast<double>(m);
        };
    } else if (kind == "traj_atleast") {
        auto parts = split(rest, ':');
        if (parts.size() != 2) throw std::invalid_argument("traj_atleast:<vertex>:<count>");
        VertexId v = resolve(parts[0]);
        long t = std::stol(parts[1]);
        f.eval = [v, t](const OccupationFields& fields) {
            return fields.trajectories_at(v) >= t ? 1.0 : 0.0;
        };
    } else {
        // monotonicity is semantic: refuse anything outside the catalog
        throw std::invalid_argument("functional '" + spec +
                                    "' is not in the certified-monotone catalog");
    }
    return f;
}

}  // namespace rwi
