#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "rwi/coupling.hpp"
#include "rwi/rng.hpp"
#include "rwi/sampler.hpp"

namespace rwi {

struct StatReport {
    std::string name;
    double estimate = 0.0;
    double std_error = 0.0;
    double reference = 0.0;
    std::string provenance;  // where the reference comes from ("exact solve", "closed form", ...)
    double z = 0.0;
    double sigma = 4.0;  // pass multiplier
    bool two_sided = true;
    bool pass = false;
    long samples = 0;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;  // excluded from byte-for-byte comparisons
    std::string note;

    void write(std::ostream& out) const;
};

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    int merged_cells = 0;  // cells pooled because their expectation was below the floor
    long samples = 0;
};

// Goodness of fit of observed counts against an exact discrete law; cells
// with expectation below `min_expected` are pooled.
ChiSquareResult chi_square_gof(const std::map<std::int64_t, long>& observed,
                               const DiscreteDistribution& law, long n,
                               double min_expected = 5.0);

struct DispersionResult {
    double mean = 0.0;
    double variance = 0.0;
    double dispersion = 0.0;  // variance / mean
    double z_mean = 0.0;      // against the Poisson parameter
    double z_dispersion = 0.0;
    long samples = 0;
};

// Poisson dispersion test of integer counts against rate lambda.
DispersionResult poisson_dispersion(const std::vector<long>& counts, double lambda);

// Evaluate one observation per replica on independent substreams, in
// parallel, with a deterministic result independent of the thread count.
std::vector<double> mc_collect(long n, const RngStream& base,
                               const std::function<double(RngStream&)>& observe,
                               int threads = 0);

// Same, but each replica yields a fixed-width row of observables.
std::vector<std::vector<double>> mc_collect_rows(
    long n, const RngStream& base, std::size_t width,
    const std::function<void(RngStream&, std::vector<double>&)>& observe, int threads = 0);

struct MomentSummary {
    double mean = 0.0;
    double std_error = 0.0;
    long n = 0;
};
MomentSummary summarize(const std::vector<double>& values);

struct CovarianceSummary {
    double covariance = 0.0;
    double std_error = 0.0;
    long n = 0;
};
CovarianceSummary covariance(const std::vector<double>& f, const std::vector<double>& g);

StatReport binomial_report(const std::string& name, long hits, long n, double reference,
                           const std::string& provenance, double sigma = 4.0);

// Catalog of certified-nondecreasing functionals of the occupation fields.
// Specs:  contains:<v>[+<v>...]   indicator that all listed vertices are visited
//         min_visits:<v>[+<v>...] minimum visit count over the listed vertices
//         traj_atleast:<v>:<t>    indicator that >= t trajectories visit v
//         one                     constant 1
struct FieldFunctional {
    std::string spec;
    std::function<double(const OccupationFields&)> eval;
};

FieldFunctional parse_functional(const std::string& spec, const KilledWeightedGraph& graph,
                                 const VertexSet& window);

}  // namespace rwi
