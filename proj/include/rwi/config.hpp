#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rwi/criteria.hpp"
#include "rwi/graph.hpp"
#include "rwi/stats.hpp"

namespace rwi {

// Flat key-value experiment description: one `key value` pair per line,
// '#' comments, no nesting.
class ExperimentConfig {
  public:
    ExperimentConfig() = default;
    explicit ExperimentConfig(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

    static ExperimentConfig parse(std::istream& in);
    static ExperimentConfig parse_file(const std::string& path);

    bool has(const std::string& key) const { return kv_.count(key) != 0; }
    const std::string& get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    long integer(const std::string& key) const;
    long integer_or(const std::string& key, long fallback) const;
    std::vector<std::string> list(const std::string& key) const;  // comma-separated

    void set(const std::string& key, const std::string& value) { kv_[key] = value; }
    const std::map<std::string, std::string>& entries() const { return kv_; }

  private:
    std::map<std::string, std::string> kv_;
};

// Build the graph named by the config: `graph biased_z|tree|lattice|file`
// with the generator parameters, or `path` for a graph file.
KilledWeightedGraph graph_from_config(const ExperimentConfig& cfg);

// Resolve a comma-separated list of labels or ids into a vertex set.
VertexSet set_from_config(const ExperimentConfig& cfg, const KilledWeightedGraph& graph,
                          const std::string& key);
VertexId vertex_from_config(const ExperimentConfig& cfg, const KilledWeightedGraph& graph,
                            const std::string& key);

ExhaustionFamily exhaustion_from_config(const ExperimentConfig& cfg);

// Empirical vacancy probability of the window against exp(-u cap(K)).
StatReport vacancy_test(const ExperimentConfig& cfg);

// Covariance of two catalog functionals; the FKG inequality asserts it is
// nonnegative, so the test is one-sided downward.
StatReport fkg_test(const ExperimentConfig& cfg);

// Restriction consistency: entry law of K-restricted L-samples against
// harm_K (chi-square) plus a Poisson dispersion check of the hit counts.
StatReport consistency_test(const ExperimentConfig& cfg);

// Dispatch the operation named by the config, write its artifacts, and
// return a process exit code: 0 all assertions pass, 1 failures, 2 unusable
// config or unknown operation.
int run(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace rwi
