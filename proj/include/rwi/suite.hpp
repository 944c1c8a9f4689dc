#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace rwi {

struct SuiteOptions {
    std::uint64_t seed = 20250810;
    std::string out_dir = "suite_out";
    double sample_scale = 1.0;        // scales every Monte Carlo sample count
    bool include_determinism = true;  // re-runs a reduced battery twice and compares artifacts
    int threads = 0;                  // 0 = automatic
};

struct CriterionOutcome {
    int index = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

// Runs the full verification battery, writing one artifact file per
// criterion under out_dir.  Artifacts are byte-identical across runs with the
// same seed, except for wall_seconds lines.
std::vector<CriterionOutcome> run_acceptance_suite(const SuiteOptions& options);

// one line per criterion; returns the number of failures
int print_outcomes(const std::vector<CriterionOutcome>& outcomes, std::ostream& out);

}  // namespace rwi
