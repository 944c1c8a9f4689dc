#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rwi/graph.hpp"
#include "rwi/potential.hpp"

namespace rwi {

enum class Verdict { VanishingTrend, BoundedBelow, Inconclusive, FiniteLimit, Diverging };

std::string to_string(Verdict v);

struct CriterionThresholds {
    double vanish_threshold = 1e-2;  // last value below this, nonincreasing tail
    double floor_threshold = 1e-1;   // last three values above this, nearly flat
    double relative_flat = 0.10;
    double increment_tol = 1e-6;   // atom flow: increments below this mean a finite limit
    double growth_factor = 2.0;    // atom flow: overall growth beyond this means divergence
    double identity_tol = 1e-10;
};

struct CriterionRecord {
    int level;
    double eps;
    double value;
    double capacity;      // cap(L_n)
    double aux_residual;  // cap-identity residual at this level
};

struct CriterionTrace {
    std::string family;
    std::string op;
    std::string x_label;
    double eps = 0.0;
    CriterionThresholds thresholds;
    std::vector<CriterionRecord> records;
    Verdict verdict = Verdict::Inconclusive;
    bool nontrivial_flow = false;  // atom flow converged to a finite positive value

    void write_csv(std::ostream& out) const;     // level,eps,value,cap,aux_residual
    void write_report(std::ostream& out) const;  // flat key-value text
};

// Hinge-weighted criterion sum
//   sum_{x',y'} h_L(x',y') (P_{x'}[hit x | last L-visit at y'] - eps)_+
// along the exhaustion.  Vanishing iff the zero-one law holds for the family.
CriterionTrace strong_criterion(const ExhaustionFamily& exhaustion, const std::string& x_label,
                                double eps, const CriterionThresholds& thresholds = {},
                                const SolverOptions& opts = {});

// sum_{x'} e_L(x') (P_{x'}[hit x] - eps)_+ along the exhaustion.  This
// vanishes for every transient chain, so a non-vanishing verdict throws.
CriterionTrace weak_criterion(const ExhaustionFamily& exhaustion, const std::string& x_label,
                              double eps, const CriterionThresholds& thresholds = {},
                              const SolverOptions& opts = {});

// |sum_{x'} e_L(x') P_{x'}[hit x] - cap({x})| per level; exact identity
std::vector<double> cap_identity(const ExhaustionFamily& exhaustion, const std::string& x_label,
                                 const SolverOptions& opts = {});

// Monotone per-level values of cap_{A->B}(K_n) with a finite-limit /
// diverging verdict; a finite positive limit certifies a nontrivial
// direction-crossing count and hence the failure of the zero-one law.
CriterionTrace atom_flow(const ExhaustionFamily& exhaustion, Direction A, Direction B,
                         const CriterionThresholds& thresholds = {},
                         const SolverOptions& opts = {});

// Exact identity behind the singleton hinge tilt: for all boundary pairs,
//   P_x[last L-visit = x' | no return to x] P_x[last L-visit = y' | no return to x]
//     = h_L(x',y') / (a_x P_x[no return to x]) * P_{x'}[hit x | last L-visit = y'].
// Returns the maximum absolute residual.
double hinge_identity_check(const KilledWeightedGraph& graph, const VertexSet& L, VertexId x,
                            const SolverOptions& opts = {});

}  // namespace rwi
