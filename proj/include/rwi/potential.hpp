#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rwi/coupling.hpp"
#include "rwi/graph.hpp"

namespace rwi {

struct SolverOptions {
    int dense_limit = 4000;          // direct dense factorization up to this many unknowns
    double cg_tolerance = 1e-12;     // relative residual for the iterative fallback
    int cg_max_iterations = 200000;
    double boundary_threshold = 1e-14;  // escape probabilities below this count as zero
};

// e_K, cap(K), harm_K and the inner escape boundary of K
struct EquilibriumProfile {
    VertexSet target;
    std::vector<double> e;  // over all vertices, supported on the boundary
    double capacity = 0.0;
    DiscreteDistribution harmonic;  // probability over boundary vertex ids
    VertexSet boundary;
};

// Symmetric measure h_K(x,y) = e_K(x) P_x[last visit to K at y] on the
// boundary square; marginals e_K, total mass cap(K).
struct HingeMeasure {
    VertexSet target;
    std::vector<VertexId> boundary;  // row/column order
    Eigen::MatrixXd h;
    std::size_t n_vertices = 0;

    double value(VertexId x, VertexId y) const;
    double total() const { return h.sum(); }
    double max_asymmetry() const;
    // couples encoded as x * n_vertices + y, normalized by cap(K)
    DiscreteDistribution couple_law() const;
    static DiscreteDistribution::Key couple_key(VertexId x, VertexId y, std::size_t n) {
        return static_cast<DiscreteDistribution::Key>(x) * static_cast<DiscreteDistribution::Key>(n) + y;
    }
};

// g(x,y) = expected number of visits to y started from x, full matrix
struct GreenMatrix {
    Eigen::MatrixXd g;
    double operator()(VertexId x, VertexId y) const { return g(x, y); }
};

struct HittingResult {
    VertexSet target;
    std::vector<double> probability;  // P_x[hit K], 1 on K
    Eigen::MatrixXd entry;            // n x |K|: P_x[X at first hit = k_j, hit K]
    DiscreteDistribution entry_distribution(VertexId x) const;  // finite measure, mass = probability
};

enum class Direction { ToMinusInfinity, ToPlusInfinity };

struct RestrictedEquilibrium {
    VertexSet target;
    std::vector<double> e;
    double capacity = 0.0;
};

// Antisymmetric edge flow; ghost edges keyed (x, kGhost)
class Flow {
  public:
    void set(VertexId from, VertexId to, double value);
    double get(VertexId from, VertexId to) const;
    const std::map<std::pair<VertexId, VertexId>, double>& entries() const { return theta_; }

  private:
    std::map<std::pair<VertexId, VertexId>, double> theta_;
};

// Exact potential theory for one graph.  The full-graph factorization is
// built lazily once and shared by green/hinge/last-exit queries; everything
// else is a pure function of the inputs.
class PotentialSolver {
  public:
    explicit PotentialSolver(const KilledWeightedGraph& graph, SolverOptions options = {});
    ~PotentialSolver();
    PotentialSolver(const PotentialSolver&) = delete;
    PotentialSolver& operator=(const PotentialSolver&) = delete;

    const KilledWeightedGraph& graph() const { return graph_; }
    const SolverOptions& options() const { return options_; }

    // q(z) = P_z[absorbed before hitting K] for z off K, 0 on K
    Eigen::VectorXd absorbed_before_hitting(const VertexSet& K) const;

    // P_x[never returns to K] for x in K, 0 elsewhere
    std::vector<double> escape_probability(const VertexSet& K) const;

    EquilibriumProfile equilibrium(const VertexSet& K) const;

    HittingResult hitting(const VertexSet& K) const;

    GreenMatrix greens() const;
    double green_entry(VertexId x, VertexId y) const;
    Eigen::VectorXd green_row(VertexId x) const;  // g(x, .)

    // P_x[last visit to L at .]: finite measure with mass P_x[hit L];
    // `conditional` normalizes to a probability.
    DiscreteDistribution last_exit_distribution(const VertexSet& L, VertexId x,
                                                bool conditional = false) const;

    HingeMeasure hinge(const VertexSet& K) const;

    // sum over x in L of e_L(x) P_x[enter K at .], to be compared with e_K
    std::vector<double> consistency_pushforward(const VertexSet& K, const VertexSet& L) const;

    // P_{from}[hit x | last visit to L at exit_point]
    double conditional_hit_given_last_exit(const VertexSet& L, VertexId x, VertexId from,
                                           VertexId exit_point) const;

    // law of the last L-visit for the chain from x conditioned never to
    // return to x; feeds the singleton hinge identity
    DiscreteDistribution last_exit_given_no_return(const VertexSet& L, VertexId x) const;

    // P_x[absorbed at the given collapsed end]; requires graph ends
    std::vector<double> direction_probability(Direction d) const;

    // e_{K, A->B}(x) = a_x P_x[A, never return to K] P_x[B] and its mass
    RestrictedEquilibrium restricted_equilibrium(const VertexSet& K, Direction A,
                                                 Direction B) const;

    Flow harmonic_flow(const VertexSet& K) const;

    struct Impl;  // holds the lazily built full-graph factorization

  private:
    const KilledWeightedGraph& graph_;
    SolverOptions options_;
    std::unique_ptr<Impl> impl_;
};

// Free-function forms of the operations above (one-shot solver)
std::vector<double> escape_probability(const KilledWeightedGraph& g, const VertexSet& K,
                                       const SolverOptions& opts = {});
EquilibriumProfile equilibrium(const KilledWeightedGraph& g, const VertexSet& K,
                               const SolverOptions& opts = {});
HittingResult hitting(const KilledWeightedGraph& g, const VertexSet& K,
                      const SolverOptions& opts = {});
GreenMatrix greens(const KilledWeightedGraph& g, const SolverOptions& opts = {});
DiscreteDistribution last_exit_distribution(const KilledWeightedGraph& g, const VertexSet& L,
                                            VertexId x, bool conditional = false,
                                            const SolverOptions& opts = {});
HingeMeasure hinge(const KilledWeightedGraph& g, const VertexSet& K,
                   const SolverOptions& opts = {});
std::vector<double> consistency_pushforward(const KilledWeightedGraph& g, const VertexSet& K,
                                            const VertexSet& L, const SolverOptions& opts = {});
double conditional_hit_given_last_exit(const KilledWeightedGraph& g, const VertexSet& L,
                                       VertexId x, VertexId from, VertexId exit_point,
                                       const SolverOptions& opts = {});
RestrictedEquilibrium restricted_equilibrium(const KilledWeightedGraph& g, const VertexSet& K,
                                             Direction A, Direction B,
                                             const SolverOptions& opts = {});

// Validates the flow (antisymmetry, conservation off K, no flow inside K,
// unit strength out of K) and returns the energy over ordered vertex pairs;
// always >= 2 / cap(K), with equality for the harmonic flow.
double flow_energy_bound(const KilledWeightedGraph& g, const VertexSet& K, const Flow& flow);

Flow harmonic_flow(const KilledWeightedGraph& g, const VertexSet& K,
                   const SolverOptions& opts = {});

// CSV export: "x,value" for measures, "x,y,value" for matrices (17 digits)
void write_measure_csv(std::ostream& out, const std::vector<double>& values,
                       bool skip_zeros = true);
void write_measure_csv(std::ostream& out, const DiscreteDistribution& dist);
void write_matrix_csv(std::ostream& out, const HingeMeasure& h);
void write_matrix_csv(std::ostream& out, const GreenMatrix& g);

}  // namespace rwi
