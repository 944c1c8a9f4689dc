#pragma once

#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "rwi/graph.hpp"
#include "rwi/potential.hpp"
#include "rwi/rng.hpp"

namespace rwi {

struct SamplerOptions {
    long step_budget = 10'000'000;     // per walk; exceeding it signals vanishing kills
    long rejection_budget = 1'000'000;  // attempts for bridge / extension rejection
};

struct FinitePath {
    enum class Terminal { Killed, TruncatedAtLastVisit };
    std::vector<VertexId> vertices;
    Terminal terminal = Terminal::Killed;
};

// One interlacement trajectory anchored at its entry point into the window:
// the backward leg realizes the chain conditioned never to return to the
// window, the forward leg is unconditioned, both start at the entry vertex.
struct LabeledTrajectory {
    FinitePath backward;
    VertexId entry;
    FinitePath forward;
    std::optional<double> level;
};

struct OccupationFields {
    VertexSet window;
    std::vector<char> indicator;        // parallel to window.ids()
    std::vector<long> trajectory_count;  // distinct trajectories visiting
    std::vector<long> visit_count;       // total visits (entry counted once)

    long slot(VertexId v) const;  // index into the parallel arrays, -1 if absent
    bool visited(VertexId v) const;
    long trajectories_at(VertexId v) const;
    long visits_at(VertexId v) const;
};

struct WindowSample {
    VertexSet window;
    std::vector<LabeledTrajectory> trajectories;
    OccupationFields fields;
};

OccupationFields occupation_fields(const VertexSet& window,
                                   const std::vector<LabeledTrajectory>& trajectories);
OccupationFields occupation_fields(const WindowSample& sample);

bool trajectory_hits(const LabeledTrajectory& t, const VertexSet& set);

// (entry point, last visit) of the trajectory inside the window
std::pair<VertexId, VertexId> hinge_couple(const LabeledTrajectory& t, const VertexSet& window);

// Re-anchor a trajectory at its first visit (in bi-infinite time) to a new
// window; pure path surgery, no resampling.
LabeledTrajectory reanchor(const LabeledTrajectory& t, const VertexSet& new_window);

// Plain chain steps from precomputed per-vertex tables.
class ForwardSampler {
  public:
    explicit ForwardSampler(const KilledWeightedGraph& graph);
    VertexId step(VertexId x, RngStream& rng) const;  // kGhost when killed
    FinitePath sample(VertexId start, RngStream& rng, long step_budget = 10'000'000) const;

  private:
    const KilledWeightedGraph* graph_;
    std::vector<std::vector<double>> cumulative_;
    std::vector<std::vector<VertexId>> targets_;
};

// Doob h-transform of the chain conditioned never to return to the window.
class NoReturnSampler {
  public:
    NoReturnSampler(const KilledWeightedGraph& graph, VertexSet window,
                    const SolverOptions& opts = {});

    double escape_probability(VertexId x) const { return escape_[x]; }
    // conditioned one-step law (ghost carries key -1)
    DiscreteDistribution step_law(VertexId x) const;
    // transformed row total; equals 1 up to solver precision
    double transformed_row_sum(VertexId x) const;

    FinitePath sample(VertexId start, RngStream& rng, long step_budget = 10'000'000) const;

  private:
    const KilledWeightedGraph* graph_;
    VertexSet window_;
    std::vector<double> escape_;  // P_x[never return to window] on window
    Eigen::VectorXd q_;           // P_z[absorbed before hitting window] off window
    std::vector<std::vector<double>> cumulative_;
    std::vector<std::vector<VertexId>> targets_;
};

// Poisson sampling of the interlacement process restricted to one window.
class WindowSampler {
  public:
    WindowSampler(const KilledWeightedGraph& graph, VertexSet window,
                  SamplerOptions sampler_opts = {}, SolverOptions solver_opts = {});

    const KilledWeightedGraph& graph() const { return *graph_; }
    const VertexSet& window() const { return window_; }
    const EquilibriumProfile& profile() const { return profile_; }

    LabeledTrajectory sample_trajectory(RngStream& rng) const;  // entry drawn from harm
    WindowSample sample(RngStream& rng) const { return sample_at_level(1.0, rng); }
    WindowSample sample_at_level(double level, RngStream& rng) const;

    // one marked process at the top level; the sample at level u keeps the
    // trajectories with mark <= u, so inclusions hold pathwise
    std::vector<std::pair<double, WindowSample>> sample_levels(const std::vector<double>& levels,
                                                               RngStream& rng) const;

    std::vector<std::pair<VertexId, VertexId>> sample_hinge_process(RngStream& rng) const;

    const HingeMeasure& hinge_measure() const;

    // P_x[last window visit at y]: the bridge acceptance rate
    double bridge_acceptance(VertexId x, VertexId y) const;
    FinitePath sample_bridge(VertexId x, VertexId y, RngStream& rng) const;

  private:
    const KilledWeightedGraph* graph_;
    VertexSet window_;
    SamplerOptions sampler_opts_;
    PotentialSolver potential_;
    EquilibriumProfile profile_;
    ForwardSampler forward_;
    NoReturnSampler no_return_;
    std::vector<VertexId> harm_targets_;
    std::vector<double> harm_cumulative_;

    mutable std::once_flag hinge_once_;
    mutable std::unique_ptr<HingeMeasure> hinge_;
    mutable std::vector<double> hinge_cumulative_;
};

// Markovian extension of a window sample from K to a larger window L:
// existing trajectories are re-anchored, trajectories hitting L but not K
// arrive as an independent Poisson batch of intensity cap(L) - cap(K).
class WindowExtender {
  public:
    WindowExtender(const KilledWeightedGraph& graph, VertexSet from, VertexSet to,
                   SamplerOptions sampler_opts = {}, SolverOptions solver_opts = {});

    WindowSample extend(const WindowSample& sample, RngStream& rng) const;

    double added_intensity() const { return profile_to_.capacity - cap_from_; }
    // chance that a fresh L-trajectory entering at x avoids K entirely
    double entry_acceptance(VertexId x) const;

  private:
    const KilledWeightedGraph* graph_;
    VertexSet from_, to_;
    SamplerOptions sampler_opts_;
    EquilibriumProfile profile_to_;
    double cap_from_;
    ForwardSampler forward_;
    NoReturnSampler no_return_to_;
    HittingResult from_hitting_;
    std::vector<VertexId> harm_targets_;
    std::vector<double> harm_cumulative_;
};

// one-shot forms
FinitePath sample_forward(const KilledWeightedGraph& g, VertexId x, RngStream& rng,
                          const SamplerOptions& opts = {});
FinitePath sample_no_return(const KilledWeightedGraph& g, const VertexSet& K, VertexId x,
                            RngStream& rng, const SamplerOptions& opts = {});
WindowSample sample_window(const KilledWeightedGraph& g, const VertexSet& K, RngStream& rng,
                           const SamplerOptions& opts = {});
std::vector<std::pair<VertexId, VertexId>> sample_hinge_process(const KilledWeightedGraph& g,
                                                                const VertexSet& K,
                                                                RngStream& rng,
                                                                const SamplerOptions& opts = {});
FinitePath sample_bridge(const KilledWeightedGraph& g, const VertexSet& K, VertexId x, VertexId y,
                         RngStream& rng, const SamplerOptions& opts = {});
WindowSample extend_window(const KilledWeightedGraph& g, const VertexSet& K, const VertexSet& L,
                           const WindowSample& sample, RngStream& rng,
                           const SamplerOptions& opts = {});
std::vector<std::pair<double, WindowSample>> sample_levels(const KilledWeightedGraph& g,
                                                           const VertexSet& K,
                                                           const std::vector<double>& levels,
                                                           RngStream& rng,
                                                           const SamplerOptions& opts = {});

// dump format: one line per trajectory,
//   level_mark entry | backward leg | forward leg
void write_trajectories(std::ostream& out, const WindowSample& sample);
void write_fields_csv(std::ostream& out, const OccupationFields& fields);

}  // namespace rwi
