#include "rwi/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace rwi {

namespace {

void check_vertex(const KilledWeightedGraph& g, VertexId x, const char* what) {
    if (x < 0 || static_cast<std::size_t>(x) >= g.size())
        throw std::out_of_range(std::string(what) + ": invalid vertex id " + std::to_string(x));
}

[[noreturn]] void runaway(long budget) {
    throw std::runtime_error("walk exceeded the step budget of " + std::to_string(budget) +
                             "; the graph may have vanishing kill weights");
}

}  // namespace

// ---------------------------------------------------------------------------
// occupation fields and path surgery

long OccupationFields::slot(VertexId v) const {
    const auto& ids = window.ids();
    auto it = std::lower_bound(ids.begin(), ids.end(), v);
    if (it == ids.end() || *it != v) return -1;
    return it - ids.begin();
}

bool OccupationFields::visited(VertexId v) const {
    long s = slot(v);
    return s >= 0 && indicator[s];
}

long OccupationFields::trajectories_at(VertexId v) const {
    long s = slot(v);
    return s >= 0 ? trajectory_count[s] : 0;
}

long OccupationFields::visits_at(VertexId v) const {
    long s = slot(v);
    return s >= 0 ? visit_count[s] : 0;
}

OccupationFields occupation_fields(const VertexSet& window,
                                   const std::vector<LabeledTrajectory>& trajectories) {
    OccupationFields f;
    f.window = window;
    f.indicator.assign(window.size(), 0);
    f.trajectory_count.assign(window.size(), 0);
    f.visit_count.assign(window.size(), 0);

    std::vector<char> seen(window.size(), 0);
    for (const auto& t : trajectories) {
        std::fill(seen.begin(), seen.end(), 0);
        // the entry vertex opens both legs; count it once
        auto add = [&](VertexId v) {
            long s = f.slot(v);
            if (s < 0) return;
            ++f.visit_count[s];
            seen[s] = 1;
        };
        for (VertexId v : t.backward.vertices) add(v);
        for (std::size_t i = 1; i < t.forward.vertices.size(); ++i) add(t.forward.vertices[i]);
        for (std::size_t s = 0; s < seen.size(); ++s)
            if (seen[s]) {
                ++f.trajectory_count[s];
                f.indicator[s] = 1;
            }
    }
    return f;
}

OccupationFields occupation_fields(const WindowSample& sample) {
    return occupation_fields(sample.window, sample.trajectories);
}

bool trajectory_hits(const LabeledTrajectory& t, const VertexSet& set) {
    for (VertexId v : t.backward.vertices)
        if (set.contains(v)) return true;
    for (VertexId v : t.forward.vertices)
        if (set.contains(v)) return true;
    return false;
}

std::pair<VertexId, VertexId> hinge_couple(const LabeledTrajectory& t, const VertexSet& window) {
    if (!window.contains(t.entry))
        throw std::invalid_argument("hinge_couple: trajectory is not anchored in the window");
    const auto& fwd = t.forward.vertices;
    for (std::size_t i = fwd.size(); i-- > 0;)
        if (window.contains(fwd[i])) return {t.entry, fwd[i]};
    return {t.entry, t.entry};
}

LabeledTrajectory reanchor(const LabeledTrajectory& t, const VertexSet& new_window) {
    const auto& bwd = t.backward.vertices;
    const auto& fwd = t.forward.vertices;

    // first visit in bi-infinite time: deepest backward index, else earliest
    // forward index
    long ib = -1;
    for (std::size_t i = bwd.size(); i-- > 0;)
        if (new_window.contains(bwd[i])) {
            ib = static_cast<long>(i);
            break;
        }

    LabeledTrajectory out;
    out.level = t.level;
    if (ib >= 0) {
        out.entry = bwd[ib];
        out.backward.vertices.assign(bwd.begin() + ib, bwd.end());
        out.backward.terminal = t.backward.terminal;
        out.forward.vertices.assign(bwd.rend() - ib - 1, bwd.rend());
        out.forward.vertices.insert(out.forward.vertices.end(), fwd.begin() + 1, fwd.end());
        out.forward.terminal = t.forward.terminal;
        return out;
    }
    for (std::size_t j = 1; j < fwd.size(); ++j) {
        if (new_window.contains(fwd[j])) {
            out.entry = fwd[j];
            out.forward.vertices.assign(fwd.begin() + j, fwd.end());
            out.forward.terminal = t.forward.terminal;
            out.backward.vertices.assign(fwd.rend() - j - 1, fwd.rend());
            out.backward.vertices.insert(out.backward.vertices.end(), bwd.begin() + 1, bwd.end());
            out.backward.terminal = t.backward.terminal;
            return out;
        }
    }
    throw std::invalid_argument("reanchor: trajectory never visits the new window");
}

// ---------------------------------------------------------------------------
// samplers

ForwardSampler::ForwardSampler(const KilledWeightedGraph& graph) : graph_(&graph) {
    const std::size_t n = graph.size();
    cumulative_.resize(n);
    targets_.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        VertexId x = static_cast<VertexId>(v);
        double acc = 0.0;
        for (const auto& [y, w] : graph.neighbors(x)) {
            acc += w;
            cumulative_[v].push_back(acc);
            targets_[v].push_back(y);
        }
        double k = graph.kill_weight(x);
        if (k > 0.0) {
            acc += k;
            cumulative_[v].push_back(acc);
            targets_[v].push_back(kGhost);
        }
    }
}

VertexId ForwardSampler::step(VertexId x, RngStream& rng) const {
    check_vertex(*graph_, x, "ForwardSampler::step");
    const auto& cum = cumulative_[x];
    return targets_[x][rng.discrete_from_cumulative(cum)];
}

FinitePath ForwardSampler::sample(VertexId start, RngStream& rng, long step_budget) const {
    check_vertex(*graph_, start, "sample_forward");
    FinitePath path;
    path.vertices.push_back(start);
    VertexId cur = start;
    for (long steps = 0;; ++steps) {
        if (steps >= step_budget) runaway(step_budget);
        VertexId next = step(cur, rng);
        if (next == kGhost) break;
        path.vertices.push_back(next);
        cur = next;
    }
    path.terminal = FinitePath::Terminal::Killed;
    return path;
}

NoReturnSampler::NoReturnSampler(const KilledWeightedGraph& graph, VertexSet window,
                                 const SolverOptions& opts)
    : graph_(&graph), window_(std::move(window)) {
    PotentialSolver solver(graph, opts);
    q_ = solver.absorbed_before_hitting(window_);
    escape_ = solver.escape_probability(window_);

    const std::size_t n = graph.size();
    cumulative_.resize(n);
    targets_.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        VertexId x = static_cast<VertexId>(v);
        double acc = 0.0;
        for (const auto& [y, w] : graph.neighbors(x)) {
            if (window_.contains(y)) continue;  // a return, forbidden by the conditioning
            double weight = w * q_[y];
            if (weight <= 0.0) continue;
            acc += weight;
            cumulative_[v].push_back(acc);
            targets_[v].push_back(y);
        }
        double k = graph.kill_weight(x);
        if (k > 0.0) {
            acc += k;
            cumulative_[v].push_back(acc);
            targets_[v].push_back(kGhost);
        }
    }
}

DiscreteDistribution NoReturnSampler::step_law(VertexId x) const {
    check_vertex(*graph_, x, "NoReturnSampler::step_law");
    const auto& cum = cumulative_[x];
    if (cum.empty())
        throw std::invalid_argument("step_law: vertex " + std::to_string(x) +
                                    " cannot take a conditioned step");
    std::vector<std::pair<DiscreteDistribution::Key, double>> mass;
    double prev = 0.0;
    for (std::size_t i = 0; i < cum.size(); ++i) {
        mass.push_back({targets_[x][i], (cum[i] - prev) / cum.back()});
        prev = cum[i];
    }
    return DiscreteDistribution::probability(std::move(mass));
}

double NoReturnSampler::transformed_row_sum(VertexId x) const {
    check_vertex(*graph_, x, "NoReturnSampler::transformed_row_sum");
    if (cumulative_[x].empty()) return 0.0;
    double normalizer = window_.contains(x) ? graph_->total_weight(x) * escape_[x]
                                            : graph_->total_weight(x) * q_[x];
    return cumulative_[x].back() / normalizer;
}

FinitePath NoReturnSampler::sample(VertexId start, RngStream& rng, long step_budget) const {
    check_vertex(*graph_, start, "sample_no_return");
    if (window_.contains(start)) {
        if (escape_[start] <= 0.0)
            throw std::invalid_argument("sample_no_return: vertex " + std::to_string(start) +
                                        " has zero escape probability");
    } else if (q_[start] <= 0.0) {
        throw std::invalid_argument("sample_no_return: vertex " + std::to_string(start) +
                                    " cannot avoid the window");
    }
    FinitePath path;
    path.vertices.push_back(start);
    VertexId cur = start;
    for (long steps = 0;; ++steps) {
        if (steps >= step_budget) runaway(step_budget);
        const auto& cum = cumulative_[cur];
        VertexId next = targets_[cur][rng.discrete_from_cumulative(cum)];
        if (next == kGhost) break;
        path.vertices.push_back(next);
        cur = next;
    }
    path.terminal = FinitePath::Terminal::Killed;
    return path;
}

// ---------------------------------------------------------------------------

WindowSampler::WindowSampler(const KilledWeightedGraph& graph, VertexSet window,
                             SamplerOptions sampler_opts, SolverOptions solver_opts)
    : graph_(&graph),
      window_(std::move(window)),
      sampler_opts_(sampler_opts),
      potential_(graph, solver_opts),
      profile_(potential_.equilibrium(window_)),
      forward_(graph),
      no_return_(graph, window_, solver_opts) {
    if (profile_.capacity <= 0.0)
        throw std::invalid_argument("sample_window: cap(K) must be positive");
    double acc = 0.0;
    for (const auto& [key, value] : profile_.harmonic.entries()) {
        acc += value;
        harm_targets_.push_back(static_cast<VertexId>(key));
        harm_cumulative_.push_back(acc);
    }
}

LabeledTrajectory WindowSampler::sample_trajectory(RngStream& rng) const {
    LabeledTrajectory t;
    t.entry = harm_targets_[rng.discrete_from_cumulative(harm_cumulative_)];
    t.backward = no_return_.sample(t.entry, rng, sampler_opts_.step_budget);
    t.forward = forward_.sample(t.entry, rng, sampler_opts_.step_budget);
    return t;
}

WindowSample WindowSampler::sample_at_level(double level, RngStream& rng) const {
    if (level < 0.0) throw std::invalid_argument("sample_at_level: level must be nonnegative");
    WindowSample out;
    out.window = window_;
    long count = rng.poisson(level * profile_.capacity);
    // fresh child streams per draw: each trajectory gets its own stream so
    // parallel generation stays reproducible
    RngStream children = rng.substream(rng.next_u64());
    out.trajectories.reserve(count);
    for (long i = 0; i < count; ++i) {
        RngStream sub = children.substream(static_cast<std::uint64_t>(i));
        out.trajectories.push_back(sample_trajectory(sub));
    }
    out.fields = occupation_fields(out.window, out.trajectories);
    return out;
}

std::vector<std::pair<double, WindowSample>> WindowSampler::sample_levels(
    const std::vector<double>& levels, RngStream& rng) const {
    if (levels.empty()) throw std::invalid_argument("sample_levels: no levels given");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] < 0.0) throw std::invalid_argument("sample_levels: negative level");
        if (i > 0 && levels[i] < levels[i - 1])
            throw std::invalid_argument("sample_levels: levels must be sorted");
    }
    double top = levels.back();

    std::vector<LabeledTrajectory> marked;
    if (top > 0.0) {
        long count = rng.poisson(top * profile_.capacity);
        RngStream children = rng.substream(rng.next_u64());
        marked.reserve(count);
        for (long i = 0; i < count; ++i) {
            RngStream sub = children.substream(static_cast<std::uint64_t>(i));
            double mark = sub.uniform(0.0, top);
            LabeledTrajectory t = sample_trajectory(sub);
            t.level = mark;
            marked.push_back(std::move(t));
        }
    }

    std::vector<std::pair<double, WindowSample>> out;
    out.reserve(levels.size());
    for (double u : levels) {
        WindowSample s;
        s.window = window_;
        for (const auto& t : marked)
            if (*t.level <= u) s.trajectories.push_back(t);
        s.fields = occupation_fields(s.window, s.trajectories);
        out.push_back({u, std::move(s)});
    }
    return out;
}

const HingeMeasure& WindowSampler::hinge_measure() const {
    std::call_once(hinge_once_, [&] {
        hinge_ = std::make_unique<HingeMeasure>(potential_.hinge(window_));
        double acc = 0.0;
        const auto b = hinge_->boundary.size();
        for (std::size_t i = 0; i < b; ++i)
            for (std::size_t j = 0; j < b; ++j) {
                acc += hinge_->h(static_cast<long>(i), static_cast<long>(j));
                hinge_cumulative_.push_back(acc);
            }
    });
    return *hinge_;
}

std::vector<std::pair<VertexId, VertexId>> WindowSampler::sample_hinge_process(
    RngStream& rng) const {
    const HingeMeasure& hm = hinge_measure();
    const std::size_t b = hm.boundary.size();
    long count = rng.poisson(profile_.capacity);
    std::vector<std::pair<VertexId, VertexId>> couples;
    couples.reserve(count);
    for (long i = 0; i < count; ++i) {
        std::size_t flat = rng.discrete_from_cumulative(hinge_cumulative_);
        couples.push_back({hm.boundary[flat / b], hm.boundary[flat % b]});
    }
    return couples;
}

double WindowSampler::bridge_acceptance(VertexId x, VertexId y) const {
    check_vertex(*graph_, x, "bridge_acceptance");
    check_vertex(*graph_, y, "bridge_acceptance");
    return potential_.last_exit_distribution(window_, x).mass(y);
}

FinitePath WindowSampler::sample_bridge(VertexId x, VertexId y, RngStream& rng) const {
    if (!window_.contains(x) || !window_.contains(y))
        throw std::invalid_argument("sample_bridge: endpoints must lie in the window");
    for (long attempt = 0; attempt < sampler_opts_.rejection_budget; ++attempt) {
        FinitePath path = forward_.sample(x, rng, sampler_opts_.step_budget);
        std::size_t cut = 0;
        for (std::size_t i = path.vertices.size(); i-- > 0;)
            if (window_.contains(path.vertices[i])) {
                cut = i;
                break;
            }
        if (path.vertices[cut] != y) continue;
        path.vertices.resize(cut + 1);
        path.terminal = FinitePath::Terminal::TruncatedAtLastVisit;
        return path;
    }
    throw std::runtime_error("sample_bridge: rejection budget exhausted (acceptance " +
                             std::to_string(bridge_acceptance(x, y)) + ")");
}

// ---------------------------------------------------------------------------

WindowExtender::WindowExtender(const KilledWeightedGraph& graph, VertexSet from, VertexSet to,
                               SamplerOptions sampler_opts, SolverOptions solver_opts)
    : graph_(&graph),
      from_(std::move(from)),
      to_(std::move(to)),
      sampler_opts_(sampler_opts),
      profile_to_(equilibrium(graph, to_, solver_opts)),
      cap_from_(equilibrium(graph, from_, solver_opts).capacity),
      forward_(graph),
      no_return_to_(graph, to_, solver_opts),
      from_hitting_(hitting(graph, from_, solver_opts)) {
    if (!from_.subset_of(to_))
        throw std::invalid_argument("extend_window: windows must be nested");
    double acc = 0.0;
    for (const auto& [key, value] : profile_to_.harmonic.entries()) {
        acc += value;
        harm_targets_.push_back(static_cast<VertexId>(key));
        harm_cumulative_.push_back(acc);
    }
}

double WindowExtender::entry_acceptance(VertexId x) const {
    check_vertex(*graph_, x, "entry_acceptance");
    if (from_.contains(x)) return 0.0;
    return 1.0 - from_hitting_.probability[x];
}

WindowSample WindowExtender::extend(const WindowSample& sample, RngStream& rng) const {
    if (!(sample.window == from_))
        throw std::invalid_argument("extend_window: sample window does not match");

    WindowSample out;
    out.window = to_;
    out.trajectories.reserve(sample.trajectories.size());
    for (const auto& t : sample.trajectories) out.trajectories.push_back(reanchor(t, to_));

    long added = rng.poisson(added_intensity());
    RngStream children = rng.substream(rng.next_u64());
    for (long j = 0; j < added; ++j) {
        RngStream sub = children.substream(static_cast<std::uint64_t>(j));
        bool accepted = false;
        for (long attempt = 0; attempt < sampler_opts_.rejection_budget; ++attempt) {
            VertexId entry = harm_targets_[sub.discrete_from_cumulative(harm_cumulative_)];
            if (from_.contains(entry)) continue;
            FinitePath fwd = forward_.sample(entry, sub, sampler_opts_.step_budget);
            bool hits = false;
            for (VertexId v : fwd.vertices)
                if (from_.contains(v)) {
                    hits = true;
                    break;
                }
            if (hits) continue;
            LabeledTrajectory t;
            t.entry = entry;
            t.forward = std::move(fwd);
            t.backward = no_return_to_.sample(entry, sub, sampler_opts_.step_budget);
            out.trajectories.push_back(std::move(t));
            accepted = true;
            break;
        }
        if (!accepted)
            throw std::runtime_error("extend_window: rejection budget exhausted while adding "
                                     "trajectories avoiding the inner window");
    }
    out.fields = occupation_fields(out.window, out.trajectories);
    return out;
}

// ---------------------------------------------------------------------------
// one-shot wrappers

FinitePath sample_forward(const KilledWeightedGraph& g, VertexId x, RngStream& rng,
                          const SamplerOptions& opts) {
    return ForwardSampler(g).sample(x, rng, opts.step_budget);
}

FinitePath sample_no_return(const KilledWeightedGraph& g, const VertexSet& K, VertexId x,
                            RngStream& rng, const SamplerOptions& opts) {
    return NoReturnSampler(g, K).sample(x, rng, opts.step_budget);
}

WindowSample sample_window(const KilledWeightedGraph& g, const VertexSet& K, RngStream& rng,
                           const SamplerOptions& opts) {
    return WindowSampler(g, K, opts).sample(rng);
}

std::vector<std::pair<VertexId, VertexId>> sample_hinge_process(const KilledWeightedGraph& g,
                                                                const VertexSet& K,
                                                                RngStream& rng,
                                                                const SamplerOptions& opts) {
    return WindowSampler(g, K, opts).sample_hinge_process(rng);
}

FinitePath sample_bridge(const KilledWeightedGraph& g, const VertexSet& K, VertexId x, VertexId y,
                         RngStream& rng, const SamplerOptions& opts) {
    return WindowSampler(g, K, opts).sample_bridge(x, y, rng);
}

WindowSample extend_window(const KilledWeightedGraph& g, const VertexSet& K, const VertexSet& L,
                           const WindowSample& sample, RngStream& rng,
                           const SamplerOptions& opts) {
    return WindowExtender(g, K, L, opts).extend(sample, rng);
}

std::vector<std::pair<double, WindowSample>> sample_levels(const KilledWeightedGraph& g,
                                                           const VertexSet& K,
                                                           const std::vector<double>& levels,
                                                           RngStream& rng,
                                                           const SamplerOptions& opts) {
    return WindowSampler(g, K, opts).sample_levels(levels, rng);
}

// ---------------------------------------------------------------------------

void write_trajectories(std::ostream& out, const WindowSample& sample) {
    for (const auto& t : sample.trajectories) {
        if (t.level)
            out << format_g17(*t.level);
        else
            out << "-";
        out << " " << t.entry << " |";
        for (VertexId v : t.backward.vertices) out << " " << v;
        out << " |";
        for (VertexId v : t.forward.vertices) out << " " << v;
        out << "\n";
    }
}

void write_fields_csv(std::ostream& out, const OccupationFields& fields) {
    out << "x,indicator,trajectory_count,visit_count\n";
    for (std::size_t i = 0; i < fields.window.size(); ++i)
        out << fields.window.ids()[i] << "," << static_cast<int>(fields.indicator[i]) << ","
            << fields.trajectory_count[i] << "," << fields.visit_count[i] << "\n";
}

}  // namespace rwi
