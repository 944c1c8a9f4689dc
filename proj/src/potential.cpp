#include "rwi/potential.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <ostream>
#include <stdexcept>

namespace rwi {

namespace {

void check_set(const KilledWeightedGraph& g, const VertexSet& K, const char* name) {
    if (K.empty()) throw std::invalid_argument(std::string(name) + " must be nonempty");
    for (VertexId v : K)
        if (v < 0 || static_cast<std::size_t>(v) >= g.size())
            throw std::out_of_range(std::string(name) + " contains invalid vertex id " +
                                    std::to_string(v));
}

// Linear system L|_S x = b on a subset S of vertices, where L = D - A is the
// conductance Laplacian plus kill weights on the diagonal (symmetric positive
// definite on any subset).  Dense Cholesky up to dense_limit unknowns,
// conjugate gradient beyond.
class Subsystem {
  public:
    Subsystem(const KilledWeightedGraph& g, std::vector<VertexId> unknowns,
              const SolverOptions& opts)
        : unknowns_(std::move(unknowns)) {
        const std::size_t m = unknowns_.size();
        position_.assign(g.size(), -1);
        for (std::size_t i = 0; i < m; ++i) position_[unknowns_[i]] = static_cast<long>(i);

        std::vector<Eigen::Triplet<double>> triplets;
        triplets.reserve(m * 4);
        for (std::size_t i = 0; i < m; ++i) {
            VertexId x = unknowns_[i];
            double diag = g.total_weight(x) - g.self_loop_weight(x);
            triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), diag);
            for (const auto& [y, w] : g.neighbors(x)) {
                if (y == x) continue;
                long j = position_[y];
                if (j >= 0)
                    triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), -w);
            }
        }
        matrix_.resize(static_cast<long>(m), static_cast<long>(m));
        matrix_.setFromTriplets(triplets.begin(), triplets.end());

        if (m <= static_cast<std::size_t>(opts.dense_limit)) {
            dense_ = std::make_unique<Eigen::LDLT<Eigen::MatrixXd>>(Eigen::MatrixXd(matrix_));
            if (dense_->info() != Eigen::Success)
                throw std::runtime_error("singular absorbed-chain system (internal error)");
        } else {
            cg_ = std::make_unique<Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                                                            Eigen::Lower | Eigen::Upper>>();
            cg_->setTolerance(opts.cg_tolerance);
            cg_->setMaxIterations(opts.cg_max_iterations);
            cg_->compute(matrix_);
        }
    }

    std::size_t size() const { return unknowns_.size(); }
    long position(VertexId v) const { return position_[v]; }
    const std::vector<VertexId>& unknowns() const { return unknowns_; }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
        if (unknowns_.empty()) return Eigen::VectorXd();
        if (dense_) return dense_->solve(rhs);
        // the iterative solver tracks its residual in mutable members
        std::lock_guard<std::mutex> lock(cg_mutex_);
        Eigen::VectorXd x = cg_->solve(rhs);
        if (cg_->info() != Eigen::Success)
            throw std::runtime_error("conjugate gradient failed to reach tolerance");
        return x;
    }

    // scatter a solution on S into a dense vector over all vertices
    Eigen::VectorXd scatter(const Eigen::VectorXd& on_subset, std::size_t n) const {
        Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<long>(n));
        for (std::size_t i = 0; i < unknowns_.size(); ++i)
            full[unknowns_[i]] = on_subset[static_cast<long>(i)];
        return full;
    }

  private:
    std::vector<VertexId> unknowns_;
    std::vector<long> position_;
    Eigen::SparseMatrix<double> matrix_;
    std::unique_ptr<Eigen::LDLT<Eigen::MatrixXd>> dense_;
    std::unique_ptr<
        Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper>>
        cg_;
    mutable std::mutex cg_mutex_;
};

std::vector<VertexId> complement_of(const KilledWeightedGraph& g, const VertexSet& K) {
    std::vector<VertexId> s;
    s.reserve(g.size() - K.size());
    for (std::size_t v = 0; v < g.size(); ++v)
        if (!K.contains(static_cast<VertexId>(v))) s.push_back(static_cast<VertexId>(v));
    return s;
}

std::vector<VertexId> all_ids(const KilledWeightedGraph& g) {
    std::vector<VertexId> s(g.size());
    for (std::size_t v = 0; v < g.size(); ++v) s[v] = static_cast<VertexId>(v);
    return s;
}

}  // namespace

struct PotentialSolver::Impl {
    std::once_flag full_once;
    std::unique_ptr<Subsystem> full;
};

PotentialSolver::PotentialSolver(const KilledWeightedGraph& graph, SolverOptions options)
    : graph_(graph), options_(options), impl_(std::make_unique<Impl>()) {}

PotentialSolver::~PotentialSolver() = default;

namespace {
const Subsystem& full_system_of(const KilledWeightedGraph& g, const SolverOptions& opts,
                                PotentialSolver::Impl& impl);
}

// ---------------------------------------------------------------------------

Eigen::VectorXd PotentialSolver::absorbed_before_hitting(const VertexSet& K) const {
    check_set(graph_, K, "K");
    Subsystem sys(graph_, complement_of(graph_, K), options_);
    Eigen::VectorXd rhs(static_cast<long>(sys.size()));
    for (std::size_t i = 0; i < sys.size(); ++i) rhs[static_cast<long>(i)] =
        graph_.kill_weight(sys.unknowns()[i]);
    return sys.scatter(sys.solve(rhs), graph_.size());
}

std::vector<double> PotentialSolver::escape_probability(const VertexSet& K) const {
    check_set(graph_, K, "K");
    Eigen::VectorXd q = absorbed_before_hitting(K);
    std::vector<double> esc(graph_.size(), 0.0);
    for (VertexId x : K) {
        double acc = graph_.kill_weight(x);
        for (const auto& [z, w] : graph_.neighbors(x))
            if (!K.contains(z)) acc += w * q[z];
        esc[x] = acc / graph_.total_weight(x);
    }
    return esc;
}

EquilibriumProfile PotentialSolver::equilibrium(const VertexSet& K) const {
    EquilibriumProfile prof;
    prof.target = K;
    prof.e.assign(graph_.size(), 0.0);
    auto esc = escape_probability(K);

    std::vector<VertexId> boundary;
    for (VertexId x : K) {
        if (esc[x] > options_.boundary_threshold) {
            prof.e[x] = graph_.total_weight(x) * esc[x];
            prof.capacity += prof.e[x];
            boundary.push_back(x);
        }
    }
    prof.boundary = VertexSet(std::move(boundary));
    std::vector<std::pair<DiscreteDistribution::Key, double>> harm;
    for (VertexId x : prof.boundary) harm.push_back({x, prof.e[x] / prof.capacity});
    prof.harmonic = DiscreteDistribution::probability(std::move(harm));
    return prof;
}

HittingResult PotentialSolver::hitting(const VertexSet& K) const {
    check_set(graph_, K, "K");
    HittingResult res;
    res.target = K;
    const std::size_t n = graph_.size();
    const std::size_t k = K.size();
    Subsystem sys(graph_, complement_of(graph_, K), options_);

    res.entry = Eigen::MatrixXd::Zero(static_cast<long>(n), static_cast<long>(k));
    for (std::size_t j = 0; j < k; ++j) {
        VertexId target = K.ids()[j];
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<long>(sys.size()));
        for (const auto& [z, w] : graph_.neighbors(target)) {
            long p = sys.position(z);
            if (p >= 0) rhs[p] += w;
        }
        Eigen::VectorXd col = sys.scatter(sys.solve(rhs), n);
        col[target] = 1.0;  // started inside K: first hit is immediate
        res.entry.col(static_cast<long>(j)) = col;
    }
    res.probability.assign(n, 0.0);
    for (std::size_t x = 0; x < n; ++x)
        res.probability[x] = res.entry.row(static_cast<long>(x)).sum();
    for (VertexId x : K) res.probability[x] = 1.0;
    return res;
}

DiscreteDistribution HittingResult::entry_distribution(VertexId x) const {
    std::vector<std::pair<DiscreteDistribution::Key, double>> mass;
    for (std::size_t j = 0; j < target.size(); ++j) {
        double v = entry(x, static_cast<long>(j));
        if (v > 0.0) mass.push_back({target.ids()[j], v});
    }
    return DiscreteDistribution::measure(std::move(mass));
}

namespace {
const Subsystem& full_system_of(const KilledWeightedGraph& g, const SolverOptions& opts,
                                PotentialSolver::Impl& impl) {
    std::call_once(impl.full_once,
                   [&] { impl.full = std::make_unique<Subsystem>(g, all_ids(g), opts); });
    return *impl.full;
}
}  // namespace

GreenMatrix PotentialSolver::greens() const {
    const std::size_t n = graph_.size();
    if (n > static_cast<std::size_t>(options_.dense_limit))
        throw std::invalid_argument("greens: graph exceeds the dense limit; use green_row");
    const Subsystem& full = full_system_of(graph_, options_, *impl_);
    GreenMatrix out;
    out.g.resize(static_cast<long>(n), static_cast<long>(n));
    for (std::size_t y = 0; y < n; ++y) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<long>(n));
        e[static_cast<long>(y)] = 1.0;
        out.g.col(static_cast<long>(y)) =
            full.solve(e) * graph_.total_weight(static_cast<VertexId>(y));
    }
    return out;
}

Eigen::VectorXd PotentialSolver::green_row(VertexId x) const {
    const Subsystem& full = full_system_of(graph_, options_, *impl_);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<long>(graph_.size()));
    e[x] = 1.0;
    Eigen::VectorXd s = full.solve(e);  // column x of L^{-1} = row x by symmetry
    for (std::size_t y = 0; y < graph_.size(); ++y)
        s[static_cast<long>(y)] *= graph_.total_weight(static_cast<VertexId>(y));
    return s;
}

double PotentialSolver::green_entry(VertexId x, VertexId y) const { return green_row(x)[y]; }

DiscreteDistribution PotentialSolver::last_exit_distribution(const VertexSet& L, VertexId x,
                                                             bool conditional) const {
    check_set(graph_, L, "L");
    auto esc = escape_probability(L);
    Eigen::VectorXd row = green_row(x);
    std::vector<std::pair<DiscreteDistribution::Key, double>> mass;
    for (VertexId y : L) {
        double v = row[y] * esc[y];
        if (v > 0.0) mass.push_back({y, v});
    }
    auto dist = DiscreteDistribution::measure(std::move(mass));
    if (dist.total() <= 0.0)
        throw std::invalid_argument("last_exit_distribution: x cannot reach L");
    return conditional ? dist.normalized() : dist;
}

HingeMeasure PotentialSolver::hinge(const VertexSet& K) const {
    auto prof = equilibrium(K);
    const auto& boundary = prof.boundary.ids();
    const std::size_t b = boundary.size();
    const Subsystem& full = full_system_of(graph_, options_, *impl_);

    // g(x, y) for boundary pairs: one full solve per column
    Eigen::MatrixXd green(b, b);
    for (std::size_t j = 0; j < b; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<long>(graph_.size()));
        e[boundary[j]] = 1.0;
        Eigen::VectorXd s = full.solve(e);
        for (std::size_t i = 0; i < b; ++i)
            green(static_cast<long>(i), static_cast<long>(j)) =
                s[boundary[i]] * graph_.total_weight(boundary[j]);
    }

    HingeMeasure hm;
    hm.target = K;
    hm.boundary = boundary;
    hm.n_vertices = graph_.size();
    hm.h.resize(static_cast<long>(b), static_cast<long>(b));
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < b; ++j) {
            // e_K(x) * P_x[X_{last visit} = y] with the last-exit identity
            double esc_y = prof.e[boundary[j]] / graph_.total_weight(boundary[j]);
            hm.h(static_cast<long>(i), static_cast<long>(j)) =
                prof.e[boundary[i]] * green(static_cast<long>(i), static_cast<long>(j)) * esc_y;
        }

    double asym = hm.max_asymmetry();
    if (asym > 1e-9 * std::max(1.0, prof.capacity))
        throw std::runtime_error("hinge: computed measure is not symmetric (residual " +
                                 std::to_string(asym) + ")");
    return hm;
}

double HingeMeasure::value(VertexId x, VertexId y) const {
    auto ix = std::find(boundary.begin(), boundary.end(), x);
    auto iy = std::find(boundary.begin(), boundary.end(), y);
    if (ix == boundary.end() || iy == boundary.end()) return 0.0;
    return h(ix - boundary.begin(), iy - boundary.begin());
}

double HingeMeasure::max_asymmetry() const {
    return (h - h.transpose()).cwiseAbs().maxCoeff();
}

DiscreteDistribution HingeMeasure::couple_law() const {
    std::vector<std::pair<DiscreteDistribution::Key, double>> mass;
    double cap = total();
    for (std::size_t i = 0; i < boundary.size(); ++i)
        for (std::size_t j = 0; j < boundary.size(); ++j) {
            double v = h(static_cast<long>(i), static_cast<long>(j));
            if (v > 0.0)
                mass.push_back({couple_key(boundary[i], boundary[j], n_vertices), v / cap});
        }
    return DiscreteDistribution::probability(std::move(mass));
}

std::vector<double> PotentialSolver::consistency_pushforward(const VertexSet& K,
                                                             const VertexSet& L) const {
    check_set(graph_, K, "K");
    check_set(graph_, L, "L");
    if (!K.subset_of(L))
        throw std::invalid_argument("consistency_pushforward: K must be contained in L");
    auto prof = equilibrium(L);
    auto hit = hitting(K);
    std::vector<double> out(graph_.size(), 0.0);
    for (std::size_t j = 0; j < K.size(); ++j) {
        double acc = 0.0;
        for (VertexId x : prof.boundary) acc += prof.e[x] * hit.entry(x, static_cast<long>(j));
        out[K.ids()[j]] = acc;
    }
    return out;
}

double PotentialSolver::conditional_hit_given_last_exit(const VertexSet& L, VertexId x,
                                                        VertexId from, VertexId exit_point) const {
    check_set(graph_, L, "L");
    if (!L.contains(x))
        throw std::invalid_argument("conditional_hit_given_last_exit: x must belong to L");
    auto esc = escape_probability(L);
    Eigen::VectorXd row_from = green_row(from);
    double denom = row_from[exit_point] * esc[exit_point];
    if (denom <= 0.0)
        throw std::invalid_argument(
            "conditional_hit_given_last_exit: exit point has zero probability");
    // hitting x forces the last L-visit to happen afterwards, so the
    // probability factorizes through the strong Markov property at that hit
    auto hit = hitting(VertexSet({x}));
    Eigen::VectorXd row_x = green_row(x);
    return hit.probability[from] * row_x[exit_point] * esc[exit_point] / denom;
}

DiscreteDistribution PotentialSolver::last_exit_given_no_return(const VertexSet& L,
                                                                VertexId x) const {
    check_set(graph_, L, "L");
    if (!L.contains(x))
        throw std::invalid_argument("last_exit_given_no_return: x must belong to L");
    auto esc_L = escape_probability(L);
    auto esc_x = escape_probability(VertexSet({x}));
    if (esc_x[x] <= 0.0)
        throw std::invalid_argument("last_exit_given_no_return: cap({x}) vanishes");

    // visits to z before any return to x, averaged over the first step
    Subsystem sys(graph_, complement_of(graph_, VertexSet({x})), options_);
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(static_cast<long>(sys.size()));
    for (const auto& [w, weight] : graph_.neighbors(x)) {
        long p = sys.position(w);
        if (p >= 0) mu[p] += weight / graph_.total_weight(x);
    }
    Eigen::VectorXd s = sys.scatter(sys.solve(mu), graph_.size());

    std::vector<std::pair<DiscreteDistribution::Key, double>> mass;
    for (VertexId z : L) {
        double joint;
        if (z == x) {
            joint = esc_L[x];  // last L-visit at x itself means never touching L again
        } else {
            double visits = s[z] * graph_.total_weight(z);
            joint = visits * esc_L[z];
        }
        if (joint > 0.0) mass.push_back({z, joint / esc_x[x]});
    }
    auto law = DiscreteDistribution::measure(std::move(mass));
    if (std::abs(law.total() - 1.0) > 1e-9)
        throw std::runtime_error("last_exit_given_no_return: law mass " +
                                 std::to_string(law.total()) + " (internal error)");
    return law.normalized();
}

std::vector<double> PotentialSolver::direction_probability(Direction d) const {
    auto ends = graph_.ends();
    if (!ends)
        throw std::invalid_argument("direction atoms are only defined for graphs with ends");
    for (std::size_t v = 0; v < graph_.size(); ++v) {
        VertexId x = static_cast<VertexId>(v);
        if (graph_.kill_weight(x) > 0.0 && x != ends->first && x != ends->second)
            throw std::invalid_argument(
                "direction atoms require all absorption to happen at the ends");
    }
    VertexId end = (d == Direction::ToMinusInfinity) ? ends->first : ends->second;
    const Subsystem& full = full_system_of(graph_, options_, *impl_);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<long>(graph_.size()));
    rhs[end] = graph_.kill_weight(end);
    Eigen::VectorXd h = full.solve(rhs);
    return std::vector<double>(h.data(), h.data() + h.size());
}

RestrictedEquilibrium PotentialSolver::restricted_equilibrium(const VertexSet& K, Direction A,
                                                              Direction B) const {
    check_set(graph_, K, "K");
    auto ends = graph_.ends();
    if (!ends)
        throw std::invalid_argument("restricted_equilibrium: graph has no labeled ends");
    VertexId end_A = (A == Direction::ToMinusInfinity) ? ends->first : ends->second;

    // P_z[absorbed at the A end before hitting K], z off K
    Subsystem sys(graph_, complement_of(graph_, K), options_);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<long>(sys.size()));
    long pa = sys.position(end_A);
    if (pa >= 0) rhs[pa] = graph_.kill_weight(end_A);
    Eigen::VectorXd qa = sys.scatter(sys.solve(rhs), graph_.size());

    auto hB = direction_probability(B);

    RestrictedEquilibrium out;
    out.target = K;
    out.e.assign(graph_.size(), 0.0);
    for (VertexId x : K) {
        double acc = (x == end_A) ? graph_.kill_weight(x) : 0.0;
        for (const auto& [z, w] : graph_.neighbors(x))
            if (!K.contains(z)) acc += w * qa[z];
        double p_A_no_return = acc / graph_.total_weight(x);
        out.e[x] = graph_.total_weight(x) * p_A_no_return * hB[x];
        out.capacity += out.e[x];
    }
    return out;
}

// ---------------------------------------------------------------------------
// flows

void Flow::set(VertexId from, VertexId to, double value) {
    if (from == kGhost) throw std::invalid_argument("flow cannot leave the ghost");
    theta_[{from, to}] = value;
    if (to != kGhost) theta_.erase({to, from});  // one stored direction per edge
}

double Flow::get(VertexId from, VertexId to) const {
    auto it = theta_.find({from, to});
    if (it != theta_.end()) return it->second;
    if (to != kGhost && from != kGhost) {
        it = theta_.find({to, from});
        if (it != theta_.end()) return -it->second;
    }
    return 0.0;
}

double flow_energy_bound(const KilledWeightedGraph& g, const VertexSet& K, const Flow& flow) {
    check_set(g, K, "K");
    constexpr double tol = 1e-10;

    for (const auto& [edge, value] : flow.entries()) {
        auto [x, y] = edge;
        if (x < 0 || static_cast<std::size_t>(x) >= g.size())
            throw std::invalid_argument("flow references invalid vertex " + std::to_string(x));
        if (y == kGhost) {
            if (g.kill_weight(x) <= 0.0)
                throw std::invalid_argument("flow on missing ghost edge at vertex " +
                                            std::to_string(x));
            continue;
        }
        if (y < 0 || static_cast<std::size_t>(y) >= g.size())
            throw std::invalid_argument("flow references invalid vertex " + std::to_string(y));
        if (x == y) {
            if (value != 0.0)
                throw std::invalid_argument("flow on a self-loop must be zero (vertex " +
                                            std::to_string(x) + ")");
            continue;
        }
        if (g.edge_weight(x, y) <= 0.0)
            throw std::invalid_argument("flow assigned to non-edge (" + std::to_string(x) + "," +
                                        std::to_string(y) + ")");
        auto mirror = flow.entries().find({y, x});
        if (mirror != flow.entries().end() && std::abs(mirror->second + value) > tol)
            throw std::invalid_argument("flow is not antisymmetric on edge (" +
                                        std::to_string(x) + "," + std::to_string(y) + ")");
    }

    for (std::size_t v = 0; v < g.size(); ++v) {
        VertexId x = static_cast<VertexId>(v);
        if (K.contains(x)) continue;
        double div = flow.get(x, kGhost);
        for (const auto& [y, w] : g.neighbors(x))
            if (y != x) div += flow.get(x, y);
        if (std::abs(div) > tol)
            throw std::invalid_argument("flow is not divergence-free at vertex " +
                                        std::to_string(x) + " (net " + std::to_string(div) + ")");
    }

    for (const auto& e : g.edges())
        if (K.contains(e.u) && K.contains(e.v) && std::abs(flow.get(e.u, e.v)) > tol)
            throw std::invalid_argument("flow must vanish on the internal edge (" +
                                        std::to_string(e.u) + "," + std::to_string(e.v) + ")");

    double out_total = 0.0;
    for (VertexId x : K) {
        out_total += flow.get(x, kGhost);
        for (const auto& [y, w] : g.neighbors(x))
            if (y != x && !K.contains(y)) out_total += flow.get(x, y);
    }
    if (std::abs(out_total - 1.0) > tol)
        throw std::invalid_argument("flow out of K has total " + std::to_string(out_total) +
                                    ", expected 1");

    // energy over ordered pairs: each edge counts twice
    double energy = 0.0;
    for (const auto& e : g.edges()) {
        double th = flow.get(e.u, e.v);
        if (th != 0.0) energy += 2.0 * th * th / e.weight;
    }
    for (std::size_t v = 0; v < g.size(); ++v) {
        VertexId x = static_cast<VertexId>(v);
        double th = flow.get(x, kGhost);
        if (th != 0.0) energy += 2.0 * th * th / g.kill_weight(x);
    }
    return energy;
}

Flow PotentialSolver::harmonic_flow(const VertexSet& K) const {
    auto hit = hitting(K);
    auto prof = equilibrium(K);
    Flow flow;
    for (const auto& e : graph_.edges()) {
        double th = e.weight * (hit.probability[e.u] - hit.probability[e.v]) / prof.capacity;
        if (th != 0.0) flow.set(e.u, e.v, th);
    }
    for (std::size_t v = 0; v < graph_.size(); ++v) {
        VertexId x = static_cast<VertexId>(v);
        if (graph_.kill_weight(x) > 0.0) {
            double th = graph_.kill_weight(x) * hit.probability[x] / prof.capacity;
            if (th != 0.0) flow.set(x, kGhost, th);
        }
    }
    return flow;
}

// ---------------------------------------------------------------------------
// free-function wrappers

std::vector<double> escape_probability(const KilledWeightedGraph& g, const VertexSet& K,
                                       const SolverOptions& opts) {
    return PotentialSolver(g, opts).escape_probability(K);
}
EquilibriumProfile equilibrium(const KilledWeightedGraph& g, const VertexSet& K,
                               const SolverOptions& opts) {
    return PotentialSolver(g, opts).equilibrium(K);
}
HittingResult hitting(const KilledWeightedGraph& g, const VertexSet& K,
                      const SolverOptions& opts) {
    return PotentialSolver(g, opts).hitting(K);
}
GreenMatrix greens(const KilledWeightedGraph& g, const SolverOptions& opts) {
    return PotentialSolver(g, opts).greens();
}
DiscreteDistribution last_exit_distribution(const KilledWeightedGraph& g, const VertexSet& L,
                                            VertexId x, bool conditional,
                                            const SolverOptions& opts) {
    return PotentialSolver(g, opts).last_exit_distribution(L, x, conditional);
}
HingeMeasure hinge(const KilledWeightedGraph& g, const VertexSet& K, const SolverOptions& opts) {
    return PotentialSolver(g, opts).hinge(K);
}
std::vector<double> consistency_pushforward(const KilledWeightedGraph& g, const VertexSet& K,
                                            const VertexSet& L, const SolverOptions& opts) {
    return PotentialSolver(g, opts).consistency_pushforward(K, L);
}
double conditional_hit_given_last_exit(const KilledWeightedGraph& g, const VertexSet& L,
                                       VertexId x, VertexId from, VertexId exit_point,
                                       const SolverOptions& opts) {
    return PotentialSolver(g, opts).conditional_hit_given_last_exit(L, x, from, exit_point);
}
RestrictedEquilibrium restricted_equilibrium(const KilledWeightedGraph& g, const VertexSet& K,
                                             Direction A, Direction B,
                                             const SolverOptions& opts) {
    return PotentialSolver(g, opts).restricted_equilibrium(K, A, B);
}
Flow harmonic_flow(const KilledWeightedGraph& g, const VertexSet& K, const SolverOptions& opts) {
    return PotentialSolver(g, opts).harmonic_flow(K);
}

// ---------------------------------------------------------------------------
// CSV export

void write_measure_csv(std::ostream& out, const std::vector<double>& values, bool skip_zeros) {
    out << "x,value\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (skip_zeros && values[i] == 0.0) continue;
        out << i << "," << format_g17(values[i]) << "\n";
    }
}

void write_measure_csv(std::ostream& out, const DiscreteDistribution& dist) {
    out << "x,value\n";
    for (const auto& [key, value] : dist.entries())
        out << key << "," << format_g17(value) << "\n";
}

void write_matrix_csv(std::ostream& out, const HingeMeasure& h) {
    out << "x,y,value\n";
    for (std::size_t i = 0; i < h.boundary.size(); ++i)
        for (std::size_t j = 0; j < h.boundary.size(); ++j)
            out << h.boundary[i] << "," << h.boundary[j] << ","
                << format_g17(h.h(static_cast<long>(i), static_cast<long>(j))) << "\n";
}

void write_matrix_csv(std::ostream& out, const GreenMatrix& g) {
    out << "x,y,value\n";
    for (long i = 0; i < g.g.rows(); ++i)
        for (long j = 0; j < g.g.cols(); ++j)
            out << i << "," << j << "," << format_g17(g.g(i, j)) << "\n";
}

}  // namespace rwi
