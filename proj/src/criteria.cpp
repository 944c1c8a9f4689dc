#include "rwi/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rwi {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::VanishingTrend: return "vanishing-trend";
        case Verdict::BoundedBelow: return "bounded-below";
        case Verdict::Inconclusive: return "inconclusive";
        case Verdict::FiniteLimit: return "finite-limit";
        case Verdict::Diverging: return "diverging";
    }
    return "?";
}

namespace {

Verdict trend_verdict(const std::vector<double>& values, const CriterionThresholds& th) {
    const std::size_t n = values.size();
    if (n < 3) return Verdict::Inconclusive;
    double last = values[n - 1];
    bool tail_nonincreasing = values[n - 3] >= values[n - 2] - 1e-15 &&
                              values[n - 2] >= values[n - 1] - 1e-15;
    if (last < th.vanish_threshold && tail_nonincreasing) return Verdict::VanishingTrend;

    bool above = values[n - 1] > th.floor_threshold && values[n - 2] > th.floor_threshold &&
                 values[n - 3] > th.floor_threshold;
    if (above) {
        double lo = std::min({values[n - 1], values[n - 2], values[n - 3]});
        double hi = std::max({values[n - 1], values[n - 2], values[n - 3]});
        if (hi - lo < th.relative_flat * hi) return Verdict::BoundedBelow;
    }
    return Verdict::Inconclusive;
}

// cap-identity residual |sum e_L(x') P_{x'}[hit x] - cap({x})| for one level
double level_cap_residual(const EquilibriumProfile& prof, const std::vector<double>& hit_x,
                          double cap_x) {
    double acc = 0.0;
    for (VertexId v : prof.boundary) acc += prof.e[v] * hit_x[v];
    return std::abs(acc - cap_x);
}

}  // namespace

CriterionTrace strong_criterion(const ExhaustionFamily& exhaustion, const std::string& x_label,
                                double eps, const CriterionThresholds& thresholds,
                                const SolverOptions& opts) {
    if (!(eps > 0.0)) throw std::invalid_argument("strong_criterion: eps must be positive");
    CriterionTrace trace;
    trace.family = exhaustion.family;
    trace.op = "strong";
    trace.x_label = x_label;
    trace.eps = eps;
    trace.thresholds = thresholds;

    std::vector<double> values;
    for (std::size_t li = 0; li < exhaustion.levels.size(); ++li) {
        const auto& level = exhaustion.levels[li];
        VertexId x = exhaustion.vertex_at(li, x_label);
        if (!level.window.contains(x))
            throw std::invalid_argument("strong_criterion: x is outside level " +
                                        std::to_string(level.level));
        PotentialSolver solver(level.graph, opts);
        HingeMeasure hm = solver.hinge(level.window);
        EquilibriumProfile prof = solver.equilibrium(level.window);
        auto esc = solver.escape_probability(level.window);
        auto hit_x = solver.hitting(VertexSet({x}));
        Eigen::VectorXd green_x = solver.green_row(x);
        double cap_x = solver.equilibrium(VertexSet({x})).capacity;

        const auto& boundary = hm.boundary;
        double value = 0.0;
        for (std::size_t i = 0; i < boundary.size(); ++i) {
            VertexId xp = boundary[i];
            for (std::size_t j = 0; j < boundary.size(); ++j) {
                VertexId yp = boundary[j];
                double mass = hm.h(static_cast<long>(i), static_cast<long>(j));
                if (mass <= 0.0) continue;
                // P_{x'}[hit x | last L-visit = y'] via the strong Markov
                // factorization through the first visit to x
                double p_exit_from_xp = mass / prof.e[xp];  // P_{x'}[last L-visit = y']
                double conditional =
                    hit_x.probability[xp] * green_x[yp] * esc[yp] / p_exit_from_xp;
                double excess = conditional - eps;
                if (excess > 0.0) value += mass * excess;
            }
        }
        values.push_back(value);
        trace.records.push_back({level.level, eps, value, prof.capacity,
                                 level_cap_residual(prof, hit_x.probability, cap_x)});
    }
    trace.verdict = trend_verdict(values, thresholds);
    return trace;
}

CriterionTrace weak_criterion(const ExhaustionFamily& exhaustion, const std::string& x_label,
                              double eps, const CriterionThresholds& thresholds,
                              const SolverOptions& opts) {
    if (!(eps > 0.0)) throw std::invalid_argument("weak_criterion: eps must be positive");
    CriterionTrace trace;
    trace.family = exhaustion.family;
    trace.op = "weak";
    trace.x_label = x_label;
    trace.eps = eps;
    trace.thresholds = thresholds;

    std::vector<double> values;
    for (std::size_t li = 0; li < exhaustion.levels.size(); ++li) {
        const auto& level = exhaustion.levels[li];
        VertexId x = exhaustion.vertex_at(li, x_label);
        if (!level.window.contains(x))
            throw std::invalid_argument("weak_criterion: x is outside level " +
                                        std::to_string(level.level));
        PotentialSolver solver(level.graph, opts);
        EquilibriumProfile prof = solver.equilibrium(level.window);
        auto hit_x = solver.hitting(VertexSet({x}));
        double cap_x = solver.equilibrium(VertexSet({x})).capacity;

        double value = 0.0;
        for (VertexId xp : prof.boundary) {
            double excess = hit_x.probability[xp] - eps;
            if (excess > 0.0) value += prof.e[xp] * excess;
        }
        values.push_back(value);
        trace.records.push_back({level.level, eps, value, prof.capacity,
                                 level_cap_residual(prof, hit_x.probability, cap_x)});
    }
    trace.verdict = trend_verdict(values, thresholds);
    if (trace.verdict != Verdict::VanishingTrend) {
        std::ostringstream msg;
        msg << "weak_criterion: family '" << exhaustion.family << "', x=" << x_label
            << ", eps=" << eps << " did not vanish (verdict " << to_string(trace.verdict)
            << "); the weak zero-one law holds unconditionally, so this indicates a defect";
        throw std::logic_error(msg.str());
    }
    return trace;
}

std::vector<double> cap_identity(const ExhaustionFamily& exhaustion, const std::string& x_label,
                                 const SolverOptions& opts) {
    std::vector<double> residuals;
    for (std::size_t li = 0; li < exhaustion.levels.size(); ++li) {
        const auto& level = exhaustion.levels[li];
        VertexId x = exhaustion.vertex_at(li, x_label);
        if (!level.window.contains(x))
            throw std::invalid_argument("cap_identity: x is outside level " +
                                        std::to_string(level.level));
        PotentialSolver solver(level.graph, opts);
        EquilibriumProfile prof = solver.equilibrium(level.window);
        auto hit_x = solver.hitting(VertexSet({x}));
        double cap_x = solver.equilibrium(VertexSet({x})).capacity;
        residuals.push_back(level_cap_residual(prof, hit_x.probability, cap_x));
    }
    return residuals;
}

CriterionTrace atom_flow(const ExhaustionFamily& exhaustion, Direction A, Direction B,
                         const CriterionThresholds& thresholds, const SolverOptions& opts) {
    CriterionTrace trace;
    trace.family = exhaustion.family;
    trace.op = "atom_flow";
    trace.thresholds = thresholds;
    trace.x_label = std::string(A == Direction::ToMinusInfinity ? "-inf" : "+inf") + "->" +
                    (B == Direction::ToMinusInfinity ? "-inf" : "+inf");

    std::vector<double> values;
    for (const auto& level : exhaustion.levels) {
        PotentialSolver solver(level.graph, opts);
        auto restricted = solver.restricted_equilibrium(level.window, A, B);
        double cap = solver.equilibrium(level.window).capacity;
        values.push_back(restricted.capacity);
        trace.records.push_back({level.level, 0.0, restricted.capacity, cap, 0.0});
    }

    const std::size_t n = values.size();
    if (n >= 4) {
        bool flat = true;
        for (std::size_t i = n - 3; i < n; ++i)
            if (std::abs(values[i] - values[i - 1]) > thresholds.increment_tol) flat = false;
        if (flat) {
            trace.verdict = Verdict::FiniteLimit;
            trace.nontrivial_flow = values[n - 1] > thresholds.identity_tol;
        } else if (values[n - 1] >= thresholds.growth_factor * std::max(values[0], 1e-300)) {
            trace.verdict = Verdict::Diverging;
        }
    }
    return trace;
}

double hinge_identity_check(const KilledWeightedGraph& graph, const VertexSet& L, VertexId x,
                            const SolverOptions& opts) {
    PotentialSolver solver(graph, opts);
    if (!L.contains(x))
        throw std::invalid_argument("hinge_identity_check: x must belong to L");
    auto esc_x = solver.escape_probability(VertexSet({x}));
    if (esc_x[x] <= 0.0)
        throw std::invalid_argument("hinge_identity_check: cap({x}) vanishes");

    HingeMeasure hm = solver.hinge(L);
    EquilibriumProfile prof = solver.equilibrium(L);
    auto esc_L = solver.escape_probability(L);
    auto hit_x = solver.hitting(VertexSet({x}));
    Eigen::VectorXd green_x = solver.green_row(x);
    DiscreteDistribution tilted = solver.last_exit_given_no_return(L, x);

    const double denom = graph.total_weight(x) * esc_x[x];  // a_x P_x[no return to x]
    const auto& boundary = hm.boundary;
    double max_residual = 0.0;
    for (std::size_t i = 0; i < boundary.size(); ++i) {
        VertexId xp = boundary[i];
        for (std::size_t j = 0; j < boundary.size(); ++j) {
            VertexId yp = boundary[j];
            double lhs = tilted.mass(xp) * tilted.mass(yp);
            double mass = hm.h(static_cast<long>(i), static_cast<long>(j));
            double rhs;
            if (mass <= 0.0) {
                if (lhs > 1e-12)
                    throw std::invalid_argument(
                        "hinge_identity_check: zero hinge mass but nonzero tilt at pair (" +
                        std::to_string(xp) + "," + std::to_string(yp) + ")");
                rhs = 0.0;
            } else {
                double p_exit_from_xp = mass / prof.e[xp];
                double conditional = hit_x.probability[xp] * green_x[yp] * esc_L[yp] /
                                     p_exit_from_xp;
                rhs = mass / denom * conditional;
            }
            max_residual = std::max(max_residual, std::abs(lhs - rhs));
        }
    }
    return max_residual;
}

void CriterionTrace::write_csv(std::ostream& out) const {
    out << "level,eps,value,cap,aux_residual\n";
    for (const auto& r : records)
        out << r.level << "," << format_g17(r.eps) << "," << format_g17(r.value) << ","
            << format_g17(r.capacity) << "," << format_g17(r.aux_residual) << "\n";
}

void CriterionTrace::write_report(std::ostream& out) const {
    out << "op " << op << "\n";
    out << "family " << family << "\n";
    if (!x_label.empty()) out << "x " << x_label << "\n";
    out << "eps " << format_g17(eps) << "\n";
    out << "levels " << records.size() << "\n";
    out << "verdict " << to_string(verdict) << "\n";
    out << "vanish_threshold " << format_g17(thresholds.vanish_threshold) << "\n";
    out << "floor_threshold " << format_g17(thresholds.floor_threshold) << "\n";
    out << "increment_tol " << format_g17(thresholds.increment_tol) << "\n";
    if (op == "atom_flow") out << "nontrivial_flow " << (nontrivial_flow ? 1 : 0) << "\n";
    for (const auto& r : records)
        out << "value_at_" << r.level << " " << format_g17(r.value) << "\n";
}

}  // namespace rwi
