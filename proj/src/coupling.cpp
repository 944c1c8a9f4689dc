#include "rwi/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rwi {

namespace {

constexpr double kProbabilityTol = 1e-12;

void require_probability(const DiscreteDistribution& d, const char* where) {
    if (!d.is_probability())
        throw std::invalid_argument(std::string(where) + ": input must be probability-flagged");
}

// log pmf of Poisson(lambda) at k, safe for large lambda
double poisson_log_pmf(double lambda, long k) {
    if (lambda == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return static_cast<double>(k) * std::log(lambda) - lambda - std::lgamma(static_cast<double>(k) + 1.0);
}

// Enumerate pmf values around the mode until both tails are below `tail`.
// Returns (low, pmf values for low..high).
std::pair<long, std::vector<double>> poisson_pmf_window(double lambda, double tail) {
    if (lambda < 0.0) throw std::invalid_argument("poisson: lambda must be nonnegative");
    if (lambda == 0.0) return {0, {1.0}};
    long mode = static_cast<long>(std::floor(lambda));
    double pm = std::exp(poisson_log_pmf(lambda, mode));

    std::vector<double> down;  // mode-1, mode-2, ...
    double p = pm;
    for (long k = mode; k > 0; --k) {
        p *= static_cast<double>(k) / lambda;  // pmf(k-1)
        if (p == 0.0) break;
        down.push_back(p);
    }
    std::vector<double> up;  // mode+1, ...
    p = pm;
    long k = mode;
    while (true) {
        ++k;
        p *= lambda / static_cast<double>(k);
        // geometric decay past the mode makes the remaining tail comparable to p
        if (p < tail * 1e-2 && k > mode + 1) break;
        up.push_back(p);
    }

    long low = mode - static_cast<long>(down.size());
    std::vector<double> pmf;
    pmf.reserve(down.size() + 1 + up.size());
    for (auto it = down.rbegin(); it != down.rend(); ++it) pmf.push_back(*it);
    pmf.push_back(pm);
    for (double v : up) pmf.push_back(v);
    return {low, std::move(pmf)};
}

}  // namespace

DiscreteDistribution::DiscreteDistribution(std::vector<std::pair<Key, double>> mass, Kind kind)
    : kind_(kind) {
    std::sort(mass.begin(), mass.end());
    for (const auto& [key, value] : mass) {
        if (!(value >= 0.0) || !std::isfinite(value))
            throw std::invalid_argument("distribution mass must be nonnegative and finite");
        if (value == 0.0) continue;
        if (!mass_.empty() && mass_.back().first == key)
            mass_.back().second += value;
        else
            mass_.push_back({key, value});
    }
    cumulative_.reserve(mass_.size());
    double running = 0.0, compensation = 0.0;
    for (const auto& [key, value] : mass_) {
        double y = value - compensation;
        double t = running + y;
        compensation = (t - running) - y;
        running = t;
        cumulative_.push_back(running);
    }
    total_ = running;
    if (kind_ == Kind::Probability && std::abs(total_ - 1.0) > kProbabilityTol)
        throw std::invalid_argument("probability masses sum to " + std::to_string(total_) +
                                    ", not 1");
}

double DiscreteDistribution::mass(Key key) const {
    auto it = std::lower_bound(mass_.begin(), mass_.end(), key,
                               [](const auto& e, Key k) { return e.first < k; });
    return (it != mass_.end() && it->first == key) ? it->second : 0.0;
}

DiscreteDistribution DiscreteDistribution::normalized() const {
    if (total_ <= 0.0) throw std::invalid_argument("cannot normalize a zero measure");
    std::vector<std::pair<Key, double>> scaled = mass_;
    for (auto& [key, value] : scaled) value /= total_;
    return DiscreteDistribution(std::move(scaled), Kind::Probability);
}

DiscreteDistribution DiscreteDistribution::shifted(Key delta) const {
    std::vector<std::pair<Key, double>> moved = mass_;
    for (auto& [key, value] : moved) key += delta;
    return DiscreteDistribution(std::move(moved), kind_);
}

DiscreteDistribution::Key DiscreteDistribution::sample(RngStream& rng) const {
    if (mass_.empty()) throw std::logic_error("cannot sample from an empty distribution");
    return mass_[rng.discrete_from_cumulative(cumulative_)].first;
}

TvResult tv(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    require_probability(p, "tv");
    require_probability(q, "tv");
    double half_l1 = 0.0, positive = 0.0;
    auto ip = p.entries().begin(), ep = p.entries().end();
    auto iq = q.entries().begin(), eq = q.entries().end();
    while (ip != ep || iq != eq) {
        double pm = 0.0, qm = 0.0;
        if (iq == eq || (ip != ep && ip->first < iq->first)) {
            pm = (ip++)->second;
        } else if (ip == ep || iq->first < ip->first) {
            qm = (iq++)->second;
        } else {
            pm = (ip++)->second;
            qm = (iq++)->second;
        }
        half_l1 += std::abs(pm - qm);
        if (pm > qm) positive += pm - qm;
    }
    half_l1 *= 0.5;
    if (std::abs(half_l1 - positive) > 1e-12)
        throw std::logic_error("tv: half-L1 and positive-part routes disagree by " +
                               std::to_string(half_l1 - positive));
    return {half_l1, positive};
}

namespace {

PoissonShiftTv poisson_shift_tv_impl(double lambda) {
    auto [low, pmf] = poisson_pmf_window(lambda, 1e-15);
    // shifted law q(k) = pmf(k-1); sum the positive parts of p - q
    double exact = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
        double prev = (i == 0) ? 0.0 : pmf[i - 1];
        double diff = pmf[i] - prev;
        if (diff > 0.0) exact += diff;
    }
    double bound = 0.5 / std::sqrt(lambda);
    if (exact > bound + 1e-12)
        throw std::logic_error("poisson_shift_tv: computed value exceeds 1/(2 sqrt(lambda))");
    return {exact, bound, low, low + static_cast<long>(pmf.size()) - 1};
}

}  // namespace

PoissonShiftTv poisson_shift_tv(double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("poisson_shift_tv: lambda must be positive");
    return poisson_shift_tv_impl(lambda);
}

DiscreteDistribution poisson_truncated(double lambda, double tail) {
    auto [low, pmf] = poisson_pmf_window(lambda, tail);
    std::vector<std::pair<DiscreteDistribution::Key, double>> mass;
    mass.reserve(pmf.size());
    for (std::size_t i = 0; i < pmf.size(); ++i)
        mass.push_back({low + static_cast<long>(i), pmf[i]});
    return DiscreteDistribution::probability(std::move(mass));
}

std::pair<DiscreteDistribution::Key, DiscreteDistribution::Key> optimal_coupling(
    const DiscreteDistribution& p, const DiscreteDistribution& q, RngStream& rng) {
    require_probability(p, "optimal_coupling");
    require_probability(q, "optimal_coupling");
    double distance = tv(p, q).value;

    if (rng.uniform() >= distance) {
        // draw from the overlap min(p, q)
        std::vector<std::pair<DiscreteDistribution::Key, double>> overlap;
        for (const auto& [key, value] : p.entries()) {
            double m = std::min(value, q.mass(key));
            if (m > 0.0) overlap.push_back({key, m});
        }
        auto k = DiscreteDistribution::measure(std::move(overlap)).sample(rng);
        return {k, k};
    }
    std::vector<std::pair<DiscreteDistribution::Key, double>> above, below;
    for (const auto& [key, value] : p.entries()) {
        double d = value - q.mass(key);
        if (d > 0.0) above.push_back({key, d});
    }
    for (const auto& [key, value] : q.entries()) {
        double d = value - p.mass(key);
        if (d > 0.0) below.push_back({key, d});
    }
    return {DiscreteDistribution::measure(std::move(above)).sample(rng),
            DiscreteDistribution::measure(std::move(below)).sample(rng)};
}

double ppp_gap(const DiscreteDistribution& nu, const DiscreteDistribution& pi, double eps) {
    require_probability(pi, "ppp_gap");
    if (!(eps > 0.0)) throw std::invalid_argument("ppp_gap: eps must be positive");
    double gap = 0.0;
    for (const auto& [key, value] : pi.entries()) {
        double d = value - eps * nu.mass(key);
        if (d > 0.0) gap += d;
    }
    return gap;
}

double ppp_tv_upper(const DiscreteDistribution& nu, const DiscreteDistribution& pi, double eps,
                    double a) {
    if (!(a >= 0.0) || a >= 1.0) throw std::invalid_argument("ppp_tv_upper: need 0 <= a < 1");
    double gap = ppp_gap(nu, pi, eps);
    if (gap > a + 1e-12)
        throw std::invalid_argument("ppp_tv_upper: gap " + std::to_string(gap) +
                                    " exceeds declared a = " + std::to_string(a));
    return 0.5 * std::sqrt(eps / (1.0 - a)) + a;
}

double ppp_tv_lower_grid(double eps, double a, double lambda_step, double p_step) {
    if (!(eps > 0.0) || !(a > 0.0)) throw std::invalid_argument("ppp_tv_lower_grid: eps, a > 0");
    if (a > 1.0) throw std::invalid_argument("ppp_tv_lower_grid: a must be <= 1");
    double lambda_max = (1.0 - a) / eps;
    double best = 1.0;  // d_TV is at most 1
    for (double lambda = 0.0; lambda <= lambda_max + 1e-12; lambda += lambda_step) {
        // d_TV(Poi(lambda)+Ber(p), Poi(lambda)) = p * d_TV(Poi(lambda), Poi(lambda)+1)
        double shift = (lambda == 0.0) ? 1.0 : poisson_shift_tv_impl(lambda).exact;
        double p_min = eps * lambda + a;
        for (double p = p_min; p <= 1.0 + 1e-12; p += p_step)
            best = std::min(best, std::min(p, 1.0) * shift);
    }
    return best;
}

}  // namespace rwi
