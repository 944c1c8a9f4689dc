#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rwi/rng.hpp"

namespace rwi {

// Finite measure (or probability) over opaque integer keys; the carrier of
// all total-variation and coupling computations.
class DiscreteDistribution {
  public:
    using Key = std::int64_t;
    enum class Kind { Probability, FiniteMeasure };

    DiscreteDistribution() : kind_(Kind::FiniteMeasure) {}
    DiscreteDistribution(std::vector<std::pair<Key, double>> mass, Kind kind);

    static DiscreteDistribution probability(std::vector<std::pair<Key, double>> mass) {
        return DiscreteDistribution(std::move(mass), Kind::Probability);
    }
    static DiscreteDistribution measure(std::vector<std::pair<Key, double>> mass) {
        return DiscreteDistribution(std::move(mass), Kind::FiniteMeasure);
    }

    Kind kind() const { return kind_; }
    bool is_probability() const { return kind_ == Kind::Probability; }
    double total() const { return total_; }
    double mass(Key key) const;
    const std::vector<std::pair<Key, double>>& entries() const { return mass_; }
    std::size_t support_size() const { return mass_.size(); }

    DiscreteDistribution normalized() const;
    DiscreteDistribution shifted(Key delta) const;

    Key sample(RngStream& rng) const;

  private:
    std::vector<std::pair<Key, double>> mass_;  // sorted by key, strictly positive masses
    std::vector<double> cumulative_;
    double total_ = 0.0;
    Kind kind_;
};

struct TvResult {
    double value;          // (1/2) sum |p - q|
    double positive_part;  // sum over {p > q} of p - q; equals value up to 1e-12
};

// Total variation distance of two probability distributions, computed along
// two algebraic routes that are cross-checked against each other.
TvResult tv(const DiscreteDistribution& p, const DiscreteDistribution& q);

struct PoissonShiftTv {
    double exact;      // d_TV(Poi(lambda), Poi(lambda)+1)
    double bound;      // 1 / (2 sqrt(lambda)); exact <= bound always
    long truncation_low;
    long truncation_high;  // enumeration covered [low, high] with tail mass <= 1e-15
};

PoissonShiftTv poisson_shift_tv(double lambda);

// Poisson pmf restricted to keys carrying all but `tail` of the mass.
DiscreteDistribution poisson_truncated(double lambda, double tail = 1e-15);

// Joint draw (X, Y) with X ~ p, Y ~ q and P(X != Y) = tv(p, q).
std::pair<DiscreteDistribution::Key, DiscreteDistribution::Key> optimal_coupling(
    const DiscreteDistribution& p, const DiscreteDistribution& q, RngStream& rng);

// sum_x (pi(x) - eps * nu(x))_+ ; the quantity controlling whether
// PPP(nu) + one pi-point stays close to PPP(nu).
double ppp_gap(const DiscreteDistribution& nu, const DiscreteDistribution& pi, double eps);

// Upper bound (1/2) sqrt(eps / (1 - a)) + a on d_TV(PPP(nu) + pi-point, PPP(nu)),
// valid when ppp_gap(nu, pi, eps) <= a (checked).
double ppp_tv_upper(const DiscreteDistribution& nu, const DiscreteDistribution& pi, double eps,
                    double a);

// Grid minimization of d_TV(Poi(lambda) + Ber(p), Poi(lambda)) over the
// constraint region {eps * lambda + a <= p <= 1}.  No claim beyond grid
// optimality.
double ppp_tv_lower_grid(double eps, double a, double lambda_step = 1e-3, double p_step = 1e-3);

}  // namespace rwi
