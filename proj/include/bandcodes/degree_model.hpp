#pragma once

#include <cstddef>
#include <vector>

#include "bandcodes/rng.hpp"

namespace bandcodes {

// Probability mass function over coding degrees 0..max_degree. The
// constructor rejects negative or non-normalized input (tolerance 1e-6 on
// the total mass) and renormalizes exactly, so downstream total-variation
// comparisons are not polluted by drift.
class DegreeDistribution {
public:
    explicit DegreeDistribution(std::vector<double> pmf);

    std::size_t max_degree() const { return pmf_.size() - 1; }
    const std::vector<double>& pmf() const { return pmf_; }
    double at(std::size_t d) const { return d < pmf_.size() ? pmf_[d] : 0.0; }
    double mean() const;

    // Inverse-CDF draw.
    std::size_t sample(Rng& rng) const;

    // Robust soliton over n symbols with parameters (c, delta); mass at
    // degree 0 is zero, spike at ceil(n/S) with S = c * ln(n/delta) * sqrt(n).
    static DegreeDistribution robust_soliton(std::size_t n, double c = 0.1, double delta = 0.5);

    // Binomial(n, 1/2): the stationary degree law of fair-coin recombination.
    static DegreeDistribution binomial_half(std::size_t n);

    static DegreeDistribution point_mass(std::size_t n, std::size_t d);

private:
    std::vector<double> pmf_;
    std::vector<double> cdf_;
};

// Probability that the XOR of two independent packets of degrees d1 and d2,
// each uniform over its degree class in n symbols, has degree dr. The
// support overlap is hypergeometric: P(chi = k) with k = (d1 + d2 - dr)/2.
// Exact 64-bit binomial tables are used for n <= 64, log-gamma otherwise.
double s_kernel(std::size_t n, std::size_t d1, std::size_t d2, std::size_t dr);

// One recombination round: pushes a degree distribution through s_kernel.
// Binomial(n, 1/2) is a fixed point.
DegreeDistribution omega_step(const DegreeDistribution& omega);

// Limit distribution Binomial(n, 1/2), i.e. C(n, i) / 2^n.
DegreeDistribution omega_infinity(std::size_t n);

double tv_distance(const std::vector<double>& a, const std::vector<double>& b);
double tv_distance(const DegreeDistribution& a, const DegreeDistribution& b);

// Monte Carlo cross-check of omega_step. PairwiseXor replaces the pool each
// round with XORs of two uniformly chosen members; FairCoinSubset instead
// XORs a fair-coin subset of `buffer_size` uniformly chosen members,
// modeling a recoder that mixes its whole input buffer. Returns the degree
// histogram after every round, index 0 being the initial pool.
enum class PoolMode { PairwiseXor, FairCoinSubset };

std::vector<DegreeDistribution> monte_carlo_evolution(
    const DegreeDistribution& initial, std::size_t rounds, std::size_t samples,
    Rng& rng, PoolMode mode = PoolMode::PairwiseXor, std::size_t buffer_size = 8);

} // namespace bandcodes
