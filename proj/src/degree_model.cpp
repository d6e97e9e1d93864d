#include "bandcodes/degree_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "bandcodes/bitvec.hpp"
#include "bandcodes/errors.hpp"

namespace bandcodes {

namespace {

constexpr std::size_t kExactLimit = 64;

// C(n, k) for n <= 64 fits in a uint64 (the largest value is C(64, 32)).
const std::uint64_t* exact_binomial_row(std::size_t n) {
    static const auto table = [] {
        auto t = std::vector<std::uint64_t>((kExactLimit + 1) * (kExactLimit + 1), 0);
        for (std::size_t i = 0; i <= kExactLimit; ++i) {
            t[i * (kExactLimit + 1)] = 1;
            for (std::size_t j = 1; j <= i; ++j) {
                t[i * (kExactLimit + 1) + j] =
                    t[(i - 1) * (kExactLimit + 1) + j - 1] +
                    (j <= i - 1 ? t[(i - 1) * (kExactLimit + 1) + j] : 0);
            }
        }
        return t;
    }();
    return table.data() + n * (kExactLimit + 1);
}

double log_choose(double n, double k) {
    return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

// Hypergeometric pmf P(chi = k) for overlap of a fixed d1-subset and a
// uniform d2-subset of n positions.
double hypergeometric_pmf(std::size_t n, std::size_t d1, std::size_t d2, std::size_t k) {
    if (n <= kExactLimit) {
        const unsigned __int128 num =
            static_cast<unsigned __int128>(exact_binomial_row(d1)[k]) *
            exact_binomial_row(n - d1)[d2 - k];
        return static_cast<double>(static_cast<long double>(num) /
                                   static_cast<long double>(exact_binomial_row(n)[d2]));
    }
    const double lg = log_choose(static_cast<double>(d1), static_cast<double>(k)) +
                      log_choose(static_cast<double>(n - d1), static_cast<double>(d2 - k)) -
                      log_choose(static_cast<double>(n), static_cast<double>(d2));
    return std::exp(lg);
}

} // namespace

DegreeDistribution::DegreeDistribution(std::vector<double> pmf) : pmf_(std::move(pmf)) {
    if (pmf_.empty()) {
        raise(ErrorKind::Parameter, "degree pmf must not be empty");
    }
    double sum = 0;
    for (double p : pmf_) {
        if (!(p >= 0) || !std::isfinite(p)) {
            raise(ErrorKind::Parameter, "degree pmf entries must be finite and >= 0");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
        raise(ErrorKind::Parameter, "degree pmf does not sum to 1");
    }
    for (double& p : pmf_) p /= sum;
    cdf_.resize(pmf_.size());
    double acc = 0;
    for (std::size_t d = 0; d < pmf_.size(); ++d) {
        acc += pmf_[d];
        cdf_[d] = acc;
    }
    cdf_.back() = 1.0;
}

double DegreeDistribution::mean() const {
    double m = 0;
    for (std::size_t d = 0; d < pmf_.size(); ++d) m += static_cast<double>(d) * pmf_[d];
    return m;
}

std::size_t DegreeDistribution::sample(Rng& rng) const {
    const double u = rng.next_double();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - cdf_.begin(), static_cast<std::ptrdiff_t>(cdf_.size() - 1)));
}

DegreeDistribution DegreeDistribution::robust_soliton(std::size_t n, double c, double delta) {
    if (n < 2) raise(ErrorKind::Parameter, "robust soliton needs n >= 2");
    if (!(c > 0) || !(delta > 0) || !(delta < 1)) {
        raise(ErrorKind::Parameter, "robust soliton needs c > 0 and delta in (0, 1)");
    }
    const double nd = static_cast<double>(n);
    const double s = c * std::log(nd / delta) * std::sqrt(nd);
    std::size_t spike = static_cast<std::size_t>(std::ceil(nd / s));
    spike = std::min<std::size_t>(std::max<std::size_t>(spike, 1), n);

    std::vector<double> mass(n + 1, 0.0);
    mass[1] = 1.0 / nd;
    for (std::size_t d = 2; d <= n; ++d) {
        mass[d] = 1.0 / (static_cast<double>(d) * static_cast<double>(d - 1));
    }
    for (std::size_t d = 1; d < spike; ++d) {
        mass[d] += s / (nd * static_cast<double>(d));
    }
    mass[spike] += std::max(0.0, s * std::log(s / delta) / nd);

    double beta = 0;
    for (double m : mass) beta += m;
    for (double& m : mass) m /= beta;
    return DegreeDistribution(std::move(mass));
}

DegreeDistribution DegreeDistribution::binomial_half(std::size_t n) {
    if (n < 1) raise(ErrorKind::Parameter, "binomial needs n >= 1");
    std::vector<double> pmf(n + 1);
    double v = std::ldexp(1.0, -static_cast<int>(n));
    for (std::size_t i = 0; i <= n; ++i) {
        pmf[i] = v;
        v = v * static_cast<double>(n - i) / static_cast<double>(i + 1);
    }
    return DegreeDistribution(std::move(pmf));
}

DegreeDistribution DegreeDistribution::point_mass(std::size_t n, std::size_t d) {
    if (d > n) raise(ErrorKind::Parameter, "point mass degree exceeds n");
    std::vector<double> pmf(n + 1, 0.0);
    pmf[d] = 1.0;
    return DegreeDistribution(std::move(pmf));
}

double s_kernel(std::size_t n, std::size_t d1, std::size_t d2, std::size_t dr) {
    if (n < 1 || d1 > n || d2 > n || dr > n) {
        raise(ErrorKind::Parameter, "s_kernel degrees must lie in [0, n]");
    }
    if (dr > d1 + d2) return 0.0;
    const std::size_t diff = d1 + d2 - dr;
    if (diff % 2 != 0) return 0.0;
    const std::size_t k = diff / 2;
    const std::size_t kmin = d1 + d2 > n ? d1 + d2 - n : 0;
    if (k < kmin || k > std::min(d1, d2)) return 0.0;
    return hypergeometric_pmf(n, d1, d2, k);
}

DegreeDistribution omega_step(const DegreeDistribution& omega) {
    const std::size_t n = omega.max_degree();
    const auto& pmf = omega.pmf();
    std::vector<double> out(n + 1, 0.0);
    std::vector<double> slice(n + 1, 0.0);

    for (std::size_t d1 = 0; d1 <= n; ++d1) {
        if (pmf[d1] == 0) continue;
        for (std::size_t d2 = 0; d2 <= n; ++d2) {
            const double pp = pmf[d1] * pmf[d2];
            if (pp == 0) continue;
            const std::size_t kmin = d1 + d2 > n ? d1 + d2 - n : 0;
            const std::size_t kmax = std::min(d1, d2);
            double sum = 0;
            for (std::size_t k = kmin; k <= kmax; ++k) {
                slice[k] = hypergeometric_pmf(n, d1, d2, k);
                sum += slice[k];
            }
            // The slice sums to 1 analytically; dividing out the numerical
            // sum keeps total mass exact over many iterations.
            for (std::size_t k = kmin; k <= kmax; ++k) {
                out[d1 + d2 - 2 * k] += pp * (slice[k] / sum);
            }
        }
    }
    return DegreeDistribution(std::move(out));
}

DegreeDistribution omega_infinity(std::size_t n) {
    return DegreeDistribution::binomial_half(n);
}

double tv_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0;
    const std::size_t m = std::max(a.size(), b.size());
    for (std::size_t i = 0; i < m; ++i) {
        const double pa = i < a.size() ? a[i] : 0.0;
        const double pb = i < b.size() ? b[i] : 0.0;
        acc += std::abs(pa - pb);
    }
    return acc / 2;
}

double tv_distance(const DegreeDistribution& a, const DegreeDistribution& b) {
    return tv_distance(a.pmf(), b.pmf());
}

std::vector<DegreeDistribution> monte_carlo_evolution(
    const DegreeDistribution& initial, std::size_t rounds, std::size_t samples,
    Rng& rng, PoolMode mode, std::size_t buffer_size) {
    const std::size_t n = initial.max_degree();
    if (samples < 1000) {
        raise(ErrorKind::Parameter, "monte carlo pool needs at least 1000 samples");
    }
    if (mode == PoolMode::FairCoinSubset && (buffer_size < 1 || buffer_size > 64)) {
        raise(ErrorKind::Parameter, "buffer_size must be in [1, 64]");
    }

    std::vector<std::size_t> positions(n);
    for (std::size_t i = 0; i < n; ++i) positions[i] = i;

    std::vector<BitVector> pool(samples, BitVector(n));
    for (auto& v : pool) {
        const std::size_t d = initial.sample(rng);
        // Uniform d-subset by partial Fisher-Yates.
        for (std::size_t j = 0; j < d; ++j) {
            const std::size_t pick = j + static_cast<std::size_t>(rng.uniform(n - j));
            std::swap(positions[j], positions[pick]);
            v.set(positions[j]);
        }
    }

    const auto histogram = [&](const std::vector<BitVector>& p) {
        std::vector<double> h(n + 1, 0.0);
        for (const auto& v : p) h[v.degree()] += 1.0;
        for (double& x : h) x /= static_cast<double>(samples);
        return DegreeDistribution(std::move(h));
    };

    std::vector<DegreeDistribution> result;
    result.reserve(rounds + 1);
    result.push_back(histogram(pool));

    std::vector<BitVector> next(samples, BitVector(n));
    for (std::size_t r = 0; r < rounds; ++r) {
        for (std::size_t i = 0; i < samples; ++i) {
            BitVector& v = next[i];
            v.clear();
            if (mode == PoolMode::PairwiseXor) {
                v.xor_assign(pool[rng.uniform(samples)]);
                v.xor_assign(pool[rng.uniform(samples)]);
            } else {
                // Fair-coin subset of buffer_size uniformly chosen members;
                // an all-zero coin draw is redrawn.
                std::uint64_t coins;
                do {
                    coins = rng.next_u64() & ((buffer_size >= 64)
                                                  ? ~std::uint64_t{0}
                                                  : ((std::uint64_t{1} << buffer_size) - 1));
                } while (coins == 0);
                for (std::size_t b = 0; b < buffer_size; ++b) {
                    const std::size_t pick = rng.uniform(samples);
                    if ((coins >> b) & 1u) v.xor_assign(pool[pick]);
                }
            }
        }
        pool.swap(next);
        result.push_back(histogram(pool));
    }
    return result;
}

} // namespace bandcodes
