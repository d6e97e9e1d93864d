#pragma once

// Test-side oracles, deliberately independent of the library internals:
// a dense GF(2) eliminator for rank cross-checks, naive bit scans, and
// small statistics helpers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "bandcodes/bitvec.hpp"

namespace oracle {

// Plain dense Gaussian elimination over GF(2), re-run from scratch on the
// raw received vectors. No banding, no swaps, no early exits.
class DenseRank {
public:
    explicit DenseRank(std::size_t n) : n_(n) {}

    void add(const bandcodes::BitVector& v) {
        std::vector<std::uint64_t> row(v.words().begin(), v.words().end());
        raw_.push_back(std::move(row));
    }

    std::size_t rank() const {
        std::vector<std::vector<std::uint64_t>> m = raw_;
        std::size_t r = 0;
        for (std::size_t col = 0; col < n_ && r < m.size(); ++col) {
            const std::size_t word = col / 64;
            const std::uint64_t mask = std::uint64_t{1} << (col % 64);
            std::size_t pivot = m.size();
            for (std::size_t i = r; i < m.size(); ++i) {
                if (m[i][word] & mask) {
                    pivot = i;
                    break;
                }
            }
            if (pivot == m.size()) continue;
            std::swap(m[r], m[pivot]);
            for (std::size_t i = 0; i < m.size(); ++i) {
                if (i != r && (m[i][word] & mask)) {
                    for (std::size_t k = 0; k < m[i].size(); ++k) m[i][k] ^= m[r][k];
                }
            }
            ++r;
        }
        return r;
    }

private:
    std::size_t n_;
    std::vector<std::vector<std::uint64_t>> raw_;
};

inline std::optional<std::size_t> naive_leading(const bandcodes::BitVector& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v.get(i)) return i;
    }
    return std::nullopt;
}

inline std::optional<std::size_t> naive_trailing(const bandcodes::BitVector& v) {
    std::optional<std::size_t> last;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v.get(i)) last = i;
    }
    return last;
}

inline std::size_t naive_degree(const bandcodes::BitVector& v) {
    std::size_t d = 0;
    for (std::size_t i = 0; i < v.size(); ++i) d += v.get(i);
    return d;
}

struct MeanCi {
    double mean = 0;
    double ci95 = 0;
    std::size_t count = 0;
};

inline MeanCi mean_ci(const std::vector<double>& xs) {
    MeanCi r;
    r.count = xs.size();
    if (xs.empty()) return r;
    double s = 0;
    for (double x : xs) s += x;
    r.mean = s / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double q = 0;
        for (double x : xs) q += (x - r.mean) * (x - r.mean);
        const double sd = std::sqrt(q / static_cast<double>(xs.size() - 1));
        r.ci95 = 1.96 * sd / std::sqrt(static_cast<double>(xs.size()));
    }
    return r;
}

// Upper critical value of chi-square at significance alpha=0.01 via the
// Wilson-Hilferty cube approximation; adequate for df >= 5.
inline double chi2_crit_99(double df) {
    const double z = 2.3263478740408408; // 99th percentile of N(0,1)
    const double t = 1.0 - 2.0 / (9.0 * df) + z * std::sqrt(2.0 / (9.0 * df));
    return df * t * t * t;
}

} // namespace oracle
