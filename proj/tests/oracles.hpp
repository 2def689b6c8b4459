#pragma once

// Brute-force reference computations kept deliberately independent of the
// library's own code paths: plain loops, membership predicates, dense scans.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

using Membership = std::function<bool(std::uint64_t)>;

inline std::uint64_t count_prefix(const Membership& contains, std::uint64_t n) {
    std::uint64_t c = 0;
    for (std::uint64_t k = 0; k <= n; ++k)
        if (contains(k)) ++c;
    return c;
}

inline double min_prefix_ratio(const Membership& contains, std::uint64_t horizon,
                               std::uint64_t burn_in) {
    double best = 2.0;
    std::uint64_t count = 0;
    for (std::uint64_t n = 0; n <= horizon; ++n) {
        if (contains(n)) ++count;
        if (n < burn_in) continue;
        best = std::min(best, static_cast<double>(count) / static_cast<double>(n + 1));
    }
    return best;
}

inline double max_prefix_ratio(const Membership& contains, std::uint64_t horizon,
                               std::uint64_t burn_in) {
    double best = -1.0;
    std::uint64_t count = 0;
    for (std::uint64_t n = 0; n <= horizon; ++n) {
        if (contains(n)) ++count;
        if (n < burn_in) continue;
        best = std::max(best, static_cast<double>(count) / static_cast<double>(n + 1));
    }
    return best;
}

using Weight = std::function<double(std::int64_t)>;
using Entries = std::vector<std::pair<std::int64_t, double>>;

inline double sup_norm(const Entries& entries, const Weight& nu) {
    double m = 0.0;
    for (const auto& [k, c] : entries) m = std::max(m, std::abs(c) * nu(k));
    return m;
}

inline double power_norm(const Entries& entries, double p, const Weight& nu) {
    double s = 0.0;
    for (const auto& [k, c] : entries) s += std::pow(std::abs(c) * nu(k), p);
    return std::pow(s, 1.0 / p);
}

/// F-norm partial sum with P_max + 1 terms of 2^{-p-1} min(1, ||.||_p).
inline double f_norm_lo(const Entries& entries, const std::function<double(int, std::int64_t)>& nu,
                        bool sup, double power, int p_max) {
    double acc = 0.0;
    for (int p = 0; p <= p_max; ++p) {
        Entries weighted = entries;
        double norm;
        if (sup) {
            norm = 0.0;
            for (const auto& [k, c] : entries) norm = std::max(norm, std::abs(c) * nu(p, k));
        } else {
            double s = 0.0;
            for (const auto& [k, c] : entries) s += std::pow(std::abs(c) * nu(p, k), power);
            norm = std::pow(s, 1.0 / power);
        }
        acc += std::ldexp(1.0, -(p + 1)) * std::min(1.0, norm);
    }
    return acc;
}

/// Weighted backward shift on a dense copy of the vector: result_k = (prod of
/// w over (k, k+steps]) * x_{k+steps}.
inline Entries dense_shift(const Entries& entries, const Weight& w, std::uint64_t steps,
                           bool unilateral) {
    Entries out;
    for (const auto& [k, c] : entries) {
        std::int64_t dst = k - static_cast<std::int64_t>(steps);
        if (unilateral && dst < 0) continue;
        double prod = 1.0;
        for (std::int64_t l = dst + 1; l <= k; ++l) prod *= w(l);
        out.emplace_back(dst, c * prod);
    }
    return out;
}

}  // namespace oracle
