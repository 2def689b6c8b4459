#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "shiftlab/integer_set.hpp"
#include "shiftlab/shift.hpp"
#include "shiftlab/space.hpp"

namespace shiftlab {

struct MetricSeminorm {
    int q;
};
struct MetricFNorm {};
using Metric = std::variant<MetricSeminorm, MetricFNorm>;

inline std::string metric_name(const Metric& m) {
    if (auto* s = std::get_if<MetricSeminorm>(&m)) return "seminorm_" + std::to_string(s->q);
    return "f_norm";
}

/// Distance used for hitting decisions. For the F-norm the interval's upper
/// bound is taken, so a truncated tail can never admit a spurious hit.
inline double metric_dist(const SpaceSpec& space, const SparseVector& a, const SparseVector& b,
                          const Metric& m) {
    SparseVector d = subtract(a, b);
    if (auto* s = std::get_if<MetricSeminorm>(&m)) return seminorm(space, d, s->q);
    return f_norm(space, d).hi;
}

namespace detail {

struct ScanContext {
    const SpaceSpec* space;
    const SparseVector* x;
    const WeightSequence* w;
    const SparseVector* target;
    std::uint64_t horizon;
};

// Exact early-exit pass for unilateral sup-type q-uniform spaces with verified
// non-increasing weights and the identity shift: the running max plus a bound
// on every remaining term decides the sup without walking the full support.
// The visitor returns false to stop the scan.
template <class Visit>
void scan_fast_sup(const ScanContext& ctx, Visit&& visit) {
    const auto& xe = ctx.x->entries();
    const auto& ye = ctx.target->entries();
    std::int64_t max_idx = 0;
    if (!xe.empty()) max_idx = std::max(max_idx, xe.back().first);
    if (!ye.empty()) max_idx = std::max(max_idx, ye.back().first);
    std::vector<double> nu(static_cast<std::size_t>(max_idx) + 2);
    for (std::int64_t k = 0; k <= max_idx + 1; ++k)
        nu[static_cast<std::size_t>(k)] = std::exp(ctx.space->log_weight(0, k));
    double maxc = ctx.x->max_abs_coef() + ctx.target->max_abs_coef();

    std::size_t start = 0;
    for (std::uint64_t n = 1; n <= ctx.horizon; ++n) {
        while (start < xe.size() &&
               xe[start].first < static_cast<std::int64_t>(n))
            ++start;
        double best = 0.0;
        std::size_t i = start, j = 0;
        while (i < xe.size() || j < ye.size()) {
            std::int64_t kx = i < xe.size() ? xe[i].first - static_cast<std::int64_t>(n)
                                            : std::numeric_limits<std::int64_t>::max();
            std::int64_t ky = j < ye.size() ? ye[j].first
                                            : std::numeric_limits<std::int64_t>::max();
            std::int64_t k;
            double c;
            if (kx == ky) {
                c = xe[i].second - ye[j].second;
                k = kx;
                ++i;
                ++j;
            } else if (kx < ky) {
                c = xe[i].second;
                k = kx;
                ++i;
            } else {
                c = -ye[j].second;
                k = ky;
                ++j;
            }
            if (c != 0.0) best = std::max(best, std::abs(c) * nu[static_cast<std::size_t>(k)]);
            if (k >= max_idx || best >= maxc * nu[static_cast<std::size_t>(k + 1)]) break;
        }
        if (!visit(n, best)) return;
    }
}

template <class Visit>
void scan_general(const ScanContext& ctx, Visit&& visit) {
    const auto& xe = ctx.x->entries();
    const auto& ye = ctx.target->entries();
    bool unilateral = ctx.space->domain() == Domain::unilateral;
    std::vector<std::pair<std::int64_t, double>> diff;
    for (std::uint64_t n = 1; n <= ctx.horizon; ++n) {
        diff.clear();
        std::size_t i = 0, j = 0;
        while (i < xe.size() && unilateral &&
               xe[i].first < static_cast<std::int64_t>(n))
            ++i;
        while (i < xe.size() || j < ye.size()) {
            std::int64_t kx = i < xe.size() ? xe[i].first - static_cast<std::int64_t>(n)
                                            : std::numeric_limits<std::int64_t>::max();
            std::int64_t ky = j < ye.size() ? ye[j].first
                                            : std::numeric_limits<std::int64_t>::max();
            if (kx == ky) {
                double ratio = std::exp(ctx.w->log_prefix_product(xe[i].first) -
                                        ctx.w->log_prefix_product(kx));
                double c = xe[i].second * ratio - ye[j].second;
                if (c != 0.0) diff.emplace_back(kx, c);
                ++i;
                ++j;
            } else if (kx < ky) {
                double ratio = std::exp(ctx.w->log_prefix_product(xe[i].first) -
                                        ctx.w->log_prefix_product(kx));
                diff.emplace_back(kx, xe[i].second * ratio);
                ++i;
            } else {
                diff.emplace_back(ky, -ye[j].second);
                ++j;
            }
        }
        if (!visit(n, diff)) return;
    }
}

inline double norm_of_entries(const SpaceSpec& space,
                              const std::vector<std::pair<std::int64_t, double>>& entries, int q) {
    if (entries.empty()) return 0.0;
    if (space.is_sup()) {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& [k, c] : entries)
            m = std::max(m, std::log(std::abs(c)) + space.log_weight(q, k));
        return std::exp(m);
    }
    double p = space.power();
    std::vector<double> terms;
    terms.reserve(entries.size());
    for (const auto& [k, c] : entries)
        terms.push_back(p * (std::log(std::abs(c)) + space.log_weight(q, k)));
    return std::exp(logsumexp(terms) / p);
}

inline double metric_of_entries(const SpaceSpec& space,
                                const std::vector<std::pair<std::int64_t, double>>& entries,
                                const Metric& m) {
    if (auto* s = std::get_if<MetricSeminorm>(&m)) return norm_of_entries(space, entries, s->q);
    double tail = std::ldexp(1.0, -(space.p_max() + 1));
    if (space.q_uniform()) return std::min(1.0, norm_of_entries(space, entries, 0)) * (1.0 - tail) + tail;
    double lo = 0.0;
    for (int p = 0; p <= space.p_max(); ++p)
        lo += std::ldexp(1.0, -(p + 1)) * std::min(1.0, norm_of_entries(space, entries, p));
    return lo + tail;
}

/// Runs visit(n, metric distance of B^n x to target) for n in [1, horizon];
/// the visitor returns false to stop early.
template <class Visit>
void scan_orbit_distances(const SpaceSpec& space, const SparseVector& x, const WeightSequence& w,
                          const SparseVector& target, std::uint64_t horizon, const Metric& metric,
                          Visit&& visit) {
    if (space.domain() != x.domain() || space.domain() != target.domain())
        throw DomainMismatch("scan inputs disagree on domain");
    ScanContext ctx{&space, &x, &w, &target, horizon};

    bool fast = space.domain() == Domain::unilateral && space.is_sup() && space.q_uniform() &&
                w.is_identity();
    if (fast) {
        std::int64_t hi = 1;
        if (!x.is_zero()) hi = std::max(hi, x.max_index() + 1);
        if (!target.is_zero()) hi = std::max(hi, target.max_index() + 1);
        fast = space.weights_decay_on(0, hi);
        if (fast) {
            double tail = std::ldexp(1.0, -(space.p_max() + 1));
            bool want_fnorm = std::holds_alternative<MetricFNorm>(metric);
            scan_fast_sup(ctx, [&](std::uint64_t n, double sup) {
                return visit(n, want_fnorm ? std::min(1.0, sup) * (1.0 - tail) + tail : sup);
            });
            return;
        }
    }
    scan_general(ctx, [&](std::uint64_t n, const std::vector<std::pair<std::int64_t, double>>& d) {
        return visit(n, metric_of_entries(space, d, metric));
    });
}

}  // namespace detail

/// Least n in [0, budget] with dist(B^n x, target) < eps under the metric.
inline std::optional<std::uint64_t> first_hit(const SpaceSpec& space, const SparseVector& x,
                                              const WeightSequence& w, const SparseVector& target,
                                              const Metric& metric, double eps,
                                              std::uint64_t budget) {
    if (metric_dist(space, x, target, metric) < eps) return 0;
    std::optional<std::uint64_t> found;
    detail::scan_orbit_distances(space, x, w, target, budget, metric,
                                 [&](std::uint64_t n, double d) {
                                     if (d < eps) {
                                         found = n;
                                         return false;
                                     }
                                     return true;
                                 });
    return found;
}

struct HittingOptions {
    std::uint64_t horizon = 1000;
    std::optional<std::uint64_t> safe_horizon;  // truncation-trustworthy bound; clamps the scan
    std::optional<std::uint64_t> burn_in;
    double floor = 0.0;
};

/// N_B(x, ball(target, eps)) on a finite window, with density evidence.
struct HittingReport {
    std::string target_desc;
    Metric metric = MetricFNorm{};
    double epsilon = 0.0;
    std::uint64_t horizon_requested = 0;
    std::uint64_t horizon_used = 0;
    std::optional<std::uint64_t> safe_horizon;
    IntegerSet hits;
    DensityRecord density;
    double floor = 0.0;
    bool meets_floor = false;
};

namespace detail {

inline HittingReport make_report(const std::string& desc, const Metric& metric, double eps,
                                 const HittingOptions& opts, std::uint64_t used,
                                 std::vector<std::uint64_t> hit_times) {
    HittingReport rep;
    rep.target_desc = desc;
    rep.metric = metric;
    rep.epsilon = eps;
    rep.horizon_requested = opts.horizon;
    rep.horizon_used = used;
    rep.safe_horizon = opts.safe_horizon;
    rep.hits = IntegerSet::finite(std::move(hit_times));
    std::uint64_t burn = opts.burn_in.value_or(default_burn_in(used));
    rep.density = lower_density(rep.hits, used, burn);
    rep.floor = opts.floor;
    rep.meets_floor = rep.density.estimate >= opts.floor;
    return rep;
}

}  // namespace detail

inline HittingReport hitting_set(const SpaceSpec& space, const SparseVector& x,
                                 const WeightSequence& w, const SparseVector& target,
                                 const Metric& metric, double eps, const HittingOptions& opts,
                                 const std::string& target_desc = "target") {
    if (!(eps > 0.0)) throw ConfigError("hitting radius must be positive");
    std::uint64_t used = opts.horizon;
    if (opts.safe_horizon) used = std::min(used, *opts.safe_horizon);
    std::vector<std::uint64_t> hit_times;
    detail::scan_orbit_distances(space, x, w, target, used, metric, [&](std::uint64_t n, double d) {
        if (d < eps) hit_times.push_back(n);
        return true;
    });
    return detail::make_report(target_desc, metric, eps, opts, used, std::move(hit_times));
}

struct FrVerdict {
    std::vector<HittingReport> reports;  // one per epsilon, F-norm metric
    double floor = 0.0;
    // "consistent with frequent recurrence at this horizon"; never a proof
    bool consistent = false;
};

/// Self-return scan at a ladder of radii; one orbit pass serves all radii.
inline FrVerdict fr_verdict(const SpaceSpec& space, const SparseVector& x,
                            const WeightSequence& w, const std::vector<double>& eps_ladder,
                            const HittingOptions& opts) {
    if (eps_ladder.empty()) throw ConfigError("fr_verdict needs a radius ladder");
    for (std::size_t i = 1; i < eps_ladder.size(); ++i)
        if (!(eps_ladder[i] < eps_ladder[i - 1]))
            throw ConfigError("radius ladder must be strictly decreasing");
    std::uint64_t used = opts.horizon;
    if (opts.safe_horizon) used = std::min(used, *opts.safe_horizon);
    std::vector<std::vector<std::uint64_t>> hits(eps_ladder.size());
    Metric metric = MetricFNorm{};
    detail::scan_orbit_distances(space, x, w, x, used, metric, [&](std::uint64_t n, double d) {
        for (std::size_t e = 0; e < eps_ladder.size(); ++e)
            if (d < eps_ladder[e]) hits[e].push_back(n);
        return true;
    });
    FrVerdict verdict;
    verdict.floor = opts.floor;
    verdict.consistent = true;
    for (std::size_t e = 0; e < eps_ladder.size(); ++e) {
        auto rep = detail::make_report("self", metric, eps_ladder[e], opts, used,
                                       std::move(hits[e]));
        verdict.consistent = verdict.consistent && rep.meets_floor;
        verdict.reports.push_back(std::move(rep));
    }
    return verdict;
}

/// Vectors supported in A with every coordinate magnitude below M.
struct BallFamilySpec {
    IntegerSet A;
    double M = 1.0;
};

inline bool in_ball_family(const SparseVector& x, const BallFamilySpec& spec) {
    for (const auto& [k, c] : x.entries()) {
        if (k < 0 || !spec.A.contains(static_cast<std::uint64_t>(k))) return false;
        if (!(std::abs(c) < spec.M)) return false;
    }
    return true;
}

/// Coordinatewise projection onto the family: entries outside A drop, the
/// rest clamp to magnitude min(|x_n|, M) keeping their sign.
inline SparseVector projection_B1(const SparseVector& x, const BallFamilySpec& spec) {
    if (!(spec.M > 0.0)) throw ConfigError("ball bound must be positive");
    std::vector<SparseVector::Entry> out;
    for (const auto& [k, c] : x.entries()) {
        if (k < 0 || !spec.A.contains(static_cast<std::uint64_t>(k))) continue;
        double mag = std::min(std::abs(c), spec.M);
        out.emplace_back(k, c < 0 ? -mag : mag);
    }
    return SparseVector::from_entries(x.domain(), std::move(out));
}

struct FhReport {
    std::vector<HittingReport> per_target;
    bool all_meet_floor = false;
};

/// Frequent-hypercyclicity evidence for the family: per-target hitting
/// densities of the orbit of x against finitely many members of B_M(A).
inline FhReport fh_for_B1_check(const SpaceSpec& space, const SparseVector& x,
                                const WeightSequence& w, const BallFamilySpec& spec,
                                const std::vector<SparseVector>& targets, double eps,
                                const HittingOptions& opts) {
    FhReport rep;
    rep.all_meet_floor = true;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        if (!in_ball_family(targets[t], spec))
            throw TargetOutsideFamily("target " + std::to_string(t));
        auto hr = hitting_set(space, x, w, targets[t], MetricFNorm{}, eps, opts,
                              "target_" + std::to_string(t));
        rep.all_meet_floor = rep.all_meet_floor && hr.meets_floor;
        rep.per_target.push_back(std::move(hr));
    }
    return rep;
}

}  // namespace shiftlab
