#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shiftlab/integer_set.hpp"
#include "shiftlab/recurrence.hpp"
#include "shiftlab/separate.hpp"
#include "shiftlab/shift.hpp"
#include "shiftlab/space.hpp"

namespace shiftlab {

// ---------------------------------------------------------------------------
// schedule
// ---------------------------------------------------------------------------

constexpr std::size_t kAnchorOwner = std::numeric_limits<std::size_t>::max();

struct Schedule {
    std::vector<std::uint64_t> points;  // N_0 = 0, N_1, ...
    std::vector<std::size_t> owner;     // consuming slot; kAnchorOwner for N_0
};

/// Family provider indexed by the schedule value, as in A_{N_k}.
using FamilyProvider = std::function<IntegerSet(std::uint64_t)>;

/// N_k = min{ n > N_{k-1} : n in union of the already activated families }.
/// Each activated family only contributes elements above its own activation
/// value, which is what makes the schedule consume the whole union in order.
inline Schedule build_nk_schedule(const FamilyProvider& provider, std::uint64_t K) {
    Schedule s;
    s.points = {0};
    s.owner = {kAnchorOwner};
    std::vector<IntegerSet> active;
    std::vector<std::uint64_t> activation;
    for (std::uint64_t k = 1; k <= K; ++k) {
        std::uint64_t prev = s.points.back();
        active.push_back(provider(prev));
        activation.push_back(prev);
        std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
        std::size_t best_slot = kAnchorOwner;
        for (std::size_t j = 0; j < active.size(); ++j) {
            auto cand = active[j].next_at_or_after(std::max(prev, activation[j]) + 1);
            if (cand && *cand < best) {
                best = *cand;
                best_slot = j;
            }
        }
        if (best_slot == kAnchorOwner) throw ScheduleExhausted(k);
        s.points.push_back(best);
        s.owner.push_back(best_slot);
    }
    return s;
}

// ---------------------------------------------------------------------------
// certificates
// ---------------------------------------------------------------------------

struct StepRecord {
    std::uint64_t k = 0;
    std::uint64_t schedule_value = 0;  // N_k
    double step_norm = 0.0;            // ||y^{k+1} - y^k|| (F-norm upper bound)
    double budget = 0.0;               // eps / 2^{k+1}
    std::uint64_t points_pasted = 0;
};

struct PruneRecord {
    std::size_t slot = 0;
    std::uint64_t dropped = 0;
    std::uint64_t min_used = 0;
    double worst_family_norm = 0.0;
    double budget = 0.0;
};

struct ResidualSample {
    std::uint64_t q = 0;
    std::uint64_t m = 0;
    double residual = 0.0;           // ||B^m y - prefix||_q
    double budget = 0.0;             // eps / 2^{N_q + 1}
    double recomputation_gap = 0.0;  // direct vs closed form, entrywise
    bool within_budget = false;
};

struct ConstructionCertificate {
    Domain domain = Domain::unilateral;
    std::int64_t anchor = 0;  // R
    double epsilon = 0.0;
    std::uint64_t support_bound = 0;
    std::vector<std::uint64_t> schedule;  // every consumed point on the window
    std::vector<std::size_t> schedule_owner;
    std::vector<IntegerSet> used_families;  // pruned, materialized on the window
    std::vector<std::uint64_t> gap_params;  // k_p per slot
    std::vector<PruneRecord> pruning;
    std::vector<StepRecord> steps;
    double anchor_distance = 0.0;  // ||y - e_R|| upper bound
    // support(y) == {N_j + R} exactly; pasted intermediate offsets usually
    // land strictly inside the separation gaps, in which case this is false
    // and the first extra index is recorded.
    bool schedule_support_identity = false;
    std::optional<std::int64_t> first_off_schedule;
    std::uint64_t safe_horizon = 0;
    std::vector<ResidualSample> residuals;
};

struct FrBuildInput {
    std::vector<IntegerSet> families;  // slot k holds A_{N_k}
    std::vector<std::uint64_t> gaps;   // window parameter k_p per slot
    std::int64_t anchor = 0;           // R
    std::uint64_t support_bound = 1000;
    double epsilon = 0.1;
    // demand |n - m| > N_p + N_q + 2|R| on top of the k_p + k_q + 2|R| gaps,
    // for data that must also feed the characterization checkers
    bool gaps_include_schedule_values = false;
};

struct FrBuildResult {
    SparseVector y;
    ConstructionCertificate cert;
};

namespace detail {

inline double fnorm_hi_of(const SpaceSpec& space,
                          const std::vector<std::pair<std::int64_t, double>>& entries) {
    if (entries.empty()) return 0.0;  // an empty sum is exactly the zero vector
    double tail = std::ldexp(1.0, -(space.p_max() + 1));
    if (space.q_uniform()) return std::min(1.0, norm_of_entries(space, entries, 0)) * (1.0 - tail) + tail;
    double lo = 0.0;
    for (int p = 0; p <= space.p_max(); ++p)
        lo += std::ldexp(1.0, -(p + 1)) * std::min(1.0, norm_of_entries(space, entries, p));
    return lo + tail;
}

// worst F-norm of sum_{n in elems} e_{n + R + t} over offsets t in [0, t_max]
inline double worst_offset_norm(const SpaceSpec& space, const std::vector<std::uint64_t>& elems,
                                std::int64_t R, std::uint64_t t_max) {
    double worst = 0.0;
    std::vector<std::pair<std::int64_t, double>> entries(elems.size());
    for (std::uint64_t t = 0; t <= t_max; ++t) {
        for (std::size_t i = 0; i < elems.size(); ++i)
            entries[i] = {static_cast<std::int64_t>(elems[i]) + R + static_cast<std::int64_t>(t),
                          1.0};
        worst = std::max(worst, fnorm_hi_of(space, entries));
    }
    return worst;
}

inline FrBuildResult build_fr_vector(const SpaceSpec& space, const FrBuildInput& in) {
    if (in.families.size() != in.gaps.size())
        throw ConfigError("one gap parameter per pasted family");
    std::int64_t R = in.anchor;
    if (space.domain() == Domain::unilateral && R < 0)
        throw DomainMismatch("unilateral anchor must be >= 0");
    std::int64_t absR = R < 0 ? -R : R;
    std::uint64_t bound = in.support_bound;
    double eps = in.epsilon;
    std::size_t slots = in.families.size();

    ConstructionCertificate cert;
    cert.domain = space.domain();
    cert.anchor = R;
    cert.epsilon = eps;
    cert.support_bound = bound;
    cert.gap_params = in.gaps;
    cert.schedule = {0};
    cert.schedule_owner = {kAnchorOwner};

    // Activate slots one schedule step at a time: slot k needs N_k before its
    // structural floor and smallness budget can be evaluated.
    std::vector<std::vector<std::uint64_t>> used(slots);
    std::vector<std::size_t> cursor(slots, 0);
    std::size_t activated = 0;
    while (true) {
        if (activated < slots && cert.schedule.size() == activated + 1) {
            std::size_t k = activated;
            std::uint64_t Nk = cert.schedule[k];
            std::uint64_t lo = Nk;  // elements must exceed N_k
            if (space.domain() == Domain::bilateral)
                lo = std::max(lo, in.gaps[k] + static_cast<std::uint64_t>(absR));
            auto all = in.families[k].elements_up_to(bound);
            std::vector<std::uint64_t> kept;
            std::uint64_t dropped = 0;
            for (auto v : all) {
                if (v > lo)
                    kept.push_back(v);
                else
                    ++dropped;
            }
            double budget = std::ldexp(eps / static_cast<double>(Nk + 1),
                                       -static_cast<int>(std::min<std::uint64_t>(Nk + 1, 4000)));
            double worst = worst_offset_norm(space, kept, R, Nk + 1);
            while (worst >= budget && !kept.empty()) {
                kept.erase(kept.begin());
                ++dropped;
                worst = worst_offset_norm(space, kept, R, Nk + 1);
            }
            if (kept.empty() && !all.empty())
                throw BudgetViolation(k, "family emptied while pruning toward " +
                                             std::to_string(budget));
            cert.pruning.push_back({k, dropped, kept.empty() ? 0 : kept.front(), worst, budget});
            used[k] = std::move(kept);
            ++activated;
        }
        std::uint64_t prev = cert.schedule.back();
        std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
        std::size_t best_slot = kAnchorOwner;
        for (std::size_t j = 0; j < activated; ++j) {
            while (cursor[j] < used[j].size() && used[j][cursor[j]] <= prev) ++cursor[j];
            if (cursor[j] < used[j].size() && used[j][cursor[j]] < best) {
                best = used[j][cursor[j]];
                best_slot = j;
            }
        }
        if (best_slot == kAnchorOwner) {
            if (activated < slots) throw ScheduleExhausted(activated);
            break;
        }
        cert.schedule.push_back(best);
        cert.schedule_owner.push_back(best_slot);
        ++cursor[best_slot];
    }
    for (std::size_t k = 0; k < slots; ++k)
        cert.used_families.push_back(IntegerSet::finite(used[k]));

    // separation preconditions on the materialized window
    {
        auto scan = scan_gaps(used, in.gaps);
        if (!scan.disjoint) throw SeparationViolation("pasted families are not disjoint");
        for (std::size_t p = 0; p < slots; ++p) {
            for (std::size_t q = p; q < slots; ++q) {
                std::uint64_t need = in.gaps[p] + in.gaps[q] + 2 * static_cast<std::uint64_t>(absR);
                if (in.gaps_include_schedule_values)
                    need = std::max(need, cert.schedule[p] + cert.schedule[q] +
                                              2 * static_cast<std::uint64_t>(absR));
                if (scan.min_gap[p][q] != kNoGap && scan.min_gap[p][q] <= need)
                    throw SeparationViolation("gap " + std::to_string(scan.min_gap[p][q]) +
                                              " between slots " + std::to_string(p) + "," +
                                              std::to_string(q) + " (need > " +
                                              std::to_string(need) + ")");
            }
        }
    }

    // paste: y = e_R + sum_p sum_{n in A_{N_p}} sum_{j<=p} e_{n + N_j + R}
    std::map<std::int64_t, double> acc;
    acc[R] = 1.0;
    for (std::size_t k = 0; k < slots; ++k) {
        std::uint64_t Nk = cert.schedule[k];
        std::vector<std::pair<std::int64_t, double>> step_entries;
        for (auto n : used[k]) {
            if (n + Nk + static_cast<std::uint64_t>(absR) > bound) continue;  // whole block fits
            for (std::size_t j = 0; j <= k; ++j) {
                std::int64_t idx =
                    static_cast<std::int64_t>(n + cert.schedule[j]) + R;
                auto [it, fresh] = acc.emplace(idx, 1.0);
                if (!fresh)
                    throw SeparationViolation("pasted copies collide at index " +
                                              std::to_string(idx));
                step_entries.emplace_back(idx, 1.0);
            }
        }
        double step_norm = fnorm_hi_of(space, step_entries);
        double budget = std::ldexp(eps, -static_cast<int>(k) - 1);
        if (step_norm >= budget)
            throw BudgetViolation(k, "step norm " + std::to_string(step_norm) +
                                         " >= " + std::to_string(budget));
        cert.steps.push_back({k, Nk, step_norm, budget, static_cast<std::uint64_t>(step_entries.size())});
    }

    std::vector<SparseVector::Entry> entries(acc.begin(), acc.end());
    FrBuildResult out{SparseVector::from_entries(space.domain(), std::move(entries)), {}};

    cert.anchor_distance =
        f_norm(space, subtract(out.y, SparseVector::basis(space.domain(), R))).hi;
    if (cert.anchor_distance >= eps)
        throw BudgetViolation(slots, "distance to the anchor basis vector reached " +
                                         std::to_string(cert.anchor_distance));

    // strict schedule-support comparison
    cert.schedule_support_identity = true;
    {
        std::size_t si = 0;
        for (const auto& [idx, c] : out.y.entries()) {
            (void)c;
            while (si < cert.schedule.size() &&
                   static_cast<std::int64_t>(cert.schedule[si]) + R < idx)
                ++si;
            if (si >= cert.schedule.size() ||
                static_cast<std::int64_t>(cert.schedule[si]) + R != idx) {
                cert.schedule_support_identity = false;
                if (!cert.first_off_schedule) cert.first_off_schedule = idx;
            }
        }
    }

    std::uint64_t max_gap = slots == 0 ? 0 : *std::max_element(in.gaps.begin(), in.gaps.end());
    std::uint64_t depth = (slots == 0 ? 0 : cert.schedule[slots - 1]) +
                          static_cast<std::uint64_t>(absR) + max_gap;
    cert.safe_horizon = bound > depth ? bound - depth : 0;

    out.cert = std::move(cert);
    return out;
}

}  // namespace detail

inline FrBuildResult build_fr_vector_unilateral(const SpaceSpec& space, const FrBuildInput& in) {
    if (space.domain() != Domain::unilateral)
        throw DomainMismatch("unilateral builder on a bilateral space");
    return detail::build_fr_vector(space, in);
}

inline FrBuildResult build_fr_vector_bilateral(const SpaceSpec& space, const FrBuildInput& in) {
    if (space.domain() != Domain::bilateral)
        throw DomainMismatch("bilateral builder on a unilateral space");
    return detail::build_fr_vector(space, in);
}

/// Recompute ||B^m y - prefix_q||_q for sampled (q, m) two ways: directly from
/// the sparse data, and through the closed-form tail expression; both must
/// agree entrywise before the budget comparison is recorded.
inline std::vector<ResidualSample> verify_construction_residuals(
    const SpaceSpec& space, const SparseVector& y, ConstructionCertificate& cert,
    const std::vector<std::pair<std::uint64_t, std::uint64_t>>& samples,
    const WeightSequence& w = WeightSequence::identity()) {
    std::int64_t R = cert.anchor;
    std::int64_t absR = R < 0 ? -R : R;
    bool bilateral = cert.domain == Domain::bilateral;
    std::vector<ResidualSample> out;
    for (auto [q, m] : samples) {
        if (q >= cert.used_families.size()) throw SampleOutsideFamily("no slot " + std::to_string(q));
        if (!cert.used_families[q].contains(m))
            throw SampleOutsideFamily(std::to_string(m) + " not in slot " + std::to_string(q));
        if (m > cert.safe_horizon)
            throw SampleOutsideFamily(std::to_string(m) + " beyond the safe horizon");

        std::uint64_t Nq = cert.schedule[q];
        SparseVector shifted = apply_shift(space, y, w, m);
        std::int64_t win_lo = bilateral ? -absR : 0;
        std::int64_t win_hi = static_cast<std::int64_t>(Nq) + absR;
        SparseVector direct = subtract(shifted, truncate(y, win_lo, win_hi));

        std::vector<SparseVector::Entry> closed_entries;
        if (bilateral) closed_entries.emplace_back(R - static_cast<std::int64_t>(m), 1.0);
        for (std::size_t p = 0; p < cert.used_families.size(); ++p) {
            std::uint64_t Np = cert.schedule[p];
            const auto& fam = std::get<IntegerSet::Finite>(cert.used_families[p].data());
            for (auto n : fam.elems) {
                if (n + Np + static_cast<std::uint64_t>(absR) > cert.support_bound) continue;
                if (bilateral ? n == m : n <= m) continue;
                for (std::size_t j = 0; j <= p; ++j) {
                    std::int64_t idx = static_cast<std::int64_t>(n) -
                                       static_cast<std::int64_t>(m) +
                                       static_cast<std::int64_t>(cert.schedule[j]) + R;
                    if (!bilateral && idx < 0) continue;
                    closed_entries.emplace_back(idx, 1.0);
                }
            }
        }
        SparseVector closed = SparseVector::from_entries(space.domain(), std::move(closed_entries));

        double gap = 0.0;
        SparseVector diff = subtract(direct, closed);
        for (const auto& [k, c] : diff.entries()) {
            (void)k;
            gap = std::max(gap, std::abs(c));
        }
        if (gap > 1e-12)
            throw Error("residual recomputation disagreed by " + std::to_string(gap) +
                        " at sample (q=" + std::to_string(q) + ", m=" + std::to_string(m) + ")");

        ResidualSample s;
        s.q = q;
        s.m = m;
        s.residual = seminorm(space, direct, static_cast<int>(std::min<std::uint64_t>(
                                                 q, static_cast<std::uint64_t>(space.p_max()))));
        // unilateral proof bound eps/2^{N_q+1}; bilaterally the blocks left of
        // m survive, and the bound is eps/2^q
        s.budget = bilateral
                       ? std::ldexp(cert.epsilon, -static_cast<int>(q))
                       : std::ldexp(cert.epsilon,
                                    -static_cast<int>(std::min<std::uint64_t>(Nq + 1, 4000)));
        s.recomputation_gap = gap;
        s.within_budget = s.residual < s.budget;
        out.push_back(s);
        cert.residuals.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// seed analysis
// ---------------------------------------------------------------------------

/// Ladders and hitting families extracted from a concrete recurrent-looking
/// seed: delta below the anchor coordinate, shrinking radii eps_p, window
/// indices k_p wide enough that small (k_p)-seminorm forces small coordinates
/// up to the probe index q_p, and the scanned hitting families A_p.
struct SeedAnalysis {
    SparseVector seed;
    std::int64_t anchor = 0;
    double delta = 0.0;
    double epsilon = 0.0;
    std::vector<double> eps_ladder;
    std::vector<std::uint64_t> windows;  // k_p
    std::vector<std::uint64_t> probes;   // q_p
    std::vector<double> thresholds;
    std::vector<IntegerSet> families;
    std::vector<DensityRecord> densities;
    std::uint64_t horizon = 0;
};

inline SeedAnalysis derive_hitting_family(const SpaceSpec& space, const SparseVector& seed,
                                          const WeightSequence& w, std::int64_t R, double eps,
                                          std::size_t levels, std::uint64_t horizon,
                                          double threshold_divisor = 10.0) {
    if (seed.is_zero()) throw Error("seed must be nonzero");
    double anchor_coef = std::abs(seed.coef(R));
    if (anchor_coef == 0.0)
        throw Error("seed has no coordinate at the anchor; shift the seed first");
    std::int64_t absR = R < 0 ? -R : R;

    SeedAnalysis a;
    a.seed = seed;
    a.anchor = R;
    a.epsilon = eps;
    a.horizon = horizon;
    a.delta = (1.0 - 1.0 / 16.0) * anchor_coef;

    for (std::size_t p = 0; p < levels; ++p) {
        // probe: a coordinate of magnitude > delta beyond p + |R|
        std::optional<std::uint64_t> probe;
        for (const auto& [k, c] : seed.entries()) {
            if (k > static_cast<std::int64_t>(p) + absR && std::abs(c) > a.delta) {
                probe = static_cast<std::uint64_t>(k);
                break;
            }
        }
        if (!probe) throw SeedNotRecurrentAtScale(p);
        a.probes.push_back(*probe);

        double eps_p = std::ldexp(eps, -static_cast<int>(p) - 2);
        // windows must grow strictly; enlarging one never weakens the
        // coordinate implication since the weights are non-decreasing in q
        std::uint64_t k_lo = p + 2;
        if (!a.windows.empty()) k_lo = std::max(k_lo, a.windows.back() + 1);
        std::uint64_t k_p = k_lo;
        bool window_found = false;
        for (std::uint64_t k = k_lo; k <= static_cast<std::uint64_t>(space.p_max()); ++k) {
            double worst = std::numeric_limits<double>::infinity();
            for (std::uint64_t j = 0; j <= *probe; ++j)
                worst = std::min(worst, space.weight(static_cast<int>(k),
                                                     static_cast<std::int64_t>(j)));
            if (worst >= 4.0 * eps_p / a.delta) {
                k_p = k;
                window_found = true;
                break;
            }
        }
        if (!window_found) {
            // no window does it at this radius: shrink the radius instead
            k_p = std::min<std::uint64_t>(k_lo, static_cast<std::uint64_t>(space.p_max()));
            double worst = std::numeric_limits<double>::infinity();
            for (std::uint64_t j = 0; j <= *probe; ++j)
                worst = std::min(worst, space.weight(static_cast<int>(k_p),
                                                     static_cast<std::int64_t>(j)));
            eps_p = std::min(eps_p, (15.0 / 16.0) * (a.delta / 4.0) * worst);
        }
        if (!a.eps_ladder.empty()) eps_p = std::min(eps_p, 0.9 * a.eps_ladder.back());
        a.eps_ladder.push_back(eps_p);
        a.windows.push_back(k_p);

        double threshold = eps_p * a.delta / threshold_divisor;
        a.thresholds.push_back(threshold);

        int norm_index = static_cast<int>(
            std::min<std::uint64_t>(k_p + p, static_cast<std::uint64_t>(space.p_max())));
        std::vector<std::uint64_t> hits;
        detail::scan_orbit_distances(space, seed, w, seed, horizon, MetricSeminorm{norm_index},
                                     [&](std::uint64_t n, double d) {
                                         if (d < threshold) hits.push_back(n);
                                         return true;
                                     });
        if (hits.empty()) throw SeedNotRecurrentAtScale(p);
        auto fam = IntegerSet::finite(std::move(hits));
        auto dens = lower_density(fam, horizon);
        if (!(dens.ratio_at_horizon > 0.0)) throw SeedNotRecurrentAtScale(p);
        a.families.push_back(std::move(fam));
        a.densities.push_back(dens);
    }
    return a;
}

/// Builder input assembled from a seed analysis whose hitting families have
/// already been thinned into a separated family (the analysis supplies the
/// anchor, the radius, and the window parameters used as gap requirements).
inline FrBuildInput fr_input_from_analysis(const SeedAnalysis& analysis,
                                           std::vector<IntegerSet> separated_families,
                                           std::uint64_t support_bound) {
    if (separated_families.size() > analysis.windows.size())
        throw ConfigError("more separated families than analysis levels");
    FrBuildInput in;
    in.gaps.assign(analysis.windows.begin(),
                   analysis.windows.begin() +
                       static_cast<std::ptrdiff_t>(separated_families.size()));
    in.families = std::move(separated_families);
    in.anchor = analysis.anchor;
    in.support_bound = support_bound;
    in.epsilon = analysis.epsilon;
    return in;
}

// ---------------------------------------------------------------------------
// dense targets
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> dyadic_grid(std::uint32_t level) {
    // 0, +1/2^l, -1/2^l, +2/2^l, -2/2^l, ... staying strictly inside (-1, 1)
    std::vector<double> grid{0.0};
    double step = std::ldexp(1.0, -static_cast<int>(level));
    for (std::uint64_t i = 1; i < (std::uint64_t{1} << level); ++i) {
        grid.push_back(static_cast<double>(i) * step);
        grid.push_back(-static_cast<double>(i) * step);
    }
    return grid;
}

inline std::vector<std::uint64_t> schedule_prefix(const IntegerSet& A, std::size_t count) {
    std::vector<std::uint64_t> prefix;
    for (std::size_t j = 0; j < count; ++j) {
        auto v = A.element(j);
        if (!v) throw ScheduleExhausted(j);
        prefix.push_back(*v);
    }
    if (!prefix.empty() && prefix[0] != 0) throw ScheduleMismatch("the support set must contain 0");
    return prefix;
}

}  // namespace detail

/// All vectors supported on the schedule prefix {N_0..N_p} with coordinates on
/// the level-l dyadic grid, in a fixed order: the grid runs 0, +1/2^l, -1/2^l,
/// +2/2^l, ... and tuples are lexicographic with the N_0 coordinate slowest.
inline std::vector<SparseVector> dense_targets_at(const IntegerSet& A, std::size_t p,
                                                  std::uint32_t level) {
    auto prefix = detail::schedule_prefix(A, p + 1);
    auto grid = detail::dyadic_grid(level);
    double count = std::pow(static_cast<double>(grid.size()), static_cast<double>(p + 1));
    if (count > 2e6) throw ConfigError("dense target enumeration too large");
    std::vector<SparseVector> out;
    std::vector<std::size_t> digits(p + 1, 0);
    while (true) {
        std::vector<SparseVector::Entry> entries;
        for (std::size_t j = 0; j <= p; ++j)
            if (grid[digits[j]] != 0.0)
                entries.emplace_back(static_cast<std::int64_t>(prefix[j]), grid[digits[j]]);
        out.push_back(SparseVector::from_entries(Domain::unilateral, std::move(entries)));
        std::size_t j = p + 1;
        while (j > 0) {
            --j;
            if (++digits[j] < grid.size()) break;
            digits[j] = 0;
            if (j == 0) return out;
        }
    }
}

/// Interleaved enumeration over (p, level) stages so that every finitely
/// supported vector with dyadic coordinates in (-1, 1) eventually appears.
inline std::vector<SparseVector> dense_target_stream(const IntegerSet& A, std::size_t count) {
    std::vector<SparseVector> out;
    for (std::uint32_t stage = 1; out.size() < count && stage < 24; ++stage) {
        for (std::uint32_t level = 1; level <= stage && out.size() < count; ++level) {
            std::size_t p = stage - level;
            for (auto& v : dense_targets_at(A, p, level)) {
                out.push_back(std::move(v));
                if (out.size() == count) break;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// frequently-hypercyclic-for-B1(A) vector
// ---------------------------------------------------------------------------

struct FhBuildInput {
    IntegerSet A;                      // support set, 0 in A; schedule = its enumeration
    std::vector<IntegerSet> families;  // A_p, subsets of A, separated with gaps > p + q
    std::vector<SparseVector> targets; // y^p supported on {N_0..N_p}, coordinates in (-1, 1)
    std::uint64_t bound = 1000;
    double ball_bound = 1.0;
};

struct FhBuildMeta {
    std::vector<std::uint64_t> schedule_prefix;
    std::vector<PruneRecord> pruning;
    std::uint64_t pasted_points = 0;
};

/// y = sum_p sum_{n in A_p} sum_{j<=p} [y^p]_{N_j} e_{n + N_j}; overlapping
/// contributions add, the basis being unconditional is what keeps the sums
/// controlled.
inline std::pair<SparseVector, FhBuildMeta> build_fh_b1_vector(const SpaceSpec& space,
                                                               const FhBuildInput& in) {
    if (space.domain() != Domain::unilateral)
        throw DomainMismatch("the B1(A) builder is unilateral");
    if (in.families.size() != in.targets.size())
        throw ConfigError("one target per family level");
    std::size_t P = in.families.size();
    FhBuildMeta meta;
    meta.schedule_prefix = detail::schedule_prefix(in.A, P == 0 ? 1 : P);

    std::vector<std::vector<std::uint64_t>> elems(P);
    for (std::size_t p = 0; p < P; ++p) {
        elems[p] = in.families[p].elements_up_to(in.bound);
        for (auto n : elems[p])
            if (!in.A.contains(n))
                throw ScheduleMismatch("family " + std::to_string(p) +
                                       " leaves the support set at " + std::to_string(n));
        const auto& t = in.targets[p];
        for (const auto& [k, c] : t.entries()) {
            bool on_prefix = false;
            for (std::size_t j = 0; j <= p; ++j)
                if (static_cast<std::int64_t>(meta.schedule_prefix[j]) == k) on_prefix = true;
            if (!on_prefix || !(std::abs(c) < in.ball_bound))
                throw TargetOutsideFamily("level " + std::to_string(p));
        }
    }
    {
        std::vector<std::uint64_t> pq_gaps(P);
        for (std::size_t p = 0; p < P; ++p) pq_gaps[p] = p;
        auto scan = detail::scan_gaps(elems, pq_gaps);
        if (!scan.disjoint || !scan.gaps_ok)
            throw SeparationViolation("families must be disjoint with |n - m| > p + q");
    }

    std::map<std::int64_t, double> acc;
    for (std::size_t p = 0; p < P; ++p) {
        std::uint64_t Np = meta.schedule_prefix[p];
        double budget = std::ldexp(1.0 / static_cast<double>(p + 1), -static_cast<int>(p) - 1);
        std::vector<std::uint64_t> kept;
        std::uint64_t dropped = 0;
        for (auto n : elems[p]) {
            if (n + Np <= in.bound)
                kept.push_back(n);
            else
                ++dropped;
        }
        auto norm_at_top = [&]() {
            std::vector<std::pair<std::int64_t, double>> entries;
            for (auto n : kept)
                entries.emplace_back(static_cast<std::int64_t>(n + Np), 1.0);
            return detail::fnorm_hi_of(space, entries);
        };
        double worst = norm_at_top();
        while (worst > budget && !kept.empty()) {
            kept.erase(kept.begin());
            ++dropped;
            worst = norm_at_top();
        }
        if (kept.empty() && !elems[p].empty())
            throw BudgetViolation(p, "family emptied while pruning toward " + std::to_string(budget));
        meta.pruning.push_back({p, dropped, kept.empty() ? 0 : kept.front(), worst, budget});

        for (auto n : kept) {
            for (std::size_t j = 0; j <= p; ++j) {
                double c = in.targets[p].coef(static_cast<std::int64_t>(meta.schedule_prefix[j]));
                if (c == 0.0) continue;
                acc[static_cast<std::int64_t>(n + meta.schedule_prefix[j])] += c;
                ++meta.pasted_points;
            }
        }
    }
    std::vector<SparseVector::Entry> entries(acc.begin(), acc.end());
    return {SparseVector::from_entries(Domain::unilateral, std::move(entries)), std::move(meta)};
}

// ---------------------------------------------------------------------------
// cyclic approximation witness
// ---------------------------------------------------------------------------

struct CyclicWitness {
    std::vector<std::uint64_t> shifts;       // n_l
    std::vector<std::uint64_t> orbit_times;  // k_l
    std::vector<double> component_residuals;
    std::vector<std::int64_t> assignment;  // window position -> shift index
    double scale = 0.0;                    // M
    double final_residual = 0.0;
};

/// Searches a finite witness for the cyclic-approximation step: shifts n_l
/// with the support of y inside the union of the (A - n_l), a split
/// y = sum y^l along the cover assignment, and orbit times k_l with
/// ||B^{k_l}(M B^{n_l} x) - y^l|| < eps / r. Smallest shifts first, then
/// smallest orbit times; ties break to the smallest shift index.
inline CyclicWitness cyclic_approx_witness(const SpaceSpec& space, const SparseVector& x,
                                           const WeightSequence& w, const IntegerSet& A,
                                           const SparseVector& y, double eps,
                                           std::uint64_t shift_budget,
                                           std::uint64_t orbit_budget) {
    CyclicWitness wit;
    if (y.is_zero()) return wit;
    std::uint64_t N = static_cast<std::uint64_t>(y.max_index());

    std::vector<std::uint64_t> positions;
    for (const auto& [k, c] : y.entries()) {
        (void)c;
        positions.push_back(static_cast<std::uint64_t>(k));
    }
    std::vector<bool> covered(positions.size(), false);
    std::size_t left = positions.size();
    for (std::uint64_t n = 0; n <= shift_budget && left > 0; ++n) {
        bool useful = false;
        for (std::size_t i = 0; i < positions.size(); ++i)
            if (!covered[i] && A.contains(positions[i] + n)) {
                covered[i] = true;
                --left;
                useful = true;
            }
        if (useful) wit.shifts.push_back(n);
    }
    if (left > 0) throw CoverNotFound("shift budget exhausted with " + std::to_string(left) +
                                      " support positions uncovered");
    // assignment over the window, smallest shift index first
    wit.assignment.assign(N + 1, -1);
    for (std::uint64_t j = 0; j <= N; ++j)
        for (std::size_t l = 0; l < wit.shifts.size(); ++l)
            if (A.contains(j + wit.shifts[l])) {
                wit.assignment[j] = static_cast<std::int64_t>(l);
                break;
            }

    wit.scale = y.max_abs_coef();
    double r = static_cast<double>(wit.shifts.size());
    SparseVector total(space.domain());
    for (std::size_t l = 0; l < wit.shifts.size(); ++l) {
        std::vector<SparseVector::Entry> part;
        for (const auto& [k, c] : y.entries())
            if (wit.assignment[static_cast<std::size_t>(k)] == static_cast<std::int64_t>(l))
                part.emplace_back(k, c);
        SparseVector target = SparseVector::from_entries(y.domain(), std::move(part));
        SparseVector base = scale(apply_shift(space, x, w, wit.shifts[l]), wit.scale);
        auto k_l = first_hit(space, base, w, target, MetricFNorm{}, eps / r, orbit_budget);
        if (!k_l) throw ApproximationNotFound(l, "no orbit time within the budget");
        wit.orbit_times.push_back(*k_l);
        SparseVector reached = apply_shift(space, base, w, *k_l);
        wit.component_residuals.push_back(f_dist_hi(space, reached, target));
        total = add(total, reached);
    }
    wit.final_residual = f_dist_hi(space, total, y);
    return wit;
}

/// P(B_w) x for P = sum c_j t^j, computed exactly on sparse supports.
inline SparseVector polynomial_orbit_sample(const SpaceSpec& space, const SparseVector& x,
                                            const WeightSequence& w,
                                            const std::vector<double>& coeffs) {
    SparseVector acc(space.domain());
    SparseVector cur = x;
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
        if (j > 0) cur = apply_shift(space, cur, w, 1);
        if (coeffs[j] != 0.0) acc = axpy(coeffs[j], cur, acc);
    }
    return acc;
}

}  // namespace shiftlab
