#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "shiftlab/integer_set.hpp"

namespace shiftlab {

struct SeparateRequest {
    IntegerSet set;
    Rational floor;  // lower-density floor the input is believed to satisfy
};

struct SeparateOptions {
    std::uint64_t horizon = 10000;
    std::optional<std::uint64_t> burn_in;
    Rational floor_fraction = Rational(1, 2);  // output floors as a fraction of the target rate
};

/// Pairwise-separated subsets with an evidence certificate. The gap property
/// |n - m| > k_p + k_q is required for every pair of distinct chosen elements,
/// including pairs drawn from the same set.
struct SeparatedFamily {
    std::vector<IntegerSet> sets;
    std::vector<std::uint64_t> gaps;

    struct Certificate {
        std::string strategy;  // "passthrough" | "carved" | "greedy"
        bool pairwise_disjoint = false;
        // min observed |n - m| over distinct elements of (B_p, B_q) on [0, horizon]
        std::vector<std::vector<std::uint64_t>> min_cross_gap;
        std::vector<Rational> declared_floor;
        std::vector<DensityRecord> density;
        std::uint64_t horizon = 0;
    } certificate;
};

namespace detail {

constexpr std::uint64_t kNoGap = std::numeric_limits<std::uint64_t>::max();

struct GapScan {
    bool disjoint = true;
    bool gaps_ok = true;
    std::vector<std::vector<std::uint64_t>> min_gap;
};

inline GapScan scan_gaps(const std::vector<std::vector<std::uint64_t>>& elems,
                         const std::vector<std::uint64_t>& gaps) {
    std::size_t P = elems.size();
    GapScan out;
    out.min_gap.assign(P, std::vector<std::uint64_t>(P, kNoGap));
    for (std::size_t p = 0; p < P; ++p) {
        for (std::size_t q = p; q < P; ++q) {
            std::uint64_t best = kNoGap;
            if (p == q) {
                for (std::size_t i = 1; i < elems[p].size(); ++i)
                    best = std::min(best, elems[p][i] - elems[p][i - 1]);
            } else {
                std::size_t i = 0, j = 0;
                while (i < elems[p].size() && j < elems[q].size()) {
                    std::uint64_t a = elems[p][i], b = elems[q][j];
                    if (a == b) {
                        out.disjoint = false;
                        best = 0;
                        ++i;
                    } else if (a < b) {
                        best = std::min(best, b - a);
                        ++i;
                    } else {
                        best = std::min(best, a - b);
                        ++j;
                    }
                }
            }
            out.min_gap[p][q] = out.min_gap[q][p] = best;
            if (best != kNoGap && best <= gaps[p] + gaps[q]) out.gaps_ok = false;
        }
    }
    return out;
}

inline std::uint64_t align_to_class(const IntegerSet::Periodic& p, std::uint64_t x) {
    std::uint64_t r = x % p.period;
    std::uint64_t best = kNoGap;
    for (auto res : p.residues) {
        std::uint64_t delta = res >= r ? res - r : res + p.period - r;
        best = std::min(best, delta);
    }
    return x + best;
}

}  // namespace detail

/// Executable separation: extract B_p subseteq A_p, pairwise disjoint, with
/// |n - m| > k_p + k_q between distinct chosen elements. Structured inputs get
/// an exact construction; generator-backed inputs get a checked greedy one.
inline SeparatedFamily separate(const std::vector<SeparateRequest>& requests,
                                const std::vector<std::uint64_t>& gaps,
                                const SeparateOptions& opts = {}) {
    if (requests.empty()) throw ConfigError("separate needs at least one request");
    if (requests.size() != gaps.size()) throw ConfigError("one gap parameter per request");
    std::size_t P = requests.size();
    std::uint64_t horizon = opts.horizon;
    std::uint64_t burn_in = opts.burn_in.value_or(default_burn_in(horizon));

    for (std::size_t p = 0; p < P; ++p) {
        if (!(Rational(0, 1) < requests[p].floor))
            throw ConfigError("density floors must be positive");
        if (auto exact = requests[p].set.exact_lower_density()) {
            if (*exact < requests[p].floor)
                throw DensityCollapse(p, "exact lower density " + exact->str() +
                                             " is below the declared floor " +
                                             requests[p].floor.str());
        }
    }

    auto finish = [&](std::vector<IntegerSet> sets, std::vector<Rational> declared,
                      const std::string& strategy) {
        std::vector<std::vector<std::uint64_t>> elems;
        elems.reserve(P);
        for (const auto& s : sets) elems.push_back(s.elements_up_to(horizon));
        auto scan = detail::scan_gaps(elems, gaps);
        if (!scan.disjoint || !scan.gaps_ok)
            throw SeparationViolation("separated family failed its own gap scan (" + strategy +
                                      ")");
        SeparatedFamily fam;
        fam.sets = std::move(sets);
        fam.gaps = gaps;
        fam.certificate.strategy = strategy;
        fam.certificate.pairwise_disjoint = scan.disjoint;
        fam.certificate.min_cross_gap = std::move(scan.min_gap);
        fam.certificate.declared_floor = std::move(declared);
        fam.certificate.horizon = horizon;
        for (std::size_t p = 0; p < P; ++p) {
            auto rec = lower_density(fam.sets[p], horizon, burn_in);
            if (rec.estimate < fam.certificate.declared_floor[p].value())
                throw DensityCollapse(p, "estimate " + std::to_string(rec.estimate) +
                                             " fell below the declared floor " +
                                             fam.certificate.declared_floor[p].str());
            fam.certificate.density.push_back(rec);
        }
        return fam;
    };

    // Phase 0: the inputs may already be separated; then they pass through
    // unchanged and the certificate is just the scan.
    {
        std::vector<std::vector<std::uint64_t>> elems;
        for (const auto& r : requests) elems.push_back(r.set.elements_up_to(horizon));
        auto scan = detail::scan_gaps(elems, gaps);
        if (scan.disjoint && scan.gaps_ok) {
            std::vector<IntegerSet> sets;
            std::vector<Rational> declared;
            for (const auto& r : requests) {
                sets.push_back(r.set);
                declared.push_back(opts.floor_fraction * r.floor);
            }
            return finish(std::move(sets), std::move(declared), "passthrough");
        }
    }

    std::uint64_t max_gap = *std::max_element(gaps.begin(), gaps.end());
    std::uint64_t quantum = 1 + 2 * max_gap;

    bool all_periodic = std::all_of(requests.begin(), requests.end(), [](const SeparateRequest& r) {
        return r.set.is_periodic_kind();
    });

    if (all_periodic) {
        // Phase 1, periodic carving: spaced residue picks on a common period.
        std::uint64_t common = 1;
        bool lcm_ok = true;
        for (const auto& r : requests) {
            const auto& p = std::get<IntegerSet::Periodic>(r.set.data());
            if (p.residues.empty()) { lcm_ok = false; break; }
            common = std::lcm(common, p.period);
            if (common > 1'000'000) { lcm_ok = false; break; }
        }
        if (lcm_ok) {
            Rational min_floor = requests[0].floor;
            for (const auto& r : requests)
                if (r.floor < min_floor) min_floor = r.floor;
            std::vector<std::uint64_t> quota(P);
            std::uint64_t total = 0;
            for (std::size_t p = 0; p < P; ++p) {
                double ratio = requests[p].floor.value() / min_floor.value();
                quota[p] = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(ratio)));
                total += quota[p];
            }
            while (total > 64) {  // keep the carved period modest
                for (std::size_t p = 0; p < P && total > 64; ++p)
                    if (quota[p] > 1) { --quota[p]; --total; }
            }

            // largest-remaining-quota-first pick order, ties to the smaller index
            std::vector<std::uint64_t> remaining = quota;
            std::vector<std::size_t> order;
            for (std::uint64_t i = 0; i < total; ++i) {
                std::size_t best = P;
                for (std::size_t p = 0; p < P; ++p)
                    if (remaining[p] > 0 && (best == P || remaining[p] > remaining[best])) best = p;
                order.push_back(best);
                --remaining[best];
            }

            std::vector<std::vector<std::uint64_t>> picks(P);
            std::uint64_t pos = 0;
            for (std::size_t i = 0; i < order.size(); ++i) {
                const auto& pp = std::get<IntegerSet::Periodic>(requests[order[i]].set.data());
                std::uint64_t base = i == 0 ? 0 : pos + quantum;
                pos = detail::align_to_class(pp, base);
                picks[order[i]].push_back(pos);
            }
            std::uint64_t L = common * ((pos + quantum + common - 1) / common);

            std::vector<IntegerSet> sets;
            std::vector<Rational> declared;
            for (std::size_t p = 0; p < P; ++p) {
                const auto& pp = std::get<IntegerSet::Periodic>(requests[p].set.data());
                std::vector<std::uint64_t> residues;
                for (auto v : picks[p]) residues.push_back(v % L);
                std::vector<std::uint64_t> deleted;
                for (auto d : pp.deleted)
                    for (auto v : picks[p])
                        if (d % L == v % L) deleted.push_back(d);
                sets.push_back(IntegerSet::periodic(L, std::move(residues), {}, std::move(deleted)));
                declared.push_back(opts.floor_fraction *
                                   Rational(static_cast<std::int64_t>(quota[p]),
                                            static_cast<std::int64_t>(L)));
            }
            return finish(std::move(sets), std::move(declared), "carved");
        }
    }

    // Phase 2, scheduled greedy: visit sets along 0 | 0,1 | 0,1,2 | ... (capped
    // at P) and take the least admissible element each visit.
    {
        std::vector<std::vector<std::uint64_t>> picks(P);
        std::vector<std::uint64_t> cursor(P, 0);
        std::vector<bool> done(P, false);
        bool have_last = false;
        std::uint64_t last_value = 0;
        std::size_t last_set = 0;

        auto take = [&](std::size_t p) {
            if (done[p]) return;
            std::uint64_t need = 0;
            if (have_last) need = last_value + gaps[p] + gaps[last_set] + 1;
            while (true) {
                auto v = requests[p].set.element(cursor[p]);
                if (!v || *v > horizon) { done[p] = true; return; }
                if (*v >= need) {
                    picks[p].push_back(*v);
                    ++cursor[p];
                    have_last = true;
                    last_value = *v;
                    last_set = p;
                    return;
                }
                ++cursor[p];
            }
        };

        for (std::size_t round = 1; !std::all_of(done.begin(), done.end(), [](bool b) { return b; });
             ++round) {
            std::size_t width = std::min(round, P);
            for (std::size_t p = 0; p < width; ++p) take(p);
        }

        Rational sum_inverse(0, 1);
        for (const auto& r : requests)
            sum_inverse = sum_inverse + Rational(r.floor.den(), r.floor.num());
        std::int64_t denom = static_cast<std::int64_t>(P * quantum) +
                             (sum_inverse.num() + sum_inverse.den() - 1) / sum_inverse.den();

        std::vector<IntegerSet> sets;
        std::vector<Rational> declared;
        for (std::size_t p = 0; p < P; ++p) {
            if (picks[p].empty())
                throw GapInfeasible("set " + std::to_string(p) +
                                    " produced no picks on the horizon");
            sets.push_back(IntegerSet::finite(picks[p]));
            declared.push_back(opts.floor_fraction * Rational(1, denom));
        }
        return finish(std::move(sets), std::move(declared), "greedy");
    }
}

}  // namespace shiftlab
