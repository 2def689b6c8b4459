#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "shiftlab/construct.hpp"
#include "shiftlab/integer_set.hpp"
#include "shiftlab/space.hpp"
#include "shiftlab/weight_sequence.hpp"

namespace shiftlab {

enum class Verdict { pass, fail, inconclusive };

inline std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        default: return "inconclusive";
    }
}

struct CellRecord {
    std::uint64_t p = 0;
    std::uint64_t q = 0;
    std::uint64_t m = 0;
    std::int64_t j = -1;  // worst inner shift, when the condition has one
    double value = 0.0;
    double budget = 0.0;
    double tail_bound = 0.0;  // conservative bound on what the window cannot see
    Verdict verdict = Verdict::inconclusive;
};

struct SeriesRecord {
    std::uint64_t p = 0;
    // (cut, norm of the dyadic block ending at that cut), outermost first
    std::vector<std::pair<std::uint64_t, double>> blocks;
    double tail_bound = 0.0;
    double tol = 0.0;
    Verdict verdict = Verdict::inconclusive;
};

struct ConditionReport {
    std::string condition_id;
    std::vector<SeriesRecord> series;
    std::vector<CellRecord> cells;
    Verdict overall = Verdict::pass;
    bool sampled = false;
    double worst_margin = std::numeric_limits<double>::infinity();  // min budget - value over cells
    std::string notes;
};

struct CheckOptions {
    std::uint64_t horizon = 10000;
    std::uint64_t q_max = 3;
    std::size_t m_samples = 5;  // first s plus s seeded-random per q
    std::size_t exhaustive_cutoff = 32;
    std::uint64_t seed = 1;
    double series_tol = 1e-6;
};

enum class ShiftVariant { unilateral, bilateral };

namespace detail {

inline Verdict combine(Verdict a, Verdict b) {
    if (a == Verdict::fail || b == Verdict::fail) return Verdict::fail;
    if (a == Verdict::inconclusive || b == Verdict::inconclusive) return Verdict::inconclusive;
    return Verdict::pass;
}

inline std::vector<std::uint64_t> sample_m(const IntegerSet& A, std::uint64_t up_to,
                                           const CheckOptions& opts, std::mt19937_64& rng,
                                           bool& sampled) {
    auto elems = A.elements_up_to(up_to);
    if (elems.size() <= opts.exhaustive_cutoff) return elems;
    sampled = true;
    std::vector<std::uint64_t> out(elems.begin(),
                                   elems.begin() + static_cast<std::ptrdiff_t>(
                                                       std::min(opts.m_samples, elems.size())));
    std::uniform_int_distribution<std::size_t> pick(opts.m_samples, elems.size() - 1);
    for (std::size_t i = 0; i < opts.m_samples; ++i) out.push_back(elems[pick(rng)]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline double tail_norm_bound(const SpaceSpec& space, int q, std::int64_t from, double multiplier) {
    std::optional<double> lg =
        space.is_sup() ? space.tail_sup_log(q, from) : space.tail_power_log(q, from);
    if (!lg) return std::numeric_limits<double>::infinity();
    return multiplier * std::exp(*lg);
}

inline SeriesRecord series_convergence(const SpaceSpec& space, const IntegerSet& family,
                                       std::uint64_t p, std::uint64_t offset, int q,
                                       const CheckOptions& opts) {
    SeriesRecord rec;
    rec.p = p;
    rec.tol = opts.series_tol;
    std::vector<std::uint64_t> cuts;
    for (std::uint64_t c = opts.horizon; c >= 16 && cuts.size() < 6; c /= 2) cuts.push_back(c);
    for (auto cut : cuts) {
        std::uint64_t lo = cut / 2;
        std::vector<std::pair<std::int64_t, double>> entries;
        for (auto n : family.elements_up_to(cut))
            if (n > lo)
                entries.emplace_back(static_cast<std::int64_t>(n + offset), 1.0);
        rec.blocks.emplace_back(cut, norm_of_entries(space, entries, q));
    }
    rec.tail_bound =
        tail_norm_bound(space, q, static_cast<std::int64_t>(opts.horizon + offset), 1.0);
    double outer = rec.blocks.empty() ? 0.0 : rec.blocks.front().second;
    if (outer >= rec.tol)
        rec.verdict = Verdict::fail;
    else if (rec.tail_bound <= rec.tol)
        rec.verdict = Verdict::pass;
    else
        rec.verdict = Verdict::inconclusive;
    return rec;
}

inline Verdict cell_verdict(double value, double budget, double tail) {
    if (value >= budget) return Verdict::fail;
    if (tail <= budget / 10.0 && value + tail < budget) return Verdict::pass;
    return Verdict::inconclusive;
}

}  // namespace detail

/// First characterization checker: condition i) series convergence evidence,
/// condition ii) the shifted triple sums against the eps_q budgets, with
/// window truncation accounted for by a conservative tail bound. Cells that a
/// finite scan cannot decide come back inconclusive, never pass.
inline ConditionReport check_fr_characterization(const SpaceSpec& space, const IntegerSet& A,
                                                 const std::vector<IntegerSet>& families,
                                                 const std::vector<double>& eps,
                                                 ShiftVariant variant, const CheckOptions& opts) {
    ConditionReport rep;
    rep.condition_id = variant == ShiftVariant::unilateral ? "fr_characterization"
                                                           : "fr_characterization_bilateral";
    if (auto* per = std::get_if<IntegerSet::Periodic>(&A.data()))
        if (per->residues.size() == per->period && per->deleted.empty())
            rep.notes = "A = N0: the stronger unrestricted-support form of the condition";
    std::size_t P = families.size();
    if (P == 0) return rep;  // vacuous
    auto prefix = detail::schedule_prefix(A, P);
    for (std::size_t p = 0; p < P; ++p)
        for (auto n : families[p].elements_up_to(opts.horizon))
            if (!A.contains(n))
                throw ScheduleMismatch("family " + std::to_string(p) + " leaves A at " +
                                       std::to_string(n));
    std::uint64_t q_hi = std::min<std::uint64_t>(opts.q_max, P - 1);
    for (std::uint64_t q = 0; q <= q_hi; ++q)
        if (q >= eps.size()) throw ConfigError("no budget eps_q for q=" + std::to_string(q));

    int series_q = std::min<int>(static_cast<int>(opts.q_max), space.p_max());
    for (std::size_t p = 0; p < P; ++p)
        rep.series.push_back(
            detail::series_convergence(space, families[p], p, p, series_q, opts));

    std::mt19937_64 rng(opts.seed);
    double mult = static_cast<double>(P * (P + 1)) / 2.0;
    std::vector<std::vector<std::uint64_t>> elems(P);
    for (std::size_t p = 0; p < P; ++p) elems[p] = families[p].elements_up_to(opts.horizon);

    for (std::uint64_t q = 0; q <= q_hi; ++q) {
        auto ms = detail::sample_m(families[q], opts.horizon / 2, opts, rng, rep.sampled);
        for (auto m : ms) {
            std::map<std::int64_t, double> acc;
            for (std::size_t p = 0; p < P; ++p) {
                for (auto n : elems[p]) {
                    bool keep = variant == ShiftVariant::unilateral ? n > m : n != m;
                    if (!keep) continue;
                    for (std::size_t j = 0; j <= p; ++j) {
                        std::int64_t idx = static_cast<std::int64_t>(n) -
                                           static_cast<std::int64_t>(m) +
                                           static_cast<std::int64_t>(prefix[j]);
                        if (space.domain() == Domain::unilateral && idx < 0) continue;
                        acc[idx] += 1.0;
                    }
                }
            }
            std::vector<std::pair<std::int64_t, double>> entries(acc.begin(), acc.end());
            CellRecord cell;
            cell.p = q;
            cell.q = q;
            cell.m = m;
            cell.value = detail::norm_of_entries(space, entries, static_cast<int>(
                                                     std::min<std::uint64_t>(q, space.p_max())));
            cell.budget = eps[q];
            cell.tail_bound = detail::tail_norm_bound(
                space, static_cast<int>(std::min<std::uint64_t>(q, space.p_max())),
                static_cast<std::int64_t>(opts.horizon - m), mult);
            cell.verdict = detail::cell_verdict(cell.value, cell.budget, cell.tail_bound);
            rep.worst_margin = std::min(rep.worst_margin, cell.budget - cell.value);
            rep.cells.push_back(cell);
        }
    }
    for (const auto& s : rep.series) rep.overall = detail::combine(rep.overall, s.verdict);
    for (const auto& c : rep.cells) rep.overall = detail::combine(rep.overall, c.verdict);
    return rep;
}

/// The frequent-hypercyclicity characterization: single-shift sums against
/// min(eps_p, eps_q) budgets plus the series membership condition.
inline ConditionReport check_fh_characterization(const SpaceSpec& space,
                                                 const std::vector<IntegerSet>& families,
                                                 const std::vector<double>& eps,
                                                 const CheckOptions& opts) {
    ConditionReport rep;
    rep.condition_id = "fh_characterization";
    std::size_t P = families.size();
    if (P == 0) return rep;
    std::uint64_t q_hi = std::min<std::uint64_t>(opts.q_max, P - 1);
    for (std::uint64_t q = 0; q <= q_hi; ++q)
        if (q >= eps.size()) throw ConfigError("no budget eps_q for q=" + std::to_string(q));

    int series_q = std::min<int>(static_cast<int>(opts.q_max), space.p_max());
    for (std::size_t p = 0; p < P; ++p)
        rep.series.push_back(
            detail::series_convergence(space, families[p], p, p, series_q, opts));

    std::mt19937_64 rng(opts.seed);
    std::vector<std::vector<std::uint64_t>> elems(P);
    for (std::size_t p = 0; p < P; ++p) elems[p] = families[p].elements_up_to(opts.horizon);

    for (std::size_t p = 0; p < P; ++p) {
        for (std::uint64_t q = 0; q <= q_hi; ++q) {
            auto ms = detail::sample_m(families[q], opts.horizon / 2, opts, rng, rep.sampled);
            for (auto m : ms) {
                CellRecord cell;
                cell.p = p;
                cell.q = q;
                cell.m = m;
                cell.budget = std::min(eps[p], eps[q]);
                int nq = static_cast<int>(std::min<std::uint64_t>(q, space.p_max()));
                for (std::uint64_t j = 0; j <= p; ++j) {
                    std::vector<std::pair<std::int64_t, double>> entries;
                    for (auto n : elems[p]) {
                        if (n <= m) continue;
                        entries.emplace_back(
                            static_cast<std::int64_t>(n - m + j), 1.0);
                    }
                    double v = detail::norm_of_entries(space, entries, nq);
                    if (v >= cell.value) {
                        cell.value = v;
                        cell.j = static_cast<std::int64_t>(j);
                    }
                }
                cell.tail_bound = detail::tail_norm_bound(
                    space, nq, static_cast<std::int64_t>(opts.horizon - m), 1.0);
                cell.verdict = detail::cell_verdict(cell.value, cell.budget, cell.tail_bound);
                rep.worst_margin = std::min(rep.worst_margin, cell.budget - cell.value);
                rep.cells.push_back(cell);
            }
        }
    }
    for (const auto& s : rep.series) rep.overall = detail::combine(rep.overall, s.verdict);
    for (const auto& c : rep.cells) rep.overall = detail::combine(rep.overall, c.verdict);
    return rep;
}

enum class C0Orientation { as_printed, via_conjugation };

struct C0Report {
    ConditionReport as_printed;
    ConditionReport via_conjugation;
    C0Orientation verdict_bearing = C0Orientation::as_printed;
    Verdict overall = Verdict::pass;
};

namespace detail {

inline ConditionReport c0_one_orientation(const WeightSequence& w, const IntegerSet& A,
                                          const std::vector<IntegerSet>& families,
                                          const std::vector<double>& eps, bool conjugated,
                                          const CheckOptions& opts) {
    ConditionReport rep;
    rep.condition_id = conjugated ? "c0_weighted(via_conjugation)" : "c0_weighted(as_printed)";
    std::size_t P = families.size();
    if (P == 0) return rep;
    auto prefix = detail::schedule_prefix(A, P);
    std::uint64_t q_hi = std::min<std::uint64_t>(opts.q_max, P - 1);
    double sign = conjugated ? -1.0 : 1.0;  // log nu(k) = -log Pi(k)
    double log_tol = std::log(opts.series_tol);

    // condition (1): the product along each family heads to zero
    for (std::size_t p = 0; p < P; ++p) {
        SeriesRecord rec;
        rec.p = p;
        rec.tol = opts.series_tol;
        std::vector<double> vals;
        for (std::uint64_t cut : {opts.horizon / 4, opts.horizon / 2, opts.horizon}) {
            auto elems = families[p].elements_up_to(cut);
            if (elems.empty()) continue;
            std::uint64_t n = elems.back();
            double lv = sign * w.log_prefix_product(static_cast<std::int64_t>(n + p));
            rec.blocks.emplace_back(n, std::exp(lv));
            vals.push_back(lv);
        }
        if (vals.empty())
            rec.verdict = Verdict::pass;  // nothing to check
        else if (vals.back() < log_tol && vals.back() <= vals.front())
            rec.verdict = Verdict::pass;
        else if (vals.back() >= log_tol && vals.back() >= vals.front())
            rec.verdict = Verdict::fail;
        else
            rec.verdict = Verdict::inconclusive;
        rep.series.push_back(std::move(rec));
    }

    // condition (2): products at the shifted gaps stay under eps_q
    std::mt19937_64 rng(opts.seed);
    for (std::size_t p = 0; p < P; ++p) {
        auto elems = families[p].elements_up_to(opts.horizon);
        for (std::uint64_t q = 0; q <= q_hi; ++q) {
            if (q >= eps.size()) throw ConfigError("no budget eps_q for q=" + std::to_string(q));
            auto ms = detail::sample_m(families[q], opts.horizon / 2, opts, rng, rep.sampled);
            for (auto m : ms) {
                CellRecord cell;
                cell.p = p;
                cell.q = q;
                cell.m = m;
                cell.budget = eps[q];
                double worst = -std::numeric_limits<double>::infinity();
                for (auto n : elems) {
                    if (n <= m) continue;
                    for (std::size_t j = 0; j <= p; ++j) {
                        double lv = sign * w.log_prefix_product(static_cast<std::int64_t>(
                                               n - m + prefix[j]));
                        if (lv > worst) {
                            worst = lv;
                            cell.j = static_cast<std::int64_t>(j);
                        }
                    }
                }
                cell.value = std::exp(worst);
                // trend of the product beyond the window
                double far = sign * w.log_prefix_product(static_cast<std::int64_t>(opts.horizon));
                double mid =
                    sign * w.log_prefix_product(static_cast<std::int64_t>(opts.horizon / 2));
                cell.tail_bound = far <= mid ? 0.0 : std::numeric_limits<double>::infinity();
                if (cell.value > cell.budget)
                    cell.verdict = Verdict::fail;
                else if (cell.tail_bound == 0.0)
                    cell.verdict = Verdict::pass;
                else
                    cell.verdict = Verdict::inconclusive;
                rep.worst_margin = std::min(rep.worst_margin, cell.budget - cell.value);
                rep.cells.push_back(cell);
            }
        }
    }
    for (const auto& s : rep.series) rep.overall = detail::combine(rep.overall, s.verdict);
    for (const auto& c : rep.cells) rep.overall = detail::combine(rep.overall, c.verdict);
    return rep;
}

}  // namespace detail

/// c0-specialized checker. Both product orientations are always computed and
/// reported side by side (in log space); `orientation` only chooses which one
/// carries the overall verdict.
inline C0Report check_c0_weighted(const WeightSequence& w, const IntegerSet& A,
                                  const std::vector<IntegerSet>& families,
                                  const std::vector<double>& eps, C0Orientation orientation,
                                  const CheckOptions& opts) {
    C0Report rep;
    rep.as_printed = detail::c0_one_orientation(w, A, families, eps, false, opts);
    rep.via_conjugation = detail::c0_one_orientation(w, A, families, eps, true, opts);
    rep.verdict_bearing = orientation;
    rep.overall = orientation == C0Orientation::as_printed ? rep.as_printed.overall
                                                           : rep.via_conjugation.overall;
    return rep;
}

struct MinConditionReport {
    double op_norm_bound = 0.0;
    ConditionReport min_report;
    std::vector<std::size_t> subsample;  // family indices with ||B||^{N_p} eps_p < 2^{-t}
    std::vector<CellRecord> chain_cells;  // derived values vs ||B||^{N_p} min(eps_p, eps_q)
    ConditionReport derived_fh;
    Verdict overall = Verdict::pass;
};

/// Banach-flavoured min-condition checker: per-family pieces of the shifted
/// sum against min(eps_p, eps_q), then the derived single-shift condition on a
/// subsampled family, which yields a frequent-hypercyclicity style report.
inline MinConditionReport check_min_condition(const SpaceSpec& space, const IntegerSet& A,
                                              const std::vector<IntegerSet>& families,
                                              const std::vector<double>& eps,
                                              const CheckOptions& opts) {
    if (!space.q_uniform())
        throw ConfigError("the min condition is checked on single-norm spaces only");
    MinConditionReport rep;
    rep.min_report.condition_id = "min_condition";
    rep.derived_fh.condition_id = "fh_characterization(derived)";
    std::size_t P = families.size();

    // ||B|| = sup_k nu(k)/nu(k+1), with a divergence guard over the window
    double first_half = 0.0, second_half = 0.0;
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(opts.horizon); ++k) {
        double ratio = std::exp(space.log_weight(0, k) - space.log_weight(0, k + 1));
        if (k < static_cast<std::int64_t>(opts.horizon / 2))
            first_half = std::max(first_half, ratio);
        else
            second_half = std::max(second_half, ratio);
    }
    if (second_half > first_half * (1.0 + 1e-9))
        throw UnboundedOperator("nu(k)/nu(k+1) still growing at the horizon");
    rep.op_norm_bound = std::max(first_half, second_half);
    if (P == 0) return rep;

    auto prefix = detail::schedule_prefix(A, P);
    std::mt19937_64 rng(opts.seed);
    std::vector<std::vector<std::uint64_t>> elems(P);
    for (std::size_t p = 0; p < P; ++p) elems[p] = families[p].elements_up_to(opts.horizon);
    std::uint64_t q_hi = std::min<std::uint64_t>(opts.q_max, P - 1);

    for (std::size_t p = 0; p < P; ++p) {
        for (std::uint64_t q = 0; q <= q_hi; ++q) {
            if (q >= eps.size() || p >= eps.size()) throw ConfigError("missing eps budget");
            auto ms = detail::sample_m(families[q], opts.horizon / 2, opts, rng,
                                       rep.min_report.sampled);
            for (auto m : ms) {
                std::map<std::int64_t, double> acc;
                for (auto n : elems[p]) {
                    if (n <= m) continue;
                    for (std::size_t j = 0; j <= p; ++j)
                        acc[static_cast<std::int64_t>(n - m + prefix[j])] += 1.0;
                }
                std::vector<std::pair<std::int64_t, double>> entries(acc.begin(), acc.end());
                CellRecord cell;
                cell.p = p;
                cell.q = q;
                cell.m = m;
                cell.value = detail::norm_of_entries(space, entries, 0);
                cell.budget = std::min(eps[p], eps[q]);
                cell.tail_bound = detail::tail_norm_bound(
                    space, 0, static_cast<std::int64_t>(opts.horizon - m),
                    static_cast<double>(p + 1));
                cell.verdict = detail::cell_verdict(cell.value, cell.budget, cell.tail_bound);
                rep.min_report.worst_margin =
                    std::min(rep.min_report.worst_margin, cell.budget - cell.value);
                rep.min_report.cells.push_back(cell);
            }
        }
    }
    for (const auto& c : rep.min_report.cells)
        rep.min_report.overall = detail::combine(rep.min_report.overall, c.verdict);

    // subsample so that ||B||^{N_p} eps_p < 2^{-t}, as the proof's relabeling does
    double logB = std::log(rep.op_norm_bound);
    std::size_t next = 0;
    for (std::size_t t = 0; next < P; ++t) {
        std::size_t found = P;
        for (std::size_t j = next; j < P; ++j) {
            double lhs = static_cast<double>(prefix[j]) * logB + std::log(eps[j]);
            if (lhs < -static_cast<double>(t) * std::log(2.0)) {
                found = j;
                break;
            }
        }
        if (found == P) break;
        rep.subsample.push_back(found);
        next = found + 1;
    }

    std::vector<IntegerSet> sub_families;
    std::vector<double> sub_eps;
    for (std::size_t t = 0; t < rep.subsample.size(); ++t) {
        sub_families.push_back(families[rep.subsample[t]]);
        sub_eps.push_back(std::ldexp(1.0, -static_cast<int>(t)));
    }
    CheckOptions sub_opts = opts;
    sub_opts.q_max = sub_families.empty() ? 0 : sub_families.size() - 1;
    rep.derived_fh = check_fh_characterization(space, sub_families, sub_eps, sub_opts);
    rep.derived_fh.condition_id = "fh_characterization(derived)";

    // the chain inequality the derivation rests on, recorded cell by cell
    for (const auto& cell : rep.derived_fh.cells) {
        std::size_t orig_p = rep.subsample[cell.p];
        std::size_t orig_q = rep.subsample[cell.q];
        CellRecord chain = cell;
        chain.budget = std::exp(static_cast<double>(prefix[orig_p]) * logB) *
                       std::min(eps[orig_p], eps[orig_q]);
        chain.verdict = chain.value <= chain.budget ? Verdict::pass : Verdict::fail;
        rep.chain_cells.push_back(chain);
    }
    rep.overall = detail::combine(rep.min_report.overall, rep.derived_fh.overall);
    for (const auto& c : rep.chain_cells) rep.overall = detail::combine(rep.overall, c.verdict);
    return rep;
}

}  // namespace shiftlab
