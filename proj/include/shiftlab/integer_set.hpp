#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "shiftlab/errors.hpp"
#include "shiftlab/rational.hpp"

namespace shiftlab {

/// Subsets of the naturals. Carries one of three representations: an explicit
/// finite list, an eventually periodic set (residue classes with finitely many
/// inserted/deleted exceptions), or a named strictly increasing enumerator.
class IntegerSet {
  public:
    struct Finite {
        std::vector<std::uint64_t> elems;  // sorted, distinct
    };

    struct Periodic {
        std::uint64_t period = 1;
        std::vector<std::uint64_t> residues;  // sorted, in [0, period)
        std::vector<std::uint64_t> inserted;  // sorted, none in a residue class
        std::vector<std::uint64_t> deleted;   // sorted, all in a residue class
    };

    // index -> i-th element (strictly increasing); nullopt once exhausted
    using EnumeratorFn = std::function<std::optional<std::uint64_t>(std::uint64_t)>;

    struct Generator {
        std::string name;
        std::map<std::string, std::int64_t> params;
        EnumeratorFn fn;
        std::optional<Rational> floor;  // declared lower-density floor
    };

    using Data = std::variant<Finite, Periodic, Generator>;

    IntegerSet() : data_(Finite{}) {}

    static IntegerSet finite(std::vector<std::uint64_t> elems) {
        std::sort(elems.begin(), elems.end());
        elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
        return IntegerSet(Finite{std::move(elems)});
    }

    static IntegerSet empty() { return finite({}); }

    static IntegerSet periodic(std::uint64_t period, std::vector<std::uint64_t> residues,
                               std::vector<std::uint64_t> inserted = {},
                               std::vector<std::uint64_t> deleted = {}) {
        if (period == 0) throw ConfigError("periodic set needs period >= 1");
        std::sort(residues.begin(), residues.end());
        residues.erase(std::unique(residues.begin(), residues.end()), residues.end());
        for (auto r : residues)
            if (r >= period) throw ConfigError("residue outside [0, period)");
        Periodic p{period, std::move(residues), {}, {}};
        std::sort(inserted.begin(), inserted.end());
        std::sort(deleted.begin(), deleted.end());
        auto in_class = [&p](std::uint64_t n) {
            return std::binary_search(p.residues.begin(), p.residues.end(), n % p.period);
        };
        for (auto n : inserted)
            if (!in_class(n)) p.inserted.push_back(n);  // members already: drop silently
        for (auto n : deleted)
            if (in_class(n)) p.deleted.push_back(n);
        return IntegerSet(std::move(p));
    }

    static IntegerSet generator(std::string name, std::map<std::string, std::int64_t> params,
                                std::optional<Rational> floor = std::nullopt);

    const Data& data() const { return data_; }
    bool is_finite_kind() const { return std::holds_alternative<Finite>(data_); }
    bool is_periodic_kind() const { return std::holds_alternative<Periodic>(data_); }
    bool is_generator_kind() const { return std::holds_alternative<Generator>(data_); }

    bool contains(std::uint64_t n) const {
        if (auto* f = std::get_if<Finite>(&data_))
            return std::binary_search(f->elems.begin(), f->elems.end(), n);
        if (auto* p = std::get_if<Periodic>(&data_)) {
            if (std::binary_search(p->inserted.begin(), p->inserted.end(), n)) return true;
            if (std::binary_search(p->deleted.begin(), p->deleted.end(), n)) return false;
            return std::binary_search(p->residues.begin(), p->residues.end(), n % p->period);
        }
        const auto& g = std::get<Generator>(data_);
        for (std::uint64_t i = 0;; ++i) {
            auto v = g.fn(i);
            if (!v || *v > n) return false;
            if (*v == n) return true;
        }
    }

    /// i-th smallest element (0-based), nullopt when the set has fewer elements.
    std::optional<std::uint64_t> element(std::uint64_t index) const {
        if (auto* f = std::get_if<Finite>(&data_)) {
            if (index >= f->elems.size()) return std::nullopt;
            return f->elems[index];
        }
        if (auto* p = std::get_if<Periodic>(&data_)) {
            if (p->residues.empty()) {
                if (index >= p->inserted.size()) return std::nullopt;
                return p->inserted[index];
            }
            std::uint64_t irregular_end = 0;  // exclusive; aligned to a period boundary
            if (!p->inserted.empty()) irregular_end = std::max(irregular_end, p->inserted.back() + 1);
            if (!p->deleted.empty()) irregular_end = std::max(irregular_end, p->deleted.back() + 1);
            std::uint64_t block_start = ((irregular_end + p->period - 1) / p->period) * p->period;
            if (block_start > 0) {
                auto prefix = elements_up_to(block_start - 1);
                if (index < prefix.size()) return prefix[index];
                index -= prefix.size();
            }
            std::uint64_t m = index / p->residues.size();
            std::uint64_t r = p->residues[index % p->residues.size()];
            return block_start + m * p->period + r;
        }
        return std::get<Generator>(data_).fn(index);
    }

    /// Elements of the set in [0, n], sorted ascending.
    std::vector<std::uint64_t> elements_up_to(std::uint64_t n) const {
        std::vector<std::uint64_t> out;
        if (auto* f = std::get_if<Finite>(&data_)) {
            auto it = std::upper_bound(f->elems.begin(), f->elems.end(), n);
            out.assign(f->elems.begin(), it);
            return out;
        }
        if (auto* p = std::get_if<Periodic>(&data_)) {
            std::vector<std::uint64_t> base;
            for (std::uint64_t start = 0; start <= n; start += p->period) {
                for (auto r : p->residues) {
                    std::uint64_t v = start + r;
                    if (v > n) break;
                    if (!std::binary_search(p->deleted.begin(), p->deleted.end(), v))
                        base.push_back(v);
                }
                if (start > n - std::min(n, p->period)) break;  // avoid overflow on start += period
            }
            auto ins_end = std::upper_bound(p->inserted.begin(), p->inserted.end(), n);
            out.resize(base.size() + static_cast<std::size_t>(ins_end - p->inserted.begin()));
            std::merge(base.begin(), base.end(), p->inserted.begin(), ins_end, out.begin());
            return out;
        }
        const auto& g = std::get<Generator>(data_);
        for (std::uint64_t i = 0;; ++i) {
            auto v = g.fn(i);
            if (!v || *v > n) break;
            out.push_back(*v);
        }
        return out;
    }

    /// Smallest element >= x, if any can be found.
    std::optional<std::uint64_t> next_at_or_after(std::uint64_t x) const {
        if (auto* f = std::get_if<Finite>(&data_)) {
            auto it = std::lower_bound(f->elems.begin(), f->elems.end(), x);
            if (it == f->elems.end()) return std::nullopt;
            return *it;
        }
        if (auto* p = std::get_if<Periodic>(&data_)) {
            std::uint64_t scan_end = x + 2 * p->period;
            if (!p->deleted.empty()) scan_end = std::max(scan_end, p->deleted.back() + 2 * p->period);
            for (std::uint64_t v = x; v <= scan_end; ++v)
                if (contains(v)) return v;
            if (!p->residues.empty()) throw Error("periodic next_at_or_after scan failed");
            return std::nullopt;
        }
        const auto& g = std::get<Generator>(data_);
        for (std::uint64_t i = 0;; ++i) {
            auto v = g.fn(i);
            if (!v) return std::nullopt;
            if (*v >= x) return *v;
        }
    }

    std::optional<Rational> exact_lower_density() const {
        if (is_finite_kind()) return Rational(0, 1);
        if (auto* p = std::get_if<Periodic>(&data_))
            return Rational(static_cast<std::int64_t>(p->residues.size()),
                            static_cast<std::int64_t>(p->period));
        return std::nullopt;
    }

    std::optional<Rational> declared_floor() const {
        if (auto* g = std::get_if<Generator>(&data_)) return g->floor;
        return exact_lower_density();
    }

  private:
    explicit IntegerSet(Data d) : data_(std::move(d)) {}
    Data data_;
};

namespace detail {

inline IntegerSet::EnumeratorFn make_arithmetic(std::int64_t start, std::int64_t step) {
    if (step <= 0) throw ConfigError("arithmetic generator needs step >= 1");
    return [start, step](std::uint64_t i) -> std::optional<std::uint64_t> {
        return static_cast<std::uint64_t>(start + step * static_cast<std::int64_t>(i));
    };
}

// {n >= 1 : floor(log2 n) even} = [1,2) u [4,8) u [16,32) u ...
inline IntegerSet::EnumeratorFn make_log2_even() {
    return [](std::uint64_t i) -> std::optional<std::uint64_t> {
        std::uint64_t block_lo = 1, block_size = 1;
        while (i >= block_size) {
            i -= block_size;
            block_lo *= 4;
            block_size *= 4;
            if (block_lo > (std::uint64_t{1} << 62)) return std::nullopt;
        }
        return block_lo + i;
    };
}

}  // namespace detail

inline IntegerSet IntegerSet::generator(std::string name,
                                        std::map<std::string, std::int64_t> params,
                                        std::optional<Rational> floor) {
    auto get = [&params](const std::string& key, std::int64_t dflt) {
        auto it = params.find(key);
        return it == params.end() ? dflt : it->second;
    };
    std::int64_t shift = get("shift", 0);
    if (shift < 0) throw ConfigError("generator shift must be >= 0");

    EnumeratorFn base;
    if (name == "arithmetic") {
        base = detail::make_arithmetic(get("start", 0), get("step", 1));
    } else if (name == "log2_even") {
        base = detail::make_log2_even();
    } else {
        throw ConfigError("unknown generator '" + name + "'");
    }

    EnumeratorFn fn = base;
    if (shift > 0) {
        std::uint64_t offset = 0;
        while (true) {
            auto v = base(offset);
            if (!v || *v >= static_cast<std::uint64_t>(shift)) break;
            ++offset;
        }
        fn = [base, offset, shift](std::uint64_t i) -> std::optional<std::uint64_t> {
            auto v = base(i + offset);
            if (!v) return std::nullopt;
            return *v - static_cast<std::uint64_t>(shift);
        };
    }
    Generator g{std::move(name), std::move(params), std::move(fn), floor};
    return IntegerSet(Data{std::move(g)});
}

/// #(A intersect [0, n]), counting inclusively.
inline std::uint64_t count_prefix(const IntegerSet& A, std::uint64_t n) {
    if (auto* f = std::get_if<IntegerSet::Finite>(&A.data())) {
        return static_cast<std::uint64_t>(
            std::upper_bound(f->elems.begin(), f->elems.end(), n) - f->elems.begin());
    }
    if (auto* p = std::get_if<IntegerSet::Periodic>(&A.data())) {
        std::uint64_t cnt = 0;
        for (auto r : p->residues)
            if (r <= n) cnt += (n - r) / p->period + 1;
        cnt += static_cast<std::uint64_t>(
            std::upper_bound(p->inserted.begin(), p->inserted.end(), n) - p->inserted.begin());
        cnt -= static_cast<std::uint64_t>(
            std::upper_bound(p->deleted.begin(), p->deleted.end(), n) - p->deleted.begin());
        return cnt;
    }
    return static_cast<std::uint64_t>(A.elements_up_to(n).size());
}

/// Evidence record for a density estimate over a prefix window.
struct DensityRecord {
    std::optional<Rational> exact;
    double estimate = 0.0;           // extremal prefix ratio over [burn_in, horizon]
    std::uint64_t extremum_at = 0;   // where the running min (resp. max) was attained
    double ratio_at_horizon = 0.0;
    std::uint64_t horizon = 0;
    std::uint64_t burn_in = 0;
};

inline std::uint64_t default_burn_in(std::uint64_t horizon) { return horizon / 100; }

namespace detail {

inline DensityRecord density_scan(const IntegerSet& A, std::uint64_t horizon,
                                  std::uint64_t burn_in, bool lower) {
    if (burn_in >= horizon) throw ConfigError("burn_in must be < horizon");
    DensityRecord rec;
    rec.horizon = horizon;
    rec.burn_in = burn_in;
    auto elems = A.elements_up_to(horizon);
    std::size_t idx = 0;
    std::uint64_t count = 0;
    double best = lower ? std::numeric_limits<double>::infinity() : -1.0;
    std::uint64_t best_at = burn_in;
    for (std::uint64_t n = 0; n <= horizon; ++n) {
        while (idx < elems.size() && elems[idx] == n) { ++count; ++idx; }
        if (n < burn_in) continue;
        double ratio = static_cast<double>(count) / static_cast<double>(n + 1);
        if (lower ? ratio < best : ratio > best) { best = ratio; best_at = n; }
        if (n == horizon) rec.ratio_at_horizon = ratio;
    }
    rec.estimate = best;
    rec.extremum_at = best_at;
    return rec;
}

}  // namespace detail

/// liminf-style evidence: minimal prefix ratio past the burn-in, plus the
/// exact value when the representation pins it down.
inline DensityRecord lower_density(const IntegerSet& A, std::uint64_t horizon,
                                   std::uint64_t burn_in) {
    DensityRecord rec = detail::density_scan(A, horizon, burn_in, true);
    rec.exact = A.exact_lower_density();
    return rec;
}

inline DensityRecord lower_density(const IntegerSet& A, std::uint64_t horizon) {
    return lower_density(A, horizon, default_burn_in(horizon));
}

inline DensityRecord upper_density(const IntegerSet& A, std::uint64_t horizon,
                                   std::uint64_t burn_in) {
    DensityRecord rec = detail::density_scan(A, horizon, burn_in, false);
    rec.exact = A.exact_lower_density();  // for these representations the density exists
    return rec;
}

inline DensityRecord upper_density(const IntegerSet& A, std::uint64_t horizon) {
    return upper_density(A, horizon, default_burn_in(horizon));
}

/// (A - t) intersect N0, preserving the exactness class of the representation.
inline IntegerSet shift_set(const IntegerSet& A, std::uint64_t t) {
    if (t == 0) return A;
    if (auto* f = std::get_if<IntegerSet::Finite>(&A.data())) {
        std::vector<std::uint64_t> out;
        for (auto v : f->elems)
            if (v >= t) out.push_back(v - t);
        return IntegerSet::finite(std::move(out));
    }
    if (auto* p = std::get_if<IntegerSet::Periodic>(&A.data())) {
        std::vector<std::uint64_t> residues;
        for (auto r : p->residues)
            residues.push_back((r + p->period - t % p->period) % p->period);
        std::vector<std::uint64_t> inserted, deleted;
        for (auto v : p->inserted)
            if (v >= t) inserted.push_back(v - t);
        for (auto v : p->deleted)
            if (v >= t) deleted.push_back(v - t);
        return IntegerSet::periodic(p->period, std::move(residues), std::move(inserted),
                                    std::move(deleted));
    }
    const auto& g = std::get<IntegerSet::Generator>(A.data());
    auto params = g.params;
    params["shift"] += static_cast<std::int64_t>(t);
    return IntegerSet::generator(g.name, std::move(params), g.floor);
}

struct CoverResult {
    bool covered = false;
    std::vector<std::int64_t> assignment;  // j -> index into shifts, -1 if uncovered
};

/// Does [0, N] lie inside the union of the (A - n_l)? Ties break to the
/// smallest shift index.
inline CoverResult covers_window(const std::vector<std::uint64_t>& shifts, const IntegerSet& A,
                                 std::uint64_t N) {
    if (shifts.empty()) throw ConfigError("covers_window needs at least one shift");
    CoverResult res;
    res.assignment.assign(N + 1, -1);
    res.covered = true;
    for (std::uint64_t j = 0; j <= N; ++j) {
        for (std::size_t l = 0; l < shifts.size(); ++l) {
            if (A.contains(j + shifts[l])) {
                res.assignment[j] = static_cast<std::int64_t>(l);
                break;
            }
        }
        if (res.assignment[j] < 0) res.covered = false;
    }
    return res;
}

}  // namespace shiftlab
