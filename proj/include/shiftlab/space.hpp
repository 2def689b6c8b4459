#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "shiftlab/errors.hpp"
#include "shiftlab/weight_sequence.hpp"

namespace shiftlab {

struct SupNorm {};
struct PowerNorm {
    double p;
};
using NormKind = std::variant<SupNorm, PowerNorm>;

/// A concrete Frechet sequence space: per-seminorm weights nu_q(k) on the
/// canonical basis, nu_q(k) = ||e_k||_q. All spaces here are diagonal, so the
/// unconditionality constants are 1 and the seminorm pairing index is q itself.
class SpaceSpec {
  public:
    struct ConstantRule {
        double c;
    };
    struct GeometricRule {  // nu_q(k) = r^k
        double r;
    };
    struct SymGeometricRule {  // nu_q(k) = r^|k|
        double r;
    };
    struct PerQGeometricRule {  // nu_q(k) = r_q^k, r_q non-decreasing
        std::vector<double> r_q;
    };
    struct TableRule {  // rows[q][k - offset], last row repeats upward in q
        std::vector<std::vector<double>> rows;
        std::int64_t offset;
        double fallback;
    };
    struct ConjugatedRule {  // nu'_q(k) = nu_q(k) / Pi(k)
        std::shared_ptr<const SpaceSpec> base;
        WeightSequence w;
    };
    using Rule =
        std::variant<ConstantRule, GeometricRule, SymGeometricRule, PerQGeometricRule, TableRule,
                     ConjugatedRule>;

    SpaceSpec(Domain domain, NormKind norm, int p_max, Rule rule)
        : domain_(domain), norm_(norm), p_max_(p_max), rule_(std::move(rule)) {
        if (p_max_ < 0) throw ConfigError("p_max must be >= 0");
        validate_rule();
    }

    Domain domain() const { return domain_; }
    const NormKind& norm() const { return norm_; }
    int p_max() const { return p_max_; }
    const Rule& rule() const { return rule_; }

    bool is_sup() const { return std::holds_alternative<SupNorm>(norm_); }
    double power() const { return std::get<PowerNorm>(norm_).p; }

    double log_weight(int q, std::int64_t k) const {
        if (q < 0 || q > p_max_) throw Error("seminorm index out of range");
        if (domain_ == Domain::unilateral && k < 0)
            throw DomainMismatch("negative basis index in a unilateral space");
        if (auto* c = std::get_if<ConstantRule>(&rule_)) return std::log(c->c);
        if (auto* g = std::get_if<GeometricRule>(&rule_))
            return static_cast<double>(k) * std::log(g->r);
        if (auto* s = std::get_if<SymGeometricRule>(&rule_))
            return static_cast<double>(k < 0 ? -k : k) * std::log(s->r);
        if (auto* pq = std::get_if<PerQGeometricRule>(&rule_)) {
            std::size_t qi = std::min<std::size_t>(static_cast<std::size_t>(q), pq->r_q.size() - 1);
            return static_cast<double>(k) * std::log(pq->r_q[qi]);
        }
        if (auto* t = std::get_if<TableRule>(&rule_)) {
            std::size_t qi = std::min<std::size_t>(static_cast<std::size_t>(q), t->rows.size() - 1);
            const auto& row = t->rows[qi];
            std::int64_t col = k - t->offset;
            if (col >= 0 && col < static_cast<std::int64_t>(row.size()))
                return std::log(row[static_cast<std::size_t>(col)]);
            return std::log(t->fallback);
        }
        const auto& cj = std::get<ConjugatedRule>(rule_);
        return cj.base->log_weight(q, k) - cj.w.log_prefix_product(k);
    }

    double weight(int q, std::int64_t k) const { return std::exp(log_weight(q, k)); }

    /// True when nu_q does not depend on q, so one seminorm value serves all q.
    bool q_uniform() const {
        if (std::holds_alternative<ConstantRule>(rule_)) return true;
        if (std::holds_alternative<GeometricRule>(rule_)) return true;
        if (std::holds_alternative<SymGeometricRule>(rule_)) return true;
        if (auto* pq = std::get_if<PerQGeometricRule>(&rule_)) return pq->r_q.size() == 1;
        if (auto* t = std::get_if<TableRule>(&rule_)) return t->rows.size() == 1;
        return std::get<ConjugatedRule>(rule_).base->q_uniform();
    }

    /// Exact check that log nu_q(0, .) is non-increasing on [lo, hi] (and, on
    /// the bilateral side, non-decreasing up to 0). Gate for scan fast paths.
    bool weights_decay_on(std::int64_t lo, std::int64_t hi) const {
        std::int64_t start = domain_ == Domain::unilateral ? std::max<std::int64_t>(lo, 0) : lo;
        double prev = std::numeric_limits<double>::quiet_NaN();
        for (std::int64_t k = start; k <= hi; ++k) {
            double cur = log_weight(0, k);
            if (!std::isnan(prev)) {
                if (k <= 0 && cur < prev) return false;
                if (k > 0 && cur > prev) return false;
            }
            prev = cur;
        }
        return true;
    }

    /// log of an upper bound for sup_{k >= k0} nu_q(k); nullopt when no finite
    /// bound is available from the rule.
    std::optional<double> tail_sup_log(int q, std::int64_t k0) const {
        auto env = envelope(q, k0);
        if (!env) return std::nullopt;
        auto [scale_log, ratio_log] = *env;
        if (ratio_log > 0.0) return std::nullopt;
        return scale_log;
    }

    /// log of an upper bound for (sum_{k >= k0} nu_q(k)^p)^{1/p}.
    std::optional<double> tail_power_log(int q, std::int64_t k0) const {
        double p = power();
        auto env = envelope(q, k0);
        if (!env) return std::nullopt;
        auto [scale_log, ratio_log] = *env;
        if (ratio_log >= 0.0) return std::nullopt;
        double rp = std::exp(p * ratio_log);
        return scale_log - std::log(1.0 - rp) / p;
    }

  private:
    // nu_q(k) <= exp(scale_log + (k - k0) * ratio_log) for all k >= k0
    std::optional<std::pair<double, double>> envelope(int q, std::int64_t k0) const {
        if (auto* c = std::get_if<ConstantRule>(&rule_)) return {{std::log(c->c), 0.0}};
        if (auto* g = std::get_if<GeometricRule>(&rule_))
            return {{static_cast<double>(k0) * std::log(g->r), std::log(g->r)}};
        if (auto* s = std::get_if<SymGeometricRule>(&rule_)) {
            if (k0 < 0) return std::nullopt;
            return {{static_cast<double>(k0) * std::log(s->r), std::log(s->r)}};
        }
        if (auto* pq = std::get_if<PerQGeometricRule>(&rule_)) {
            std::size_t qi = std::min<std::size_t>(static_cast<std::size_t>(q), pq->r_q.size() - 1);
            return {{static_cast<double>(k0) * std::log(pq->r_q[qi]), std::log(pq->r_q[qi])}};
        }
        if (auto* t = std::get_if<TableRule>(&rule_)) {
            std::size_t qi = std::min<std::size_t>(static_cast<std::size_t>(q), t->rows.size() - 1);
            const auto& row = t->rows[qi];
            double m = t->fallback;
            for (std::int64_t col = std::max<std::int64_t>(k0 - t->offset, 0);
                 col < static_cast<std::int64_t>(row.size()); ++col)
                m = std::max(m, row[static_cast<std::size_t>(col)]);
            return {{std::log(m), 0.0}};
        }
        const auto& cj = std::get<ConjugatedRule>(rule_);
        auto base_env = cj.base->envelope(q, k0);
        if (!base_env) return std::nullopt;
        auto [bs, br] = *base_env;
        if (auto* wc = std::get_if<WeightSequence::Constant>(&cj.w.rule())) {
            double lw = std::log(wc->value);
            return {{bs - static_cast<double>(k0) * lw, br - lw}};
        }
        if (auto* wf = std::get_if<WeightSequence::Formula>(&cj.w.rule())) {
            (void)wf;  // harmonic_plus_one: Pi(k) = k + 1 >= k0 + 1 on the tail
            if (k0 < 0) return std::nullopt;
            return {{bs - std::log(static_cast<double>(k0) + 1.0), br}};
        }
        if (auto* wt = std::get_if<WeightSequence::Table>(&cj.w.rule())) {
            // beyond the table the weight is a constant fallback
            std::int64_t len = static_cast<std::int64_t>(wt->values.size());
            std::int64_t k1 = std::max(k0, len);
            double lf = std::log(wt->fallback);
            double scale_at_k1 = bs + static_cast<double>(k1 - k0) * br -
                                 cj.w.log_prefix_product(k1);
            double scale = scale_at_k1 - static_cast<double>(k1 - k0) * (br - lf);
            for (std::int64_t k = k0; k < k1; ++k) {
                double v = cj.base->log_weight(q, k) - cj.w.log_prefix_product(k) -
                           static_cast<double>(k - k0) * (br - lf);
                scale = std::max(scale, v);
            }
            return {{scale, br - lf}};
        }
        return std::nullopt;
    }

    void validate_rule() const {
        auto positive = [](double v) {
            if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("basis weights must be positive");
        };
        if (auto* c = std::get_if<ConstantRule>(&rule_)) positive(c->c);
        if (auto* g = std::get_if<GeometricRule>(&rule_)) positive(g->r);
        if (auto* s = std::get_if<SymGeometricRule>(&rule_)) positive(s->r);
        if (auto* pq = std::get_if<PerQGeometricRule>(&rule_)) {
            if (pq->r_q.empty()) throw ConfigError("per_q_geometric needs at least one ratio");
            double prev = 0.0;
            for (double r : pq->r_q) {
                positive(r);
                if (r < prev) throw ConfigError("per_q_geometric ratios must be non-decreasing");
                prev = r;
            }
            if (domain_ == Domain::bilateral && pq->r_q.size() > 1)
                throw ConfigError("per_q_geometric breaks q-monotonicity on bilateral domains");
        }
        if (auto* t = std::get_if<TableRule>(&rule_)) {
            positive(t->fallback);
            if (t->rows.empty()) throw ConfigError("table rule needs at least one row");
            std::size_t cols = t->rows.front().size();
            for (const auto& row : t->rows) {
                if (row.size() != cols) throw ConfigError("table rows must have equal length");
                for (double v : row) positive(v);
            }
            for (std::size_t qi = 1; qi < t->rows.size(); ++qi)
                for (std::size_t c = 0; c < cols; ++c)
                    if (t->rows[qi][c] < t->rows[qi - 1][c])
                        throw ConfigError("table weights must be non-decreasing in q");
        }
        if (auto* cj = std::get_if<ConjugatedRule>(&rule_)) {
            if (!cj->base) throw ConfigError("conjugated rule needs a base space");
            if (cj->base->domain() != domain_) throw ConfigError("conjugated base domain mismatch");
        }
    }

    Domain domain_;
    NormKind norm_;
    int p_max_;
    Rule rule_;
};

/// Finitely supported scalar sequence over N0 or Z.
class SparseVector {
  public:
    using Entry = std::pair<std::int64_t, double>;

    explicit SparseVector(Domain d = Domain::unilateral) : domain_(d) {}

    static SparseVector basis(Domain d, std::int64_t index, double coef = 1.0) {
        SparseVector v(d);
        if (coef != 0.0) v.entries_.emplace_back(index, coef);
        v.check_indices();
        return v;
    }

    static SparseVector from_entries(Domain d, std::vector<Entry> entries) {
        std::sort(entries.begin(), entries.end(),
                  [](const Entry& a, const Entry& b) { return a.first < b.first; });
        SparseVector v(d);
        for (const auto& [k, c] : entries) {
            if (!v.entries_.empty() && v.entries_.back().first == k)
                v.entries_.back().second += c;
            else
                v.entries_.emplace_back(k, c);
        }
        v.drop_zeros();
        v.check_indices();
        return v;
    }

    Domain domain() const { return domain_; }
    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t support_size() const { return entries_.size(); }
    bool is_zero() const { return entries_.empty(); }

    double coef(std::int64_t index) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                                   [](const Entry& e, std::int64_t k) { return e.first < k; });
        if (it == entries_.end() || it->first != index) return 0.0;
        return it->second;
    }

    std::int64_t min_index() const {
        if (entries_.empty()) throw Error("zero vector has no support");
        return entries_.front().first;
    }
    std::int64_t max_index() const {
        if (entries_.empty()) throw Error("zero vector has no support");
        return entries_.back().first;
    }

    double max_abs_coef() const {
        double m = 0.0;
        for (const auto& [k, c] : entries_) m = std::max(m, std::abs(c));
        return m;
    }

  private:
    void drop_zeros() {
        entries_.erase(std::remove_if(entries_.begin(), entries_.end(),
                                      [](const Entry& e) { return e.second == 0.0; }),
                       entries_.end());
    }
    void check_indices() const {
        if (domain_ == Domain::unilateral && !entries_.empty() && entries_.front().first < 0)
            throw DomainMismatch("negative index in a unilateral vector");
    }

    friend SparseVector axpy(double, const SparseVector&, const SparseVector&);
    friend SparseVector scale(const SparseVector&, double);
    friend SparseVector truncate(const SparseVector&, std::int64_t, std::int64_t);

    Domain domain_;
    std::vector<Entry> entries_;  // sorted by index, no explicit zeros
};

/// alpha * x + y with exact sparse bookkeeping.
inline SparseVector axpy(double alpha, const SparseVector& x, const SparseVector& y) {
    if (x.domain() != y.domain()) throw DomainMismatch("vector arithmetic across domains");
    SparseVector out(x.domain());
    const auto& a = x.entries();
    const auto& b = y.entries();
    out.entries_.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            out.entries_.emplace_back(a[i].first, alpha * a[i].second);
            ++i;
        } else if (i == a.size() || b[j].first < a[i].first) {
            out.entries_.push_back(b[j]);
            ++j;
        } else {
            double c = alpha * a[i].second + b[j].second;
            if (c != 0.0) out.entries_.emplace_back(a[i].first, c);
            ++i;
            ++j;
        }
    }
    out.drop_zeros();
    return out;
}

inline SparseVector add(const SparseVector& x, const SparseVector& y) { return axpy(1.0, x, y); }
inline SparseVector subtract(const SparseVector& x, const SparseVector& y) {
    return axpy(-1.0, y, x);
}

inline SparseVector scale(const SparseVector& x, double alpha) {
    SparseVector out(x.domain());
    if (alpha == 0.0) return out;
    out.entries_ = x.entries();
    for (auto& [k, c] : out.entries_) c *= alpha;
    return out;
}

/// Keep exactly the entries with index in [lo, hi].
inline SparseVector truncate(const SparseVector& x, std::int64_t lo, std::int64_t hi) {
    SparseVector out(x.domain());
    for (const auto& e : x.entries())
        if (e.first >= lo && e.first <= hi) out.entries_.push_back(e);
    return out;
}

namespace detail {

inline double logsumexp(const std::vector<double>& terms) {
    double m = -std::numeric_limits<double>::infinity();
    for (double t : terms) m = std::max(m, t);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - m);
    return m + std::log(s);
}

}  // namespace detail

/// ||x||_q. Computed in log space so conjugated spaces with extreme weight
/// products stay usable; underflow rounds to 0 and overflow to inf.
inline double seminorm(const SpaceSpec& space, const SparseVector& x, int q) {
    if (space.domain() != x.domain()) throw DomainMismatch("vector/space domain disagree");
    if (x.is_zero()) return 0.0;
    if (space.is_sup()) {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& [k, c] : x.entries())
            m = std::max(m, std::log(std::abs(c)) + space.log_weight(q, k));
        return std::exp(m);
    }
    double p = space.power();
    std::vector<double> terms;
    terms.reserve(x.support_size());
    for (const auto& [k, c] : x.entries())
        terms.push_back(p * (std::log(std::abs(c)) + space.log_weight(q, k)));
    return std::exp(detail::logsumexp(terms) / p);
}

struct FNormInterval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Two-sided enclosure of the F-norm sum_p 2^{-p-1} min(1, ||.||_p); the
/// truncation tail past p_max is exactly 2^{-p_max-1} wide.
inline FNormInterval f_norm(const SpaceSpec& space, const SparseVector& x) {
    double tail = std::ldexp(1.0, -(space.p_max() + 1));
    FNormInterval out;
    if (space.q_uniform()) {
        double s = std::min(1.0, seminorm(space, x, 0));
        out.lo = s * (1.0 - tail);
    } else {
        double lo = 0.0;
        for (int p = 0; p <= space.p_max(); ++p)
            lo += std::ldexp(1.0, -(p + 1)) * std::min(1.0, seminorm(space, x, p));
        out.lo = lo;
    }
    out.hi = out.lo + tail;
    return out;
}

inline double f_dist_hi(const SpaceSpec& space, const SparseVector& a, const SparseVector& b) {
    return f_norm(space, subtract(a, b)).hi;
}

}  // namespace shiftlab
