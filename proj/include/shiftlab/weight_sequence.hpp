#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "shiftlab/errors.hpp"

namespace shiftlab {

enum class Domain { unilateral, bilateral };

inline std::string domain_name(Domain d) {
    return d == Domain::unilateral ? "unilateral" : "bilateral";
}

/// Shift weights w_l > 0 with cached log prefix products
/// log Pi(n) = sum_{l=1}^{n} log w_l, extended multiplicatively across 0 so
/// that Pi(n+1) = Pi(n) * w_{n+1} holds for every integer n.
class WeightSequence {
  public:
    struct Constant {
        double value;
    };
    struct Geometric {  // w_l = scale * ratio^l
        double scale;
        double ratio;
    };
    struct Table {  // w_l = values[l-1] for 1 <= l <= len, fallback elsewhere
        std::vector<double> values;
        double fallback;
        std::vector<double> log_prefix;  // log_prefix[i] = sum of logs of first i values
    };
    struct Formula {  // named closed-form families
        std::string name;
    };
    using Rule = std::variant<Constant, Geometric, Table, Formula>;

    static WeightSequence constant(double value) {
        if (!(value > 0.0)) throw ConfigError("weights must be positive");
        return WeightSequence(Constant{value});
    }

    static WeightSequence identity() { return constant(1.0); }

    static WeightSequence geometric(double scale, double ratio) {
        if (!(scale > 0.0) || !(ratio > 0.0)) throw ConfigError("weights must be positive");
        return WeightSequence(Geometric{scale, ratio});
    }

    static WeightSequence table(std::vector<double> values, double fallback) {
        if (!(fallback > 0.0)) throw ConfigError("weights must be positive");
        Table t{std::move(values), fallback, {}};
        t.log_prefix.reserve(t.values.size() + 1);
        t.log_prefix.push_back(0.0);
        for (double v : t.values) {
            if (!(v > 0.0)) throw ConfigError("weights must be positive");
            t.log_prefix.push_back(t.log_prefix.back() + std::log(v));
        }
        return WeightSequence(std::move(t));
    }

    static WeightSequence formula(const std::string& name) {
        if (name != "harmonic_plus_one") throw ConfigError("unknown weight formula '" + name + "'");
        return WeightSequence(Formula{name});
    }

    const Rule& rule() const { return rule_; }

    bool is_identity() const {
        auto* c = std::get_if<Constant>(&rule_);
        return c && c->value == 1.0;
    }

    /// w_l; defined for l >= 1 always, and for all l when the rule supports a
    /// bilateral domain.
    double weight(std::int64_t l) const {
        if (auto* c = std::get_if<Constant>(&rule_)) return c->value;
        if (auto* g = std::get_if<Geometric>(&rule_))
            return g->scale * std::pow(g->ratio, static_cast<double>(l));
        if (auto* t = std::get_if<Table>(&rule_)) {
            if (l >= 1 && l <= static_cast<std::int64_t>(t->values.size()))
                return t->values[static_cast<std::size_t>(l - 1)];
            return t->fallback;
        }
        if (l < 1) throw DomainMismatch("formula weights are defined for l >= 1 only");
        return 1.0 + 1.0 / static_cast<double>(l);  // harmonic_plus_one
    }

    double log_weight(std::int64_t l) const { return std::log(weight(l)); }

    /// log Pi(n) in closed form (no running products, so horizons of 1e6 with
    /// growing weights stay representable).
    double log_prefix_product(std::int64_t n) const {
        if (n == 0) return 0.0;
        if (auto* c = std::get_if<Constant>(&rule_))
            return static_cast<double>(n) * std::log(c->value);
        if (auto* g = std::get_if<Geometric>(&rule_)) {
            // sum_{l=1}^{n} (log s + l log r) continues algebraically to n < 0
            double nn = static_cast<double>(n);
            return nn * std::log(g->scale) + std::log(g->ratio) * nn * (nn + 1.0) / 2.0;
        }
        if (auto* t = std::get_if<Table>(&rule_)) {
            std::int64_t len = static_cast<std::int64_t>(t->values.size());
            if (n >= 1) {
                if (n <= len) return t->log_prefix[static_cast<std::size_t>(n)];
                return t->log_prefix.back() +
                       static_cast<double>(n - len) * std::log(t->fallback);
            }
            return static_cast<double>(n) * std::log(t->fallback);  // l <= 0 all fallback
        }
        if (n < 0) throw DomainMismatch("formula weights are defined for l >= 1 only");
        return std::log(static_cast<double>(n) + 1.0);  // prod (l+1)/l telescopes
    }

    bool supports_bilateral() const { return !std::holds_alternative<Formula>(rule_); }

    /// Fail fast (naming the first bad index) if any log-product over the
    /// window is not finite.
    void validate_window(Domain domain, std::int64_t horizon) const {
        if (domain == Domain::bilateral && !supports_bilateral())
            throw DomainMismatch("weight rule has no bilateral extension");
        std::int64_t lo = domain == Domain::bilateral ? -horizon : 0;
        for (std::int64_t k = lo; k <= horizon; ++k) {
            if (!std::isfinite(log_prefix_product(k))) throw OverflowAtIndex(k);
        }
    }

  private:
    explicit WeightSequence(Rule r) : rule_(std::move(r)) {}
    Rule rule_;
};

}  // namespace shiftlab
