#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "shiftlab/space.hpp"
#include "shiftlab/weight_sequence.hpp"

namespace shiftlab {

/// steps-fold weighted backward shift. Convention: (B_w x)_k = w_{k+1} x_{k+1},
/// so result_k = (prod_{l=k+1}^{k+steps} w_l) x_{k+steps}. Unilateral entries
/// that would land below index 0 are discarded; bilateral keeps everything.
inline SparseVector apply_shift(const SpaceSpec& space, const SparseVector& x,
                                const WeightSequence& w, std::uint64_t steps) {
    if (space.domain() != x.domain()) throw DomainMismatch("vector/space domain disagree");
    if (steps == 0) return x;
    std::vector<SparseVector::Entry> out;
    out.reserve(x.support_size());
    std::int64_t s = static_cast<std::int64_t>(steps);
    for (const auto& [k, c] : x.entries()) {
        std::int64_t dst = k - s;
        if (space.domain() == Domain::unilateral && dst < 0) continue;
        double ratio = std::exp(w.log_prefix_product(k) - w.log_prefix_product(dst));
        out.emplace_back(dst, c * ratio);
    }
    return SparseVector::from_entries(x.domain(), std::move(out));
}

/// X(v) for v_n = Pi(n)^{-1}: the space on which the unweighted backward shift
/// acts like B_w acts on the base space. Weight products are validated over
/// [-guard_horizon, guard_horizon] before the space is handed out.
inline SpaceSpec conjugate_to_unweighted(const SpaceSpec& base, const WeightSequence& w,
                                         std::int64_t guard_horizon) {
    w.validate_window(base.domain(), guard_horizon);
    return SpaceSpec(base.domain(), base.norm(), base.p_max(),
                     SpaceSpec::ConjugatedRule{std::make_shared<const SpaceSpec>(base), w});
}

/// The intertwining map phi : X(v) -> X, (x_n) -> (x_n v_n). Satisfies
/// phi(B x) = B_w(phi x) on sparse vectors.
inline SparseVector conjugation_map(const SparseVector& x, const WeightSequence& w) {
    std::vector<SparseVector::Entry> out;
    out.reserve(x.support_size());
    for (const auto& [k, c] : x.entries())
        out.emplace_back(k, c * std::exp(-w.log_prefix_product(k)));
    return SparseVector::from_entries(x.domain(), std::move(out));
}

/// Restartable orbit stream n -> B_w^n x; each advance costs O(support).
class Orbit {
  public:
    Orbit(const SpaceSpec& space, SparseVector x, WeightSequence w)
        : space_(&space), w_(std::move(w)), state_(std::move(x)) {}

    const SparseVector& state() const { return state_; }
    std::uint64_t step() const { return n_; }

    void advance() {
        state_ = apply_shift(*space_, state_, w_, 1);
        ++n_;
    }

  private:
    const SpaceSpec* space_;
    WeightSequence w_;
    SparseVector state_;
    std::uint64_t n_ = 0;
};

}  // namespace shiftlab
