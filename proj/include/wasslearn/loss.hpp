#pragma once

// Squared loss and certified (A2)-type constants.
//
// With D = sup |h(x) - y| over the class and the curve:
//   |l_h1(z1) - l_h2(z2)| <= |l_h1(z1) - l_h1(z2)| + |l_h1(z2) - l_h2(z2)|
//   |l_h(z1) - l_h(z2)|   <= 2D (|h(x1) - h(x2)| + |y1 - y2|) <= 2D (Lip + 1) rho(z1, z2)
//   |l_h1(z) - l_h2(z)|   <= 2D |h1(x) - h2(x)|               <= 2D ||h1 - h2||_sup
// so L = 2D (Lip + 1), L_bar = 2D and B = D^2. The Lipschitz metric dominates
// the sup metric, so L_bar also serves anchored classes.

#include <algorithm>
#include <cmath>

#include "wasslearn/error.hpp"
#include "wasslearn/hypothesis.hpp"
#include "wasslearn/rng.hpp"
#include "wasslearn/state_space.hpp"

namespace wasslearn {

constexpr double loss(double y, double y_hat) noexcept {
  const double d = y - y_hat;
  return d * d;
}

inline double loss_composite(const Hypothesis& h, const StatePoint& z) noexcept {
  return loss(h(z.x), z.y);
}

struct LossConstants {
  double L = 0.0;
  double L_bar = 0.0;
  double B = 0.0;
  double D = 0.0;
};

/// D from interval endpoints of the class range and the target range.
inline LossConstants loss_constants(const HypothesisClass& cls, const TargetFunction& target) {
  const auto [f_lo, f_hi] = target.range();
  if (!std::isfinite(cls.y_lo) || !std::isfinite(cls.y_hi) || !std::isfinite(f_lo) ||
      !std::isfinite(f_hi)) {
    throw DomainError("loss_constants: class and target ranges must be bounded");
  }
  const double D = std::max(cls.y_hi - f_lo, f_hi - cls.y_lo);
  LossConstants c;
  c.D = std::max(D, 0.0);
  c.L = 2.0 * c.D * (cls.lip_bound + 1.0);
  c.L_bar = 2.0 * c.D;
  c.B = c.D * c.D;
  return c;
}

inline LossConstants loss_constants(const HypothesisClass& cls, const SpaceDescriptor& space) {
  return loss_constants(cls, space.target);
}

/// Slack of one (A2) instance: |l_h1(z1) - l_h2(z2)| - (L rho + L_bar rho_H).
inline double a2_slack(const LossConstants& c, const Hypothesis& h1, const Hypothesis& h2,
                       const StatePoint& z1, const StatePoint& z2, MetricTag metric = MetricTag::sup) {
  const double lhs = std::abs(loss_composite(h1, z1) - loss_composite(h2, z2));
  return lhs - (c.L * rho(z1, z2) + c.L_bar * class_metric(h1, h2, metric));
}

/// Worst (A2) slack over random (h1, h2, z1, z2). The inequality holds on
/// every sample iff the result is <= 1e-9. Hypotheses are drawn on a shared
/// knot grid sized so the class's slope band is representable.
inline double verify_a2(const HypothesisClass& cls, const SpaceDescriptor& space,
                        const LossConstants& c, int sample_count, CounterRng& rng,
                        std::size_t knot_count = 33) {
  if (sample_count < 1) throw DomainError("verify_a2: sample_count must be >= 1");
  if (cls.kind == ClassKind::constants) knot_count = 1;
  if (cls.kind == ClassKind::lipschitz_anchored) {
    knot_count = detail::anchored_intervals(cls.anchor->first, knot_count - 1) + 1;
  }
  const MetricTag metric = cls.kind == ClassKind::lipschitz_anchored ? MetricTag::lipschitz : MetricTag::sup;
  double worst = -INFINITY;
  for (int s = 0; s < sample_count; ++s) {
    const Hypothesis h1 = random_member(cls, knot_count, rng);
    const Hypothesis h2 = random_member(cls, knot_count, rng);
    const StatePoint z1 = graph_point(rng.uniform(), space.target);
    const StatePoint z2 = graph_point(rng.uniform(), space.target);
    worst = std::max(worst, a2_slack(c, h1, h2, z1, z2, metric));
  }
  return worst;
}

}  // namespace wasslearn
