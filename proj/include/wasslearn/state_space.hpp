#pragma once

// The curve state space Z = {(x, f(x)) : x in [0,1]} with the Euclidean
// metric inherited from R^2.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "wasslearn/error.hpp"
#include "wasslearn/rng.hpp"

namespace wasslearn {

/// Largest admissible Lipschitz constant (exclusive). Above it the two-branch
/// chain on the graph no longer contracts in W1.
inline const double kMaxTargetLip = std::sqrt(3.0);

class TargetFunction {
 public:
  using Evaluator = std::function<double(double)>;

  /// `range` must enclose f([0,1]); it feeds the certified loss constants.
  TargetFunction(Evaluator evaluator, double lip, std::string family_tag,
                 std::pair<double, double> range)
      : evaluator_(std::move(evaluator)),
        lip_(lip),
        tag_(std::move(family_tag)),
        range_(range) {
    if (!(lip_ >= 0.0) || !(lip_ < kMaxTargetLip)) {
      throw DomainError("target function Lipschitz constant must lie in [0, sqrt(3)), got " +
                        std::to_string(lip_));
    }
    if (!(range_.first <= range_.second)) {
      throw DomainError("target function range is empty");
    }
  }

  static TargetFunction identity() {
    return {[](double x) { return x; }, 1.0, "identity", {0.0, 1.0}};
  }

  static TargetFunction constant(double c) {
    return {[c](double) { return c; }, 0.0, "constant", {c, c}};
  }

  static TargetFunction affine(double slope, double intercept) {
    const double a = intercept;
    const double b = slope + intercept;
    return {[slope, intercept](double x) { return slope * x + intercept; },
            std::abs(slope), "affine", {std::min(a, b), std::max(a, b)}};
  }

  /// |x - 1/2|, a two-to-one map.
  static TargetFunction tent() {
    return {[](double x) { return std::abs(x - 0.5); }, 1.0, "tent", {0.0, 0.5}};
  }

  /// c * x^2; smooth and nonlinear, Lipschitz constant 2|c|.
  static TargetFunction quadratic(double c) {
    return {[c](double x) { return c * x * x; }, 2.0 * std::abs(c), "quadratic",
            {std::min(0.0, c), std::max(0.0, c)}};
  }

  double operator()(double x) const { return evaluator_(x); }
  double lip() const noexcept { return lip_; }
  const std::string& family_tag() const noexcept { return tag_; }
  std::pair<double, double> range() const noexcept { return range_; }

  /// Chord stretch factor sqrt(1 + Lip(f)^2).
  double stretch() const noexcept { return std::sqrt(1.0 + lip_ * lip_); }

 private:
  Evaluator evaluator_;
  double lip_;
  std::string tag_;
  std::pair<double, double> range_;
};

struct StatePoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const StatePoint&, const StatePoint&) = default;
};

inline StatePoint graph_point(double x, const TargetFunction& target) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("graph_point: x must lie in [0,1], got " + std::to_string(x));
  }
  return {x, target(x)};
}

inline double rho(const StatePoint& a, const StatePoint& b) noexcept {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Max chord over a grid x grid set of graph points plus the Lipschitz slack
/// 2 sqrt(1+lip^2)/grid, so the result bounds diam(Z) from above.
inline double diameter(const TargetFunction& target, int grid) {
  if (grid < 2) throw DomainError("diameter: grid must be >= 2");
  std::vector<StatePoint> pts;
  pts.reserve(static_cast<std::size_t>(grid));
  for (int i = 0; i < grid; ++i) {
    pts.push_back(graph_point(static_cast<double>(i) / (grid - 1), target));
  }
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      best = std::max(best, rho(pts[i], pts[j]));
    }
  }
  return best + 2.0 * target.stretch() / grid;
}

struct SpaceDescriptor {
  TargetFunction target;
  double diameter;
  std::string metric_tag = "euclidean-R2";
};

inline SpaceDescriptor make_space(TargetFunction target, int diameter_grid = 1024) {
  const double d = diameter(target, diameter_grid);
  return SpaceDescriptor{std::move(target), d};
}

inline double diameter(const SpaceDescriptor& space, int grid) {
  return diameter(space.target, grid);
}

/// Largest observed |f(x1)-f(x2)| - lip |x1-x2| over random pairs; <= 1e-12
/// for a correctly declared Lipschitz constant.
inline double lipschitz_violation(const TargetFunction& target, int pairs, CounterRng& rng) {
  double worst = -INFINITY;
  for (int i = 0; i < pairs; ++i) {
    const double a = rng.uniform();
    const double b = rng.uniform();
    worst = std::max(worst, std::abs(target(a) - target(b)) - target.lip() * std::abs(a - b));
  }
  return worst;
}

}  // namespace wasslearn
