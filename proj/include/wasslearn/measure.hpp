#pragma once

// Finitely supported probability measures on the curve state space.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "wasslearn/error.hpp"
#include "wasslearn/state_space.hpp"

namespace wasslearn {

struct Atom {
  StatePoint point;
  double weight = 0.0;
};

class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  explicit DiscreteMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {}

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }
  const Atom& operator[](std::size_t i) const { return atoms_[i]; }

  void add(StatePoint p, double w) { atoms_.push_back({p, w}); }

  double total_weight() const noexcept {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.weight;
    return s;
  }

  /// Throws NormalizationError unless weights are positive and sum to 1.
  void require_normalized(double tol = 1e-9) const {
    if (atoms_.empty()) throw NormalizationError("measure has no atoms");
    for (const auto& a : atoms_) {
      if (!(a.weight > 0.0)) throw NormalizationError("measure has a non-positive weight");
    }
    const double total = total_weight();
    if (std::abs(total - 1.0) > tol) {
      throw NormalizationError("measure weights sum to " + std::to_string(total));
    }
  }

  /// Largest |y - f(x)| over atoms.
  double graph_defect(const TargetFunction& f) const {
    double worst = 0.0;
    for (const auto& a : atoms_) worst = std::max(worst, std::abs(a.point.y - f(a.point.x)));
    return worst;
  }

  template <typename Fn>
  double integrate(Fn&& g) const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.weight * g(a.point);
    return s;
  }

  /// Atoms sorted by x (then y); stable for equal keys.
  DiscreteMeasure sorted_by_x() const {
    auto copy = atoms_;
    std::stable_sort(copy.begin(), copy.end(), [](const Atom& a, const Atom& b) {
      return a.point.x < b.point.x || (a.point.x == b.point.x && a.point.y < b.point.y);
    });
    return DiscreteMeasure(std::move(copy));
  }

 private:
  std::vector<Atom> atoms_;
};

/// Groups atoms whose coordinates agree within `tol`; weights are summed.
/// `groups[k]` lists the original indices folded into merged atom k.
struct MergedMeasure {
  DiscreteMeasure measure;
  std::vector<std::vector<std::size_t>> groups;
};

inline MergedMeasure merge_duplicates(const DiscreteMeasure& mu, double tol = 1e-15) {
  std::vector<std::size_t> order(mu.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& pa = mu[a].point;
    const auto& pb = mu[b].point;
    return pa.x < pb.x || (pa.x == pb.x && pa.y < pb.y);
  });
  MergedMeasure out;
  std::vector<Atom> atoms;
  for (std::size_t idx : order) {
    const Atom& a = mu[idx];
    if (!atoms.empty() && std::abs(atoms.back().point.x - a.point.x) <= tol &&
        std::abs(atoms.back().point.y - a.point.y) <= tol) {
      atoms.back().weight += a.weight;
      out.groups.back().push_back(idx);
    } else {
      atoms.push_back(a);
      out.groups.push_back({idx});
    }
  }
  out.measure = DiscreteMeasure(std::move(atoms));
  return out;
}

}  // namespace wasslearn
