#pragma once

// Sample and true errors over a finite net, the approximate sample-error
// minimizer, and the uniform / relative deviation statistics.
//
// asem() returns the exact empirical minimizer over the net. Since every
// class member is within net.radius of some member, (A2) makes that pick an
// (L_bar * radius)-approximate minimizer over the whole class.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wasslearn/chain.hpp"
#include "wasslearn/error.hpp"
#include "wasslearn/hypothesis.hpp"
#include "wasslearn/loss.hpp"
#include "wasslearn/measure.hpp"

namespace wasslearn {

inline double empirical_error(const Hypothesis& h, std::span<const StatePoint> states) {
  if (states.empty()) throw DomainError("empirical_error: empty trajectory");
  double s = 0.0;
  for (const auto& z : states) s += loss_composite(h, z);
  return s / static_cast<double>(states.size());
}

inline double empirical_error(const Hypothesis& h, const Trajectory& traj) {
  return empirical_error(h, std::span<const StatePoint>(traj.states));
}

inline double true_error(const Hypothesis& h, const DiscreteMeasure& pi_hat) {
  return pi_hat.integrate([&h](const StatePoint& z) { return loss_composite(h, z); });
}

/// Empirical errors of every member. Constant members use the moments of y,
/// (c - y)^2 averaging to c^2 - 2 c mean(y) + mean(y^2).
inline std::vector<double> empirical_errors(const HypothesisNet& net, std::span<const StatePoint> states) {
  if (states.empty()) throw DomainError("empirical_errors: empty trajectory");
  std::vector<double> out(net.size());
  double sy = 0.0, syy = 0.0;
  for (const auto& z : states) {
    sy += z.y;
    syy += z.y * z.y;
  }
  const double n = static_cast<double>(states.size());
  const double my = sy / n, myy = syy / n;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto& h = net.members[i];
    if (h.knot_count() == 1) {
      const double c = h.knot_values()[0];
      out[i] = std::max(0.0, c * c - 2.0 * c * my + myy);
    } else {
      out[i] = empirical_error(h, states);
    }
  }
  return out;
}

inline std::vector<double> true_errors(const HypothesisNet& net, const DiscreteMeasure& pi_hat) {
  std::vector<double> out(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) out[i] = true_error(net.members[i], pi_hat);
  return out;
}

struct ErrorSummary {
  std::size_t h_index = 0;
  double empirical = 0.0;
  double true_error = 0.0;
  double deviation = 0.0;           ///< empirical - true
  double relative_deviation = 0.0;  ///< deviation / sqrt(true); NaN when true == 0
};

inline std::vector<ErrorSummary> error_table(const HypothesisNet& net, const Trajectory& traj,
                                             const DiscreteMeasure& pi_hat) {
  const auto emp = empirical_errors(net, traj.states);
  const auto tru = true_errors(net, pi_hat);
  std::vector<ErrorSummary> rows(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) {
    rows[i].h_index = i;
    rows[i].empirical = emp[i];
    rows[i].true_error = tru[i];
    rows[i].deviation = emp[i] - tru[i];
    rows[i].relative_deviation = tru[i] > 0.0 ? rows[i].deviation / std::sqrt(tru[i]) : NAN;
  }
  return rows;
}

struct IndexedValue {
  std::size_t index = 0;
  double value = 0.0;
};

/// Exact empirical minimizer over the net; ties go to the smallest index.
inline IndexedValue asem(const HypothesisNet& net, const Trajectory& traj) {
  if (net.members.empty()) throw DomainError("asem: empty net");
  const auto emp = empirical_errors(net, traj.states);
  IndexedValue best{0, emp[0]};
  for (std::size_t i = 1; i < emp.size(); ++i) {
    if (emp[i] < best.value) best = {i, emp[i]};
  }
  return best;
}

struct OptEstimate {
  double value = 0.0;  ///< min true error over the (refined) net
  double slack = 0.0;  ///< L_bar * radius: the class infimum lies in [value - slack, value]
};

/// min of true_error over the given members.
inline OptEstimate opt_pi(const HypothesisNet& net, const DiscreteMeasure& pi_hat, double L_bar = 0.0) {
  if (net.members.empty()) throw DomainError("opt_pi: empty net");
  const auto tru = true_errors(net, pi_hat);
  return {*std::min_element(tru.begin(), tru.end()), L_bar * net.radius};
}

/// Class infimum estimated on a net `refinement` times finer than `net`.
inline OptEstimate opt_pi(const HypothesisClass& cls, const HypothesisNet& net,
                          const DiscreteMeasure& pi_hat, int refinement, double L_bar) {
  if (refinement < 1) throw DomainError("opt_pi: refinement must be >= 1");
  if (refinement == 1) return opt_pi(net, pi_hat, L_bar);
  const auto fine = build_epsilon_net(cls, net.radius / refinement, net.metric);
  return opt_pi(fine, pi_hat, L_bar);
}

/// max over members of |empirical - true|, with precomputed true errors.
inline IndexedValue uniform_deviation(const std::vector<double>& empirical,
                                      const std::vector<double>& truth) {
  IndexedValue best{0, -1.0};
  for (std::size_t i = 0; i < empirical.size(); ++i) {
    const double d = std::abs(empirical[i] - truth[i]);
    if (d > best.value) best = {i, d};
  }
  return best;
}

inline IndexedValue uniform_deviation(const HypothesisNet& net, const Trajectory& traj,
                                      const DiscreteMeasure& pi_hat) {
  return uniform_deviation(empirical_errors(net, traj.states), true_errors(net, pi_hat));
}

/// max over members of |empirical - true| / sqrt(true). Throws DegenerateError
/// if some member has zero true error.
inline IndexedValue relative_deviation(const std::vector<double>& empirical,
                                       const std::vector<double>& truth) {
  IndexedValue best{0, -1.0};
  for (std::size_t i = 0; i < empirical.size(); ++i) {
    if (!(truth[i] > 0.0)) {
      throw DegenerateError("relative_deviation: member " + std::to_string(i) +
                            " has zero true error (no positive lower bound m)");
    }
    const double r = std::abs(empirical[i] - truth[i]) / std::sqrt(truth[i]);
    if (r > best.value) best = {i, r};
  }
  return best;
}

inline IndexedValue relative_deviation(const HypothesisNet& net, const Trajectory& traj,
                                       const DiscreteMeasure& pi_hat) {
  return relative_deviation(empirical_errors(net, traj.states), true_errors(net, pi_hat));
}

struct ErrorRange {
  double m = 0.0;
  double M = 0.0;
  double slack = 0.0;  ///< L_bar * radius; full-class range lies in [m - slack, M + slack]
};

inline ErrorRange class_error_range(const HypothesisNet& net, const DiscreteMeasure& pi_hat,
                                    double L_bar = 0.0) {
  if (net.members.empty()) throw DomainError("class_error_range: empty net");
  const auto tru = true_errors(net, pi_hat);
  const auto [lo, hi] = std::minmax_element(tru.begin(), tru.end());
  return {*lo, *hi, L_bar * net.radius};
}

}  // namespace wasslearn
