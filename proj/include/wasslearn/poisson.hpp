#pragma once

// Monte Carlo solution of the Poisson equation g - P g = l_h - pi(l_h)
// through the truncated series g(z) = sum_{k>=0} E_z[l_h(Z_k) - er_pi(h)].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "wasslearn/bounds.hpp"
#include "wasslearn/chain.hpp"
#include "wasslearn/hypothesis.hpp"
#include "wasslearn/learner.hpp"
#include "wasslearn/parallel.hpp"
#include "wasslearn/rng.hpp"

namespace wasslearn::bounds {

struct PoissonEstimate {
  std::vector<double> xs;      ///< evaluation grid, increasing, covering [0,1]
  std::vector<double> values;  ///< g-hat at xs
  int truncation = 0;
  std::size_t rollouts = 0;
  double mc_tolerance = 0.0;  ///< 3 B sqrt(N / R)
  double er_pi = 0.0;

  double sup_norm() const {
    double s = 0.0;
    for (double v : values) s = std::max(s, std::abs(v));
    return s;
  }

  /// Linear interpolation in x.
  double at(double x) const {
    const auto it = std::lower_bound(xs.begin(), xs.end(), x);
    if (it == xs.begin()) return values.front();
    if (it == xs.end()) return values.back();
    const std::size_t k = static_cast<std::size_t>(it - xs.begin());
    const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    return values[k - 1] + t * (values[k] - values[k - 1]);
  }
};

/// Uniform grid j / (points - 1), j = 0 .. points - 1.
inline std::vector<double> uniform_grid(int points) {
  if (points < 2) throw DomainError("uniform_grid: need at least 2 points");
  std::vector<double> xs(static_cast<std::size_t>(points));
  for (int j = 0; j < points; ++j) xs[j] = static_cast<double>(j) / (points - 1);
  return xs;
}

/// g-hat(z) = sum_{k=0}^{N} (mean over R rollouts of l_h(Z_k) - er_pi(h)) at
/// each grid point. Rollout r at grid point j draws its branch bits from the
/// stream substream(substream(seed, j), r). Throws DomainError when N is too
/// small for the requested truncation tolerance.
inline PoissonEstimate poisson_estimate(const Hypothesis& h, const ContractiveChain& chain,
                                        const DiscreteMeasure& pi_hat, const std::vector<double>& grid,
                                        int truncation, std::size_t rollouts, std::uint64_t seed,
                                        const ModelConstants& consts, double truncation_tol) {
  if (rollouts < 1) throw DomainError("poisson_estimate: rollouts must be >= 1");
  if (poisson_truncation_tail(consts, truncation) > truncation_tol) {
    throw DomainError("poisson_estimate: truncation N = " + std::to_string(truncation) +
                      " too small for tolerance; need N >= " +
                      std::to_string(poisson_truncation(consts, truncation_tol)));
  }
  PoissonEstimate est;
  est.xs = grid;
  est.values.assign(grid.size(), 0.0);
  est.truncation = truncation;
  est.rollouts = rollouts;
  est.er_pi = true_error(h, pi_hat);
  est.mc_tolerance = 3.0 * consts.B * std::sqrt(static_cast<double>(truncation) / static_cast<double>(rollouts));

  const auto& f = chain.target();
  parallel_for(grid.size(), [&](std::size_t j) {
    const std::uint64_t point_stream = substream(seed, j);
    double total = 0.0;
    for (std::size_t r = 0; r < rollouts; ++r) {
      CounterRng rng(seed, substream(point_stream, r));
      double x = grid[j];
      double path = loss(h(x), f(x));
      for (int k = 1; k <= truncation; ++k) {
        x = branch(x, rng.bit());
        path += loss(h(x), f(x));
      }
      total += path;
    }
    est.values[j] = total / static_cast<double>(rollouts) - (truncation + 1) * est.er_pi;
  });
  return est;
}

struct PoissonResidual {
  double max_residual = 0.0;
  double worst_x = 0.0;
  double interpolation_slack = 0.0;  ///< Lip(g-hat) * grid spacing
  double tolerance = 0.0;            ///< 2 mc_tolerance + interpolation_slack
};

/// max over the grid of |g(z) - (g(z_lo) + g(z_hi))/2 - (l_h(z) - er_pi(h))|,
/// children interpolated linearly between grid points.
inline PoissonResidual poisson_residual_check(const PoissonEstimate& est, const ContractiveChain& chain,
                                              const Hypothesis& h) {
  PoissonResidual out;
  double lip = 0.0;
  double spacing = 0.0;
  for (std::size_t j = 1; j < est.xs.size(); ++j) {
    const double dx = est.xs[j] - est.xs[j - 1];
    spacing = std::max(spacing, dx);
    lip = std::max(lip, std::abs(est.values[j] - est.values[j - 1]) / dx);
  }
  out.interpolation_slack = lip * spacing;
  out.tolerance = 2.0 * est.mc_tolerance + out.interpolation_slack;
  const auto& f = chain.target();
  for (std::size_t j = 0; j < est.xs.size(); ++j) {
    const double x = est.xs[j];
    const double centered = loss(h(x), f(x)) - est.er_pi;
    const double pg = 0.5 * est.at(branch(x, false)) + 0.5 * est.at(branch(x, true));
    const double r = std::abs(est.values[j] - pg - centered);
    if (r > out.max_residual) {
      out.max_residual = r;
      out.worst_x = x;
    }
  }
  return out;
}

}  // namespace wasslearn::bounds
