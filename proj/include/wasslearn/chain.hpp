#pragma once

// The two-branch chain X_{n+1} = X_n / 2 + chi_{n+1}, chi in {0, 1/2} with
// equal probability, lifted to the graph Z_n = (X_n, f(X_n)).
//
// The lift is a Markov chain on Z for every f, but it is not irreducible:
// dyadic-rational starts only ever visit dyadic rationals (see
// trajectory_exact), while irrational starts never visit a rational.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "wasslearn/error.hpp"
#include "wasslearn/measure.hpp"
#include "wasslearn/rng.hpp"
#include "wasslearn/state_space.hpp"
#include "wasslearn/transport.hpp"

namespace wasslearn {

struct ContractiveChain {
  SpaceDescriptor space;

  const TargetFunction& target() const noexcept { return space.target; }

  /// Upper bound on the one-step W1 contraction factor, sqrt(1+Lip(f)^2)/2.
  double contraction_factor() const noexcept { return target().stretch() / 2.0; }

  /// eta = 1 - sqrt(1 + Lip(f)^2) / 2.
  double eta() const noexcept { return 1.0 - contraction_factor(); }
};

inline ContractiveChain make_chain(TargetFunction f, int diameter_grid = 1024) {
  return ContractiveChain{make_space(std::move(f), diameter_grid)};
}

/// Image of x under the branch selected by `bit` (0: x/2, 1: (x+1)/2).
constexpr double branch(double x, bool bit) noexcept { return bit ? (x + 1.0) * 0.5 : x * 0.5; }

inline StatePoint step_with_bit(const ContractiveChain& chain, const StatePoint& z, bool bit) {
  return graph_point(branch(z.x, bit), chain.target());
}

inline StatePoint step(const ContractiveChain& chain, const StatePoint& z, CounterRng& rng) {
  return step_with_bit(chain, z, rng.bit());
}

struct Trajectory {
  std::vector<StatePoint> states;
  std::uint64_t seed = 0;
  std::uint64_t replication_index = 0;

  std::size_t size() const noexcept { return states.size(); }
};

/// Branch bit k of replication r is the top bit of mix3(seed, r, k), so any
/// replication can be regenerated in isolation.
inline Trajectory trajectory(const ContractiveChain& chain, const StatePoint& z0, std::size_t n,
                             std::uint64_t seed, std::uint64_t replication_index) {
  if (n < 1) throw DomainError("trajectory: n must be >= 1");
  Trajectory t{{}, seed, replication_index};
  t.states.reserve(n);
  t.states.push_back(z0);
  CounterRng rng(seed, replication_index);
  for (std::size_t k = 1; k < n; ++k) t.states.push_back(step(chain, t.states.back(), rng));
  return t;
}

/// Exact dyadic rational in [0,1): value = sum_i bits[i] * 2^-(i+1).
struct DyadicState {
  std::vector<std::uint8_t> bits;

  std::size_t length() const noexcept { return bits.size(); }

  /// Nearest double; exact while length() <= 53.
  double to_double() const noexcept {
    double v = 0.0;
    for (std::size_t i = bits.size(); i-- > 0;) v = (v + bits[i]) * 0.5;
    return v;
  }

  /// (x + bit) / 2, computed by prepending the bit.
  DyadicState advanced(bool bit) const {
    DyadicState next;
    next.bits.reserve(bits.size() + 1);
    next.bits.push_back(bit ? 1 : 0);
    next.bits.insert(next.bits.end(), bits.begin(), bits.end());
    return next;
  }

  static DyadicState from_bits(std::vector<std::uint8_t> b) {
    for (auto v : b) {
      if (v > 1) throw DomainError("DyadicState: bits must be 0 or 1");
    }
    return DyadicState{std::move(b)};
  }

  friend bool operator==(const DyadicState&, const DyadicState&) = default;
};

/// Exact trajectory of length n driven by explicit branch bits (bits.size() >= n-1).
inline std::vector<DyadicState> trajectory_exact(const DyadicState& x0, std::size_t n,
                                                 const std::vector<std::uint8_t>& branch_bits) {
  if (n < 1) throw DomainError("trajectory_exact: n must be >= 1");
  if (branch_bits.size() + 1 < n) throw DomainError("trajectory_exact: not enough branch bits");
  std::vector<DyadicState> out;
  out.reserve(n);
  out.push_back(x0);
  for (std::size_t k = 1; k < n; ++k) out.push_back(out.back().advanced(branch_bits[k - 1] != 0));
  return out;
}

/// Exact trajectory using the same branch-bit stream as trajectory().
inline std::vector<DyadicState> trajectory_exact(const DyadicState& x0, std::size_t n,
                                                 std::uint64_t seed,
                                                 std::uint64_t replication_index) {
  CounterRng rng(seed, replication_index);
  std::vector<std::uint8_t> bits(n > 0 ? n - 1 : 0);
  for (auto& b : bits) b = rng.bit() ? 1 : 0;
  return trajectory_exact(x0, n, bits);
}

inline DiscreteMeasure one_step_kernel(const ContractiveChain& chain, const StatePoint& z) {
  DiscreteMeasure m;
  m.add(step_with_bit(chain, z, false), 0.5);
  m.add(step_with_bit(chain, z, true), 0.5);
  return m;
}

inline constexpr int kMaxKernelSteps = 20;

/// P^n(z, .) by exact enumeration: atom j sits at x = (x0 + j) / 2^n with
/// weight 2^-n, j = 0 .. 2^n - 1. Duplicates are kept.
inline DiscreteMeasure n_step_kernel(const ContractiveChain& chain, const StatePoint& z, int n) {
  if (n < 1) throw DomainError("n_step_kernel: n must be >= 1");
  if (n > kMaxKernelSteps) {
    throw SizeError("n_step_kernel: n = " + std::to_string(n) + " exceeds " +
                    std::to_string(kMaxKernelSteps));
  }
  const std::uint64_t count = std::uint64_t{1} << n;
  const double w = std::ldexp(1.0, -n);
  std::vector<Atom> atoms;
  atoms.reserve(count);
  for (std::uint64_t j = 0; j < count; ++j) {
    const double x = std::ldexp(z.x + static_cast<double>(j), -n);
    atoms.push_back({graph_point(x, chain.target()), w});
  }
  return DiscreteMeasure(std::move(atoms));
}

/// mu P: every atom split into its two children, duplicates kept.
inline DiscreteMeasure pushforward(const ContractiveChain& chain, const DiscreteMeasure& mu) {
  std::vector<Atom> atoms;
  atoms.reserve(2 * mu.size());
  for (const auto& a : mu.atoms()) {
    atoms.push_back({step_with_bit(chain, a.point, false), 0.5 * a.weight});
    atoms.push_back({step_with_bit(chain, a.point, true), 0.5 * a.weight});
  }
  return DiscreteMeasure(std::move(atoms));
}

/// Midpoint discretization of the graph pushforward of Uniform[0,1].
inline DiscreteMeasure invariant_measure(const ContractiveChain& chain, int grid_size) {
  if (grid_size < 2) throw DomainError("invariant_measure: grid_size must be >= 2");
  std::vector<Atom> atoms;
  atoms.reserve(static_cast<std::size_t>(grid_size));
  const double w = 1.0 / grid_size;
  for (int j = 0; j < grid_size; ++j) {
    atoms.push_back({graph_point((j + 0.5) / grid_size, chain.target()), w});
  }
  return DiscreteMeasure(std::move(atoms));
}

/// Midpoint discretization of normalized arc length on the graph. Each cell
/// is weighted by its chord length, which converges to arc length.
inline DiscreteMeasure arc_length_measure(const ContractiveChain& chain, int grid_size) {
  if (grid_size < 2) throw DomainError("arc_length_measure: grid_size must be >= 2");
  const auto& f = chain.target();
  const int sub = 16;
  std::vector<Atom> atoms;
  atoms.reserve(static_cast<std::size_t>(grid_size));
  double total = 0.0;
  for (int j = 0; j < grid_size; ++j) {
    double len = 0.0;
    for (int s = 0; s < sub; ++s) {
      const double a = (j + static_cast<double>(s) / sub) / grid_size;
      const double b = (j + static_cast<double>(s + 1) / sub) / grid_size;
      len += rho(graph_point(a, f), graph_point(b, f));
    }
    atoms.push_back({graph_point((j + 0.5) / grid_size, f), len});
    total += len;
  }
  std::vector<Atom> normalized;
  normalized.reserve(atoms.size());
  for (auto& a : atoms) normalized.push_back({a.point, a.weight / total});
  return DiscreteMeasure(std::move(normalized));
}

/// One-step invariance defect W1(mu P, mu) for both invariant-measure
/// candidates on the same grid. Grid should be a power of two so mu P lands on
/// the doubled midpoint grid.
struct InvarianceAudit {
  double pushforward_defect = 0.0;
  double arc_length_defect = 0.0;
};

inline InvarianceAudit invariance_audit(const ContractiveChain& chain, int grid_size) {
  const auto uniform = invariant_measure(chain, grid_size);
  const auto arc = arc_length_measure(chain, grid_size);
  InvarianceAudit out;
  out.pushforward_defect = wasserstein1_exact(pushforward(chain, uniform), uniform).distance;
  out.arc_length_defect = wasserstein1_exact(pushforward(chain, arc), arc).distance;
  return out;
}

/// W1 between the graph pushforwards of P_X(x1, .) and P_X(x2, .).
inline double atom_gap(const ContractiveChain& chain, double x1, double x2) {
  const auto& f = chain.target();
  return wasserstein1_exact(one_step_kernel(chain, graph_point(x1, f)),
                            one_step_kernel(chain, graph_point(x2, f)))
      .distance;
}

struct AtomCheckResult {
  bool passed = true;
  double worst_gap = 0.0;
  double worst_y = 0.0;
  double worst_x1 = 0.0;
  double worst_x2 = 0.0;
  int probes_with_pairs = 0;
};

namespace detail {

/// Distinct preimages of y under f found on a uniform grid of `resolution`
/// points: zero runs and sign changes, refined by bisection.
inline std::vector<double> grid_preimages(const TargetFunction& f, double y, int resolution) {
  constexpr double kZero = 1e-12;
  std::vector<double> roots;
  auto at = [&](int i) { return static_cast<double>(i) / (resolution - 1); };
  int i = 0;
  while (i < resolution) {
    const double gi = f(at(i)) - y;
    if (std::abs(gi) <= kZero) {
      int k = i;
      while (k + 1 < resolution && std::abs(f(at(k + 1)) - y) <= kZero) ++k;
      roots.push_back(at(i));
      if (k > i) roots.push_back(at(k));
      i = k + 1;
      continue;
    }
    if (i + 1 < resolution) {
      const double gn = f(at(i + 1)) - y;
      if (std::abs(gn) > kZero && (gi < 0) != (gn < 0)) {
        double lo = at(i), hi = at(i + 1);
        const bool lo_neg = gi < 0;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          if ((f(mid) - y < 0) == lo_neg) lo = mid; else hi = mid;
        }
        roots.push_back(0.5 * (lo + hi));
      }
    }
    ++i;
  }
  return roots;
}

}  // namespace detail

/// Checks whether the level sets {x : f(x) = y} behave as atoms for the chain
/// lifted to the graph: for each probe y (midpoints of f's range) the kernels
/// started at two distinct preimages must agree in W1 within `tolerance`.
/// Injective f passes vacuously.
inline AtomCheckResult lemma_atom_check(const ContractiveChain& chain, const TargetFunction& target,
                                        int probe_count, double tolerance,
                                        int resolution = 4097) {
  if (probe_count < 1) throw DomainError("lemma_atom_check: probe_count must be >= 1");
  // Same two-branch kernel, lifted through the probed target.
  const ContractiveChain probe_chain{SpaceDescriptor{target, chain.space.diameter}};
  const auto [lo, hi] = target.range();
  AtomCheckResult out;
  for (int p = 0; p < probe_count; ++p) {
    const double y = lo + (p + 0.5) * (hi - lo) / probe_count;
    const auto roots = detail::grid_preimages(target, y, resolution);
    if (roots.size() < 2) continue;
    ++out.probes_with_pairs;
    for (std::size_t k = 1; k < roots.size(); ++k) {
      const double gap = atom_gap(probe_chain, roots[0], roots[k]);
      if (gap > out.worst_gap) {
        out.worst_gap = gap;
        out.worst_y = y;
        out.worst_x1 = roots[0];
        out.worst_x2 = roots[k];
      }
    }
  }
  out.passed = out.worst_gap <= tolerance;
  return out;
}

}  // namespace wasslearn
