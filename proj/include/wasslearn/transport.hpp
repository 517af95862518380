#pragma once

// Exact L1-Wasserstein distances between finitely supported measures on the
// curve, plus a quantile-coupling upper bound and a Kantorovich-Rubinstein
// lower bound.
//
// The exact solver is a primal network simplex on the complete bipartite
// transportation graph. Arc costs are never stored: reduced costs are priced
// on the fly from atom coordinates, and only the spanning-tree arcs carry
// flow (the problem is uncapacitated, so every non-tree arc sits at zero).
// Memory is therefore O(m + n) even for 4096 x 4096 instances.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "wasslearn/error.hpp"
#include "wasslearn/measure.hpp"
#include "wasslearn/rng.hpp"
#include "wasslearn/state_space.hpp"

namespace wasslearn {

/// Combined (post-merge) support cap for the exact solver.
inline constexpr std::size_t kMaxCombinedAtoms = 8192;

/// Largest side for which uniform equal-size instances go to the Hungarian
/// specialization instead of the network simplex.
inline constexpr std::size_t kHungarianMaxSide = 256;

struct TransportEntry {
  std::size_t source = 0;
  std::size_t target = 0;
  double mass = 0.0;
};

struct TransportPlan {
  std::vector<TransportEntry> entries;
  double cost = 0.0;
};

struct TransportResult {
  double distance = 0.0;
  TransportPlan plan;
};

namespace detail {

struct Coupling {
  std::vector<TransportEntry> entries;
  double cost = 0.0;
};

/// North-west-corner staircase over atoms in the given order. Produces
/// exactly m + n - 1 entries (zero masses included) forming a spanning tree.
inline std::vector<TransportEntry> northwest_corner(std::span<const double> a,
                                                    std::span<const double> b) {
  std::vector<TransportEntry> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double ra = a.empty() ? 0.0 : a[0];
  double rb = b.empty() ? 0.0 : b[0];
  while (i < a.size() && j < b.size()) {
    const bool last_row = i + 1 == a.size();
    const bool last_col = j + 1 == b.size();
    double mass = std::min(ra, rb);
    if (last_row && last_col) mass = std::max(ra, rb);
    out.push_back({i, j, std::max(mass, 0.0)});
    if (last_row && last_col) break;
    if ((ra <= rb && !last_row) || last_col) {
      rb -= ra;
      ++i;
      ra = a[i];
    } else {
      ra -= rb;
      ++j;
      rb = b[j];
    }
  }
  return out;
}

template <typename Cost>
class NetworkSimplex {
 public:
  NetworkSimplex(std::span<const double> supply, std::span<const double> demand, Cost cost)
      : m_(supply.size()),
        n_(demand.size()),
        cost_(std::move(cost)),
        parent_(m_ + n_, -1),
        flow_(m_ + n_, 0.0),
        pot_(m_ + n_, 0.0),
        depth_(m_ + n_, 0),
        first_child_(m_ + n_, -1),
        next_sib_(m_ + n_, -1),
        prev_sib_(m_ + n_, -1) {
    build_initial_tree(northwest_corner(supply, demand));
  }

  Coupling solve() {
    const std::size_t total = m_ * n_;
    const std::size_t block =
        std::max<std::size_t>(16, static_cast<std::size_t>(std::sqrt(static_cast<double>(total))));
    const std::size_t max_pivots = 200 * (m_ + n_) + 10000;
    std::size_t next = 0;
    std::size_t pivots = 0;
    for (;;) {
      double best = -kReducedCostTol;
      std::size_t bi = 0;
      std::size_t bj = 0;
      bool found = false;
      std::size_t in_block = 0;
      for (std::size_t scanned = 0; scanned < total; ++scanned) {
        const std::size_t k = next;
        next = next + 1 == total ? 0 : next + 1;
        const std::size_t i = k / n_;
        const std::size_t j = k % n_;
        const double rc = cost_(i, j) - pot_[i] - pot_[m_ + j];
        if (rc < best) {
          best = rc;
          bi = i;
          bj = j;
          found = true;
        }
        if (++in_block == block) {
          if (found) break;
          in_block = 0;
        }
      }
      if (!found) break;
      pivot(static_cast<int>(bi), static_cast<int>(m_ + bj));
      if (++pivots > max_pivots) {
        throw std::runtime_error("network simplex exceeded pivot budget");
      }
    }
    return extract();
  }

 private:
  static constexpr double kReducedCostTol = 1e-12;

  bool is_source(int v) const noexcept { return static_cast<std::size_t>(v) < m_; }

  double arc_cost(int a, int b) const {
    // One endpoint is a source, the other a sink.
    return is_source(a) ? cost_(static_cast<std::size_t>(a), static_cast<std::size_t>(b) - m_)
                        : cost_(static_cast<std::size_t>(b), static_cast<std::size_t>(a) - m_);
  }

  void link_child(int p, int c) {
    parent_[c] = p;
    prev_sib_[c] = -1;
    next_sib_[c] = first_child_[p];
    if (first_child_[p] >= 0) prev_sib_[first_child_[p]] = c;
    first_child_[p] = c;
  }

  void unlink_child(int c) {
    const int p = parent_[c];
    if (p < 0) return;
    if (prev_sib_[c] >= 0) {
      next_sib_[prev_sib_[c]] = next_sib_[c];
    } else {
      first_child_[p] = next_sib_[c];
    }
    if (next_sib_[c] >= 0) prev_sib_[next_sib_[c]] = prev_sib_[c];
    prev_sib_[c] = next_sib_[c] = -1;
    parent_[c] = -1;
  }

  void build_initial_tree(const std::vector<TransportEntry>& arcs) {
    const std::size_t nodes = m_ + n_;
    std::vector<std::vector<std::pair<int, double>>> adj(nodes);
    for (const auto& e : arcs) {
      const int s = static_cast<int>(e.source);
      const int t = static_cast<int>(m_ + e.target);
      adj[s].push_back({t, e.mass});
      adj[t].push_back({s, e.mass});
    }
    std::vector<char> seen(nodes, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const auto& [w, mass] : adj[v]) {
        if (seen[w]) continue;
        seen[w] = 1;
        link_child(v, w);
        flow_[w] = mass;
        depth_[w] = depth_[v] + 1;
        pot_[w] = arc_cost(v, w) - pot_[v];
        stack.push_back(w);
      }
    }
  }

  void pivot(int src, int snk) {
    // Apex of the cycle closed by the entering arc (src, snk).
    int a = src;
    int b = snk;
    while (a != b) {
      if (depth_[a] > depth_[b]) {
        a = parent_[a];
      } else if (depth_[b] > depth_[a]) {
        b = parent_[b];
      } else {
        a = parent_[a];
        b = parent_[b];
      }
    }
    const int apex = a;

    // Cycle orientation: apex -> ... -> src -> snk -> ... -> apex. Tree arcs
    // are named by their child node. On the source side an arc loses flow when
    // its child is a source; on the sink side when its child is a sink.
    src_path_.clear();
    for (int v = src; v != apex; v = parent_[v]) src_path_.push_back(v);
    snk_path_.clear();
    for (int v = snk; v != apex; v = parent_[v]) snk_path_.push_back(v);

    double theta = std::numeric_limits<double>::infinity();
    int leaving = -1;
    bool leaving_on_src_side = false;
    for (auto it = src_path_.rbegin(); it != src_path_.rend(); ++it) {
      if (is_source(*it) && flow_[*it] <= theta) {
        theta = flow_[*it];
        leaving = *it;
        leaving_on_src_side = true;
      }
    }
    for (int v : snk_path_) {
      if (!is_source(v) && flow_[v] <= theta) {
        theta = flow_[v];
        leaving = v;
        leaving_on_src_side = false;
      }
    }

    for (int v : src_path_) flow_[v] += is_source(v) ? -theta : theta;
    for (int v : snk_path_) flow_[v] += is_source(v) ? theta : -theta;
    for (int v : src_path_) flow_[v] = std::max(flow_[v], 0.0);
    for (int v : snk_path_) flow_[v] = std::max(flow_[v], 0.0);

    const int u_in = leaving_on_src_side ? src : snk;
    const int u_out = leaving_on_src_side ? snk : src;

    // Reverse the stem u_in -> ... -> leaving and hang it below u_out.
    stem_.clear();
    for (int v = u_in;; v = parent_[v]) {
      stem_.push_back(v);
      if (v == leaving) break;
    }
    stem_flow_.assign(stem_.size(), 0.0);
    for (std::size_t t = 0; t < stem_.size(); ++t) stem_flow_[t] = flow_[stem_[t]];
    for (int v : stem_) unlink_child(v);
    link_child(u_out, stem_[0]);
    flow_[stem_[0]] = theta;
    for (std::size_t t = 1; t < stem_.size(); ++t) {
      link_child(stem_[t - 1], stem_[t]);
      flow_[stem_[t]] = stem_flow_[t - 1];
    }

    // Shift potentials of the moved subtree so the entering arc is tight.
    const double target_pot = arc_cost(u_out, u_in) - pot_[u_out];
    const double delta = target_pot - pot_[u_in];
    const bool in_is_source = is_source(u_in);
    walk_.clear();
    walk_.push_back(u_in);
    depth_[u_in] = depth_[u_out] + 1;
    while (!walk_.empty()) {
      const int v = walk_.back();
      walk_.pop_back();
      pot_[v] += (is_source(v) == in_is_source) ? delta : -delta;
      for (int c = first_child_[v]; c >= 0; c = next_sib_[c]) {
        depth_[c] = depth_[v] + 1;
        walk_.push_back(c);
      }
    }
  }

  Coupling extract() const {
    Coupling out;
    for (std::size_t v = 0; v < m_ + n_; ++v) {
      const int p = parent_[v];
      if (p < 0 || flow_[v] <= 0.0) continue;
      const int s = is_source(static_cast<int>(v)) ? static_cast<int>(v) : p;
      const int t = is_source(static_cast<int>(v)) ? p : static_cast<int>(v);
      const std::size_t si = static_cast<std::size_t>(s);
      const std::size_t tj = static_cast<std::size_t>(t) - m_;
      out.entries.push_back({si, tj, flow_[v]});
      out.cost += flow_[v] * cost_(si, tj);
    }
    return out;
  }

  std::size_t m_;
  std::size_t n_;
  Cost cost_;
  std::vector<int> parent_;
  std::vector<double> flow_;
  std::vector<double> pot_;
  std::vector<int> depth_;
  std::vector<int> first_child_;
  std::vector<int> next_sib_;
  std::vector<int> prev_sib_;
  std::vector<int> src_path_;
  std::vector<int> snk_path_;
  std::vector<int> stem_;
  std::vector<double> stem_flow_;
  std::vector<int> walk_;
};

/// Min-cost perfect matching on an n x n cost matrix (shortest augmenting
/// paths with potentials). Returns assignment[row] = column.
template <typename Cost>
std::vector<std::size_t> hungarian(std::size_t n, Cost cost) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

inline bool is_uniform(const DiscreteMeasure& mu) {
  const double w0 = mu[0].weight;
  return std::all_of(mu.atoms().begin(), mu.atoms().end(),
                     [w0](const Atom& a) { return std::abs(a.weight - w0) <= 1e-15; });
}

inline std::vector<double> weights_of(const DiscreteMeasure& mu) {
  std::vector<double> w;
  w.reserve(mu.size());
  for (const auto& a : mu.atoms()) w.push_back(a.weight);
  return w;
}

/// Splits a plan over merged atoms back onto the original atom indices,
/// proportionally to the original weights.
inline std::vector<TransportEntry> unmerge(const std::vector<TransportEntry>& entries,
                                           const DiscreteMeasure& mu, const MergedMeasure& mm,
                                           const DiscreteMeasure& nu, const MergedMeasure& nm) {
  std::vector<TransportEntry> out;
  for (const auto& e : entries) {
    const auto& gs = mm.groups[e.source];
    const auto& gt = nm.groups[e.target];
    const double ws = mm.measure[e.source].weight;
    const double wt = nm.measure[e.target].weight;
    for (std::size_t s : gs) {
      for (std::size_t t : gt) {
        out.push_back({s, t, e.mass * (mu[s].weight / ws) * (nu[t].weight / wt)});
      }
    }
  }
  return out;
}

}  // namespace detail

/// Exact W1 under the Euclidean ground metric. Duplicate atoms are merged
/// before solving; the returned plan indexes the caller's original atoms.
inline TransportResult wasserstein1_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  mu.require_normalized();
  nu.require_normalized();
  const MergedMeasure mm = merge_duplicates(mu);
  const MergedMeasure nm = merge_duplicates(nu);
  const DiscreteMeasure& a = mm.measure;
  const DiscreteMeasure& b = nm.measure;
  if (a.size() + b.size() > kMaxCombinedAtoms) {
    throw SizeError("wasserstein1_exact: combined support " + std::to_string(a.size() + b.size()) +
                    " exceeds cap " + std::to_string(kMaxCombinedAtoms) +
                    "; coarsen by quantile binning first");
  }
  auto cost = [&a, &b](std::size_t i, std::size_t j) { return rho(a[i].point, b[j].point); };

  detail::Coupling coupling;
  if (a.size() == b.size() && a.size() <= kHungarianMaxSide && detail::is_uniform(a) &&
      detail::is_uniform(b)) {
    const auto assignment = detail::hungarian(a.size(), cost);
    const double w = 1.0 / static_cast<double>(a.size());
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      coupling.entries.push_back({i, assignment[i], w});
      coupling.cost += w * cost(i, assignment[i]);
    }
  } else {
    const auto wa = detail::weights_of(a);
    const auto wb = detail::weights_of(b);
    detail::NetworkSimplex solver(std::span<const double>(wa), std::span<const double>(wb), cost);
    coupling = solver.solve();
  }

  TransportResult out;
  out.plan.entries = detail::unmerge(coupling.entries, mu, mm, nu, nm);
  out.plan.cost = coupling.cost;
  out.distance = coupling.cost;
  return out;
}

/// Cost of the coupling that matches atoms in increasing x order.
inline double wasserstein1_monotone_upper(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const DiscreteMeasure a = mu.sorted_by_x();
  const DiscreteMeasure b = nu.sorted_by_x();
  const auto wa = detail::weights_of(a);
  const auto wb = detail::weights_of(b);
  double cost = 0.0;
  for (const auto& e : detail::northwest_corner(wa, wb)) {
    cost += e.mass * rho(a[e.source].point, b[e.target].point);
  }
  return cost;
}

/// Residuals of a plan against its marginals and its claimed cost.
struct PlanCheck {
  double max_row_error = 0.0;
  double max_col_error = 0.0;
  double cost_error = 0.0;
};

inline PlanCheck check_plan(const TransportPlan& plan, const DiscreteMeasure& mu,
                            const DiscreteMeasure& nu) {
  std::vector<double> rows(mu.size(), 0.0), cols(nu.size(), 0.0);
  double cost = 0.0;
  for (const auto& e : plan.entries) {
    rows[e.source] += e.mass;
    cols[e.target] += e.mass;
    cost += e.mass * rho(mu[e.source].point, nu[e.target].point);
  }
  PlanCheck c;
  for (std::size_t i = 0; i < rows.size(); ++i)
    c.max_row_error = std::max(c.max_row_error, std::abs(rows[i] - mu[i].weight));
  for (std::size_t j = 0; j < cols.size(); ++j)
    c.max_col_error = std::max(c.max_col_error, std::abs(cols[j] - nu[j].weight));
  c.cost_error = std::abs(cost - plan.cost) / std::max(1.0, std::abs(plan.cost));
  return c;
}

/// Kantorovich-Rubinstein lower bound: the best |mu(g) - nu(g)| over random
/// 1-Lipschitz witnesses. Each witness is a random walk in the arc order of
/// the joint support, McShane-projected so it is 1-Lipschitz in rho. Half of
/// the witnesses are distance functions rho(., a) to a random support atom.
inline double kr_dual_lower(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                            int witness_count, CounterRng& rng) {
  if (witness_count < 1) throw DomainError("kr_dual_lower: witness_count must be >= 1");
  std::vector<StatePoint> support;
  support.reserve(mu.size() + nu.size());
  for (const auto& a : mu.atoms()) support.push_back(a.point);
  for (const auto& a : nu.atoms()) support.push_back(a.point);
  std::sort(support.begin(), support.end(),
            [](const StatePoint& p, const StatePoint& q) { return p.x < q.x; });

  const std::size_t k = support.size();
  std::vector<double> raw(k), proj(k);
  auto evaluate = [&](const StatePoint& z) {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) g = std::min(g, proj[i] + rho(z, support[i]));
    return g;
  };

  double best = 0.0;
  for (int w = 0; w < witness_count; ++w) {
    if (w % 2 == 1) {
      const StatePoint anchor = support[rng.below(k)];
      const auto dist = [&anchor](const StatePoint& z) { return rho(z, anchor); };
      best = std::max(best, std::abs(mu.integrate(dist) - nu.integrate(dist)));
      continue;
    }
    raw[0] = 0.0;
    for (std::size_t i = 1; i < k; ++i) {
      raw[i] = raw[i - 1] + rng.uniform(-1.0, 1.0) * rho(support[i - 1], support[i]);
    }
    // McShane: proj = min_j raw_j + rho(., support_j) is 1-Lipschitz and
    // agrees with raw wherever raw already was.
    for (std::size_t i = 0; i < k; ++i) {
      double g = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < k; ++j) g = std::min(g, raw[j] + rho(support[i], support[j]));
      proj[i] = g;
    }
    best = std::max(best, std::abs(mu.integrate(evaluate) - nu.integrate(evaluate)));
  }
  return best;
}

}  // namespace wasslearn
