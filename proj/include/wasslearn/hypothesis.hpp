#pragma once

// Hypothesis classes on [0,1] with bounded range, their metrics, and
// constructive epsilon-nets in the sup metric.
//
// A hypothesis is the piecewise-linear interpolant of values on a uniform knot
// grid t_k = k / (K - 1); a single knot means a constant function.
//
// Net construction for Lipschitz classes: with knot spacing s <= eps/(2 Lip)
// and value lattice step q = Lip * s, rounding a class member's knot values to
// the lattice moves each knot by at most q/2 (q for clamped anchored lattices)
// and keeps adjacent lattice indices within one step, so the rounded sequence
// is itself Lipschitz-feasible. Interpolation adds at most Lip * s / 2, giving
// a certified sup radius <= 3 eps / 4.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wasslearn/error.hpp"
#include "wasslearn/rng.hpp"

namespace wasslearn {

enum class ClassKind { constants, lipschitz, lipschitz_anchored };
enum class MetricTag { sup, l1, lipschitz };

inline std::string to_string(ClassKind k) {
  switch (k) {
    case ClassKind::constants: return "constants";
    case ClassKind::lipschitz: return "lipschitz";
    case ClassKind::lipschitz_anchored: return "lipschitz_anchored";
  }
  return "?";
}

inline std::string to_string(MetricTag m) {
  switch (m) {
    case MetricTag::sup: return "sup";
    case MetricTag::l1: return "l1";
    case MetricTag::lipschitz: return "lipschitz";
  }
  return "?";
}

inline ClassKind parse_class_kind(const std::string& s) {
  if (s == "constants") return ClassKind::constants;
  if (s == "lipschitz") return ClassKind::lipschitz;
  if (s == "lipschitz_anchored") return ClassKind::lipschitz_anchored;
  throw DomainError("unknown hypothesis class kind: " + s);
}

inline MetricTag parse_metric_tag(const std::string& s) {
  if (s == "sup") return MetricTag::sup;
  if (s == "l1") return MetricTag::l1;
  if (s == "lipschitz") return MetricTag::lipschitz;
  throw DomainError("unknown metric tag: " + s);
}

struct HypothesisClass {
  ClassKind kind = ClassKind::constants;
  double y_lo = 0.0;
  double y_hi = 1.0;
  double lip_bound = 0.0;
  std::optional<std::pair<double, double>> anchor;

  static HypothesisClass constants(double lo, double hi) {
    return validated({ClassKind::constants, lo, hi, 0.0, std::nullopt});
  }
  static HypothesisClass lipschitz(double lo, double hi, double lip) {
    return validated({ClassKind::lipschitz, lo, hi, lip, std::nullopt});
  }
  static HypothesisClass lipschitz_anchored(double lo, double hi, double lip, double x0, double y0) {
    return validated({ClassKind::lipschitz_anchored, lo, hi, lip, std::pair{x0, y0}});
  }

  static HypothesisClass validated(HypothesisClass c) {
    if (!std::isfinite(c.y_lo) || !std::isfinite(c.y_hi) || c.y_lo > c.y_hi) {
      throw DomainError("hypothesis class range must be a bounded interval");
    }
    if (!(c.lip_bound >= 0.0) || !std::isfinite(c.lip_bound)) {
      throw DomainError("hypothesis class Lipschitz bound must be finite and >= 0");
    }
    if (c.kind == ClassKind::constants && c.lip_bound != 0.0) {
      throw DomainError("constants class must have Lipschitz bound 0");
    }
    if (c.kind == ClassKind::lipschitz_anchored) {
      if (!c.anchor) throw DomainError("anchored class needs an anchor");
      const auto [x0, y0] = *c.anchor;
      if (x0 < 0.0 || x0 > 1.0 || y0 < c.y_lo || y0 > c.y_hi) {
        throw DomainError("anchor must lie in [0,1] x [y_lo, y_hi]");
      }
    }
    return c;
  }

  double range_width() const noexcept { return y_hi - y_lo; }
};

class Hypothesis {
 public:
  Hypothesis() = default;
  explicit Hypothesis(std::vector<double> knot_values) : knots_(std::move(knot_values)) {
    if (knots_.empty()) throw DomainError("hypothesis needs at least one knot");
  }

  static Hypothesis constant(double c) { return Hypothesis({c}); }

  std::size_t knot_count() const noexcept { return knots_.size(); }
  const std::vector<double>& knot_values() const noexcept { return knots_; }

  double spacing() const noexcept {
    return knots_.size() > 1 ? 1.0 / static_cast<double>(knots_.size() - 1) : 1.0;
  }

  double operator()(double x) const noexcept {
    if (knots_.size() == 1) return knots_[0];
    const double pos = std::clamp(x, 0.0, 1.0) * static_cast<double>(knots_.size() - 1);
    const std::size_t k = std::min(static_cast<std::size_t>(pos), knots_.size() - 2);
    const double t = pos - static_cast<double>(k);
    return knots_[k] + t * (knots_[k + 1] - knots_[k]);
  }

  /// Largest |slope| between adjacent knots.
  double max_slope() const noexcept {
    double s = 0.0;
    for (std::size_t k = 1; k < knots_.size(); ++k) {
      s = std::max(s, std::abs(knots_[k] - knots_[k - 1]) / spacing());
    }
    return s;
  }

 private:
  std::vector<double> knots_;
};

/// True when h satisfies range, slope and anchor constraints of `cls`
/// (slopes within `slope_tol`).
inline bool in_class(const Hypothesis& h, const HypothesisClass& cls, double slope_tol = 1e-12) {
  for (double v : h.knot_values()) {
    if (v < cls.y_lo || v > cls.y_hi) return false;
  }
  if (cls.kind == ClassKind::constants) return h.knot_count() == 1;
  if (h.max_slope() > cls.lip_bound + slope_tol) return false;
  if (cls.anchor) {
    if (std::abs(h(cls.anchor->first) - cls.anchor->second) > 1e-12) return false;
  }
  return true;
}

/// sup: max |h1 - h2| (attained at knots for a shared grid); l1: exact
/// integral of |h1 - h2| over [0,1]; lipschitz: sup plus max slope gap.
inline double class_metric(const Hypothesis& h1, const Hypothesis& h2, MetricTag tag) {
  if (h1.knot_count() != h2.knot_count()) {
    throw GridMismatchError("class_metric: hypotheses use different knot grids");
  }
  const auto& a = h1.knot_values();
  const auto& b = h2.knot_values();
  double sup = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sup = std::max(sup, std::abs(a[k] - b[k]));
  if (tag == MetricTag::sup) return sup;
  if (tag == MetricTag::l1) {
    if (a.size() == 1) return sup;
    const double s = h1.spacing();
    double total = 0.0;
    for (std::size_t k = 1; k < a.size(); ++k) {
      const double d0 = a[k - 1] - b[k - 1];
      const double d1 = a[k] - b[k];
      if ((d0 >= 0) == (d1 >= 0)) {
        total += 0.5 * s * (std::abs(d0) + std::abs(d1));
      } else {
        total += 0.5 * s * (d0 * d0 + d1 * d1) / (std::abs(d0) + std::abs(d1));
      }
    }
    return total;
  }
  double slope_gap = 0.0;
  for (std::size_t k = 1; k < a.size(); ++k) {
    slope_gap = std::max(slope_gap, std::abs((a[k] - a[k - 1]) - (b[k] - b[k - 1])) / h1.spacing());
  }
  return sup + slope_gap;
}

struct HypothesisNet {
  std::vector<Hypothesis> members;
  double radius = 0.0;            ///< requested covering radius eps
  double certified_radius = 0.0;  ///< radius guaranteed by construction (<= radius)
  MetricTag metric = MetricTag::sup;
  std::size_t knot_count = 1;

  std::size_t size() const noexcept { return members.size(); }
};

inline constexpr double kMaxNetMembers = 1e7;

namespace detail {

/// Value lattice for one class at one resolution.
struct Lattice {
  double offset = 0.0;  ///< value of index 0
  double step = 0.0;
  long jmin = 0;
  long jmax = 0;
  double lo = 0.0;
  double hi = 0.0;

  double value(long j) const { return std::clamp(offset + static_cast<double>(j) * step, lo, hi); }
};

/// Smallest K - 1 >= intervals with x0 * (K - 1) integral, so x0 is a knot.
inline std::size_t anchored_intervals(double x0, std::size_t intervals) {
  for (std::size_t m = intervals; m <= 64 * intervals; ++m) {
    const double pos = x0 * static_cast<double>(m);
    if (std::abs(pos - std::round(pos)) <= 1e-9) return m;
  }
  throw DomainError("anchored class: anchor x0 cannot be placed on a knot grid; use a rational x0");
}

}  // namespace detail

/// Constructive sup-metric net (see file comment). Throws SizeError when the
/// member count would exceed 1e7.
inline HypothesisNet build_epsilon_net(const HypothesisClass& cls, double eps,
                                       MetricTag metric = MetricTag::sup) {
  if (!(eps > 0.0)) throw DomainError("build_epsilon_net: eps must be > 0");
  if (metric != MetricTag::sup) {
    throw DomainError("build_epsilon_net: nets are constructed in the sup metric only");
  }
  HypothesisNet net;
  net.radius = eps;
  net.metric = metric;
  const double width = cls.range_width();

  if (cls.kind == ClassKind::constants || cls.lip_bound == 0.0) {
    const long cells = std::max(1L, static_cast<long>(std::ceil(width / eps - 1e-12)));
    const double q = width / static_cast<double>(cells);
    if (static_cast<double>(cells) > kMaxNetMembers) throw SizeError("epsilon net too large");
    for (long j = 0; j < cells; ++j) net.members.push_back(Hypothesis::constant(cls.y_lo + (j + 0.5) * q));
    net.certified_radius = q / 2.0;
    net.knot_count = 1;
    return net;
  }

  const double lip = cls.lip_bound;
  std::size_t intervals = static_cast<std::size_t>(std::ceil(2.0 * lip / eps - 1e-12));
  intervals = std::max<std::size_t>(intervals, 1);
  std::size_t anchor_knot = 0;
  if (cls.kind == ClassKind::lipschitz_anchored) {
    intervals = detail::anchored_intervals(cls.anchor->first, intervals);
    anchor_knot = static_cast<std::size_t>(std::lround(cls.anchor->first * static_cast<double>(intervals)));
  }
  const std::size_t knots = intervals + 1;
  const double spacing = 1.0 / static_cast<double>(intervals);
  const double q = lip * spacing;

  detail::Lattice lat;
  lat.step = q;
  lat.lo = cls.y_lo;
  lat.hi = cls.y_hi;
  if (cls.kind == ClassKind::lipschitz_anchored) {
    const double y0 = cls.anchor->second;
    lat.offset = y0;
    lat.jmin = -static_cast<long>(std::floor((y0 - cls.y_lo) / q + 1e-12));
    lat.jmax = static_cast<long>(std::floor((cls.y_hi - y0) / q + 1e-12));
    net.certified_radius = lip * spacing / 2.0 + q;
  } else {
    lat.offset = cls.y_lo + q / 2.0;
    lat.jmin = 0;
    lat.jmax = std::max(0L, static_cast<long>(std::ceil(width / q - 1e-12)) - 1);
    net.certified_radius = lip * spacing / 2.0 + q / 2.0;
  }
  const long levels = lat.jmax - lat.jmin + 1;

  // Count paths with |dj| <= 1 (anchor pinned to j = 0) before enumerating.
  auto allowed = [&](std::size_t k, long j) {
    return cls.kind != ClassKind::lipschitz_anchored || k != anchor_knot || j == 0;
  };
  std::vector<double> ways(static_cast<std::size_t>(levels), 0.0);
  for (long j = lat.jmin; j <= lat.jmax; ++j) ways[j - lat.jmin] = allowed(0, j) ? 1.0 : 0.0;
  for (std::size_t k = 1; k < knots; ++k) {
    std::vector<double> next(ways.size(), 0.0);
    for (long j = lat.jmin; j <= lat.jmax; ++j) {
      if (!allowed(k, j)) continue;
      const std::size_t idx = static_cast<std::size_t>(j - lat.jmin);
      double s = ways[idx];
      if (idx > 0) s += ways[idx - 1];
      if (idx + 1 < ways.size()) s += ways[idx + 1];
      next[idx] = s;
    }
    ways = std::move(next);
  }
  double total = 0.0;
  for (double w : ways) total += w;
  if (total > kMaxNetMembers) {
    throw SizeError("epsilon net would have " + std::to_string(total) + " members (cap 1e7)");
  }

  net.knot_count = knots;
  net.members.reserve(static_cast<std::size_t>(total));
  std::vector<long> path(knots);
  std::vector<double> values(knots);
  auto dfs = [&](auto&& self, std::size_t k) -> void {
    if (k == knots) {
      for (std::size_t i = 0; i < knots; ++i) values[i] = lat.value(path[i]);
      net.members.emplace_back(values);
      return;
    }
    long lo = lat.jmin, hi = lat.jmax;
    if (k > 0) {
      lo = std::max(lo, path[k - 1] - 1);
      hi = std::min(hi, path[k - 1] + 1);
    }
    for (long j = lo; j <= hi; ++j) {
      if (!allowed(k, j)) continue;
      path[k] = j;
      self(self, k + 1);
    }
  };
  dfs(dfs, 0);
  return net;
}

/// Random class member on the net's knot grid: a random walk in the
/// admissible slope band, clamped to the range (clamping keeps it Lipschitz).
inline Hypothesis random_member(const HypothesisClass& cls, std::size_t knot_count, CounterRng& rng) {
  if (cls.kind == ClassKind::constants || knot_count == 1) {
    return Hypothesis::constant(rng.uniform(cls.y_lo, cls.y_hi));
  }
  const double spacing = 1.0 / static_cast<double>(knot_count - 1);
  const double max_step = cls.lip_bound * spacing;
  std::vector<double> v(knot_count);
  auto walk = [&](double prev) {
    const double u = rng.uniform();
    // Favor extreme slopes: they are the hardest members to cover.
    const double step = u < 0.25 ? -max_step : (u < 0.5 ? max_step : rng.uniform(-max_step, max_step));
    return std::clamp(prev + step, cls.y_lo, cls.y_hi);
  };
  if (cls.kind == ClassKind::lipschitz_anchored) {
    const std::size_t a =
        static_cast<std::size_t>(std::lround(cls.anchor->first * static_cast<double>(knot_count - 1)));
    v[a] = cls.anchor->second;
    for (std::size_t k = a + 1; k < knot_count; ++k) v[k] = walk(v[k - 1]);
    for (std::size_t k = a; k-- > 0;) v[k] = walk(v[k + 1]);
  } else {
    v[0] = rng.uniform(cls.y_lo, cls.y_hi);
    for (std::size_t k = 1; k < knot_count; ++k) v[k] = walk(v[k - 1]);
  }
  return Hypothesis(std::move(v));
}

/// Index of the member nearest to h, and that distance.
inline std::pair<std::size_t, double> nearest_member(const HypothesisNet& net, const Hypothesis& h) {
  std::size_t best_i = 0;
  double best = INFINITY;
  for (std::size_t i = 0; i < net.members.size(); ++i) {
    const double d = class_metric(net.members[i], h, net.metric);
    if (d < best) {
      best = d;
      best_i = i;
    }
  }
  return {best_i, best};
}

/// max over random probes of the distance to the nearest member.
inline double net_covering_probe(const HypothesisNet& net, const HypothesisClass& cls,
                                 int probe_count, CounterRng& rng) {
  if (probe_count < 1) throw DomainError("net_covering_probe: probe_count must be >= 1");
  if (net.members.empty()) throw DomainError("net_covering_probe: empty net");
  double worst = 0.0;
  for (int p = 0; p < probe_count; ++p) {
    const Hypothesis h = random_member(cls, net.knot_count, rng);
    worst = std::max(worst, nearest_member(net, h).second);
  }
  return worst;
}

struct CoveringBound {
  double log_value = 0.0;  ///< log2 for the BV bound, natural log for Hoelder
  double value = 0.0;      ///< may be +inf when the exponent overflows
};

/// Bounded-variation classes: N <= 2^(13 V T / eps).
inline CoveringBound covering_bound_bkp(double V, double T, double eps) {
  if (!(eps > 0.0) || !(V > 0.0) || !(T > 0.0)) throw DomainError("covering_bound_bkp: arguments must be > 0");
  const double e = 13.0 * V * T / eps;
  return {e, std::exp2(e)};
}

/// Hoelder classes on a d-dimensional compact domain: N <= exp(C eps^(-2d/gamma)).
inline CoveringBound covering_bound_holder(double C, int d, double gamma, double eps) {
  if (!(eps > 0.0) || !(C > 0.0) || d < 1 || !(gamma > 0.0 && gamma <= 1.0)) {
    throw DomainError("covering_bound_holder: need C > 0, d >= 1, gamma in (0,1], eps > 0");
  }
  const double e = C * std::pow(eps, -2.0 * d / gamma);
  return {e, std::exp(e)};
}

}  // namespace wasslearn
