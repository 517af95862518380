#pragma once

// Closed-form constants, tail bounds and sample complexities.
//
// Ergodicity constants come from iterating the one-step contraction:
//   W1(P^n(z,.), pi) <= (1 - eta)^n W1(delta_z, pi) <= diam(Z) e^{-C2 n}
// with C1 = diam(Z) and C2 = -ln(1 - eta), so 1 - e^{-C2} = eta.
//
// Bounds are returned raw (possibly > 1) together with a validity flag for
// the sample-size threshold under which the displayed inequality is proven.
// Covering numbers enter as explicit arguments in log form so Hoelder-type
// covers exp(C eps^{-2d/gamma}) do not overflow.

#include <algorithm>
#include <cmath>
#include <optional>

#include "wasslearn/error.hpp"
#include "wasslearn/loss.hpp"

namespace wasslearn::bounds {

struct ModelConstants {
  double eta = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double L = 0.0;
  double L_bar = 0.0;
  double B = 0.0;
  std::optional<double> m;
  std::optional<double> M;

  /// 1 - e^{-C2}.
  double rate() const noexcept { return -std::expm1(-C2); }
  double C1L() const noexcept { return C1 * L; }
};

struct ErgodicityConstants {
  double C1 = 0.0;
  double C2 = 0.0;
};

inline ErgodicityConstants ergodicity_constants(double eta, double diam) {
  if (!(eta > 0.0 && eta < 1.0)) throw DomainError("ergodicity_constants: eta must lie in (0,1)");
  if (!(diam > 0.0)) throw DomainError("ergodicity_constants: diam must be > 0");
  return {diam, -std::log1p(-eta)};
}

inline ModelConstants make_constants(double eta, double diam, const LossConstants& loss,
                                     std::optional<double> m = std::nullopt,
                                     std::optional<double> M = std::nullopt) {
  const auto e = ergodicity_constants(eta, diam);
  ModelConstants c{eta, e.C1, e.C2, loss.L, loss.L_bar, loss.B, m, M};
  if (m && M && *m > *M) throw DomainError("model constants: m must not exceed M");
  return c;
}

/// Covering number carried as its natural log.
struct Covering {
  double log_n = 0.0;

  static Covering count(double n) {
    if (!(n >= 1.0)) throw DomainError("covering number must be >= 1");
    return {std::log(n)};
  }
  static Covering log(double log_n) {
    if (!(log_n >= 0.0)) throw DomainError("log covering number must be >= 0");
    return {log_n};
  }
  double value() const noexcept { return std::exp(log_n); }
};

struct TailBound {
  double bound = 0.0;
  double log_bound = 0.0;
  bool valid = false;
  double threshold = 0.0;  ///< smallest n for which the inequality is proven
};

/// P(|er_n(h) - er_pi(h)| > eps) <= exp(-(eps n rate / (2 C1 L) - 2)^2 / (2n)),
/// proven for n >= 4 C1 L / (eps rate).
inline TailBound single_h_tail_bound(double eps, double n, const ModelConstants& c) {
  if (!(eps > 0.0) || !(n >= 1.0)) throw DomainError("single_h_tail_bound: need eps > 0, n >= 1");
  const double a = eps * n * c.rate() / (2.0 * c.C1L()) - 2.0;
  TailBound t;
  t.log_bound = -a * a / (2.0 * n);
  t.bound = std::exp(t.log_bound);
  t.threshold = 4.0 * c.C1L() / (eps * c.rate());
  t.valid = n >= t.threshold;
  return t;
}

/// P(sup_h |er_n(h) - er_pi(h)| > eps)
///   <= N(eps / (4 L_bar)) exp(-(eps n rate / (4 C1 L) - 2)^2 / (2n)),
/// proven for n >= 8 C1 L / (eps rate).
inline TailBound uniform_tail_bound(double eps, double n, const ModelConstants& c, Covering cover) {
  if (!(eps > 0.0) || !(n >= 1.0)) throw DomainError("uniform_tail_bound: need eps > 0, n >= 1");
  const double a = eps * n * c.rate() / (4.0 * c.C1L()) - 2.0;
  TailBound t;
  t.log_bound = cover.log_n - a * a / (2.0 * n);
  t.bound = std::exp(t.log_bound);
  t.threshold = 8.0 * c.C1L() / (eps * c.rate());
  t.valid = n >= t.threshold;
  return t;
}

struct SampleSize {
  double first_term = 0.0;
  double second_term = 0.0;
  double n = 0.0;  ///< ceil(max(first_term, second_term)); integral-valued
  bool eps_prime_flag = false;  ///< m^{3/2} eps / (M + 6m) >= 2m/3 (outside the proof's range)
};

/// Sample size of the ASEM guarantee, with cover = N(eps / (4 L_bar)).
inline SampleSize n1(double eps, double delta, const ModelConstants& c, Covering cover) {
  if (!(eps > 0.0)) throw DomainError("n1: eps must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("n1: delta must lie in (0,1)");
  const double r = c.rate();
  SampleSize s;
  s.first_term = 16.0 * c.C1L() / (eps * r);
  s.second_term = 128.0 * c.C1L() * c.C1L() * (cover.log_n - std::log(delta)) / (eps * eps * r * r);
  s.n = std::ceil(std::max(s.first_term, s.second_term));
  return s;
}

struct Xi {
  double xi1 = 0.0;
  double xi2 = 0.0;
};

inline Xi xi_constants(double m, double M, const ModelConstants& c) {
  if (!(m > 0.0) || !(M >= m)) throw DomainError("xi_constants: need 0 < m <= M");
  const double r = c.rate();
  const double k = M + 6.0 * m;
  Xi x;
  x.xi1 = 49.0 * std::pow(m, 4) * r * r / (72.0 * M * k * k * c.C1L() * c.C1L());
  x.xi2 = 7.0 * m * m * r / (6.0 * std::sqrt(M) * k * c.C1L());
  return x;
}

namespace detail {

inline std::pair<double, double> require_mM(const ModelConstants& c, const char* who) {
  if (!c.m || !c.M) throw DegenerateError(std::string(who) + ": constants m and M are required");
  if (!(*c.m > 0.0)) throw DegenerateError(std::string(who) + ": m must be > 0");
  return {*c.m, *c.M};
}

inline bool eps_prime_out_of_range(double eps, double m, double M) {
  return std::pow(m, 1.5) * eps / (M + 6.0 * m) >= 2.0 * m / 3.0;
}

}  // namespace detail

/// Sample size of the relative-deviation guarantee, cover = N(eps / L_bar).
inline SampleSize n2(double eps, double delta, const ModelConstants& c, Covering cover) {
  if (!(eps > 0.0)) throw DomainError("n2: eps must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("n2: delta must lie in (0,1)");
  const auto [m, M] = detail::require_mM(c, "n2");
  const Xi x = xi_constants(m, M, c);
  SampleSize s;
  s.first_term = 2.0 * c.C1L() / (eps * std::min(std::sqrt(m), 1.0) * c.rate());
  s.second_term = (x.xi2 * eps + std::log(4.0) + cover.log_n - std::log(delta)) / (x.xi1 * eps * eps);
  s.n = std::ceil(std::max(s.first_term, s.second_term));
  s.eps_prime_flag = detail::eps_prime_out_of_range(eps, m, M);
  return s;
}

/// Sample size for er_pi(h) <= (1 + alpha) er_n(h) + eps uniformly, with
/// cover = N(sqrt(eps) / (L_bar sqrt(1 + 1/alpha))).
inline SampleSize n3(double eps, double delta, double alpha, const ModelConstants& c, Covering cover) {
  if (!(eps > 0.0)) throw DomainError("n3: eps must be > 0");
  if (!(alpha > 0.0)) throw DomainError("n3: alpha must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("n3: delta must lie in (0,1)");
  const auto [m, M] = detail::require_mM(c, "n3");
  const Xi x = xi_constants(m, M, c);
  const double stretch = std::sqrt(1.0 + 1.0 / alpha);
  SampleSize s;
  s.first_term = 2.0 * c.C1L() * stretch / (std::sqrt(eps) * std::min(std::sqrt(m), 1.0) * c.rate());
  s.second_term = (alpha + 1.0) / (alpha * x.xi1) / eps *
                  (x.xi2 / stretch * std::sqrt(eps) + std::log(4.0) + cover.log_n - std::log(delta));
  s.n = std::ceil(std::max(s.first_term, s.second_term));
  s.eps_prime_flag = detail::eps_prime_out_of_range(std::sqrt(eps) / stretch, m, M);
  return s;
}

/// P(sup_h |er_n(h) - er_pi(h)| / sqrt(er_pi(h)) >= eps)
///   <= 4 N(eps / L_bar) exp(-xi1 eps^2 n + xi2 eps).
inline TailBound relative_tail_bound(double eps, double n, const ModelConstants& c, Covering cover) {
  if (!(eps > 0.0) || !(n >= 1.0)) throw DomainError("relative_tail_bound: need eps > 0, n >= 1");
  const auto [m, M] = detail::require_mM(c, "relative_tail_bound");
  const Xi x = xi_constants(m, M, c);
  TailBound t;
  t.log_bound = std::log(4.0) + cover.log_n - x.xi1 * eps * eps * n + x.xi2 * eps;
  t.bound = std::exp(t.log_bound);
  t.threshold = 2.0 * c.C1L() / (eps * std::min(std::sqrt(m), 1.0) * c.rate());
  t.valid = n >= t.threshold;
  return t;
}

/// Smallest N with C1 L e^{-C2 N} / (1 - e^{-C2}) <= tol.
inline int poisson_truncation(const ModelConstants& c, double tol) {
  if (!(tol > 0.0)) throw DomainError("poisson_truncation: tol must be > 0");
  const double need = std::log(c.C1L() / (c.rate() * tol)) / c.C2;
  return std::max(0, static_cast<int>(std::ceil(need)));
}

/// Truncation tail C1 L e^{-C2 N} / (1 - e^{-C2}).
inline double poisson_truncation_tail(const ModelConstants& c, int N) {
  return c.C1L() * std::exp(-c.C2 * N) / c.rate();
}

/// ||g||_inf <= C1 L / (1 - e^{-C2}).
inline double poisson_sup_bound(const ModelConstants& c) { return c.C1L() / c.rate(); }

}  // namespace wasslearn::bounds
