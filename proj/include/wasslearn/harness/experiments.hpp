#pragma once

// Experiment drivers behind the CLI subcommands. Each returns a Report whose
// theoretical columns can be recomputed from the logged metadata.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wasslearn/bounds.hpp"
#include "wasslearn/chain.hpp"
#include "wasslearn/contraction.hpp"
#include "wasslearn/harness/config.hpp"
#include "wasslearn/harness/report.hpp"
#include "wasslearn/hypothesis.hpp"
#include "wasslearn/learner.hpp"
#include "wasslearn/loss.hpp"
#include "wasslearn/parallel.hpp"
#include "wasslearn/poisson.hpp"
#include "wasslearn/transport.hpp"

namespace wasslearn::harness {

// Stream ids for draws that are not trajectory bits.
inline constexpr std::uint64_t kStartStream = 0x5354415254ULL;
inline constexpr std::uint64_t kAuditStream = 0x4155444954ULL;
inline constexpr std::uint64_t kPoissonStream = 0x504f4953ULL;

struct Setup {
  ContractiveChain chain;
  HypothesisClass cls;
  MetricTag metric;
  LossConstants loss;
  bounds::ModelConstants consts;
  DiscreteMeasure pi_hat;
};

inline Setup make_setup(const ExperimentConfig& cfg) {
  validate(cfg);
  Setup s{make_chain(cfg.target.build(), cfg.diameter_grid), cfg.cls.build(), parse_metric_tag(cfg.metric),
          {}, {}, {}};
  s.loss = loss_constants(s.cls, s.chain.space);
  s.consts = bounds::make_constants(s.chain.eta(), s.chain.space.diameter, s.loss);
  s.pi_hat = invariant_measure(s.chain, cfg.pi_hat_size);
  return s;
}

inline StatePoint start_state(const ExperimentConfig& cfg, const Setup& s, std::uint64_t rep) {
  switch (cfg.start.policy) {
    case StartPolicy::fixed: return graph_point(cfg.start.x0, s.chain.target());
    case StartPolicy::uniform: {
      CounterRng rng(cfg.seed, substream(kStartStream, rep));
      return graph_point(rng.uniform(), s.chain.target());
    }
    case StartPolicy::pi_hat: {
      CounterRng rng(cfg.seed, substream(kStartStream, rep));
      return s.pi_hat[static_cast<std::size_t>(rng.below(s.pi_hat.size()))].point;
    }
  }
  throw ConfigError("unknown start policy");
}

inline Report base_report(const std::string& kind, const ExperimentConfig& cfg, const Setup& s) {
  Report r;
  r.kind = kind;
  r.metadata["config_hash"] = config_hash(cfg);
  r.metadata["seed"] = cfg.seed;
  r.metadata["timestamp"] = "none";
  r.metadata["target"] = s.chain.target().family_tag();
  r.metadata["eta"] = s.consts.eta;
  r.metadata["C1"] = s.consts.C1;
  r.metadata["C2"] = s.consts.C2;
  r.metadata["L"] = s.consts.L;
  r.metadata["L_bar"] = s.consts.L_bar;
  r.metadata["B"] = s.consts.B;
  return r;
}

inline Report run_contraction_audit(const ExperimentConfig& cfg) {
  const Setup s = make_setup(cfg);
  Report r = base_report("contraction-audit", cfg, s);
  CounterRng rng(cfg.seed, kAuditStream);
  const auto audit = contraction_audit(s.chain, cfg.contraction.pairs, rng);
  const double factor = s.chain.contraction_factor();
  r.metadata["pairs"] = cfg.contraction.pairs;
  r.metadata["sup_ratio"] = audit.sup_ratio;
  r.metadata["contraction_factor"] = factor;
  r.metadata["worst_x1"] = audit.worst_z1.x;
  r.metadata["worst_x2"] = audit.worst_z2.x;
  if (audit.sup_ratio > factor + 1e-9) {
    r.violations.push_back("contraction ratio " + format_number(audit.sup_ratio) + " exceeds " +
                           format_number(factor));
  }

  const StatePoint z0 = start_state(cfg, s, 0);
  const double slack = s.chain.target().stretch() / cfg.pi_hat_size;
  r.metadata["x0"] = z0.x;
  r.metadata["pi_hat_size"] = cfg.pi_hat_size;
  r.metadata["discretization_slack"] = slack;
  r.columns = {"n", "w1", "decay_bound", "within_bound"};
  for (int n = 1; n <= cfg.contraction.n_max; ++n) {
    const double w = wasserstein1_exact(n_step_kernel(s.chain, z0, n), s.pi_hat).distance;
    const double bound = s.consts.C1 * std::exp(-s.consts.C2 * n);
    const bool ok = w <= bound + slack;
    if (!ok) r.violations.push_back("decay row n=" + std::to_string(n) + " exceeds C1 e^{-C2 n}");
    r.add_row({static_cast<double>(n), w, bound, ok ? 1.0 : 0.0});
  }
  return r;
}

namespace detail {

inline std::size_t max_n(const ExperimentConfig& cfg) {
  double m = 0;
  for (double n : cfg.n_grid) m = std::max(m, n);
  return static_cast<std::size_t>(m);
}

/// Cardinality of the constructed sup-metric net at the given radius.
inline double net_cardinality(const HypothesisClass& cls, double radius) {
  return static_cast<double>(build_epsilon_net(cls, radius).size());
}

/// Binomial Monte Carlo slack 3 sqrt(p (1 - p) / trials).
inline double binomial_slack(double p, std::size_t trials) {
  return 3.0 * std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(trials));
}

/// Per replication, a statistic of the first n states for each n in the grid.
template <typename Stat>
std::vector<std::vector<double>> prefix_statistics(const ExperimentConfig& cfg, const Setup& s, Stat&& stat) {
  const std::size_t n_max = max_n(cfg);
  std::vector<std::vector<double>> out(cfg.replications, std::vector<double>(cfg.n_grid.size()));
  parallel_for(cfg.replications, [&](std::size_t rep) {
    const Trajectory t = trajectory(s.chain, start_state(cfg, s, rep), n_max, cfg.seed, rep);
    for (std::size_t k = 0; k < cfg.n_grid.size(); ++k) {
      const std::span<const StatePoint> prefix(t.states.data(), static_cast<std::size_t>(cfg.n_grid[k]));
      out[rep][k] = stat(prefix);
    }
  });
  return out;
}

inline void check_tail_row(Report& r, const TailRow& t) {
  const double freq = static_cast<double>(t.exceedances) / static_cast<double>(t.trials);
  const std::string where = "n=" + format_number(t.n) + " eps=" + format_number(t.eps);
  if (t.valid && t.bound <= 1.0 && freq > t.bound + binomial_slack(t.bound, t.trials)) {
    r.violations.push_back("empirical frequency above bound + 3 binomial slack at " + where);
  }
  if (t.bound < 1e-3 && static_cast<double>(t.trials) * t.bound < 1.0) {
    r.warnings.push_back("bound below 1e-3 at " + where + " is not resolvable with " +
                         std::to_string(t.trials) + " trials");
  }
}

}  // namespace detail

inline Report run_concentration_experiment(const ExperimentConfig& cfg) {
  const Setup s = make_setup(cfg);
  Report r = base_report("concentration", cfg, s);
  const HypothesisNet net = build_epsilon_net(s.cls, cfg.net_radius, s.metric);
  const auto truth = true_errors(net, s.pi_hat);
  r.metadata["net_size"] = net.size();
  r.metadata["net_radius"] = net.radius;

  const auto devs = detail::prefix_statistics(cfg, s, [&](std::span<const StatePoint> states) {
    return uniform_deviation(empirical_errors(net, states), truth).value;
  });

  json covers = json::array();
  for (double eps : cfg.eps_grid) covers.push_back(detail::net_cardinality(s.cls, eps / (4.0 * s.consts.L_bar)));
  r.metadata["covering_numbers"] = covers;
  r.columns = tail_columns();
  for (std::size_t k = 0; k < cfg.n_grid.size(); ++k) {
    for (std::size_t e = 0; e < cfg.eps_grid.size(); ++e) {
      const double eps = cfg.eps_grid[e];
      TailRow t{cfg.n_grid[k], eps, cfg.replications, 0, 0.0, false};
      for (const auto& d : devs) t.exceedances += d[k] > eps ? 1 : 0;
      const auto b = bounds::uniform_tail_bound(eps, t.n, s.consts, bounds::Covering::count(covers[e].get<double>()));
      t.bound = b.bound;
      t.valid = b.valid;
      add_tail_row(r, t);
      detail::check_tail_row(r, t);
    }
  }
  return r;
}

inline Report run_asem_experiment(const ExperimentConfig& cfg) {
  const Setup s = make_setup(cfg);
  Report r = base_report("asem", cfg, s);
  r.columns = {"n", "eps", "replications", "successes", "success_freq", "max_excess", "opt_pi", "net_size", "n1",
               "n_reaches_n1"};
  json covers = json::array();
  for (double eps : cfg.eps_grid) {
    // Exact minimization over a net of radius eps / L_bar is an eps-ASEM.
    const HypothesisNet net = build_epsilon_net(s.cls, eps / s.consts.L_bar, s.metric);
    const auto truth = true_errors(net, s.pi_hat);
    const auto opt = opt_pi(s.cls, net, s.pi_hat, cfg.opt_refinement, s.consts.L_bar);
    const double cover = detail::net_cardinality(s.cls, eps / (4.0 * s.consts.L_bar));
    covers.push_back(cover);
    const auto n1 = bounds::n1(eps, cfg.delta, s.consts, bounds::Covering::count(cover));

    const auto excess = detail::prefix_statistics(cfg, s, [&](std::span<const StatePoint> states) {
      const auto emp = empirical_errors(net, states);
      const auto pick = static_cast<std::size_t>(std::min_element(emp.begin(), emp.end()) - emp.begin());
      return std::abs(truth[pick] - opt.value);
    });
    for (std::size_t k = 0; k < cfg.n_grid.size(); ++k) {
      std::size_t ok = 0;
      double worst = 0.0;
      for (const auto& e : excess) {
        ok += e[k] < 5.0 * eps ? 1 : 0;
        worst = std::max(worst, e[k]);
      }
      r.add_row({cfg.n_grid[k], eps, static_cast<double>(cfg.replications), static_cast<double>(ok),
                 static_cast<double>(ok) / static_cast<double>(cfg.replications), worst, opt.value,
                 static_cast<double>(net.size()), n1.n, cfg.n_grid[k] >= n1.n ? 1.0 : 0.0});
    }
  }
  r.metadata["delta"] = cfg.delta;
  r.metadata["covering_numbers"] = covers;
  return r;
}

/// m, M of the class from a net of the configured radius.
inline ErrorRange class_range(const ExperimentConfig& cfg, const Setup& s) {
  const HypothesisNet net = build_epsilon_net(s.cls, cfg.net_radius, s.metric);
  return class_error_range(net, s.pi_hat, s.consts.L_bar);
}

inline Report run_relative_experiment(const ExperimentConfig& cfg) {
  Setup s = make_setup(cfg);
  Report r = base_report("relative", cfg, s);
  const HypothesisNet net = build_epsilon_net(s.cls, cfg.net_radius, s.metric);
  const auto truth = true_errors(net, s.pi_hat);
  const auto range = class_error_range(net, s.pi_hat, s.consts.L_bar);
  if (!(range.m > 0.0)) throw DegenerateError("relative experiment: class error lower bound m is 0");
  s.consts.m = range.m;
  s.consts.M = range.M;
  const auto xi = bounds::xi_constants(range.m, range.M, s.consts);
  r.metadata["m"] = range.m;
  r.metadata["M"] = range.M;
  r.metadata["xi1"] = xi.xi1;
  r.metadata["xi2"] = xi.xi2;
  r.metadata["net_size"] = net.size();
  r.metadata["net_radius"] = net.radius;

  const auto devs = detail::prefix_statistics(cfg, s, [&](std::span<const StatePoint> states) {
    return relative_deviation(empirical_errors(net, states), truth).value;
  });

  json covers = json::array();
  json flags = json::array();
  for (double eps : cfg.eps_grid) {
    covers.push_back(detail::net_cardinality(s.cls, eps / s.consts.L_bar));
    flags.push_back(bounds::detail::eps_prime_out_of_range(eps, range.m, range.M));
  }
  r.metadata["covering_numbers"] = covers;
  r.metadata["eps_prime_flags"] = flags;
  r.columns = tail_columns();
  for (std::size_t k = 0; k < cfg.n_grid.size(); ++k) {
    for (std::size_t e = 0; e < cfg.eps_grid.size(); ++e) {
      const double eps = cfg.eps_grid[e];
      TailRow t{cfg.n_grid[k], eps, cfg.replications, 0, 0.0, false};
      for (const auto& d : devs) t.exceedances += d[k] >= eps ? 1 : 0;
      const auto b = bounds::relative_tail_bound(eps, t.n, s.consts, bounds::Covering::count(covers[e].get<double>()));
      t.bound = b.bound;
      t.valid = b.valid;
      add_tail_row(r, t);
      detail::check_tail_row(r, t);
    }
  }
  return r;
}

/// Least-squares slope of y against x.
inline double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("fitted_slope: need >= 2 paired points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

inline Report run_scaling_experiment(const ExperimentConfig& cfg) {
  Setup s = make_setup(cfg);
  Report r = base_report("scaling", cfg, s);
  const auto range = class_range(cfg, s);
  if (!(range.m > 0.0)) throw DegenerateError("scaling experiment: class error lower bound m is 0");
  s.consts.m = range.m;
  s.consts.M = range.M;
  const auto& h = cfg.holder;
  const double stretch = std::sqrt(1.0 + 1.0 / cfg.alpha);
  r.columns = {"eps", "log_cover_n1", "n1", "log_cover_n3", "n3"};
  std::vector<double> lx, l1, l3;
  for (double eps : cfg.eps_grid) {
    const double c1 = covering_bound_holder(h.C, h.d, h.gamma, eps / (4.0 * s.consts.L_bar)).log_value;
    const double c3 = covering_bound_holder(h.C, h.d, h.gamma, std::sqrt(eps) / (s.consts.L_bar * stretch)).log_value;
    const double n1 = bounds::n1(eps, cfg.delta, s.consts, bounds::Covering::log(c1)).n;
    const double n3 = bounds::n3(eps, cfg.delta, cfg.alpha, s.consts, bounds::Covering::log(c3)).n;
    r.add_row({eps, c1, n1, c3, n3});
    lx.push_back(std::log(1.0 / eps));
    l1.push_back(std::log(n1));
    l3.push_back(std::log(n3));
  }
  r.metadata["m"] = range.m;
  r.metadata["M"] = range.M;
  r.metadata["delta"] = cfg.delta;
  r.metadata["alpha"] = cfg.alpha;
  r.metadata["holder_C"] = h.C;
  r.metadata["holder_d"] = h.d;
  r.metadata["holder_gamma"] = h.gamma;
  if (lx.size() >= 2) {
    r.metadata["slope_n1"] = fitted_slope(lx, l1);
    r.metadata["slope_n3"] = fitted_slope(lx, l3);
  }
  r.metadata["expected_slope_n1"] = 2.0 + 2.0 * h.d / h.gamma;
  r.metadata["expected_slope_n3"] = 1.0 + h.d / h.gamma;
  return r;
}

/// Pure calculator mode: every bound on the (eps, n) grid of cfg.bounds.
inline Report run_bounds(const ExperimentConfig& cfg) {
  Setup s = make_setup(cfg);
  Report r = base_report("bounds", cfg, s);
  const auto range = class_range(cfg, s);
  const bool have_mM = range.m > 0.0;
  if (have_mM) {
    s.consts.m = range.m;
    s.consts.M = range.M;
    const auto xi = bounds::xi_constants(range.m, range.M, s.consts);
    r.metadata["m"] = range.m;
    r.metadata["M"] = range.M;
    r.metadata["xi1"] = xi.xi1;
    r.metadata["xi2"] = xi.xi2;
  } else {
    r.warnings.push_back("class error lower bound m is 0; relative bounds, n2 and n3 reported as nan");
  }
  const auto cover = bounds::Covering::count(cfg.bounds.covering);
  r.metadata["covering"] = cfg.bounds.covering;
  r.metadata["delta"] = cfg.delta;
  r.metadata["alpha"] = cfg.alpha;
  r.columns = {"eps", "n", "single_h_bound", "single_h_valid", "uniform_bound", "uniform_valid",
               "relative_bound", "relative_valid", "n1", "n2", "n3", "eps_prime_flag"};
  for (double eps : cfg.bounds.eps_grid) {
    const double n1 = bounds::n1(eps, cfg.delta, s.consts, cover).n;
    double n2 = NAN, n3 = NAN, flag = NAN;
    if (have_mM) {
      const auto s2 = bounds::n2(eps, cfg.delta, s.consts, cover);
      n2 = s2.n;
      flag = s2.eps_prime_flag ? 1.0 : 0.0;
      n3 = bounds::n3(eps, cfg.delta, cfg.alpha, s.consts, cover).n;
    }
    for (double n : cfg.bounds.n_grid) {
      const auto single = bounds::single_h_tail_bound(eps, n, s.consts);
      const auto uni = bounds::uniform_tail_bound(eps, n, s.consts, cover);
      double rel = NAN, rel_valid = NAN;
      if (have_mM) {
        const auto b = bounds::relative_tail_bound(eps, n, s.consts, cover);
        rel = b.bound;
        rel_valid = b.valid ? 1.0 : 0.0;
      }
      r.add_row({eps, n, single.bound, single.valid ? 1.0 : 0.0, uni.bound, uni.valid ? 1.0 : 0.0, rel, rel_valid,
                 n1, n2, n3, flag});
    }
  }
  return r;
}

inline Report run_poisson_check(const ExperimentConfig& cfg) {
  const Setup s = make_setup(cfg);
  Report r = base_report("poisson-check", cfg, s);
  const Hypothesis h = Hypothesis::constant(cfg.poisson.h_value);
  if (!in_class(h, s.cls)) throw ConfigError("poisson.h_value lies outside the configured class range");
  const int N = bounds::poisson_truncation(s.consts, cfg.poisson.truncation_tol);
  const auto est = bounds::poisson_estimate(h, s.chain, s.pi_hat, bounds::uniform_grid(cfg.poisson.grid_points), N,
                                            cfg.poisson.rollouts, substream(cfg.seed, kPoissonStream), s.consts,
                                            cfg.poisson.truncation_tol);
  const auto res = bounds::poisson_residual_check(est, s.chain, h);
  const double sup_bound = bounds::poisson_sup_bound(s.consts);
  r.metadata["h_value"] = cfg.poisson.h_value;
  r.metadata["truncation"] = N;
  r.metadata["rollouts"] = cfg.poisson.rollouts;
  r.metadata["mc_tolerance"] = est.mc_tolerance;
  r.metadata["er_pi"] = est.er_pi;
  r.metadata["sup_norm"] = est.sup_norm();
  r.metadata["sup_bound"] = sup_bound;
  r.metadata["max_residual"] = res.max_residual;
  r.metadata["residual_tolerance"] = res.tolerance;
  r.metadata["interpolation_slack"] = res.interpolation_slack;
  if (est.sup_norm() > sup_bound + est.mc_tolerance) r.violations.push_back("sup norm of g-hat exceeds its bound");
  if (res.max_residual > res.tolerance) r.violations.push_back("Poisson residual exceeds its tolerance");
  r.columns = {"x", "g_hat"};
  for (std::size_t j = 0; j < est.xs.size(); ++j) r.add_row({est.xs[j], est.values[j]});
  return r;
}

inline Report run_lemma_check(const ExperimentConfig& cfg) {
  const Setup s = make_setup(cfg);
  Report r = base_report("lemma-check", cfg, s);
  const auto res = lemma_atom_check(s.chain, s.chain.target(), cfg.lemma.probes, cfg.lemma.tolerance,
                                    cfg.lemma.resolution);
  const auto inv = invariance_audit(s.chain, std::min(cfg.pi_hat_size, 1024));
  r.metadata["tolerance"] = cfg.lemma.tolerance;
  r.metadata["probes"] = cfg.lemma.probes;
  r.metadata["pushforward_defect"] = inv.pushforward_defect;
  r.metadata["arc_length_defect"] = inv.arc_length_defect;
  r.columns = {"passed", "worst_gap", "worst_y", "worst_x1", "worst_x2", "probes_with_pairs"};
  r.add_row({res.passed ? 1.0 : 0.0, res.worst_gap, res.worst_y, res.worst_x1, res.worst_x2,
             static_cast<double>(res.probes_with_pairs)});
  return r;
}

}  // namespace wasslearn::harness
