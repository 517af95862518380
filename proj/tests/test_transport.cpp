#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wasslearn/chain.hpp"
#include "wasslearn/transport.hpp"

using namespace wasslearn;

namespace {

const double kSqrt2 = std::sqrt(2.0);

DiscreteMeasure uniform_on(const std::vector<StatePoint>& pts) {
  DiscreteMeasure m;
  for (const auto& p : pts) m.add(p, 1.0 / pts.size());
  return m;
}

DiscreteMeasure random_measure(const TargetFunction& f, std::size_t atoms, CounterRng& rng) {
  std::vector<double> w(atoms);
  double total = 0;
  for (auto& v : w) total += (v = 0.05 + rng.uniform());
  DiscreteMeasure m;
  for (std::size_t i = 0; i < atoms; ++i) m.add(graph_point(rng.uniform(), f), w[i] / total);
  return m;
}

}  // namespace

TEST(Wasserstein, SelfDistanceIsZero) {
  CounterRng rng(1, 0);
  const auto mu = random_measure(TargetFunction::tent(), 30, rng);
  EXPECT_NEAR(wasserstein1_exact(mu, mu).distance, 0.0, 1e-12);
}

TEST(Wasserstein, SingleAtoms) {
  DiscreteMeasure a, b;
  a.add({0.1, 0.2}, 1.0);
  b.add({0.7, 0.9}, 1.0);
  EXPECT_NEAR(wasserstein1_exact(a, b).distance, rho({0.1, 0.2}, {0.7, 0.9}), 1e-15);
}

TEST(Wasserstein, KernelsFromEndpoints) {
  const auto chain = make_chain(TargetFunction::identity());
  const auto mu = one_step_kernel(chain, {0, 0});
  const auto nu = one_step_kernel(chain, {1, 1});
  EXPECT_NEAR(wasserstein1_exact(mu, nu).distance, kSqrt2 / 2, 1e-12);
  EXPECT_NEAR(wasserstein1_monotone_upper(mu, nu), kSqrt2 / 2, 1e-12);
}

TEST(Wasserstein, NormalizationAndSizeErrors) {
  DiscreteMeasure bad;
  bad.add({0, 0}, 0.4);
  DiscreteMeasure ok;
  ok.add({0, 0}, 1.0);
  EXPECT_THROW(wasserstein1_exact(bad, ok), NormalizationError);
  EXPECT_THROW(wasserstein1_exact(DiscreteMeasure{}, ok), NormalizationError);

  const auto chain = make_chain(TargetFunction::identity());
  const auto big = invariant_measure(chain, 5000);
  const auto big2 = invariant_measure(chain, 4000);
  EXPECT_THROW(wasserstein1_exact(big, big2), SizeError);
}

TEST(Wasserstein, MatchesQuarterCouplingOracle) {
  CounterRng rng(2024, 3);
  for (const auto& f : {TargetFunction::identity(), TargetFunction::tent(), TargetFunction::quadratic(0.8)}) {
    for (int t = 0; t < 100; ++t) {
      const auto mu = oracle::quarter_measure(f, rng);
      const auto nu = oracle::quarter_measure(f, rng);
      EXPECT_NEAR(wasserstein1_exact(mu, nu).distance, oracle::quarter_coupling_min(mu, nu), 1e-9);
    }
  }
}

TEST(Wasserstein, PlanIsFeasibleAndAttainsCost) {
  CounterRng rng(5, 5);
  for (int t = 0; t < 20; ++t) {
    const auto mu = random_measure(TargetFunction::tent(), 1 + rng.below(60), rng);
    const auto nu = random_measure(TargetFunction::tent(), 1 + rng.below(60), rng);
    const auto res = wasserstein1_exact(mu, nu);
    const auto check = check_plan(res.plan, mu, nu);
    EXPECT_LE(check.max_row_error, 1e-9);
    EXPECT_LE(check.max_col_error, 1e-9);
    EXPECT_LE(check.cost_error, 1e-9);
  }
}

TEST(Wasserstein, DuplicateAtomsAreMergedAndPlanUnmerged) {
  DiscreteMeasure mu;
  mu.add({0.2, 0.2}, 0.25);
  mu.add({0.2, 0.2}, 0.25);
  mu.add({0.8, 0.8}, 0.5);
  DiscreteMeasure nu;
  nu.add({0.5, 0.5}, 1.0);
  const auto res = wasserstein1_exact(mu, nu);
  EXPECT_NEAR(res.distance, 0.3 * kSqrt2, 1e-12);
  const auto check = check_plan(res.plan, mu, nu);
  EXPECT_LE(check.max_row_error, 1e-12);
  EXPECT_LE(check.max_col_error, 1e-12);
}

TEST(Wasserstein, HungarianAndSimplexAgree) {
  CounterRng rng(8, 1);
  const auto f = TargetFunction::quadratic(0.6);
  for (int t = 0; t < 10; ++t) {
    std::vector<StatePoint> a, b;
    for (int i = 0; i < 40; ++i) a.push_back(graph_point(rng.uniform(), f));
    for (int i = 0; i < 40; ++i) b.push_back(graph_point(rng.uniform(), f));
    const auto mu = uniform_on(a), nu = uniform_on(b);
    // Splitting one atom of mu forces the simplex path on the same problem.
    DiscreteMeasure split;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      if (i == 0) {
        split.add(mu[i].point, mu[i].weight * 0.5);
        split.add({mu[i].point.x, mu[i].point.y + 1e-9}, mu[i].weight * 0.5);
      } else {
        split.add(mu[i].point, mu[i].weight);
      }
    }
    EXPECT_NEAR(wasserstein1_exact(mu, nu).distance, wasserstein1_exact(split, nu).distance, 1e-8);
  }
}

TEST(Wasserstein, MetricAxiomsOnSmallMeasures) {
  CounterRng rng(13, 0);
  const auto f = TargetFunction::tent();
  for (int t = 0; t < 50; ++t) {
    const auto a = random_measure(f, 1 + rng.below(6), rng);
    const auto b = random_measure(f, 1 + rng.below(6), rng);
    const auto c = random_measure(f, 1 + rng.below(6), rng);
    const double ab = wasserstein1_exact(a, b).distance;
    EXPECT_NEAR(ab, wasserstein1_exact(b, a).distance, 1e-9);
    EXPECT_LE(wasserstein1_exact(a, c).distance, ab + wasserstein1_exact(b, c).distance + 1e-9);
  }
}

TEST(Wasserstein, LargeQuantileProblem) {
  const auto chain = make_chain(TargetFunction::identity());
  const auto kernel = n_step_kernel(chain, {0, 0}, 12);
  const auto pi = invariant_measure(chain, 4096);
  EXPECT_NEAR(wasserstein1_exact(kernel, pi).distance, kSqrt2 * std::ldexp(1.0, -13), 1e-12);
}

TEST(MonotoneUpper, IdenticalIsZeroAndDominatesExact) {
  CounterRng rng(3, 3);
  for (const auto& f : {TargetFunction::identity(), TargetFunction::tent(), TargetFunction::quadratic(-0.8)}) {
    const auto mu = random_measure(f, 10, rng);
    EXPECT_NEAR(wasserstein1_monotone_upper(mu, mu), 0.0, 1e-12);
    for (int t = 0; t < 30; ++t) {
      const auto a = random_measure(f, 1 + rng.below(12), rng);
      const auto b = random_measure(f, 1 + rng.below(12), rng);
      EXPECT_GE(wasserstein1_monotone_upper(a, b), wasserstein1_exact(a, b).distance - 1e-9);
    }
  }
}

TEST(MonotoneUpper, ExactForAffineTargets) {
  CounterRng rng(4, 4);
  const auto f = TargetFunction::affine(-0.6, 0.8);
  for (int t = 0; t < 30; ++t) {
    const auto a = random_measure(f, 1 + rng.below(12), rng);
    const auto b = random_measure(f, 1 + rng.below(12), rng);
    EXPECT_NEAR(wasserstein1_monotone_upper(a, b), wasserstein1_exact(a, b).distance, 1e-9);
  }
}

TEST(KrDualLower, IdenticalIsZero) {
  CounterRng rng(1, 1);
  const auto mu = random_measure(TargetFunction::tent(), 8, rng);
  EXPECT_NEAR(kr_dual_lower(mu, mu, 20, rng), 0.0, 1e-12);
}

TEST(KrDualLower, DistanceWitnessIsExactForDiracs) {
  DiscreteMeasure a, b;
  a.add({0.1, 0.1}, 1.0);
  b.add({0.9, 0.4}, 1.0);
  CounterRng rng(2, 2);
  EXPECT_NEAR(kr_dual_lower(a, b, 2, rng), rho({0.1, 0.1}, {0.9, 0.4}), 1e-12);
}

TEST(KrDualLower, SandwichOnKernelPairs) {
  CounterRng rng(6, 6);
  for (const auto& f : {TargetFunction::identity(), TargetFunction::tent(), TargetFunction::quadratic(0.8)}) {
    const auto chain = make_chain(f);
    for (int t = 0; t < 30; ++t) {
      const auto a = n_step_kernel(chain, graph_point(rng.uniform(), f), 3);
      const auto b = n_step_kernel(chain, graph_point(rng.uniform(), f), 3);
      const double exact = wasserstein1_exact(a, b).distance;
      EXPECT_LE(kr_dual_lower(a, b, 16, rng), exact + 1e-9);
      EXPECT_LE(exact, wasserstein1_monotone_upper(a, b) + 1e-9);
    }
  }
}

TEST(KrDualLower, RejectsZeroWitnesses) {
  DiscreteMeasure a;
  a.add({0, 0}, 1.0);
  CounterRng rng(0, 0);
  EXPECT_THROW(kr_dual_lower(a, a, 0, rng), DomainError);
}
