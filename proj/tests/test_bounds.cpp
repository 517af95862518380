#include <cmath>

#include <gtest/gtest.h>

#include "wasslearn/bounds.hpp"
#include "wasslearn/poisson.hpp"

using namespace wasslearn;
using namespace wasslearn::bounds;

namespace {

const double kSqrt2 = std::sqrt(2.0);
const double kRate = 1.0 - kSqrt2 / 2.0;

/// Constants with C1 L and 1 - e^{-C2} given directly.
ModelConstants with(double C1, double L, double rate, std::optional<double> m = std::nullopt,
                    std::optional<double> M = std::nullopt) {
  ModelConstants c;
  c.eta = rate;
  c.C1 = C1;
  c.C2 = -std::log1p(-rate);
  c.L = L;
  c.L_bar = L;
  c.B = 1.0;
  c.m = m;
  c.M = M;
  return c;
}

ModelConstants identity_constants(const HypothesisClass& cls) {
  const auto chain = make_chain(TargetFunction::identity());
  return make_constants(chain.eta(), chain.space.diameter, loss_constants(cls, chain.space));
}

}  // namespace

TEST(Ergodicity, Examples) {
  auto e = ergodicity_constants(kRate, kSqrt2);
  EXPECT_EQ(e.C1, kSqrt2);
  EXPECT_NEAR(e.C2, std::log(kSqrt2), 1e-15);
  e = ergodicity_constants(0.5, 1.0);
  EXPECT_EQ(e.C1, 1.0);
  EXPECT_NEAR(e.C2, std::log(2.0), 1e-15);
  for (double eta : {0.01, 0.29, 0.5, 0.99}) {
    EXPECT_NEAR(-std::expm1(-ergodicity_constants(eta, 1.0).C2), eta, 1e-12);
  }
  EXPECT_THROW(ergodicity_constants(1.0, 1.0), DomainError);
  EXPECT_THROW(ergodicity_constants(0.5, 0.0), DomainError);
}

TEST(ModelConstants, RejectsInvertedRange) {
  EXPECT_THROW(make_constants(0.5, 1.0, {1, 1, 1, 1}, 0.5, 0.1), DomainError);
}

TEST(SingleTail, Golden) {
  const auto t = single_h_tail_bound(0.2, 2000, with(kSqrt2, 4, kRate));
  EXPECT_NEAR(t.bound, 0.98270, 1e-4);
  EXPECT_TRUE(t.valid);
  EXPECT_NEAR(t.threshold, 386.274, 1e-3);
}

TEST(SingleTail, BelowThresholdIsFlaggedButEvaluated) {
  const auto t = single_h_tail_bound(0.2, 100, with(kSqrt2, 4, kRate));
  EXPECT_FALSE(t.valid);
  EXPECT_GT(t.bound, 0.0);
}

TEST(SingleTail, NonincreasingBeyondThreshold) {
  const auto c = with(kSqrt2, 4, kRate);
  const double start = single_h_tail_bound(0.2, 1, c).threshold;
  double prev = INFINITY;
  for (double n = std::ceil(start); n < 1e6; n *= 1.3) {
    const double b = single_h_tail_bound(0.2, n, c).bound;
    EXPECT_LE(b, prev);
    prev = b;
  }
}

TEST(UniformTail, Golden) {
  const auto t = uniform_tail_bound(0.2, 5000, with(kSqrt2, 2, kRate), Covering::count(20));
  EXPECT_NEAR(t.bound, 18.8906, 1e-3);
}

TEST(UniformTail, UnitCoverMatchesSingleFormWithDoubledLoss) {
  const auto c = with(kSqrt2, 2, kRate);
  const auto c2 = with(kSqrt2, 4, kRate);
  for (double n : {100.0, 1000.0, 50000.0}) {
    EXPECT_NEAR(uniform_tail_bound(0.1, n, c, Covering::count(1)).log_bound,
                single_h_tail_bound(0.1, n, c2).log_bound, 1e-12);
  }
}

TEST(UniformTail, LinearInCovering) {
  const auto c = with(kSqrt2, 2, kRate);
  const double one = uniform_tail_bound(0.1, 1e5, c, Covering::count(1)).bound;
  EXPECT_NEAR(uniform_tail_bound(0.1, 1e5, c, Covering::count(37)).bound, 37 * one, 1e-12 * 37 * one);
  EXPECT_THROW(Covering::count(0.5), DomainError);
}

TEST(N1, Golden) {
  const auto s = n1(0.25, 0.05, with(kSqrt2, 4, kRate), Covering::count(1e6));
  EXPECT_NEAR(s.first_term, 1236.08, 0.01);
  EXPECT_NEAR(s.second_term, 1.28428e7, 100);
  EXPECT_EQ(s.n, 12842842.0);
}

TEST(N1, CoveringDoublingScalesSecondTerm) {
  const auto c = with(kSqrt2, 4, kRate);
  const auto a = n1(0.25, 0.05, c, Covering::count(1e6));
  const auto b = n1(0.25, 0.05, c, Covering::count(2e6));
  EXPECT_NEAR(b.second_term / a.second_term, std::log(2e6 / 0.05) / std::log(1e6 / 0.05), 1e-12);
}

TEST(N1, NonincreasingInDelta) {
  const auto c = with(kSqrt2, 4, kRate);
  double prev = INFINITY;
  for (double d = 0.001; d < 1.0; d += 0.05) {
    const double n = n1(0.1, d, c, Covering::count(100)).n;
    EXPECT_LE(n, prev);
    prev = n;
  }
  EXPECT_THROW(n1(0.1, 1.0, c, Covering::count(1)), DomainError);
}

TEST(Xi, Goldens) {
  const auto x = xi_constants(0.01, 0.25, with(kSqrt2, 4, kRate));
  EXPECT_NEAR(x.xi1 / 7.594e-10, 1.0, 1e-3);
  EXPECT_NEAR(x.xi2 / 3.897e-5, 1.0, 1e-3);
  auto unit = with(1.0, 1.0, 0.5);
  unit.C2 = INFINITY;
  const auto u = xi_constants(1, 1, unit);
  EXPECT_NEAR(u.xi1, 1.0 / 72.0, 1e-15);
  EXPECT_NEAR(u.xi2, 1.0 / 6.0, 1e-15);
  EXPECT_THROW(xi_constants(0.0, 1.0, unit), DomainError);
  EXPECT_THROW(xi_constants(0.5, 0.4, unit), DomainError);
}

TEST(Xi, IncreasingInM) {
  const auto c = with(kSqrt2, 4, kRate);
  Xi prev{0, 0};
  for (double m = 0.01; m <= 0.25; m += 0.01) {
    const auto x = xi_constants(m, 0.25, c);
    EXPECT_GT(x.xi1, prev.xi1);
    EXPECT_GT(x.xi2, prev.xi2);
    prev = x;
  }
}

TEST(N2, Golden) {
  const auto c = with(kSqrt2, 2, kRate, 1.0 / 12.0, 1.0 / 3.0);
  const auto s = n2(0.3, 0.05, c, Covering::count(7));
  EXPECT_NEAR(s.first_term, 223.0155, 1e-3);
  EXPECT_EQ(s.n, 46249233.0);
  EXPECT_FALSE(s.eps_prime_flag);
}

TEST(N2, UnitCoverReduction) {
  // With cover 1 the log term is ln(4 / delta).
  const auto c = with(kSqrt2, 2, kRate, 0.1, 0.3);
  const auto x = xi_constants(0.1, 0.3, c);
  const auto s = n2(0.2, 0.5, c, Covering::count(1));
  EXPECT_NEAR(s.second_term, (x.xi2 * 0.2 + std::log(8.0)) / (x.xi1 * 0.04), 1e-12 * s.second_term);
}

TEST(N2, DivergesAsMVanishes) {
  double prev = 0.0;
  for (double m : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const auto s = n2(0.3, 0.05, with(kSqrt2, 2, kRate, m, 0.5), Covering::count(1));
    EXPECT_GT(s.n, prev);
    prev = s.n;
  }
  EXPECT_THROW(n2(0.3, 0.05, with(kSqrt2, 2, kRate), Covering::count(1)), DegenerateError);
  EXPECT_THROW(n2(0.3, 0.05, with(kSqrt2, 2, kRate, 0.0, 0.5), Covering::count(1)), DegenerateError);
}

TEST(N3, Golden) {
  const auto s = n3(0.3, 0.05, 1.0, with(kSqrt2, 2, kRate, 1.0 / 12.0, 1.0 / 3.0), Covering::count(1));
  EXPECT_NEAR(s.first_term, 172.747, 1e-3);
  EXPECT_EQ(s.n, 19217624.0);
}

TEST(N3, LargeAlphaFirstTermRatio) {
  const auto c = with(kSqrt2, 2, kRate, 0.1, 0.3);
  const double a1 = n3(0.1, 0.05, 1.0, c, Covering::count(1)).first_term;
  const double big = n3(0.1, 0.05, 1e12, c, Covering::count(1)).first_term;
  EXPECT_NEAR(big / a1, 1.0 / kSqrt2, 1e-9);
}

TEST(N3, DecreasingInAlpha) {
  const auto c = with(kSqrt2, 2, kRate, 0.1, 0.3);
  double prev = INFINITY;
  for (double a = 0.1; a < 100; a *= 1.5) {
    const double n = n3(0.1, 0.05, a, c, Covering::count(10)).n;
    EXPECT_LE(n, prev);
    prev = n;
  }
  EXPECT_THROW(n3(0.1, 0.05, 0.0, c, Covering::count(1)), DomainError);
}

TEST(RelativeTail, ExponentCancellation) {
  const auto c = with(kSqrt2, 2, kRate, 0.1, 0.3);
  const auto x = xi_constants(0.1, 0.3, c);
  const double eps = 0.25;
  EXPECT_NEAR(relative_tail_bound(eps, x.xi2 / (x.xi1 * eps), c, Covering::count(5)).bound, 20.0, 1e-9);
}

TEST(RelativeTail, GoldenAndDecreasing) {
  const auto c = with(kSqrt2, 2, kRate, 1.0 / 12.0, 1.0 / 3.0);
  EXPECT_NEAR(relative_tail_bound(0.3, 1e6, c, Covering::count(4)).bound, 13.9611, 1e-3);
  double prev = INFINITY;
  for (double n = 1e3; n < 1e9; n *= 3) {
    const double b = relative_tail_bound(0.3, n, c, Covering::count(4)).bound;
    EXPECT_LT(b, prev);
    prev = b;
  }
  EXPECT_THROW(relative_tail_bound(0.3, 1e6, with(kSqrt2, 2, kRate), Covering::count(4)), DegenerateError);
}

TEST(Poisson, TruncationMeetsTolerance) {
  const auto c = identity_constants(HypothesisClass::constants(0, 1));
  for (double tol : {1e-1, 1e-3, 1e-6}) {
    const int N = poisson_truncation(c, tol);
    EXPECT_LE(poisson_truncation_tail(c, N), tol);
    EXPECT_GT(poisson_truncation_tail(c, N - 1), tol);
  }
  EXPECT_NEAR(poisson_truncation_tail(c, 10) / poisson_truncation_tail(c, 12), 2.0, 1e-12);
}

TEST(Poisson, ZeroLossGivesZeroEstimate) {
  const auto f = TargetFunction::constant(0.4);
  const auto chain = make_chain(f);
  const auto cls = HypothesisClass::constants(0, 1);
  const auto c = make_constants(chain.eta(), chain.space.diameter, loss_constants(cls, chain.space));
  const auto pi = invariant_measure(chain, 256);
  const auto h = Hypothesis::constant(0.4);
  const auto est = poisson_estimate(h, chain, pi, uniform_grid(9), poisson_truncation(c, 1e-2), 50, 1, c, 1e-2);
  for (double v : est.values) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(Poisson, RejectsShortTruncation) {
  const auto chain = make_chain(TargetFunction::identity());
  const auto c = identity_constants(HypothesisClass::constants(0, 1));
  const auto pi = invariant_measure(chain, 256);
  EXPECT_THROW(poisson_estimate(Hypothesis::constant(0.5), chain, pi, uniform_grid(5), 3, 10, 1, c, 1e-3),
               DomainError);
}

TEST(Poisson, MatchesClosedFormForHalf) {
  // For h = 1/2 and f = identity, g(x) = (4/3)((x - 1/2)^2 - 1/12).
  const auto chain = make_chain(TargetFunction::identity());
  const auto c = identity_constants(HypothesisClass::constants(0, 1));
  const auto pi = invariant_measure(chain, 4096);
  const auto h = Hypothesis::constant(0.5);
  const int N = poisson_truncation(c, 1e-3);
  const auto est = poisson_estimate(h, chain, pi, uniform_grid(17), N, 10000, 99, c, 1e-3);
  EXPECT_LE(est.sup_norm(), poisson_sup_bound(c) + est.mc_tolerance);
  for (std::size_t j = 0; j < est.xs.size(); ++j) {
    const double x = est.xs[j];
    const double g = 4.0 / 3.0 * ((x - 0.5) * (x - 0.5) - 1.0 / 12.0);
    EXPECT_NEAR(est.values[j], g, 0.03) << "x " << x;
  }
  const auto res = poisson_residual_check(est, chain, h);
  EXPECT_LE(res.max_residual, res.tolerance);
}

TEST(Poisson, DeterministicForFixedSeed) {
  const auto chain = make_chain(TargetFunction::tent());
  const auto cls = HypothesisClass::constants(0, 1);
  const auto c = make_constants(chain.eta(), chain.space.diameter, loss_constants(cls, chain.space));
  const auto pi = invariant_measure(chain, 512);
  const int N = poisson_truncation(c, 1e-2);
  const auto a = poisson_estimate(Hypothesis::constant(0.3), chain, pi, uniform_grid(9), N, 200, 5, c, 1e-2);
  const auto b = poisson_estimate(Hypothesis::constant(0.3), chain, pi, uniform_grid(9), N, 200, 5, c, 1e-2);
  EXPECT_EQ(a.values, b.values);
}
