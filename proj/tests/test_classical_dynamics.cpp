#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lecho/classical_dynamics.hpp"

using namespace lecho;

namespace {

// Largest eigenvalue of [[1, K], [1, 1 + K]] from the characteristic polynomial.
double largest_eigenvalue(double K) {
  double tr = 2.0 + K;
  return 0.5 * (tr + std::sqrt(tr * tr - 4.0));
}

double fd_dr_dp0(const MapSpec& m, PhasePoint x, int t, double h) {
  PhasePoint a{x.r, x.p + h}, b{x.r, x.p - h};
  double ra = evolve(m, a, t).back().r, rb = evolve(m, b, t).back().r;
  return torus_delta(ra, rb) / (2.0 * h);
}

}  // namespace

TEST(Step, SawtoothFixedPoint) {
  PhasePoint y = step(MapSpec::sawtooth(1.0), {kPi, 0.0});
  EXPECT_DOUBLE_EQ(y.r, kPi);
  EXPECT_DOUBLE_EQ(y.p, 0.0);
}

TEST(Step, StandardFixedPoint) {
  PhasePoint y = step(MapSpec::standard(10.0), {0.0, 0.0});
  EXPECT_EQ(y.r, 0.0);
  EXPECT_EQ(y.p, 0.0);
}

TEST(Step, SawtoothHandEvaluated) {
  PhasePoint y = step(MapSpec::sawtooth(1.0), {kPi + 1.0, 0.0});
  EXPECT_NEAR(y.p, 1.0, 1e-14);
  EXPECT_NEAR(y.r, kPi + 2.0, 1e-14);
}

TEST(Step, CoordinatesStayHalfOpen) {
  MapSpec m = MapSpec::standard(7.0);
  PhasePoint x{6.2, 6.1};
  for (int n = 0; n < 1000; ++n) {
    x = step(m, x);
    ASSERT_GE(x.r, 0.0);
    ASSERT_LT(x.r, kTwoPi);
    ASSERT_GE(x.p, 0.0);
    ASSERT_LT(x.p, kTwoPi);
  }
  EXPECT_EQ(wrap_angle(kTwoPi), 0.0);
  EXPECT_EQ(wrap_angle(-kTwoPi), 0.0);
}

TEST(Step, InverseUndoesStep) {
  for (MapSpec m : {MapSpec::standard(7.0), MapSpec::sawtooth(0.4)}) {
    PhasePoint x{1.234, 4.567};
    PhasePoint y = step_back(m, step(m, x));
    EXPECT_NEAR(torus_delta(y.r, x.r), 0.0, 1e-12);
    EXPECT_NEAR(torus_delta(y.p, x.p), 0.0, 1e-12);
  }
}

TEST(Step, StandardMapCommutesWithTranslation) {
  MapSpec m = MapSpec::standard(3.3);
  PhasePoint a = step(m, {0.7, 2.0});
  PhasePoint b = step(m, {0.7 + kTwoPi, 2.0});
  EXPECT_NEAR(torus_delta(a.r, b.r), 0.0, 1e-12);
  EXPECT_NEAR(torus_delta(a.p, b.p), 0.0, 1e-12);
}

TEST(MapSpecTest, RejectsBadStrength) {
  EXPECT_THROW(MapSpec::standard(0.0).validate(), ConfigError);
  EXPECT_THROW(MapSpec::sawtooth(-1.0).validate(), ConfigError);
  EXPECT_THROW(MapSpec::standard(NAN).validate(), ConfigError);
  EXPECT_THROW(map_kind_from_string("baker"), ConfigError);
  EXPECT_EQ(map_kind_from_string(to_string(MapKind::standard)), MapKind::standard);
}

TEST(Tangent, SawtoothMatrix) {
  TangentMatrix j = tangent_step(MapSpec::sawtooth(1.0), {0.3, 0.2});
  EXPECT_EQ(j.pp, 1.0);
  EXPECT_EQ(j.pr, 1.0);
  EXPECT_EQ(j.rp, 1.0);
  EXPECT_EQ(j.rr, 2.0);
  EXPECT_DOUBLE_EQ(j.det(), 1.0);
}

TEST(Tangent, StandardShear) {
  TangentMatrix j = tangent_step(MapSpec::standard(10.0), {kPi / 2.0, 0.0});
  EXPECT_EQ(j.pp, 1.0);
  EXPECT_NEAR(j.pr, 0.0, 1e-14);
  EXPECT_EQ(j.rp, 1.0);
  EXPECT_NEAR(j.rr, 1.0, 1e-14);
}

TEST(Tangent, ProductOfFiveIsSymplectic) {
  MapSpec m = MapSpec::standard(7.0);
  PhasePoint x{0.4, 2.2};
  TangentMatrix acc;
  for (int n = 0; n < 5; ++n) {
    acc = tangent_step(m, x) * acc;
    x = step(m, x);
  }
  EXPECT_NEAR(acc.det(), 1.0, 1e-12 * std::max(1.0, std::abs(acc.pp * acc.rr)));
}

TEST(Evolve, ZeroKicks) {
  auto v = evolve(MapSpec::standard(1.0), {1.0, 2.0}, 0);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].r, 1.0);
}

TEST(Evolve, FixedPointCopies) {
  auto v = evolve(MapSpec::sawtooth(1.0), {kPi, 0.0}, 10);
  ASSERT_EQ(v.size(), 11u);
  for (const PhasePoint& x : v) {
    EXPECT_DOUBLE_EQ(x.r, kPi);
    EXPECT_DOUBLE_EQ(x.p, 0.0);
  }
}

TEST(Evolve, Semigroup) {
  MapSpec m = MapSpec::standard(2.5);
  PhasePoint x{0.9, 5.1};
  auto ab = evolve(m, x, 7);
  auto a = evolve(m, x, 3);
  auto b = evolve(m, a.back(), 4);
  EXPECT_EQ(ab.back().r, b.back().r);
  EXPECT_EQ(ab.back().p, b.back().p);
}

TEST(MonodromyTest, SawtoothSquare) {
  TangentMatrix m = monodromy(MapSpec::sawtooth(1.0), {0.5, 0.5}, 2).unscaled();
  EXPECT_NEAR(m.pp, 2.0, 1e-14);
  EXPECT_NEAR(m.pr, 3.0, 1e-14);
  EXPECT_NEAR(m.rp, 3.0, 1e-14);
  EXPECT_NEAR(m.rr, 5.0, 1e-14);
}

TEST(MonodromyTest, DeterminantUpTo50) {
  for (MapSpec m : {MapSpec::standard(7.0), MapSpec::sawtooth(1.0), MapSpec::sawtooth(3.0)}) {
    for (int t = 1; t <= 50; ++t) {
      Monodromy md = monodromy(m, {1.1, 0.3}, t);
      ASSERT_NEAR(md.det(), 1.0, 1e-9) << "t=" << t;
    }
  }
}

TEST(MonodromyTest, LongRunsStayFinite) {
  Monodromy md = monodromy(MapSpec::standard(7.0), {1.1, 0.3}, 2000);
  EXPECT_TRUE(std::isfinite(md.log_scale));
  EXPECT_NEAR(md.det(), 1.0, 1e-9);
}

TEST(MonodromyTest, DrDp0MatchesFiniteDifference) {
  MapSpec m = MapSpec::standard(1.3);
  PhasePoint x{0.83, 2.41};
  for (int t = 1; t <= 5; ++t) {
    double a = monodromy(m, x, t).unscaled().dr_dp0();
    double fd = fd_dr_dp0(m, x, t, 1e-7);
    EXPECT_NEAR(a, fd, 1e-5 * std::abs(a)) << "t=" << t;
  }
}

TEST(Lyapunov, ClosedFormK1) {
  EXPECT_NEAR(lyapunov_closed_form(1.0), std::log((3.0 + std::sqrt(5.0)) / 2.0), 1e-15);
  EXPECT_NEAR(lyapunov_closed_form(1.0), 0.9624236501192069, 1e-12);
}

TEST(Lyapunov, EigenvalueOracle) {
  for (double K : {1.0, 2.0, 3.0}) {
    EXPECT_NEAR(lyapunov_closed_form(K), std::log(largest_eigenvalue(K)), 1e-12);
    EXPECT_NEAR(largest_eigenvalue(K), 1.0 + (K + std::sqrt(K * K + 4.0 * K)) / 2.0, 1e-12);
  }
}

TEST(Lyapunov, SmallKLimit) {
  EXPECT_GT(lyapunov_closed_form(1e-8), 0.0);
  EXPECT_LT(lyapunov_closed_form(1e-8), 1e-3);
  EXPECT_THROW(lyapunov_closed_form(0.0), ConfigError);
}

TEST(Stretch, SawtoothConstancy) {
  for (double K : {1.0, 2.0, 3.0}) {
    MapSpec m = MapSpec::sawtooth(K);
    double lam = lyapunov_closed_form(K);
    for (int t : {1, 2, 5, 20, 60}) {
      StretchStats s = stretch_stats(m, t, 50, 3);
      EXPECT_NEAR(s.lambda_t, lam, 1e-9) << K << " " << t;
      EXPECT_NEAR(s.lambda1_t, lam, 1e-9) << K << " " << t;
    }
  }
}

TEST(Stretch, SingleMemberSawtooth) {
  StretchStats s = finite_time_lambda(MapSpec::sawtooth(1.0), 1, 1, 7);
  EXPECT_NEAR(s.lambda_t, lyapunov_closed_form(1.0), 1e-12);
  EXPECT_EQ(s.ensemble_size, 1);
}

TEST(Stretch, JensenOrdering) {
  MapSpec m = MapSpec::standard(7.0);
  for (int t : {1, 2, 4, 8}) {
    StretchStats s = stretch_stats(m, t, 2000, 11);
    EXPECT_LE(s.lambda1_t, s.lambda_t + 1e-12) << t;
  }
  std::vector<double> logs{0.1, 0.7, 2.0, 3.5};
  StretchStats s = stretch_stats_from_logs(logs, 2);
  EXPECT_LT(s.lambda1_t, s.lambda_t);
}

TEST(Stretch, IdenticalPointsGiveEqualExponents) {
  StretchStats s = stretch_stats_from_logs(std::vector<double>(10, 4.2), 3);
  EXPECT_NEAR(s.lambda_t, 1.4, 1e-14);
  EXPECT_NEAR(s.lambda1_t, 1.4, 1e-14);
}

TEST(Stretch, StandardMapSeparatedAndApproachesLambda) {
  MapSpec m = MapSpec::standard(7.0);
  StretchStats s2 = stretch_stats(m, 2, 20000, 5);
  EXPECT_LT(s2.lambda1_t, s2.lambda_t);
  StretchStats s = stretch_stats(m, 40, 4000, 5);
  EXPECT_NEAR(s.lambda_t, 1.27, 0.05);
}

TEST(Stretch, CurveMatchesPointwiseStats) {
  MapSpec m = MapSpec::standard(7.0);
  auto curve = stretch_curve(m, 6, 300, 9);
  ASSERT_EQ(curve.size(), 6u);
  StretchStats s = stretch_stats(m, 4, 300, 9);
  EXPECT_NEAR(curve[3].lambda_t, s.lambda_t, 1e-12);
  EXPECT_NEAR(curve[3].lambda1_t, s.lambda1_t, 1e-12);
}

TEST(Stretch, Deterministic) {
  MapSpec m = MapSpec::standard(7.0);
  StretchStats a = stretch_stats(m, 5, 500, 42), b = stretch_stats(m, 5, 500, 42);
  EXPECT_EQ(a.lambda_t, b.lambda_t);
  EXPECT_EQ(a.lambda1_t, b.lambda1_t);
  StretchStats c = stretch_stats(m, 5, 500, 43);
  EXPECT_NE(a.lambda_t, c.lambda_t);
}

TEST(Sampling, UniformOnTorus) {
  double sr = 0.0, sp = 0.0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    PhasePoint x = sample_phase_point(1, static_cast<std::uint64_t>(k));
    ASSERT_GE(x.r, 0.0);
    ASSERT_LT(x.p, kTwoPi);
    sr += x.r;
    sp += x.p;
  }
  EXPECT_NEAR(sr / n, kPi, 0.02);
  EXPECT_NEAR(sp / n, kPi, 0.02);
}
