#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ringlaw/freeconv.hpp"

using namespace ringlaw;

namespace {

const double kGolden = (1.0 + std::sqrt(5.0)) / 2.0;

// Stieltjes transform of the arcsine law on [-2, 2], branch with m ~ -1/z.
cplx arcsine_m(cplx z) {
  cplx s = std::sqrt(z * z - 4.0);
  if ((s / z).real() < 0.0) s = -s;
  return -1.0 / s;
}

DiscreteMeasure random_measure(std::mt19937_64& gen, int n, double lo, double hi) {
  std::uniform_real_distribution<double> pos(lo, hi);
  std::uniform_real_distribution<double> wt(0.1, 1.0);
  std::vector<double> xs(n), ws(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    xs[i] = pos(gen);
    ws[i] = wt(gen);
    total += ws[i];
  }
  for (double& w : ws) w /= total;
  return DiscreteMeasure::from_unsorted(xs, ws);
}

void expect_state_invariants(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2, const SubordinationState& st,
                             double tol) {
  EXPECT_LE(st.residual, tol);
  EXPECT_GE(st.omega1.imag(), st.z.imag() - 1e-10);
  EXPECT_GE(st.omega2.imag(), st.z.imag() - 1e-10);
  const cplx F1 = neg_recip_stieltjes(mu1, st.omega2);
  const cplx F2 = neg_recip_stieltjes(mu2, st.omega1);
  const double scale = std::max(1.0, std::abs(st.F));
  EXPECT_LE(std::abs(F1 - F2), 4 * tol * scale);
  EXPECT_LE(std::abs(st.omega1 + st.omega2 - st.z - st.F), 4 * tol * scale);
  EXPECT_LE(std::abs(st.m + 1.0 / st.F), 1e-14 * std::abs(st.m));
}

}  // namespace

TEST(SolvePhiSystem, GoldenRatio) {
  const auto bern = symmetric_pair(1.0);
  const auto st = solve_phi_system(bern, bern, cplx(0, 1));
  EXPECT_NEAR(st.omega2.real(), 0.0, 1e-12);
  EXPECT_NEAR(st.omega2.imag(), kGolden, 1e-10);
  EXPECT_NEAR(st.omega1.imag(), kGolden, 1e-10);
  EXPECT_NEAR(std::abs(st.m - cplx(0, 1.0 / std::sqrt(5.0))), 0.0, 1e-10);
  expect_state_invariants(bern, bern, st, 1e-12);
}

TEST(SolvePhiSystem, ArcsineOracleOffAxis) {
  const auto bern = symmetric_pair(1.0);
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> E(-3.0, 3.0);
  std::uniform_real_distribution<double> logeta(-3.0, 1.0);
  for (int k = 0; k < 40; ++k) {
    const cplx z(E(gen), std::pow(10.0, logeta(gen)));
    const auto st = solve_phi_system(bern, bern, z);
    EXPECT_LE(std::abs(st.m - arcsine_m(z)), 1e-9 * std::max(1.0, std::abs(st.m))) << z;
  }
}

TEST(SolvePhiSystem, LargeEta) {
  std::mt19937_64 gen(23);
  for (int k = 0; k < 10; ++k) {
    // centered, so h(w) = F(w) - w = -m2/w + O(w^-3)
    const auto a = symmetrize(random_measure(gen, 4, 0.1, 2.0));
    const auto b = symmetrize(random_measure(gen, 3, 0.1, 3.0));
    const cplx z(0.0, 100.0);
    const auto st = solve_phi_system(a, b, z);
    // w1 - z = F_1(w2) - w2 ~ -m2(mu1)/w2, and symmetrically for w2
    EXPECT_LE(std::abs(st.omega1 - z), support_stats(a).second_moment / 100.0 + 1e-6);
    EXPECT_LE(std::abs(st.omega2 - z), support_stats(b).second_moment / 100.0 + 1e-6);
    EXPECT_NEAR(std::abs(st.omega1 / z - 1.0), 0.0, 1e-3);
  }
  // non-centered: w/z -> 1 still
  const auto c = random_measure(gen, 4, -1.0, 3.0);
  const auto d = random_measure(gen, 4, -2.0, 1.0);
  for (double eta : {1e2, 1e3, 1e4}) {
    const auto st = solve_phi_system(c, d, cplx(0, eta));
    EXPECT_LE(std::abs(st.omega2 / cplx(0, eta) - 1.0), 4.0 / eta);
  }
}

TEST(SolvePhiSystem, RandomTriplesMeetContract) {
  std::mt19937_64 gen(29);
  std::uniform_real_distribution<double> E(-4.0, 4.0);
  std::uniform_real_distribution<double> logeta(-2.0, 1.0);
  std::uniform_int_distribution<int> n(2, 8);
  for (int k = 0; k < 50; ++k) {
    const auto a = random_measure(gen, n(gen), -2.0, 2.0);
    const auto b = random_measure(gen, n(gen), -2.0, 2.0);
    const cplx z(E(gen), std::pow(10.0, logeta(gen)));
    const auto st = solve_phi_system(a, b, z);
    expect_state_invariants(a, b, st, 1e-12);
    EXPECT_LE(std::abs(st.m - stieltjes(a, st.omega2)), 1e-12 * std::abs(st.m));
  }
}

TEST(SolvePhiSystem, Errors) {
  const auto bern = symmetric_pair(1.0);
  EXPECT_THROW(solve_phi_system(DiscreteMeasure::point_mass(1.0), bern, cplx(0, 1)), StructuralError);
  EXPECT_THROW(solve_phi_system(bern, bern, cplx(0, 0)), DomainError);
  EXPECT_THROW(solve_phi_system(two_point(0, 1, 0.3), bern, cplx(0.3, 1e-6), 1e-12, 2), ConvergenceError);
}

TEST(SolveDeltaConv, GoldenRatio) {
  const auto st = solve_delta_conv(symmetric_pair(1.0), 1.0, cplx(0, 1));
  EXPECT_NEAR(st.omega2.real(), 0.0, 1e-15);
  EXPECT_NEAR(st.omega2.imag(), kGolden, 1e-10);
  EXPECT_NEAR(st.m.imag(), 1.0 / std::sqrt(5.0), 1e-10);
  EXPECT_LE(st.residual, 1e-12);
}

TEST(SolveDeltaConv, ValueAtZero) {
  // mu = 1/4 (delta_{+-1} + delta_{+-2}), r = 1.4: at z = 0 the equation reduces to 1.08 y^2 = 1.8
  const auto mu = symmetrize(two_point(1.0, 2.0, 0.5));
  const auto st = solve_delta_conv(mu, 1.4, cplx(0, 0));
  EXPECT_NEAR(st.omega2.imag(), std::sqrt(5.0 / 3.0), 1e-12);
  EXPECT_NEAR(st.omega1.imag(), 1.96 / std::sqrt(5.0 / 3.0), 1e-12);
  const double y = std::sqrt(5.0 / 3.0);
  EXPECT_NEAR(st.m.imag(), y / (y * y + 1.96), 1e-12);
  EXPECT_LE(st.residual, 1e-12);
}

TEST(SolveDeltaConv, OutsideRingAtZeroRejected) {
  const auto mu = symmetrize(two_point(1.0, 2.0, 0.5));
  EXPECT_THROW(solve_delta_conv(mu, 1.2, cplx(0, 0)), DomainError);
  EXPECT_THROW(solve_delta_conv(mu, 1.6, cplx(0, 0)), DomainError);
  EXPECT_NO_THROW(solve_delta_conv(mu, 1.2, cplx(0, 0.1)));
  EXPECT_THROW(solve_delta_conv(mu, 0.0, cplx(0, 1)), DomainError);
  EXPECT_THROW(solve_delta_conv(two_point(1.0, 2.0, 0.5), 1.4, cplx(0, 1)), DomainError);
}

TEST(SolveDeltaConv, TrivialUpperBound) {
  std::mt19937_64 gen(31);
  for (int k = 0; k < 10; ++k) {
    const auto mu = symmetrize(random_measure(gen, 4, 0.2, 3.0));
    const double r = 0.5 + 0.2 * k;
    for (double eta = 1e-3; eta < 1e3; eta *= 3.0) {
      const auto st = solve_delta_conv(mu, r, cplx(0, eta));
      EXPECT_LE(std::abs(st.omega2 - cplx(0, eta)), r * r / eta * (1 + 1e-12));
    }
  }
}

TEST(SolveDeltaConv, AgreesWithGenericSolver) {
  std::mt19937_64 gen(37);
  std::uniform_real_distribution<double> E(-3.0, 3.0);
  std::uniform_real_distribution<double> logeta(-2.0, 1.0);
  std::uniform_real_distribution<double> rr(0.3, 2.5);
  std::uniform_int_distribution<int> n(1, 6);
  for (int k = 0; k < 50; ++k) {
    const auto mu = symmetrize(random_measure(gen, n(gen), 0.1, 3.0));
    const double r = rr(gen);
    const cplx z(k % 5 == 0 ? 0.0 : E(gen), std::pow(10.0, logeta(gen)));
    const auto a = solve_delta_conv(mu, r, z);
    const auto b = solve_phi_system(mu, symmetric_pair(r), z);
    EXPECT_LE(std::abs(a.omega2 - b.omega2), 1e-9 * std::max(1.0, std::abs(a.omega2))) << z;
    EXPECT_LE(std::abs(a.m - b.m), 1e-9 * std::max(1.0, std::abs(a.m))) << z;
  }
}

TEST(SolveDeltaConv, ImaginaryAxisSymmetry) {
  std::mt19937_64 gen(41);
  for (int k = 0; k < 10; ++k) {
    const auto mu = symmetrize(random_measure(gen, 5, 0.1, 3.0));
    const auto nu = symmetrize(random_measure(gen, 3, 0.1, 3.0));
    for (double eta : {0.01, 0.3, 5.0}) {
      const auto st = solve_phi_system(mu, nu, cplx(0, eta));
      EXPECT_NEAR(st.omega1.real(), 0.0, 1e-12);
      EXPECT_NEAR(st.omega2.real(), 0.0, 1e-12);
      EXPECT_NEAR(st.m.real(), 0.0, 1e-12);
    }
  }
}

TEST(SolveDeltaConv, EtaTimesGapNondecreasing) {
  std::mt19937_64 gen(43);
  for (int k = 0; k < 5; ++k) {
    const auto mu = symmetrize(random_measure(gen, 6, 0.2, 3.0));
    double prev = 0.0;
    for (double eta = 1e-4; eta < 1e4; eta *= 1.5) {
      const auto st = solve_delta_conv(mu, 1.0, cplx(0, eta));
      const double v = eta * (st.omega2.imag() - eta);
      EXPECT_GE(v, prev - 1e-10 * std::max(1.0, v));
      prev = v;
    }
  }
}

TEST(SolveDeltaConv, LipschitzInLevyDistance) {
  // shift all atoms outward by delta: Levy distance delta, omega_2 moves by O(delta)
  const auto base = two_point(1.0, 2.0, 0.5);
  const auto mu = symmetrize(base);
  const double r = 1.4;
  std::vector<double> logd, logdiff;
  for (double delta : {1e-2, 1e-3, 1e-4}) {
    const auto shifted = symmetrize(two_point(1.0 + delta, 2.0 + delta, 0.5));
    EXPECT_NEAR(levy_distance(mu, shifted), delta, 1e-12);
    double diff = 0.0;
    for (double eta : {0.0, 0.05, 0.2, 1.0}) {
      const auto a = solve_delta_conv(mu, r, cplx(0, eta));
      const auto b = solve_delta_conv(shifted, r, cplx(0, eta));
      diff = std::max(diff, std::abs(a.omega2 - b.omega2));
    }
    logd.push_back(std::log(delta));
    logdiff.push_back(std::log(diff));
  }
  const double slope = (logdiff[2] - logdiff[0]) / (logd[2] - logd[0]);
  EXPECT_NEAR(slope, 1.0, 0.1);
}

TEST(BoundaryDensity, Arcsine) {
  const auto bern = symmetric_pair(1.0);
  const auto bd = boundary_density(bern, bern, 0.0);
  EXPECT_NEAR(bd.value, 1.0 / (2.0 * std::numbers::pi), 1e-6);
  EXPECT_TRUE(bd.reliable);
  EXPECT_LT(bd.error_estimate, 1e-6);
}

TEST(BoundaryDensity, ArcsineOffCenter) {
  const auto bern = symmetric_pair(1.0);
  const double E = 0.7;
  const auto bd = boundary_density(bern, bern, E);
  EXPECT_NEAR(bd.value, 1.0 / (std::numbers::pi * std::sqrt(4.0 - E * E)), 1e-5);
}

TEST(BoundaryDensity, RingSlice) {
  const auto mu = symmetrize(two_point(1.0, 2.0, 0.5));
  const auto bd = boundary_density(mu, symmetric_pair(1.4), 0.0);
  const double y = std::sqrt(5.0 / 3.0);
  EXPECT_NEAR(bd.value, y / (y * y + 1.96) / std::numbers::pi, 1e-6);
}

TEST(BoundaryDensity, OutsideSupport) {
  const auto bern = symmetric_pair(1.0);
  EXPECT_NEAR(boundary_density(bern, bern, 6.0).value, 0.0, 1e-8);
}

TEST(BoundaryDensity, BadSequence) {
  const auto bern = symmetric_pair(1.0);
  EXPECT_THROW(boundary_density(bern, bern, 0.0, {0.01, 0.02}), StructuralError);
  EXPECT_THROW(boundary_density(bern, bern, 0.0, {0.01}), StructuralError);
}

TEST(Certificate, TwoPointExample) {
  const auto mu = symmetrize(two_point(1.0, 2.0, 0.5));
  const auto c = bulk_bound_certificate(mu, 1.4, 10.0, 24);
  EXPECT_NEAR(c.sigma_minus, std::sqrt(0.4), 1e-12);
  EXPECT_NEAR(c.sigma_plus, std::sqrt(2.5 / 0.54), 1e-12);
  EXPECT_NEAR(c.s_minus, std::sqrt(2.5), 1e-12);
  EXPECT_NEAR(c.a_minus, 0.36, 1e-10);
  EXPECT_NEAR(c.t_minus, 1.0, 1e-12);
  EXPECT_NEAR(c.b_minus, 0.36 / 1.96, 1e-10);
  EXPECT_NEAR(c.omega_hat_abs, 1.0, 1e-10);
  EXPECT_NEAR(c.im_omega2_zero, std::sqrt(5.0 / 3.0), 1e-10);
  EXPECT_GT(c.im_omega2_zero, std::sqrt(3.0) / 2.0 * c.t_minus);
  EXPECT_TRUE(c.lower_ok);
  EXPECT_TRUE(c.upper_ok);
  EXPECT_GE(c.best_constant, 1.0);
  EXPECT_EQ(c.eta_grid.size(), 25u);
  EXPECT_EQ(c.eta_grid.back(), 0.0);
  // type invariants
  EXPECT_GT(c.sigma_minus, 0.0);
  EXPECT_LT(c.sigma_minus, 1.0);
  EXPECT_GT(c.sigma_plus, 1.0);
  EXPECT_GE(c.a_minus, 0.75 * (1.96 - 1.6) / (c.s_plus * c.s_plus));
  EXPECT_LE(c.a_minus, (2.5 - 1.6) / (c.s_minus * c.s_minus) + 1e-12);
  EXPECT_GE(c.omega_hat_abs, c.t_minus - 1e-12);
  EXPECT_GT(c.min_im_omega2, 0.0);
  EXPECT_GT(c.min_abs_m, 0.0);
}

TEST(Certificate, QuarterCircleAcrossRing) {
  const auto mu = symmetrize(quarter_circle(200));
  const auto R = radii(quarter_circle(200));
  for (double frac : {0.1, 0.5, 0.9}) {
    const double r = R.r_minus + frac * (R.r_plus - R.r_minus);
    const auto c = bulk_bound_certificate(mu, r, 10.0, 16);
    EXPECT_TRUE(c.lower_ok) << r;
    EXPECT_TRUE(c.upper_ok) << r;
    EXPECT_LT(c.best_constant, 50.0) << r;
    EXPECT_LT(c.b_minus, 1.0 + 1e-15);
  }
}

TEST(Certificate, BoundaryRejected) {
  const auto mu = symmetrize(two_point(1.0, 2.0, 0.5));
  EXPECT_THROW(bulk_bound_certificate(mu, std::sqrt(2.5)), DomainError);
  EXPECT_THROW(bulk_bound_certificate(mu, std::sqrt(1.6)), DomainError);
  EXPECT_THROW(bulk_bound_certificate(symmetric_pair(1.0), 1.0), StructuralError);
}

TEST(Certificate, Json) {
  const auto c = bulk_bound_certificate(symmetrize(two_point(1.0, 2.0, 0.5)), 1.4, 10.0, 4);
  nlohmann::json j = c;
  EXPECT_NEAR(j["s_minus"].get<double>(), std::sqrt(2.5), 1e-12);
  EXPECT_EQ(j["rows"].size(), 5u);
}
