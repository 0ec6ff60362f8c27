#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ringlaw/measure.hpp"

using namespace ringlaw;

namespace {

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

// Independent bisection on the closed-form quarter-circle CDF.
double qc_quantile_oracle(double p) {
  double lo = 0.0, hi = 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double F = (mid * std::sqrt(4.0 - mid * mid) / 2.0 + 2.0 * std::asin(mid / 2.0)) / std::numbers::pi;
    (F < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(DiscreteMeasure, RejectsBadInput) {
  EXPECT_THROW(DiscreteMeasure({1.0, 2.0}, {0.5, 0.4}), StructuralError);
  EXPECT_THROW(DiscreteMeasure({2.0, 1.0}, {0.5, 0.5}), StructuralError);
  EXPECT_THROW(DiscreteMeasure({1.0, 1.0}, {0.5, 0.5}), StructuralError);
  EXPECT_THROW(DiscreteMeasure({1.0, NAN}, {0.5, 0.5}), StructuralError);
  EXPECT_THROW(DiscreteMeasure({1.0, 2.0}, {1.5, -0.5}), StructuralError);
  EXPECT_THROW(DiscreteMeasure({}, {}), StructuralError);
  EXPECT_NO_THROW(DiscreteMeasure({1.0, 2.0}, {0.5, 0.5 + 5e-13}));
}

TEST(Symmetrize, PointMass) {
  const auto s = symmetrize(DiscreteMeasure::point_mass(1.0));
  EXPECT_EQ(s, DiscreteMeasure({-1.0, 1.0}, {0.5, 0.5}));
  EXPECT_TRUE(s.is_symmetric());
}

TEST(Symmetrize, Idempotent) {
  const DiscreteMeasure sym({-1.0, 0.0, 1.0}, {0.25, 0.5, 0.25});
  EXPECT_EQ(symmetrize(sym), sym);
}

TEST(Symmetrize, TwoPoint) {
  const auto s = symmetrize(two_point(1.0, 2.0, 0.5));
  EXPECT_EQ(s, DiscreteMeasure({-2.0, -1.0, 1.0, 2.0}, {0.25, 0.25, 0.25, 0.25}));
}

TEST(Symmetrize, AtomAtZeroNotDoubled) {
  const auto s = symmetrize(DiscreteMeasure({0.0, 3.0}, {0.4, 0.6}));
  EXPECT_EQ(s, DiscreteMeasure({-3.0, 0.0, 3.0}, {0.3, 0.4, 0.3}));
}

TEST(Stieltjes, Examples) {
  const auto m0 = stieltjes(DiscreteMeasure::point_mass(0.0), cplx(0, 1));
  EXPECT_NEAR(std::abs(m0 - cplx(0, 1)), 0.0, 1e-15);
  // symmetric Bernoulli: m(w) = w / (1 - w^2)
  const auto bern = symmetric_pair(1.0);
  const cplx w(0, 2);
  EXPECT_NEAR(std::abs(stieltjes(bern, w) - w / (1.0 - w * w)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(stieltjes(bern, w) - cplx(0, 0.4)), 0.0, 1e-15);
  EXPECT_THROW(stieltjes(bern, cplx(1.0, 0.0)), DomainError);
  EXPECT_THROW(stieltjes(bern, cplx(1.0, -1.0)), DomainError);
}

TEST(Stieltjes, LargeEtaAsymptotics) {
  std::mt19937_64 gen(7);
  for (int k = 0; k < 10; ++k) {
    const auto mu = symmetrize(random_measure(gen, 5, 0.1, 3.0));  // centered: first-order term vanishes
    const double m2 = support_stats(mu).second_moment;
    for (double eta : {1e2, 1e3, 1e4}) {
      const cplx z(0, eta);
      EXPECT_LE(std::abs(z * stieltjes(mu, z) + 1.0), 2.0 * m2 / (eta * eta) + 1e-13);
      EXPECT_LE(std::abs(neg_recip_stieltjes(mu, z) / z - 1.0), 2.0 * m2 / (eta * eta) + 1e-13);
    }
  }
}

TEST(Stieltjes, RealPartVanishesForSymmetric) {
  std::mt19937_64 gen(11);
  for (int k = 0; k < 10; ++k) {
    const auto mu = symmetrize(random_measure(gen, 6, 0.1, 4.0));
    for (double eta : {1e-3, 0.1, 1.0, 30.0}) EXPECT_NEAR(stieltjes(mu, cplx(0, eta)).real(), 0.0, 1e-14);
  }
  const DiscreteMeasure skew({-1.0, 2.0}, {0.5, 0.5});
  EXPECT_GT(std::abs(stieltjes(skew, cplx(0, 1.0)).real()), 1e-3);
}

TEST(NegRecipStieltjes, Examples) {
  EXPECT_NEAR(std::abs(neg_recip_stieltjes(symmetric_pair(1.0), cplx(0, 2)) - cplx(0, 2.5)), 0.0, 1e-14);
  const cplx z(0, 1);
  EXPECT_NEAR(std::abs(neg_recip_stieltjes(symmetric_pair(1.0), z) - (z - 1.0 / z)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(neg_recip_stieltjes(symmetric_pair(1.0), z) - cplx(0, 2)), 0.0, 1e-14);
}

TEST(NegRecipStieltjes, ImaginaryPartGrows) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 50; ++k) {
    const auto mu = random_measure(gen, 4, -2.0, 2.0);
    const cplx z(u(gen), std::abs(u(gen)) + 1e-3);
    EXPECT_GE(neg_recip_stieltjes(mu, z).imag(), z.imag() - 1e-14);
  }
}

TEST(Radii, TwoPoint) {
  const auto r = radii(two_point(1.0, 2.0, 0.5));
  EXPECT_NEAR(r.r_minus, std::sqrt(8.0 / 5.0), 1e-12);
  EXPECT_NEAR(r.r_plus, std::sqrt(5.0 / 2.0), 1e-12);
  EXPECT_FALSE(r.degenerate);
}

TEST(Radii, AtomAtZero) {
  const auto r = radii(DiscreteMeasure({0.0, 1.0}, {0.5, 0.5}));
  EXPECT_EQ(r.r_minus, 0.0);
  EXPECT_NEAR(r.r_plus, std::sqrt(0.5), 1e-15);
}

TEST(Radii, PointMassFlagged) {
  const auto r = radii(DiscreteMeasure::point_mass(2.0));
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.r_minus, r.r_plus);
}

TEST(Radii, NegativeSupportRejected) { EXPECT_THROW(radii(symmetric_pair(1.0)), DomainError); }

TEST(Radii, QuarterCircle) {
  // second moment of (1/pi) sqrt(4 - x^2) on [0, 2] is 1
  const auto r = radii(quarter_circle(2000));
  EXPECT_NEAR(r.r_plus, 1.0, 1e-3);
}

TEST(Radii, Scaling) {
  std::mt19937_64 gen(5);
  for (int k = 0; k < 10; ++k) {
    const auto mu = random_measure(gen, 5, 0.2, 3.0);
    const double c = 0.5 + k;
    std::vector<double> xs(mu.atoms().begin(), mu.atoms().end());
    for (double& x : xs) x *= c;
    const auto scaled = DiscreteMeasure(xs, std::vector<double>(mu.weights().begin(), mu.weights().end()));
    EXPECT_NEAR(radii(scaled).r_minus, c * radii(mu).r_minus, 1e-12 * c);
    EXPECT_NEAR(radii(scaled).r_plus, c * radii(mu).r_plus, 1e-12 * c);
  }
}

TEST(LevyDistance, PointMasses) {
  const auto a = DiscreteMeasure::point_mass(0.0);
  EXPECT_EQ(levy_distance(a, a), 0.0);
  EXPECT_NEAR(levy_distance(a, DiscreteMeasure::point_mass(0.3)), 0.3, 1e-12);
  EXPECT_NEAR(levy_distance(a, DiscreteMeasure::point_mass(5.0)), 1.0, 1e-12);
}

TEST(LevyDistance, MetricProperties) {
  std::mt19937_64 gen(13);
  for (int k = 0; k < 30; ++k) {
    const auto a = random_measure(gen, 4, -1.0, 1.0);
    const auto b = random_measure(gen, 3, -1.0, 1.0);
    const auto c = random_measure(gen, 5, -1.0, 1.0);
    const double ab = levy_distance(a, b), ba = levy_distance(b, a);
    EXPECT_NEAR(ab, ba, 1e-12);
    EXPECT_LE(ab, 1.0);
    EXPECT_LE(ab, levy_distance(a, c) + levy_distance(c, b) + 1e-12);
  }
}

TEST(LevyDistance, SmallShift) {
  // shifting every atom by d < all gaps and weights gives distance d
  const DiscreteMeasure a({0.0, 1.0, 2.0}, {0.3, 0.3, 0.4});
  const DiscreteMeasure b({0.01, 1.01, 2.01}, {0.3, 0.3, 0.4});
  EXPECT_NEAR(levy_distance(a, b), 0.01, 1e-12);
}

TEST(SupportStats, Examples) {
  auto s = support_stats(two_point(1.0, 2.0, 0.5));
  EXPECT_EQ(s.s_plus, 2.0);
  EXPECT_DOUBLE_EQ(s.second_moment, 2.5);
  s = support_stats(DiscreteMeasure::point_mass(0.0));
  EXPECT_EQ(s.s_plus, 0.0);
  EXPECT_EQ(s.second_moment, 0.0);
  s = support_stats(symmetrize(two_point(1.0, 2.0, 0.5)));
  EXPECT_EQ(s.s_plus, 2.0);
  EXPECT_DOUBLE_EQ(s.second_moment, 2.5);
}

TEST(Nevanlinna, SymmetricBernoulli) {
  const auto rep = nevanlinna_rep(symmetric_pair(1.0));
  ASSERT_EQ(rep.mu_hat.size(), 1u);
  EXPECT_EQ(rep.mu_hat.atoms[0], 0.0);
  EXPECT_NEAR(rep.mu_hat.weights[0], 1.0, 1e-14);
  EXPECT_TRUE(rep.mu_tilde.empty());
  EXPECT_NEAR(rep.r_minus_sq, 1.0, 1e-14);
}

TEST(Nevanlinna, FourAtoms) {
  const auto rep = nevanlinna_rep(symmetrize(two_point(1.0, 2.0, 0.5)));
  ASSERT_EQ(rep.mu_hat.size(), 3u);
  EXPECT_NEAR(rep.mu_hat.atoms[0], -std::sqrt(2.5), 1e-12);
  EXPECT_NEAR(rep.mu_hat.atoms[1], 0.0, 0.0);
  EXPECT_NEAR(rep.mu_hat.atoms[2], std::sqrt(2.5), 1e-12);
  EXPECT_NEAR(rep.mu_hat.weights[0], 0.45, 1e-10);
  EXPECT_NEAR(rep.mu_hat.weights[1], 1.6, 1e-12);
  EXPECT_NEAR(rep.mu_hat.weights[2], 0.45, 1e-10);
  EXPECT_NEAR(rep.mu_hat.mass(), 2.5, 1e-10);
  EXPECT_NEAR(rep.r_minus_sq, 1.6, 1e-12);
  EXPECT_NEAR(rep.mu_tilde.mass(), 0.9, 1e-10);
}

TEST(Nevanlinna, MassAndReconstruction) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 10; ++k) {
    const auto mu = symmetrize(random_measure(gen, 2 + k, 0.3, 3.0));
    const auto rep = nevanlinna_rep(mu);
    EXPECT_NEAR(rep.mu_hat.mass(), support_stats(mu).second_moment, 1e-10);
    for (int j = 0; j < 20; ++j) {
      const cplx w(u(gen), std::abs(u(gen)) + 0.05);
      cplx integral = 0.0;
      for (std::size_t a = 0; a < rep.mu_hat.size(); ++a) integral += rep.mu_hat.weights[a] / (rep.mu_hat.atoms[a] - w);
      const cplx lhs = neg_recip_stieltjes(mu, w) - w;
      EXPECT_LE(std::abs(lhs - integral), 1e-9 * std::max(1.0, std::abs(lhs)));
    }
  }
}

TEST(Nevanlinna, ZeroAtomIsInverseMoment) {
  const auto base = DiscreteMeasure({0.5, 1.0, 3.0}, {0.2, 0.5, 0.3});
  const auto rep = nevanlinna_rep(symmetrize(base));
  EXPECT_NEAR(rep.r_minus_sq, std::pow(radii(base).r_minus, 2), 1e-12);
}

TEST(Nevanlinna, AtomAtOrigin) {
  const auto rep = nevanlinna_rep(DiscreteMeasure({-1.0, 0.0, 1.0}, {0.25, 0.5, 0.25}));
  EXPECT_EQ(rep.r_minus_sq, 0.0);
  EXPECT_NEAR(rep.mu_hat.mass(), 0.5, 1e-10);
}

TEST(Nevanlinna, Errors) {
  EXPECT_THROW(nevanlinna_rep(DiscreteMeasure::point_mass(0.0)), StructuralError);
  EXPECT_THROW(nevanlinna_rep(DiscreteMeasure({-1.0, 2.0}, {0.5, 0.5})), DomainError);
}

TEST(ReferenceMeasure, QuarterCircleFour) {
  const auto mu = reference_measure("quarter_circle", {}, 4);
  ASSERT_EQ(mu.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(mu.atoms()[i], qc_quantile_oracle((i + 0.5) / 4.0), 1e-12);
    EXPECT_DOUBLE_EQ(mu.weights()[i], 0.25);
  }
}

TEST(ReferenceMeasure, TwoPointAndUniform) {
  const std::vector<double> tp{1.0, 2.0, 0.5};
  EXPECT_EQ(reference_measure("two_point", tp, 7), DiscreteMeasure({1.0, 2.0}, {0.5, 0.5}));
  const std::vector<double> un{0.0, 1.0};
  EXPECT_EQ(reference_measure("uniform", un, 2), DiscreteMeasure({0.25, 0.75}, {0.5, 0.5}));
  EXPECT_THROW(reference_measure("cauchy", {}, 4), StructuralError);
  EXPECT_THROW(reference_measure("quarter_circle", {}, 1), StructuralError);
}

TEST(QuantileProfile, TwoPoint) {
  const auto d = quantile_profile(two_point(1.0, 2.0, 0.5), 6);
  EXPECT_EQ(d, (std::vector<double>{1, 1, 1, 2, 2, 2}));
  EXPECT_EQ(empirical_measure_abs(d), two_point(1.0, 2.0, 0.5));
}

TEST(RingGeometry, DefaultTau) {
  const auto g = ring_geometry(two_point(1.0, 2.0, 0.5));
  EXPECT_NEAR(g.tau, 0.05 * (std::sqrt(2.5) - std::sqrt(1.6)), 1e-15);
  EXPECT_TRUE(g.contains(cplx(1.4, 0.0)));
  EXPECT_FALSE(g.contains(cplx(1.27, 0.0)));
  EXPECT_LE(g.r_plus, g.s_plus);
  EXPECT_TRUE(ring_geometry(two_point(1.0, 2.0, 0.5), 0.2).annulus_empty());
}

TEST(MeasureJson, RoundTripAndErrors) {
  const auto mu = quarter_circle(5);
  nlohmann::json j = mu;
  EXPECT_EQ(measure_from_json(nlohmann::json::parse(j.dump())), mu);
  try {
    measure_from_json(nlohmann::json::parse(R"({"atoms":[1,2]})"), "/measure");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.path(), "/measure/weights");
  }
  try {
    measure_from_json(nlohmann::json::parse(R"({"atoms":[1,2],"weights":[0.5,0.6]})"), "/measure");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.path(), "/measure/weights");
  }
}
