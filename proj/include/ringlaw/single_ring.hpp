#pragma once

// Log-potential L(s) = int log|u| d(mu_Sigma^sym ⊞ delta_s^sym)(u) and the
// radial single-ring density rho(s) = (L'' + L'/s) / (2 pi).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ringlaw/errors.hpp"
#include "ringlaw/freeconv.hpp"
#include "ringlaw/measure.hpp"
#include "ringlaw/parallel.hpp"

namespace ringlaw {

inline constexpr double kDefaultQuadTol = 1e-10;

inline double default_split_height(const DiscreteMeasure& mu_sigma) {
  return std::max(100.0, 20.0 * support_stats(mu_sigma).s_plus);
}

/// Cached moments and symmetrization of mu_Sigma; evaluates L(s) repeatedly.
class RingPotential {
 public:
  explicit RingPotential(const DiscreteMeasure& mu_sigma, double K = -1.0, double quad_tol = kDefaultQuadTol)
      : sym_(symmetrize(mu_sigma)), quad_tol_(quad_tol) {
    const auto st = support_stats(mu_sigma);
    s_plus_ = st.s_plus;
    m2_ = st.second_moment;
    m4_ = mu_sigma.moment(4);
    K_ = K > 0.0 ? K : default_split_height(mu_sigma);
    if (sym_.size() < 2) throw StructuralError("log-potential needs mu_Sigma with a nonzero atom");
  }

  double K() const { return K_; }
  double m2_sigma() const { return m2_; }
  double quad_tol() const { return quad_tol_; }
  const DiscreteMeasure& symmetrized() const { return sym_; }

  /// Im m_{Sigma,s}(i eta).
  double im_m(double s, double eta) const { return solve_delta_conv(sym_, s, cplx(0.0, eta)).m.imag(); }

  /// L(s) = T1 - T2 with T1 = int log|u - iK| from the moment expansion and
  /// T2 = int_0^K Im m(i eta) d eta.
  double operator()(double s) const {
    if (!(s > 0.0)) throw DomainError("log-potential needs s > 0");
    const double scale = std::max(s_plus_, s);
    if (!(K_ >= 10.0 * scale)) throw DomainError("split height K must be at least 10 max(s_+, s)");

    // moments of mu_{Sigma,s} from additivity of free cumulants
    const double k2 = m2_ + s * s;
    const double k4 = m4_ - 2.0 * m2_ * m2_ - s * s * s * s;
    const double m4 = k4 + 2.0 * k2 * k2;
    const double K2 = K_ * K_;
    const double t1 = std::log(K_) + k2 / (2.0 * K2) - m4 / (4.0 * K2 * K2);

    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double eta0 = 10.0 * scale;
    const double head = GK::integrate([&](double eta) { return im_m(s, eta); }, 0.0, eta0, 20, quad_tol_);
    // int_{eta0}^K (Im m - 1/eta) d eta after t = 1/eta
    const double tail = GK::integrate(
        [&](double t) {
          if (t == 0.0) return 0.0;
          return (im_m(s, 1.0 / t) - t) / (t * t);
        },
        1.0 / K_, 1.0 / eta0, 20, quad_tol_);
    return t1 - (head + std::log(K_ / eta0) + tail);
  }

 private:
  DiscreteMeasure sym_;
  double quad_tol_;
  double s_plus_ = 0.0;
  double m2_ = 0.0;
  double m4_ = 0.0;
  double K_ = 0.0;
};

inline double log_potential(const DiscreteMeasure& mu_sigma, double s, double K = -1.0,
                            double quad_tol = kDefaultQuadTol) {
  return RingPotential(mu_sigma, K, quad_tol)(s);
}

struct DensityPoint {
  double s = 0.0;
  double L = 0.0;
  double dL = 0.0;
  double d2L = 0.0;
  double rho = 0.0;
};

namespace detail {

// 5-point central stencils on values at s-2h, s-h, s, s+h, s+2h.
inline DensityPoint density_from_stencil(double s, double h, const double* v) {
  DensityPoint p;
  p.s = s;
  p.L = v[2];
  p.dL = (-v[4] + 8.0 * v[3] - 8.0 * v[1] + v[0]) / (12.0 * h);
  p.d2L = (-v[4] + 16.0 * v[3] - 30.0 * v[2] + 16.0 * v[1] - v[0]) / (12.0 * h * h);
  p.rho = (p.d2L + p.dL / s) / (2.0 * std::numbers::pi);
  return p;
}

}  // namespace detail

inline double default_fd_step(const DiscreteMeasure& mu_sigma) {
  const auto r = radii(mu_sigma);
  return 1e-2 * (r.r_plus - r.r_minus);
}

inline DensityPoint ring_density_point(const RingPotential& L, double s, double h) {
  if (!(h > 0.0)) throw DomainError("finite-difference step must be positive");
  if (!(s - 2.0 * h > 0.0)) throw DomainError("stencil reaches s <= 0");
  double v[5];
  for (int k = 0; k < 5; ++k) v[k] = L(s + (k - 2) * h);
  return detail::density_from_stencil(s, h, v);
}

/// rho(s) = (L''(s) + L'(s)/s) / (2 pi) by finite differences of step h (h <= 0: default).
inline double ring_density(const DiscreteMeasure& mu_sigma, double s, double h = -1.0, double K = -1.0,
                           double quad_tol = kDefaultQuadTol) {
  const RingPotential L(mu_sigma, K, quad_tol);
  return ring_density_point(L, s, h > 0.0 ? h : default_fd_step(mu_sigma)).rho;
}

/// Density at uniformly spaced radii s_0 + i h sharing one grid of potential values.
inline std::vector<DensityPoint> density_profile(const RingPotential& L, double s0, double h, std::size_t n,
                                                 unsigned threads = 1) {
  if (!(h > 0.0)) throw DomainError("finite-difference step must be positive");
  if (!(s0 - 2.0 * h > 0.0)) throw DomainError("stencil reaches s <= 0");
  const std::size_t m = n + 4;
  const auto vals = parallel_map(m, threads, [&](std::size_t i) { return L(s0 + (static_cast<double>(i) - 2.0) * h); });
  std::vector<DensityPoint> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = detail::density_from_stencil(s0 + static_cast<double>(i) * h, h, &vals[i]);
  return out;
}

/// int_{r_- + tau}^{r_+ - tau} rho(s) 2 pi s ds by composite Simpson on n_radii
/// nodes (rounded up to odd); the node spacing doubles as the FD step.
inline double ring_mass(const DiscreteMeasure& mu_sigma, double tau, std::size_t n_radii = 0, unsigned threads = 1,
                        double K = -1.0, double quad_tol = kDefaultQuadTol) {
  if (!(tau >= 0.0)) throw DomainError("tau must be nonnegative");
  const auto r = radii(mu_sigma);
  const double a = r.r_minus + tau;
  const double b = r.r_plus - tau;
  if (!(b > a)) return 0.0;
  if (n_radii == 0) {
    const double h_target = std::min(1e-2 * (r.r_plus - r.r_minus), tau > 0.0 ? tau / 2.0 : 1e-2 * (r.r_plus - r.r_minus));
    n_radii = static_cast<std::size_t>(std::ceil((b - a) / h_target)) + 1;
  }
  n_radii = std::max<std::size_t>(n_radii, 3);
  if (n_radii % 2 == 0) ++n_radii;
  const double h = (b - a) / static_cast<double>(n_radii - 1);
  if (!(a - 2.0 * h > 0.0)) throw DomainError("inner radius too close to 0 for the stencil; increase tau or n_radii");
  const RingPotential L(mu_sigma, K, quad_tol);
  const auto prof = density_profile(L, a, h, n_radii, threads);
  double acc = 0.0;
  for (std::size_t i = 0; i < n_radii; ++i) {
    const double w = (i == 0 || i + 1 == n_radii) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * prof[i].rho * 2.0 * std::numbers::pi * prof[i].s;
  }
  return acc * h / 3.0;
}

}  // namespace ringlaw
