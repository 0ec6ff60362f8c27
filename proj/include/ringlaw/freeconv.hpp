#pragma once

// Free additive convolution through the subordination equations
//   F_1(w2) = F_2(w1) = w1 + w2 - z,
// the specialized equation for mu ⊞ delta_r^sym, boundary densities and the
// imaginary-axis bound certificate.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <json.hpp>

#include "ringlaw/errors.hpp"
#include "ringlaw/measure.hpp"

namespace ringlaw {

inline constexpr double kDefaultTol = 1e-12;
inline constexpr int kDefaultMaxIter = 10000;

struct SubordinationState {
  cplx z;
  cplx omega1;
  cplx omega2;
  cplx m;
  cplx F;
  double residual = 0.0;
  int iterations = 0;
};

namespace detail {

struct FEval {
  cplx F;
  cplx dF;
};

inline FEval eval_F(const DiscreteMeasure& mu, cplx w) {
  const auto [m, dm] = stieltjes_with_derivative(mu, w);
  return {-1.0 / m, dm / (m * m)};
}

// max-norm of Phi, relative to max(1, |w1|, |w2|) so that tol is attainable
// in double precision at large |z|.
inline double phi_residual(cplx F1w2, cplx F2w1, cplx w1, cplx w2, cplx z) {
  const cplx s = w1 + w2 - z;
  const double scale = std::max({1.0, std::abs(w1), std::abs(w2)});
  return std::max(std::abs(F1w2 - s), std::abs(F2w1 - s)) / scale;
}

}  // namespace detail

/// Solves Phi(w1, w2, z) = 0 in C+ x C+. Damped alternating fixed-point sweeps
/// bring the iterate into the basin of a Newton iteration with backtracking.
/// `guess` seeds (w1, w2), e.g. from a neighbouring spectral parameter.
inline SubordinationState solve_phi_system(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2, cplx z,
                                           double tol = kDefaultTol, int max_iter = kDefaultMaxIter,
                                           std::optional<std::pair<cplx, cplx>> guess = std::nullopt) {
  if (mu1.size() < 2 || mu2.size() < 2)
    throw StructuralError("subordination needs measures supported at more than one point");
  if (!(z.imag() > 0.0)) throw DomainError("subordination solver needs Im z > 0");

  cplx w1;
  cplx w2;
  if (guess && guess->first.imag() > 0.0 && guess->second.imag() > 0.0) {
    std::tie(w1, w2) = *guess;
  } else {
    const double spread = std::sqrt(support_stats(mu1).second_moment + support_stats(mu2).second_moment);
    w1 = w2 = z + cplx(0.0, std::max(spread, 1e-8));
  }

  // Symmetric measures at z = i eta: the solution is purely imaginary, and
  // dropping rounding noise in the real parts keeps it so.
  const bool on_axis = z.real() == 0.0 && mu1.is_symmetric() && mu2.is_symmetric();
  auto project = [&](cplx w) { return on_axis ? cplx(0.0, w.imag()) : w; };
  w1 = project(w1);
  w2 = project(w2);

  auto f1 = detail::eval_F(mu1, w2);
  auto f2 = detail::eval_F(mu2, w1);
  double res = detail::phi_residual(f1.F, f2.F, w1, w2, z);
  double theta = 1.0;
  int streak = 0;
  int it = 0;

  // Newton step on the 2x2 system with backtracking; accepted when the
  // residual drops below factor * res.
  //   J = [[-1, F1'(w2) - 1], [F2'(w1) - 1, -1]]
  auto newton = [&](double factor, int halvings) {
    const cplx s = w1 + w2 - z;
    const cplx r1 = f1.F - s;
    const cplx r2 = f2.F - s;
    const cplx b = f1.dF - 1.0, c = f2.dF - 1.0;
    const cplx det = 1.0 - b * c;
    if (!(std::abs(det) > 1e-300)) return false;
    const cplx d1 = (-r1 - b * r2) / det;
    const cplx d2 = (-c * r1 - r2) / det;
    double t = 1.0;
    for (int ls = 0; ls < halvings; ++ls, t *= 0.5) {
      const cplx n1 = project(w1 - t * d1);
      const cplx n2 = project(w2 - t * d2);
      if (!(n1.imag() >= z.imag() && n2.imag() >= z.imag())) continue;
      const auto g1 = detail::eval_F(mu1, n2);
      const auto g2 = detail::eval_F(mu2, n1);
      const double nres = detail::phi_residual(g1.F, g2.F, n1, n2, z);
      if (std::isfinite(nres) && nres <= factor * res) {
        w1 = n1;
        w2 = n2;
        f1 = g1;
        f2 = g2;
        res = nres;
        return true;
      }
    }
    return false;
  };

  for (; it < max_iter && res > tol; ++it) {
    if (newton(0.9, 12)) continue;

    // Damped alternating sweep; z + F(w) - w stays in C+.
    const double before = res;
    w2 = project((1.0 - theta) * w2 + theta * (z + f2.F - w1));
    f1 = detail::eval_F(mu1, w2);
    w1 = project((1.0 - theta) * w1 + theta * (z + f1.F - w2));
    f2 = detail::eval_F(mu2, w1);
    res = detail::phi_residual(f1.F, f2.F, w1, w2, z);
    if (res > before) {
      theta = std::max(theta * 0.5, 1.0 / 16.0);
      streak = 0;
    } else if (++streak >= 3 && theta < 1.0) {
      theta = std::min(1.0, 2.0 * theta);
      streak = 0;
    }
  }
  if (!(res <= tol)) throw ConvergenceError("subordination solver did not converge", res);
  newton(1.0, 1);  // one polishing step

  SubordinationState st;
  st.z = z;
  st.omega1 = w1;
  st.omega2 = w2;
  st.F = f1.F;
  st.m = -1.0 / f1.F;
  st.residual = res;
  st.iterations = it;
  return st;
}

namespace detail {

inline void require_symmetric_input(const DiscreteMeasure& mu, double r) {
  if (mu.size() < 2) throw StructuralError("measure must be supported at more than one point");
  if (!mu.is_symmetric()) throw DomainError("measure must be symmetric");
  if (!(r > 0.0)) throw DomainError("r must be positive");
}

// k(y) = int x^2/(x^2+y^2) dmu / int y/(x^2+y^2) dmu, i.e. F(iy)/i - y.
inline double k_ratio(const DiscreteMeasure& mu, double y) {
  const auto xs = mu.atoms();
  const auto ws = mu.weights();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double q = xs[i] * xs[i] + y * y;
    num += ws[i] * xs[i] * xs[i] / q;
    den += ws[i] * y / q;
  }
  return num / den;
}

inline SubordinationState delta_state(const DiscreteMeasure& mu1, double r, cplx z, cplx w2, int iters) {
  SubordinationState st;
  st.z = z;
  st.omega2 = w2;
  st.omega1 = -r * r / (w2 - z);
  const cplx m = stieltjes_unchecked(mu1, w2);
  st.m = m;
  st.F = -1.0 / m;
  st.residual = phi_residual(st.F, st.omega1 - r * r / st.omega1, st.omega1, st.omega2, z);
  st.iterations = iters;
  return st;
}

// z = i eta, eta >= 0: w2 = i(eta + d) with d > 0 the unique root of
// d (k(eta + d) + eta) = r^2, an increasing function of d.
inline SubordinationState delta_conv_axis(const DiscreteMeasure& mu1, double r, double eta) {
  const double r2 = r * r;
  auto phi = [&](double d) { return d * (k_ratio(mu1, eta + d) + eta) - r2; };
  if (eta == 0.0) {
    const auto rep_moments = [&] {
      double inv = 0.0;
      double sq = 0.0;
      bool zero_atom = false;
      for (std::size_t i = 0; i < mu1.size(); ++i) {
        const double x = mu1.atoms()[i];
        if (x == 0.0) zero_atom = true;
        else inv += mu1.weights()[i] / (x * x);
        sq += mu1.weights()[i] * x * x;
      }
      return std::pair{zero_atom ? 0.0 : 1.0 / inv, sq};
    }();
    if (!(r2 > rep_moments.first && r2 < rep_moments.second))
      throw DomainError("z = 0 needs r strictly inside (r_-, r_+)");
  }
  double lo = 1.0;
  double hi = 1.0;
  int guard = 0;
  while (phi(lo) >= 0.0) {
    lo *= 0.5;
    if (++guard > 2000) throw ConvergenceError("imaginary-axis bracket search failed", phi(lo));
  }
  guard = 0;
  while (phi(hi) <= 0.0) {
    hi *= 2.0;
    if (++guard > 2000) throw ConvergenceError("imaginary-axis bracket search failed", phi(hi));
  }
  boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 2);
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(phi, lo, hi, phi(lo), phi(hi), tol, iters);
  const double d = 0.5 * (a + b);
  return delta_state(mu1, r, cplx(0.0, eta), cplx(0.0, eta + d), static_cast<int>(iters));
}

}  // namespace detail

/// Solves F_1(w2) - w2 = -z - r^2/(w2 - z) for mu1 ⊞ delta_r^sym; w1 = -r^2/(w2 - z).
/// On the imaginary axis (including z = 0) this is a monotone scalar root-find.
inline SubordinationState solve_delta_conv(const DiscreteMeasure& mu1_sym, double r, cplx z,
                                           double tol = kDefaultTol, int max_iter = kDefaultMaxIter) {
  detail::require_symmetric_input(mu1_sym, r);
  if (z.real() == 0.0 && z.imag() >= 0.0) return detail::delta_conv_axis(mu1_sym, r, z.imag());
  if (!(z.imag() > 0.0)) throw DomainError("solve_delta_conv needs Im z > 0 off the imaginary axis");

  const double r2 = r * r;
  auto psi = [&](cplx w, cplx* dpsi) {
    const auto f = detail::eval_F(mu1_sym, w);
    const cplx u = w - z;
    if (dpsi) *dpsi = f.dF - 1.0 - r2 / (u * u);
    return f.F - w + z + r2 / u;
  };
  cplx w2 = z + cplx(0.0, std::sqrt(support_stats(mu1_sym).second_moment + r2));
  cplx dpsi;
  double res = std::abs(psi(w2, &dpsi));
  int it = 0;
  for (; it < max_iter; ++it) {
    const auto st = detail::delta_state(mu1_sym, r, z, w2, it);
    if (st.residual <= tol) return st;
    bool accepted = false;
    // Newton only near the fixed point: far away it can be drawn to spurious
    // zeros of psi with Im w1 < Im z.
    if (res < 1e-3 * (1.0 + std::abs(w2)) && std::abs(dpsi) > 1e-300) {
      const cplx step = psi(w2, nullptr) / dpsi;
      double t = 1.0;
      for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
        const cplx cand = w2 - t * step;
        if (!(cand.imag() > z.imag()) || !((-r2 / (cand - z)).imag() >= z.imag())) continue;
        cplx dcand;
        const double nres = std::abs(psi(cand, &dcand));
        if (std::isfinite(nres) && nres < (1.0 - 1e-4 * t) * res) {
          w2 = cand;
          dpsi = dcand;
          res = nres;
          accepted = true;
          break;
        }
      }
    }
    if (accepted) continue;
    // w2 <- z - r^2 / (z + F_1(w2) - w2)
    const cplx h1 = detail::eval_F(mu1_sym, w2).F - w2;
    w2 = z - r2 / (z + h1);
    res = std::abs(psi(w2, &dpsi));
  }
  const auto st = detail::delta_state(mu1_sym, r, z, w2, it);
  if (st.residual <= tol) return st;
  throw ConvergenceError("solve_delta_conv did not converge", st.residual);
}

// ---------------------------------------------------------------------------
// Boundary density

struct BoundaryDensity {
  double value = 0.0;
  double error_estimate = 0.0;
  bool reliable = true;
  std::vector<double> eta;
  std::vector<double> samples;  // Im m(E + i eta) / pi
};

inline const std::vector<double>& default_eta_sequence() {
  static const std::vector<double> seq{0.02, 0.01, 0.005, 0.0025};
  return seq;
}

/// Richardson (Neville) extrapolation of Im m(E + i eta)/pi to eta = 0 along a
/// decreasing eta sequence, solved by continuation.
inline BoundaryDensity boundary_density(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2, double E,
                                        const std::vector<double>& eta_seq = default_eta_sequence()) {
  if (eta_seq.size() < 2) throw StructuralError("boundary density needs at least two eta values");
  for (std::size_t i = 0; i < eta_seq.size(); ++i) {
    if (!(eta_seq[i] > 0.0)) throw DomainError("eta values must be positive");
    if (i > 0 && !(eta_seq[i] < eta_seq[i - 1])) throw StructuralError("eta sequence must be decreasing");
  }
  BoundaryDensity out;
  out.eta = eta_seq;
  std::optional<std::pair<cplx, cplx>> guess;
  // warm start from a comfortable height
  {
    const auto st = solve_phi_system(mu1, mu2, cplx(E, std::max(1.0, 4.0 * eta_seq.front())));
    guess = std::pair{st.omega1, st.omega2};
    for (double eta = 0.5 * st.z.imag(); eta > eta_seq.front(); eta *= 0.5) {
      const auto s2 = solve_phi_system(mu1, mu2, cplx(E, eta), kDefaultTol, kDefaultMaxIter, guess);
      guess = std::pair{s2.omega1, s2.omega2};
    }
  }
  for (double eta : eta_seq) {
    const auto st = solve_phi_system(mu1, mu2, cplx(E, eta), kDefaultTol, kDefaultMaxIter, guess);
    guess = std::pair{st.omega1, st.omega2};
    out.samples.push_back(st.m.imag() / std::numbers::pi);
  }

  // Neville tableau evaluated at eta = 0; diag[k] uses the first k+1 points.
  const std::size_t n = eta_seq.size();
  std::vector<double> p = out.samples;
  std::vector<double> diag{p[0]};
  for (std::size_t k = 1; k < n; ++k) {
    for (std::size_t i = n - 1; i >= k; --i) {
      const double xi = eta_seq[i];
      const double xik = eta_seq[i - k];
      p[i] = (xi * p[i - 1] - xik * p[i]) / (xi - xik);
      if (i == k) break;
    }
    diag.push_back(p[k]);
  }
  out.value = diag.back();
  out.error_estimate = std::abs(diag.back() - diag[diag.size() - 2]);
  for (std::size_t k = 2; k < diag.size(); ++k) {
    const double prev = std::abs(diag[k - 1] - diag[k - 2]);
    const double cur = std::abs(diag[k] - diag[k - 1]);
    if (cur > prev && cur > 1e-12) out.reliable = false;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bound certificate along the imaginary axis

struct CertificateRow {
  double eta = 0.0;
  cplx omega1;
  cplx omega2;
  cplx m;
  double distance = 0.0;      // |w2(i eta) - i eta|
  double trivial_bound = 0.0; // r^2 / eta (infinite at eta = 0)
  double upper_ratio = 0.0;   // distance / min{sigma_+ s_+, r^2/eta}
  double lower_ratio = 0.0;   // sigma_- s_- b_- min{1, sigma_- s_- / eta} / distance
};

struct CertificateReport {
  double r = 0.0;
  double r_minus = 0.0;
  double r_plus = 0.0;
  double s_plus = 0.0;
  double sigma_minus = 0.0;
  double sigma_plus = 0.0;
  double s_minus = 0.0;
  double t_minus = 0.0;
  double a_minus = 0.0;
  double b_minus = 0.0;
  double omega_hat_abs = 0.0;
  double im_omega2_zero = 0.0;
  std::vector<double> eta_grid;
  std::vector<CertificateRow> rows;
  bool lower_ok = false;
  bool upper_ok = false;
  double best_constant = 1.0;
  double max_upper_ratio = 0.0;
  double max_lower_ratio = 0.0;
  // extremes over the grid
  double max_abs_omega1 = 0.0;
  double max_abs_omega2 = 0.0;
  double max_abs_m = 0.0;
  double min_im_omega1 = std::numeric_limits<double>::infinity();
  double min_im_omega2 = std::numeric_limits<double>::infinity();
  double min_abs_m = std::numeric_limits<double>::infinity();
};

/// Certificate for mu1_sym ⊞ delta_r^sym on i[0, eta_max], eta_max 2^-k for k < grid plus eta = 0.
inline CertificateReport bulk_bound_certificate(const DiscreteMeasure& mu1_sym, double r, double eta_max = 10.0,
                                                int grid = 24) {
  if (!mu1_sym.is_symmetric()) throw DomainError("certificate needs a symmetric measure");
  if (mu1_sym.size() < 3) throw StructuralError("certificate needs at least three support points");
  if (!(eta_max > 0.0) || grid < 1) throw StructuralError("certificate grid must be nonempty");

  const auto rep = nevanlinna_rep(mu1_sym);
  const double rm2 = rep.r_minus_sq;
  const double rp2 = support_stats(mu1_sym).second_moment;
  const double r2 = r * r;
  if (!(r2 > rm2 && r2 < rp2))
    throw DomainError("r = " + std::to_string(r) + " must lie strictly inside (r_-, r_+) = (" +
                      std::to_string(std::sqrt(rm2)) + ", " + std::to_string(std::sqrt(rp2)) + ")");

  CertificateReport rep_out;
  auto& c = rep_out;
  c.r = r;
  c.r_minus = std::sqrt(rm2);
  c.r_plus = std::sqrt(rp2);
  c.s_plus = support_stats(mu1_sym).s_plus;
  c.sigma_minus = std::sqrt((r2 - rm2) / (rp2 - rm2));
  c.sigma_plus = std::sqrt(rp2 / (rp2 - r2));

  // s_- = sup{x : mu_tilde([0, x)) <= (r^2 - r_-^2)/8}: the first positive atom
  // at which the cumulative mass passes the threshold.
  const double threshold = (r2 - rm2) / 8.0;
  double cum = 0.0;
  c.s_minus = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < rep.mu_tilde.size(); ++k) {
    const double x = rep.mu_tilde.atoms[k];
    if (x <= 0.0) continue;
    cum += rep.mu_tilde.weights[k];
    if (cum > threshold) {
      c.s_minus = x;
      break;
    }
  }
  if (!std::isfinite(c.s_minus)) throw StructuralError("no atom of the representing measure passes the s_- threshold");

  for (std::size_t k = 0; k < rep.mu_tilde.size(); ++k) {
    const double x = rep.mu_tilde.atoms[k];
    if (std::abs(x) >= c.s_minus) c.a_minus += rep.mu_tilde.weights[k] / (x * x);
  }
  c.omega_hat_abs = std::sqrt((r2 - rm2) / c.a_minus);
  c.t_minus = c.sigma_minus * c.s_minus;
  c.b_minus = std::min({1.0, c.a_minus, c.a_minus * c.t_minus * c.t_minus / r2});

  c.eta_grid.reserve(grid + 1);
  for (int k = 0; k < grid; ++k) c.eta_grid.push_back(eta_max * std::ldexp(1.0, -k));
  c.eta_grid.push_back(0.0);

  c.lower_ok = true;
  c.upper_ok = true;
  for (double eta : c.eta_grid) {
    const auto st = solve_delta_conv(mu1_sym, r, cplx(0.0, eta));
    CertificateRow row;
    row.eta = eta;
    row.omega1 = st.omega1;
    row.omega2 = st.omega2;
    row.m = st.m;
    row.distance = std::abs(st.omega2 - cplx(0.0, eta));
    row.trivial_bound = eta > 0.0 ? r2 / eta : std::numeric_limits<double>::infinity();
    row.upper_ratio = row.distance / std::min(c.sigma_plus * c.s_plus, row.trivial_bound);
    const double lower = c.t_minus * c.b_minus * (eta > 0.0 ? std::min(1.0, c.t_minus / eta) : 1.0);
    row.lower_ratio = lower / row.distance;
    if (eta > 0.0 && !(row.distance <= row.trivial_bound)) c.upper_ok = false;
    if (!(row.distance > 0.0)) c.lower_ok = false;
    if (eta == 0.0) c.im_omega2_zero = st.omega2.imag();
    c.max_upper_ratio = std::max(c.max_upper_ratio, row.upper_ratio);
    c.max_lower_ratio = std::max(c.max_lower_ratio, row.lower_ratio);
    c.max_abs_omega1 = std::max(c.max_abs_omega1, std::abs(st.omega1));
    c.max_abs_omega2 = std::max(c.max_abs_omega2, std::abs(st.omega2));
    c.max_abs_m = std::max(c.max_abs_m, std::abs(st.m));
    c.min_im_omega1 = std::min(c.min_im_omega1, st.omega1.imag());
    c.min_im_omega2 = std::min(c.min_im_omega2, st.omega2.imag());
    c.min_abs_m = std::min(c.min_abs_m, std::abs(st.m));
    c.rows.push_back(row);
  }
  if (!(c.im_omega2_zero > std::sqrt(3.0) / 2.0 * c.t_minus)) c.lower_ok = false;
  c.best_constant = std::max({1.0, c.max_upper_ratio, c.max_lower_ratio});
  return rep_out;
}

inline void to_json(nlohmann::json& j, const CertificateReport& c) {
  j = nlohmann::json{{"r", c.r},
                     {"r_minus", c.r_minus},
                     {"r_plus", c.r_plus},
                     {"s_plus", c.s_plus},
                     {"sigma_minus", c.sigma_minus},
                     {"sigma_plus", c.sigma_plus},
                     {"s_minus", c.s_minus},
                     {"t_minus", c.t_minus},
                     {"a_minus", c.a_minus},
                     {"b_minus", c.b_minus},
                     {"omega_hat_abs", c.omega_hat_abs},
                     {"im_omega2_zero", c.im_omega2_zero},
                     {"lower_ok", c.lower_ok},
                     {"upper_ok", c.upper_ok},
                     {"best_constant", c.best_constant},
                     {"max_upper_ratio", c.max_upper_ratio},
                     {"max_lower_ratio", c.max_lower_ratio},
                     {"max_abs_omega1", c.max_abs_omega1},
                     {"max_abs_omega2", c.max_abs_omega2},
                     {"max_abs_m", c.max_abs_m},
                     {"min_im_omega1", c.min_im_omega1},
                     {"min_im_omega2", c.min_im_omega2},
                     {"min_abs_m", c.min_abs_m},
                     {"eta_grid", c.eta_grid}};
  auto rows = nlohmann::json::array();
  for (const auto& row : c.rows) {
    rows.push_back({{"eta", row.eta},
                    {"omega2_im", row.omega2.imag()},
                    {"omega1_im", row.omega1.imag()},
                    {"m_im", row.m.imag()},
                    {"distance", row.distance},
                    {"trivial_margin", row.eta > 0.0 ? nlohmann::json(row.trivial_bound - row.distance) : nlohmann::json(nullptr)},
                    {"upper_ratio", row.upper_ratio},
                    {"lower_ratio", row.lower_ratio}});
  }
  j["rows"] = std::move(rows);
}

}  // namespace ringlaw
