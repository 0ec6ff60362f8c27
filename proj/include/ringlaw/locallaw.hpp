#pragma once

// Monte Carlo experiment engine: local laws for H^w and for the block model,
// the optimal-scale linear statistic, the smallest singular value tail and the
// Green function subordination diagnostics.
//
// Task k of a scan draws its matrices from Rng(child_seed(seed, k)); tasks are
// enumerated N-major then trial, so results never depend on thread scheduling.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ringlaw/errors.hpp"
#include "ringlaw/freeconv.hpp"
#include "ringlaw/linalg.hpp"
#include "ringlaw/measure.hpp"
#include "ringlaw/models.hpp"
#include "ringlaw/parallel.hpp"
#include "ringlaw/rng.hpp"
#include "ringlaw/single_ring.hpp"

namespace ringlaw {

inline constexpr double kDefaultGamma = 0.1;
inline constexpr double kDefaultSlopePass = 0.2;

/// eta_max 2^-k for k = 0, 1, ... while >= eta_min.
inline std::vector<double> dyadic_etas(double eta_min, double eta_max) {
  if (!(eta_min > 0.0) || !(eta_max >= eta_min)) throw DomainError("need 0 < eta_min <= eta_max");
  std::vector<double> out;
  for (double e = eta_max; e >= eta_min * (1.0 - 1e-12); e /= 2.0) out.push_back(e);
  return out;
}

struct ScanGrid {
  std::vector<std::size_t> N_values;
  std::size_t trials = 1;
  std::vector<double> eta_values;  // explicit grid; empty selects dyadic_etas(N^(-1+gamma), eta_max)
  double eta_max = 1.0;
  double gamma = kDefaultGamma;
  std::vector<cplx> w_values;      // single-ring scans
  std::vector<double> E_values;    // block scans

  std::vector<double> etas_for(std::size_t N) const {
    if (!eta_values.empty()) return eta_values;
    return dyadic_etas(std::pow(static_cast<double>(N), -1.0 + gamma), eta_max);
  }

  void validate() const {
    if (N_values.empty()) throw StructuralError("grid needs at least one N");
    if (trials == 0) throw StructuralError("grid needs at least one trial");
    for (auto n : N_values)
      if (n == 0) throw StructuralError("matrix size must be positive");
    for (double e : eta_values)
      if (!(e > 0.0)) throw DomainError("eta values must be positive");
  }
};

// ---------------------------------------------------------------------------
// Domination reports

struct DeviationRecord {
  std::size_t N = 0;
  std::size_t trial = 0;
  cplx point;  // w for H^w scans, E for block scans
  double eta = 0.0;
  double dev = 0.0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string note;
};

struct PerNSummary {
  std::size_t N = 0;
  std::size_t count = 0;
  std::size_t failed = 0;
  double max = 0.0;
  double q95 = 0.0;
};

struct DominationFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  bool pass = false;
};

struct DominationReport {
  std::vector<DeviationRecord> records;
  std::vector<PerNSummary> per_N;
  std::optional<DominationFit> fit;
  std::size_t failures() const {
    std::size_t f = 0;
    for (const auto& r : records) f += r.failed;
    return f;
  }
};

/// Linear-interpolation quantile of unsorted data.
inline double quantile_linear(std::vector<double> v, double p) {
  if (v.empty()) throw StructuralError("quantile of empty data");
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline std::vector<PerNSummary> summarize(const std::vector<DeviationRecord>& records) {
  std::map<std::size_t, std::vector<double>> devs;
  std::map<std::size_t, PerNSummary> out;
  for (const auto& r : records) {
    auto& s = out[r.N];
    s.N = r.N;
    ++s.count;
    if (r.failed) {
      ++s.failed;
      continue;
    }
    devs[r.N].push_back(r.dev);
  }
  std::vector<PerNSummary> v;
  for (auto& [n, s] : out) {
    const auto& d = devs[n];
    if (!d.empty()) {
      s.max = *std::max_element(d.begin(), d.end());
      s.q95 = quantile_linear(d, 0.95);
    } else {
      s.max = s.q95 = std::numeric_limits<double>::quiet_NaN();
    }
    v.push_back(s);
  }
  return v;
}

/// Least squares of log q95 against log N; pass iff slope <= eps_pass.
inline DominationFit fit_domination(const std::vector<PerNSummary>& per_N, double eps_pass = kDefaultSlopePass) {
  if (per_N.size() < 3) throw StructuralError("domination fit needs at least 3 distinct N values");
  std::vector<double> x, y;
  for (const auto& s : per_N) {
    if (!(s.q95 > 0.0) || !std::isfinite(s.q95)) throw StructuralError("domination fit needs positive finite quantiles");
    x.push_back(std::log(static_cast<double>(s.N)));
    y.push_back(std::log(s.q95));
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw StructuralError("domination fit needs distinct N values");
  DominationFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.pass = f.slope <= eps_pass;
  return f;
}

inline DominationFit fit_domination(DominationReport& report, double eps_pass = kDefaultSlopePass) {
  report.per_N = summarize(report.records);
  report.fit = fit_domination(report.per_N, eps_pass);
  return *report.fit;
}

/// Fills per-N summaries and, with at least 3 N values, the fit.
inline void finalize(DominationReport& report, double eps_pass = kDefaultSlopePass) {
  report.per_N = summarize(report.records);
  if (report.per_N.size() >= 3) report.fit = fit_domination(report.per_N, eps_pass);
}

// ---------------------------------------------------------------------------
// Local law for H^w

struct SingleRingSetup {
  DiscreteMeasure mu_sigma = DiscreteMeasure::point_mass(1.0);
  Symmetry symmetry = Symmetry::unitary;
  double tau = -1.0;  // annulus shrink; < 0 selects the default
};

inline void require_in_annulus(const DiscreteMeasure& mu_sigma, double tau, const std::vector<cplx>& ws) {
  const auto g = ring_geometry(mu_sigma, tau);
  if (g.annulus_empty()) throw DomainError("annulus is empty for tau = " + std::to_string(g.tau));
  for (auto w : ws)
    if (!g.contains(w))
      throw DomainError("|w| = " + std::to_string(std::abs(w)) + " outside the annulus [" + std::to_string(g.inner()) +
                        ", " + std::to_string(g.outer()) + "]");
}

/// dev = N eta |m^w(i eta) - m_{Sigma,|w|}(i eta)| per (N, trial, w, eta).
inline DominationReport local_law_scan(const SingleRingSetup& setup, const ScanGrid& grid, std::uint64_t seed,
                                       unsigned threads = 1) {
  grid.validate();
  if (grid.w_values.empty()) throw StructuralError("local-law scan needs w values");
  require_in_annulus(setup.mu_sigma, setup.tau, grid.w_values);

  struct Task {
    std::size_t N, trial, index;
  };
  std::vector<Task> tasks;
  // deterministic targets per (N, w, eta)
  std::map<std::size_t, std::vector<std::vector<std::optional<cplx>>>> targets;
  std::map<std::size_t, std::vector<double>> sigma_of;
  for (auto N : grid.N_values) {
    sigma_of[N] = quantile_profile(setup.mu_sigma, N);
    const auto mu_emp = symmetrize(empirical_measure_abs(sigma_of[N]));
    const auto etas = grid.etas_for(N);
    auto& t = targets[N];
    for (auto w : grid.w_values) {
      std::vector<std::optional<cplx>> row;
      for (double eta : etas) {
        try {
          row.push_back(solve_delta_conv(mu_emp, std::abs(w), cplx(0.0, eta)).m);
        } catch (const ConvergenceError&) {
          row.push_back(std::nullopt);
        }
      }
      t.push_back(std::move(row));
    }
    for (std::size_t k = 0; k < grid.trials; ++k) tasks.push_back({N, k, tasks.size()});
  }

  auto chunks = parallel_map(tasks.size(), threads, [&](std::size_t i) {
    const auto& task = tasks[i];
    const std::uint64_t s = child_seed(seed, task.index);
    SingleRingEnsemble e{sigma_of.at(task.N), setup.symmetry, s};
    Rng rng(s);
    const CMatrix X = sample_X(e, rng);
    const auto etas = grid.etas_for(task.N);
    std::vector<DeviationRecord> out;
    for (std::size_t iw = 0; iw < grid.w_values.size(); ++iw) {
      const cplx w = grid.w_values[iw];
      const auto spec = hermitization_spectrum(X, w);
      for (std::size_t ie = 0; ie < etas.size(); ++ie) {
        DeviationRecord r{task.N, task.trial, w, etas[ie], 0.0, s, false, {}};
        const auto& target = targets.at(task.N)[iw][ie];
        if (!target) {
          r.failed = true;
          r.dev = std::numeric_limits<double>::quiet_NaN();
          r.note = "subordination solver did not converge";
        } else {
          r.dev = static_cast<double>(task.N) * etas[ie] * std::abs(m_w(spec, etas[ie]) - *target);
        }
        out.push_back(std::move(r));
      }
    }
    return out;
  });

  DominationReport rep;
  for (auto& c : chunks)
    for (auto& r : c) rep.records.push_back(std::move(r));
  finalize(rep);
  return rep;
}

// ---------------------------------------------------------------------------
// Linear statistics at optimal scale

/// f(zeta) = (1 - |zeta|^2 / R^2)^3 on |zeta| <= R, sampled by the midpoint
/// rule on an n x n grid covering [-R, R]^2.
struct BumpSpec {
  double radius = 1.0;
  std::size_t grid = 64;
};

inline double bump(double s) { return s >= 1.0 ? 0.0 : std::pow(1.0 - s * s, 3); }

/// Laplacian of the unit bump at radius s.
inline double bump_laplacian(double s) {
  if (s >= 1.0) return 0.0;
  const double u = 1.0 - s * s;
  return -12.0 * u * u + 24.0 * s * s * u;
}

/// ||Delta f||_L1 of the unit bump by radial quadrature; invariant under the
/// rescaling zeta -> zeta / R.
inline double bump_laplacian_l1() {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  auto g = [](double s) { return std::abs(bump_laplacian(s)) * 2.0 * std::numbers::pi * s; };
  const double c = 1.0 / std::sqrt(3.0);
  return GK::integrate(g, 0.0, c, 10, 1e-14) + GK::integrate(g, c, 1.0, 10, 1e-14);
}

struct QuadNode {
  cplx zeta;
  double weight;  // Delta f(zeta) d^2 zeta
};

inline std::vector<QuadNode> bump_nodes(const BumpSpec& f) {
  if (!(f.radius > 0.0) || f.grid == 0) throw DomainError("bump needs a positive radius and grid");
  const double R = f.radius;
  const double h = 2.0 * R / static_cast<double>(f.grid);
  std::vector<QuadNode> out;
  for (std::size_t i = 0; i < f.grid; ++i)
    for (std::size_t j = 0; j < f.grid; ++j) {
      const cplx z(-R + (static_cast<double>(i) + 0.5) * h, -R + (static_cast<double>(j) + 0.5) * h);
      const double s = std::abs(z) / R;
      if (s >= 1.0) continue;
      out.push_back({z, bump_laplacian(s) / (R * R) * h * h});
    }
  return out;
}

inline double cell_size(const BumpSpec& f) { return 2.0 * f.radius / static_cast<double>(f.grid); }

inline cplx rescaled_point(cplx w0, double alpha, std::size_t N, cplx zeta) {
  return w0 + std::pow(static_cast<double>(N), -alpha) * zeta;
}

/// Support radius of f_{w0} in the w plane.
inline double bump_support_radius(const BumpSpec& f, double alpha, std::size_t N) {
  return f.radius * std::pow(static_cast<double>(N), -alpha);
}

inline void require_support_in_annulus(const RingGeometry& g, cplx w0, double alpha, std::size_t N, const BumpSpec& f) {
  const double rho = bump_support_radius(f, alpha, N);
  if (std::abs(w0) - rho < g.inner() || std::abs(w0) + rho > g.outer())
    throw DomainError("support of the test function leaves the annulus [" + std::to_string(g.inner()) + ", " +
                      std::to_string(g.outer()) + "]");
}

struct LinearStatistic {
  double value = 0.0;
  std::size_t jittered = 0;  // nodes moved off a singular shift
};

/// (1/2pi) N^{2 alpha} sum Delta f(zeta) (1/N) log|det(X - w(zeta))| d^2 zeta.
inline LinearStatistic linear_statistic_lhs(const ShiftedLogDet& logdet, cplx w0, double alpha, const BumpSpec& f) {
  const auto N = static_cast<std::size_t>(logdet.size());
  const double half = 0.5 * cell_size(f);
  LinearStatistic out;
  double acc = 0.0;
  for (const auto& q : bump_nodes(f)) {
    double v = logdet(rescaled_point(w0, alpha, N, q.zeta));
    if (!std::isfinite(v)) {
      ++out.jittered;
      v = logdet(rescaled_point(w0, alpha, N, q.zeta + cplx(half, half)));
    }
    acc += q.weight * v / static_cast<double>(N);
  }
  out.value = acc * std::pow(static_cast<double>(N), 2.0 * alpha) / (2.0 * std::numbers::pi);
  return out;
}

inline LinearStatistic linear_statistic_lhs(const CMatrix& X, cplx w0, double alpha, const BumpSpec& f) {
  return linear_statistic_lhs(ShiftedLogDet(X), w0, alpha, f);
}

/// (1/2pi) N^{2 alpha} sum Delta f(zeta) L(|w(zeta)|) d^2 zeta on the same grid.
inline double linear_statistic_rhs(const RingPotential& L, std::size_t N, cplx w0, double alpha, const BumpSpec& f,
                                   unsigned threads = 1) {
  const auto nodes = bump_nodes(f);
  // L is radial: evaluate once per distinct |w|
  std::vector<double> radius(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) radius[i] = std::abs(rescaled_point(w0, alpha, N, nodes[i].zeta));
  std::vector<double> uniq = radius;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  const auto vals = parallel_map(uniq.size(), threads, [&](std::size_t i) { return L(uniq[i]); });
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto k = static_cast<std::size_t>(std::lower_bound(uniq.begin(), uniq.end(), radius[i]) - uniq.begin());
    acc += nodes[i].weight * vals[k];
  }
  return acc * std::pow(static_cast<double>(N), 2.0 * alpha) / (2.0 * std::numbers::pi);
}

inline double linear_statistic_rhs(const DiscreteMeasure& mu_sigma, std::size_t N, cplx w0, double alpha,
                                   const BumpSpec& f, unsigned threads = 1) {
  return linear_statistic_rhs(RingPotential(mu_sigma), N, w0, alpha, f, threads);
}

struct GapRecord {
  std::size_t N = 0;
  std::size_t trial = 0;
  double alpha = 0.0;
  cplx w0;
  double lhs = 0.0;
  double rhs = 0.0;
  double gap_norm = 0.0;  // |lhs - rhs| N^{1 - 2 alpha} / ||Delta f||_L1
  std::size_t jittered = 0;
  std::uint64_t seed = 0;
};

/// One sample per trial; the right side depends only on the Sigma profile and is shared.
inline std::vector<GapRecord> main_theorem_gap(const SingleRingSetup& setup, std::size_t N, cplx w0, double alpha,
                                               const BumpSpec& f, std::size_t trials, std::uint64_t seed,
                                               unsigned threads = 1) {
  if (!(alpha >= 0.0 && alpha < 0.5)) throw DomainError("alpha must lie in [0, 1/2)");
  if (N == 0 || trials == 0) throw StructuralError("main gap needs N >= 1 and trials >= 1");
  const auto sigma = quantile_profile(setup.mu_sigma, N);
  const auto mu_emp = empirical_measure_abs(sigma);
  require_support_in_annulus(ring_geometry(setup.mu_sigma, setup.tau), w0, alpha, N, f);
  const double rhs = linear_statistic_rhs(mu_emp, N, w0, alpha, f, threads);
  const double norm = std::pow(static_cast<double>(N), 1.0 - 2.0 * alpha) / bump_laplacian_l1();
  return parallel_map(trials, threads, [&](std::size_t k) {
    const std::uint64_t s = child_seed(seed, k);
    Rng rng(s);
    const CMatrix X = sample_X(SingleRingEnsemble{sigma, setup.symmetry, s}, rng);
    const auto lhs = linear_statistic_lhs(X, w0, alpha, f);
    GapRecord r;
    r.N = N;
    r.trial = k;
    r.alpha = alpha;
    r.w0 = w0;
    r.lhs = lhs.value;
    r.rhs = rhs;
    r.gap_norm = std::abs(lhs.value - rhs) * norm;
    r.jittered = lhs.jittered;
    r.seed = s;
    return r;
  });
}

// ---------------------------------------------------------------------------
// Smallest singular value tail

struct SsvRecord {
  std::size_t N = 0;
  std::size_t trial = 0;
  double w_abs = 0.0;
  double t = 0.0;        // |w| lambda_1: the trial lies in the event {lambda_1 <= t'/|w|} iff t' >= t
  double lambda1 = 0.0;
  std::uint64_t seed = 0;
};

struct TailPoint {
  double t = 0.0;
  double probability = 0.0;
  std::size_t hits = 0;
};

struct TailReport {
  std::vector<SsvRecord> records;
  std::vector<TailPoint> tail;
  bool monotone = false;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double ci_lo = std::numeric_limits<double>::quiet_NaN();
  double ci_hi = std::numeric_limits<double>::quiet_NaN();
  std::size_t fit_points = 0;
  std::size_t bootstrap_used = 0;
};

/// Default t grid |w| 2^{k/2} / N for k = -12..6.
inline std::vector<double> default_t_grid(std::size_t N, double w_abs) {
  std::vector<double> t;
  for (int k = -12; k <= 6; ++k) t.push_back(w_abs * std::pow(2.0, 0.5 * k) / static_cast<double>(N));
  return t;
}

namespace detail {

inline std::vector<TailPoint> tail_from(const std::vector<double>& ts_hit, const std::vector<double>& t_grid) {
  std::vector<TailPoint> out;
  for (double t : t_grid) {
    std::size_t hits = 0;
    for (double h : ts_hit) hits += h <= t;
    out.push_back({t, static_cast<double>(hits) / static_cast<double>(ts_hit.size()), hits});
  }
  return out;
}

// log P against log t over points with >= 5 hits and P <= 0.9; NaN with < 2 points
inline std::pair<double, std::size_t> tail_slope(const std::vector<TailPoint>& tail) {
  std::vector<double> x, y;
  for (const auto& p : tail)
    if (p.hits >= 5 && p.probability <= 0.9) {
      x.push_back(std::log(p.t));
      y.push_back(std::log(p.probability));
    }
  if (x.size() < 2) return {std::numeric_limits<double>::quiet_NaN(), x.size()};
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return {sxy / sxx, x.size()};
}

}  // namespace detail

inline constexpr double kIdentityLevyTol = 1e-6;

/// Empirical P(lambda_1^w <= t/|w|) with a bootstrap percentile interval for the log-log slope.
inline TailReport smallest_sv_tail(const SingleRingSetup& setup, std::size_t N, cplx w, std::vector<double> t_grid,
                                   std::size_t trials, std::uint64_t seed, unsigned threads = 1,
                                   std::size_t bootstrap = 1000) {
  if (N == 0 || trials == 0) throw StructuralError("ssv tail needs N >= 1 and trials >= 1");
  const auto sigma = quantile_profile(setup.mu_sigma, N);
  if (setup.symmetry == Symmetry::orthogonal &&
      levy_distance(empirical_measure_abs(sigma), DiscreteMeasure::point_mass(1.0)) <= kIdentityLevyTol)
    throw DomainError("orthogonal class needs Sigma away from the identity");
  const double w_abs = std::abs(w);
  if (!(w_abs > 0.0)) throw DomainError("ssv tail needs w != 0");
  if (t_grid.empty()) t_grid = default_t_grid(N, w_abs);
  std::sort(t_grid.begin(), t_grid.end());

  TailReport rep;
  rep.records = parallel_map(trials, threads, [&](std::size_t k) {
    const std::uint64_t s = child_seed(seed, k);
    Rng rng(s);
    const CMatrix X = sample_X(SingleRingEnsemble{sigma, setup.symmetry, s}, rng);
    const double l1 = smallest_sv(hermitization_spectrum(X, w));
    return SsvRecord{N, k, w_abs, w_abs * l1, l1, s};
  });
  std::vector<double> hit;
  for (const auto& r : rep.records) hit.push_back(r.t);
  rep.tail = detail::tail_from(hit, t_grid);
  rep.monotone = true;
  for (std::size_t i = 1; i < rep.tail.size(); ++i)
    if (rep.tail[i].probability < rep.tail[i - 1].probability) rep.monotone = false;
  std::tie(rep.slope, rep.fit_points) = detail::tail_slope(rep.tail);

  // the bootstrap stream is disjoint from the trial streams
  Rng brng(child_seed(seed, std::numeric_limits<std::uint64_t>::max()));
  std::vector<double> slopes;
  std::vector<double> resample(hit.size());
  for (std::size_t b = 0; b < bootstrap; ++b) {
    for (auto& v : resample) v = hit[static_cast<std::size_t>(brng.uniform() * static_cast<double>(hit.size()))];
    const double sl = detail::tail_slope(detail::tail_from(resample, t_grid)).first;
    if (std::isfinite(sl)) slopes.push_back(sl);
  }
  rep.bootstrap_used = slopes.size();
  if (!slopes.empty()) {
    rep.ci_lo = quantile_linear(slopes, 0.025);
    rep.ci_hi = quantile_linear(slopes, 0.975);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Block model

struct BlockSetup {
  DiscreteMeasure sigma_profile = DiscreteMeasure::point_mass(1.0);  // entries of Sigma are its quantile profile
  DiscreteMeasure xi_profile = DiscreteMeasure::point_mass(1.0);
  Symmetry symmetry = Symmetry::unitary;
  double bulk_threshold = 1e-3;
  bool arcsine_target = false;  // compare against -1/sqrt(z^2 - 4) instead of the subordination solve
};

inline std::vector<cplx> complex_profile(const DiscreteMeasure& mu, std::size_t N) {
  const auto p = quantile_profile(mu, N);
  return {p.begin(), p.end()};
}

/// Stieltjes transform of the arcsine law on [-2, 2], branch with Im > 0 on C+.
inline cplx arcsine_stieltjes(cplx z) {
  cplx r = std::sqrt(z * z - 4.0);
  if (r.imag() * z.imag() < 0.0 || (r.imag() == 0.0 && r.real() * z.real() < 0.0)) r = -r;
  return -1.0 / r;
}

struct BlockMeasures {
  DiscreteMeasure mu_A;
  DiscreteMeasure mu_B;
};

inline BlockMeasures block_measures(const std::vector<cplx>& sigma, const std::vector<cplx>& xi) {
  return {symmetrize(empirical_measure_abs(xi)), symmetrize(empirical_measure_abs(sigma))};
}

/// Every E must see a boundary density of mu_A ⊞ mu_B above the threshold.
inline void require_bulk(const BlockMeasures& m, const std::vector<double>& Es, double threshold) {
  if (Es.empty()) throw StructuralError("block scan needs E values");
  const auto [lo, hi] = std::minmax_element(Es.begin(), Es.end());
  for (double E : Es) {
    const auto d = boundary_density(m.mu_A, m.mu_B, E);
    if (!(d.value > threshold))
      throw DomainError("interval [" + std::to_string(*lo) + ", " + std::to_string(*hi) +
                        "] is not inside the bulk: density " + std::to_string(d.value) + " at E = " + std::to_string(E));
  }
}

/// dev = N eta (1 + eta) |m_H(E + i eta) - m_{mu_A ⊞ mu_B}(E + i eta)|.
inline DominationReport block_local_law_scan(const BlockSetup& setup, const ScanGrid& grid, std::uint64_t seed,
                                             unsigned threads = 1) {
  grid.validate();
  struct Task {
    std::size_t N, trial, index;
  };
  std::vector<Task> tasks;
  std::map<std::size_t, std::vector<std::vector<std::optional<cplx>>>> targets;
  std::map<std::size_t, BlockAdditiveEnsemble> ens;
  for (auto N : grid.N_values) {
    BlockAdditiveEnsemble e;
    e.sigma_diag = complex_profile(setup.sigma_profile, N);
    e.xi_diag = complex_profile(setup.xi_profile, N);
    e.symmetry = setup.symmetry;
    const auto m = block_measures(e.sigma_diag, e.xi_diag);
    require_bulk(m, grid.E_values, setup.bulk_threshold);
    auto& t = targets[N];
    for (double E : grid.E_values) {
      std::vector<std::optional<cplx>> row;
      for (double eta : grid.etas_for(N)) {
        const cplx z(E, eta);
        if (setup.arcsine_target) {
          row.push_back(arcsine_stieltjes(z));
          continue;
        }
        try {
          row.push_back(solve_phi_system(m.mu_A, m.mu_B, z).m);
        } catch (const ConvergenceError&) {
          row.push_back(std::nullopt);
        }
      }
      t.push_back(std::move(row));
    }
    ens[N] = std::move(e);
    for (std::size_t k = 0; k < grid.trials; ++k) tasks.push_back({N, k, tasks.size()});
  }

  auto chunks = parallel_map(tasks.size(), threads, [&](std::size_t i) {
    const auto& task = tasks[i];
    const std::uint64_t s = child_seed(seed, task.index);
    Rng rng(s);
    auto e = ens.at(task.N);
    e.seed = s;
    const auto spec = hermitian_eigensystem(block_H(e, rng).H, false);
    const auto etas = grid.etas_for(task.N);
    const double n = static_cast<double>(task.N);
    std::vector<DeviationRecord> out;
    for (std::size_t iE = 0; iE < grid.E_values.size(); ++iE)
      for (std::size_t ie = 0; ie < etas.size(); ++ie) {
        const double eta = etas[ie];
        DeviationRecord r{task.N, task.trial, cplx(grid.E_values[iE], 0.0), eta, 0.0, s, false, {}};
        const auto& target = targets.at(task.N)[iE][ie];
        if (!target) {
          r.failed = true;
          r.dev = std::numeric_limits<double>::quiet_NaN();
          r.note = "subordination solver did not converge";
        } else {
          const cplx z(grid.E_values[iE], eta);
          r.dev = n * eta * (1.0 + eta) * std::abs(trace_resolvent(spec, z) - *target);
        }
        out.push_back(std::move(r));
      }
    return out;
  });

  DominationReport rep;
  for (auto& c : chunks)
    for (auto& r : c) rep.records.push_back(std::move(r));
  finalize(rep);
  return rep;
}

struct SubordinationRecord {
  std::size_t N = 0;
  std::size_t trial = 0;
  cplx z;
  double lambda_d_scaled = 0.0;  // sqrt(N eta) Lambda_d
  double omegaB_gap = 0.0;       // N eta |omega_B^c - omega_B|
  double omegaA_gap = 0.0;       // N eta |omega_A^c - omega_A|
  double eigvec_sup = 0.0;       // sqrt(N) max ||u_k||_inf over the bulk window
  double identity_residual = 0.0;
  std::uint64_t seed = 0;
};

inline std::vector<SubordinationRecord> green_subordination_scan(const BlockSetup& setup, std::size_t N,
                                                                 const std::vector<cplx>& z_grid, double window_lo,
                                                                 double window_hi, std::size_t trials,
                                                                 std::uint64_t seed, unsigned threads = 1) {
  if (N == 0 || trials == 0) throw StructuralError("subordination scan needs N >= 1 and trials >= 1");
  if (z_grid.empty()) throw StructuralError("subordination scan needs z values");
  BlockAdditiveEnsemble e;
  e.sigma_diag = complex_profile(setup.sigma_profile, N);
  e.xi_diag = complex_profile(setup.xi_profile, N);
  e.symmetry = setup.symmetry;
  const auto m = block_measures(e.sigma_diag, e.xi_diag);
  std::vector<double> Es;
  for (auto z : z_grid) {
    if (!(z.imag() > 0.0)) throw DomainError("subordination scan needs Im z > 0");
    Es.push_back(z.real());
  }
  require_bulk(m, Es, setup.bulk_threshold);
  std::vector<SubordinationState> sub;
  for (auto z : z_grid) sub.push_back(solve_phi_system(m.mu_A, m.mu_B, z));

  auto chunks = parallel_map(trials, threads, [&](std::size_t k) {
    const std::uint64_t s = child_seed(seed, k);
    Rng rng(s);
    auto ek = e;
    ek.seed = s;
    const auto spec = hermitian_eigensystem(block_H(ek, rng).H, true);
    const double n = static_cast<double>(N);
    std::vector<SubordinationRecord> out;
    for (std::size_t iz = 0; iz < z_grid.size(); ++iz) {
      const cplx z = z_grid[iz];
      const auto o = resolvent_observables(spec, e.xi_diag, z, sub[iz].omega2, window_lo, window_hi);
      SubordinationRecord r;
      r.N = N;
      r.trial = k;
      r.z = z;
      r.lambda_d_scaled = std::sqrt(n * z.imag()) * o.Lambda_d;
      r.omegaB_gap = n * z.imag() * std::abs(o.omega_B_c - sub[iz].omega2);
      r.omegaA_gap = n * z.imag() * std::abs(o.omega_A_c - sub[iz].omega1);
      r.eigvec_sup = o.eigvec_sup;
      r.identity_residual = o.identity_residual;
      r.seed = s;
      out.push_back(r);
    }
    return out;
  });
  std::vector<SubordinationRecord> all;
  for (auto& c : chunks)
    for (auto& r : c) all.push_back(r);
  return all;
}

}  // namespace ringlaw
