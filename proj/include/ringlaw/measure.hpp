#pragma once

// Atomic probability measures on the real line and the transforms the
// subordination machinery is built on.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <json.hpp>

#include "ringlaw/errors.hpp"

namespace ringlaw {

using cplx = std::complex<double>;

inline constexpr double kWeightSumTol = 1e-12;
inline constexpr double kMergeTol = 1e-12;

/// Finite nonnegative atomic measure with strictly increasing atoms. No
/// normalization is imposed; used for Nevanlinna representing measures.
struct PositiveMeasure {
  std::vector<double> atoms;
  std::vector<double> weights;

  double mass() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }
  std::size_t size() const { return atoms.size(); }
  bool empty() const { return atoms.empty(); }
};

/// Probability measure sum_i w_i delta_{x_i}: atoms strictly increasing and
/// finite, weights positive and summing to one.
class DiscreteMeasure {
 public:
  DiscreteMeasure(std::vector<double> atoms, std::vector<double> weights)
      : atoms_(std::move(atoms)), weights_(std::move(weights)) {
    validate();
  }

  /// Sorts, merges atoms closer than kMergeTol and drops zero weights before
  /// validating.
  static DiscreteMeasure from_unsorted(std::vector<double> atoms, std::vector<double> weights) {
    if (atoms.size() != weights.size()) throw StructuralError("atoms and weights differ in length");
    std::vector<std::size_t> order(atoms.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return atoms[a] < atoms[b]; });
    std::vector<double> xs;
    std::vector<double> ws;
    for (std::size_t k : order) {
      if (weights[k] == 0.0) continue;
      if (!xs.empty() && std::abs(atoms[k] - xs.back()) <= kMergeTol) {
        ws.back() += weights[k];
      } else {
        xs.push_back(atoms[k]);
        ws.push_back(weights[k]);
      }
    }
    return DiscreteMeasure(std::move(xs), std::move(ws));
  }

  static DiscreteMeasure point_mass(double x) { return DiscreteMeasure({x}, {1.0}); }

  std::span<const double> atoms() const { return atoms_; }
  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return atoms_.size(); }

  bool is_nonnegative() const { return atoms_.front() >= 0.0; }

  /// Atoms closed under negation with matching weights.
  bool is_symmetric(double tol = kMergeTol) const {
    const std::size_t n = atoms_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = n - 1 - i;
      if (std::abs(atoms_[i] + atoms_[j]) > tol) return false;
      if (std::abs(weights_[i] - weights_[j]) > tol) return false;
    }
    return true;
  }

  /// mu((-inf, x]).
  double cdf(double x) const {
    const auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x);
    const auto k = static_cast<std::size_t>(it - atoms_.begin());
    return k == 0 ? 0.0 : cumulative()[k - 1];
  }

  /// Generalized inverse min{x : F(x) >= p}.
  double quantile(double p) const {
    const auto& cum = cumulative();
    const auto it = std::lower_bound(cum.begin(), cum.end(), p - 1e-15);
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), atoms_.size() - 1);
    return atoms_[k];
  }

  double moment(int k) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) acc += weights_[i] * std::pow(atoms_[i], k);
    return acc;
  }

  friend bool operator==(const DiscreteMeasure&, const DiscreteMeasure&) = default;

 private:
  void validate() {
    if (atoms_.size() != weights_.size()) throw StructuralError("atoms and weights differ in length");
    if (atoms_.empty()) throw StructuralError("measure has no atoms");
    double total = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (!std::isfinite(atoms_[i]) || !std::isfinite(weights_[i]))
        throw StructuralError("non-finite atom or weight at index " + std::to_string(i));
      if (weights_[i] <= 0.0) throw StructuralError("non-positive weight at index " + std::to_string(i));
      if (i > 0 && !(atoms_[i] > atoms_[i - 1]))
        throw StructuralError("atoms not strictly increasing at index " + std::to_string(i));
      total += weights_[i];
    }
    if (std::abs(total - 1.0) > kWeightSumTol)
      throw StructuralError("weights sum to " + std::to_string(total) + ", expected 1");
    cumulative_.resize(weights_.size());
    std::partial_sum(weights_.begin(), weights_.end(), cumulative_.begin());
  }

  const std::vector<double>& cumulative() const { return cumulative_; }

  std::vector<double> atoms_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

// ---------------------------------------------------------------------------
// Transforms

/// Stieltjes transform without the half-plane check; valid off the atoms.
inline cplx stieltjes_unchecked(const DiscreteMeasure& mu, cplx z) {
  const auto xs = mu.atoms();
  const auto ws = mu.weights();
  cplx acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) acc += ws[i] / (xs[i] - z);
  return acc;
}

/// m_mu(z) = sum_i w_i / (x_i - z) for Im z > 0.
inline cplx stieltjes(const DiscreteMeasure& mu, cplx z) {
  if (!(z.imag() > 0.0)) throw DomainError("Stieltjes transform needs Im z > 0");
  return stieltjes_unchecked(mu, z);
}

/// m and its derivative m'(z) = sum_i w_i / (x_i - z)^2, one pass.
inline std::pair<cplx, cplx> stieltjes_with_derivative(const DiscreteMeasure& mu, cplx z) {
  const auto xs = mu.atoms();
  const auto ws = mu.weights();
  cplx m = 0.0;
  cplx dm = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const cplx inv = 1.0 / (xs[i] - z);
    m += ws[i] * inv;
    dm += ws[i] * inv * inv;
  }
  return {m, dm};
}

/// F_mu = -1/m_mu.
inline cplx neg_recip_stieltjes(const DiscreteMeasure& mu, cplx z) { return -1.0 / stieltjes(mu, z); }

// ---------------------------------------------------------------------------
// Elementary operations

inline DiscreteMeasure symmetrize(const DiscreteMeasure& mu) {
  std::vector<double> xs;
  std::vector<double> ws;
  xs.reserve(2 * mu.size());
  ws.reserve(2 * mu.size());
  const auto atoms = mu.atoms();
  const auto weights = mu.weights();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i] == 0.0) {
      // mu^sym({0}) = mu({0})
      xs.push_back(0.0);
      ws.push_back(weights[i]);
      continue;
    }
    xs.push_back(atoms[i]);
    ws.push_back(0.5 * weights[i]);
    xs.push_back(-atoms[i]);
    ws.push_back(0.5 * weights[i]);
  }
  return DiscreteMeasure::from_unsorted(std::move(xs), std::move(ws));
}

/// delta_r^sym = (delta_{-r} + delta_r) / 2.
inline DiscreteMeasure symmetric_pair(double r) {
  if (!(r > 0.0)) throw DomainError("symmetric pair needs r > 0");
  return DiscreteMeasure({-r, r}, {0.5, 0.5});
}

struct Radii {
  double r_minus = 0.0;
  double r_plus = 0.0;
  /// Set when mu is a point mass, i.e. the ring degenerates to a circle.
  bool degenerate = false;
};

/// r_- = (int x^-2 dmu)^-1/2 (zero if an atom sits at 0), r_+ = (int x^2 dmu)^1/2.
inline Radii radii(const DiscreteMeasure& mu_sigma) {
  if (!mu_sigma.is_nonnegative()) throw DomainError("radii: measure must live on [0, inf)");
  double inv_sq = 0.0;
  double sq = 0.0;
  bool atom_at_zero = false;
  const auto xs = mu_sigma.atoms();
  const auto ws = mu_sigma.weights();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] == 0.0) {
      atom_at_zero = true;
    } else {
      inv_sq += ws[i] / (xs[i] * xs[i]);
    }
    sq += ws[i] * xs[i] * xs[i];
  }
  Radii out;
  out.r_minus = atom_at_zero ? 0.0 : 1.0 / std::sqrt(inv_sq);
  out.r_plus = std::sqrt(sq);
  out.degenerate = mu_sigma.size() < 2;
  if (out.degenerate) out.r_minus = out.r_plus;
  return out;
}

struct SupportStats {
  double s_plus = 0.0;
  double second_moment = 0.0;
};

inline SupportStats support_stats(const DiscreteMeasure& mu) {
  SupportStats out;
  const auto xs = mu.atoms();
  const auto ws = mu.weights();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out.s_plus = std::max(out.s_plus, std::abs(xs[i]));
    out.second_moment += ws[i] * xs[i] * xs[i];
  }
  return out;
}

namespace detail {

// True iff F_nu(b) <= F_mu(b + eps) + eps at every atom b of nu. Together with
// the same test with the roles swapped this is the Levy band condition: the
// band differences are step functions whose suprema sit at atoms.
inline bool levy_band_holds(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double eps) {
  for (double b : nu.atoms()) {
    if (nu.cdf(b) > mu.cdf(b + eps) + eps) return false;
  }
  return true;
}

}  // namespace detail

/// Levy distance, by bisection on eps over the exact band test.
inline double levy_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  auto holds = [&](double eps) {
    return detail::levy_band_holds(mu, nu, eps) && detail::levy_band_holds(nu, mu, eps);
  };
  if (holds(0.0)) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (holds(mid) ? hi : lo) = mid;
  }
  return hi;
}

// ---------------------------------------------------------------------------
// Nevanlinna representation of F_mu for symmetric mu

struct NevanlinnaRep {
  /// F_mu(w) - w = int dmu_hat(x) / (x - w).
  PositiveMeasure mu_hat;
  /// mu_hat with the atom at 0 removed.
  PositiveMeasure mu_tilde;
  /// mu_hat({0}) = r_-^2; zero when mu charges the origin.
  double r_minus_sq = 0.0;
};

inline constexpr double kNevanlinnaZeroTol = 1e-13;

/// The poles of F_mu are the zeros of m_mu, one in every gap between
/// consecutive atoms (m is strictly increasing there), with residue 1/m'(x0).
inline NevanlinnaRep nevanlinna_rep(const DiscreteMeasure& mu_sym) {
  if (mu_sym.size() < 2) throw StructuralError("Nevanlinna representation needs at least two atoms");
  if (!mu_sym.is_symmetric()) throw DomainError("Nevanlinna representation implemented for symmetric measures");

  const auto xs = mu_sym.atoms();
  const auto ws = mu_sym.weights();
  auto m_real = [&](double x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) acc += ws[i] / (xs[i] - x);
    return acc;
  };
  auto dm_real = [&](double x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) acc += ws[i] / ((xs[i] - x) * (xs[i] - x));
    return acc;
  };

  NevanlinnaRep rep;
  for (std::size_t g = 0; g + 1 < xs.size(); ++g) {
    double lo = xs[g];
    double hi = xs[g + 1];
    double zero;
    if (lo < 0.0 && hi > 0.0) {
      zero = 0.0;  // odd symmetry: m(0) = 0 exactly
    } else {
      while (hi - lo > kNevanlinnaZeroTol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (m_real(mid) < 0.0 ? lo : hi) = mid;
      }
      zero = 0.5 * (lo + hi);
    }
    rep.mu_hat.atoms.push_back(zero);
    rep.mu_hat.weights.push_back(1.0 / dm_real(zero));
  }
  for (std::size_t k = 0; k < rep.mu_hat.size(); ++k) {
    if (rep.mu_hat.atoms[k] == 0.0) {
      rep.r_minus_sq = rep.mu_hat.weights[k];
    } else {
      rep.mu_tilde.atoms.push_back(rep.mu_hat.atoms[k]);
      rep.mu_tilde.weights.push_back(rep.mu_hat.weights[k]);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Reference measures (quantile discretizations)

/// CDF of the quarter-circle density (1/pi) sqrt(4 - x^2) on [0, 2].
inline double quarter_circle_cdf(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 2.0) return 1.0;
  return (0.5 * x * std::sqrt(4.0 - x * x) + 2.0 * std::asin(0.5 * x)) / std::numbers::pi;
}

inline DiscreteMeasure quarter_circle(std::size_t n_atoms) {
  if (n_atoms < 2) throw StructuralError("reference measure needs n_atoms >= 2");
  std::vector<double> xs(n_atoms);
  std::vector<double> ws(n_atoms, 1.0 / static_cast<double>(n_atoms));
  boost::math::tools::eps_tolerance<double> tol(52);
  for (std::size_t i = 0; i < n_atoms; ++i) {
    const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(n_atoms);
    std::uintmax_t max_iter = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        [p](double x) { return quarter_circle_cdf(x) - p; }, 0.0, 2.0, -p, 1.0 - p, tol, max_iter);
    xs[i] = 0.5 * (a + b);
  }
  return DiscreteMeasure::from_unsorted(std::move(xs), std::move(ws));
}

/// p delta_a + (1 - p) delta_b.
inline DiscreteMeasure two_point(double a, double b, double p) {
  if (!(p > 0.0 && p < 1.0)) throw StructuralError("two_point needs p in (0, 1)");
  if (a == b) throw StructuralError("two_point needs distinct atoms");
  return DiscreteMeasure::from_unsorted({a, b}, {p, 1.0 - p});
}

inline DiscreteMeasure uniform(double a, double b, std::size_t n_atoms) {
  if (n_atoms < 2) throw StructuralError("reference measure needs n_atoms >= 2");
  if (!(b > a)) throw StructuralError("uniform needs a < b");
  std::vector<double> xs(n_atoms);
  std::vector<double> ws(n_atoms, 1.0 / static_cast<double>(n_atoms));
  for (std::size_t i = 0; i < n_atoms; ++i)
    xs[i] = a + (b - a) * (static_cast<double>(i) + 0.5) / static_cast<double>(n_atoms);
  return DiscreteMeasure(std::move(xs), std::move(ws));
}

/// Named reference measures. `params` holds (a, b, p) for two_point and (a, b)
/// for uniform; quarter_circle takes none.
inline DiscreteMeasure reference_measure(const std::string& name, std::span<const double> params,
                                         std::size_t n_atoms) {
  if (n_atoms < 2) throw StructuralError("reference measure needs n_atoms >= 2");
  if (name == "quarter_circle") return quarter_circle(n_atoms);
  if (name == "two_point") {
    if (params.size() != 3) throw StructuralError("two_point expects parameters (a, b, p)");
    return two_point(params[0], params[1], params[2]);
  }
  if (name == "uniform") {
    if (params.size() != 2) throw StructuralError("uniform expects parameters (a, b)");
    return uniform(params[0], params[1], n_atoms);
  }
  throw StructuralError("unknown reference measure '" + name + "'");
}

/// Diagonal of length n whose empirical measure is the (i - 1/2)/n quantile
/// discretization of mu.
inline std::vector<double> quantile_profile(const DiscreteMeasure& mu, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = mu.quantile((static_cast<double>(i) + 0.5) / static_cast<double>(n));
  return out;
}

/// Empirical measure (1/n) sum_i delta_{|d_i|}.
template <class Range>
DiscreteMeasure empirical_measure_abs(const Range& diag) {
  std::vector<double> xs;
  for (const auto& d : diag) xs.push_back(std::abs(d));
  std::vector<double> ws(xs.size(), 1.0 / static_cast<double>(xs.size()));
  return DiscreteMeasure::from_unsorted(std::move(xs), std::move(ws));
}

// ---------------------------------------------------------------------------
// Ring geometry

struct RingGeometry {
  double r_minus = 0.0;
  double r_plus = 0.0;
  double s_plus = 0.0;
  double tau = 0.0;

  double inner() const { return r_minus + tau; }
  double outer() const { return r_plus - tau; }
  bool annulus_empty() const { return !(inner() <= outer()); }
  bool contains(cplx w) const {
    const double a = std::abs(w);
    return a >= inner() && a <= outer();
  }
};

/// Ring of mu_sigma shrunk by tau; tau < 0 selects the default 0.05 (r_+ - r_-).
inline RingGeometry ring_geometry(const DiscreteMeasure& mu_sigma, double tau = -1.0) {
  const Radii r = radii(mu_sigma);
  if (r.degenerate) throw StructuralError("ring geometry needs a measure with more than one atom");
  RingGeometry g;
  g.r_minus = r.r_minus;
  g.r_plus = r.r_plus;
  g.s_plus = support_stats(mu_sigma).s_plus;
  g.tau = tau < 0.0 ? 0.05 * (r.r_plus - r.r_minus) : tau;
  return g;
}

// ---------------------------------------------------------------------------
// JSON

inline void to_json(nlohmann::json& j, const DiscreteMeasure& mu) {
  j = nlohmann::json{{"atoms", std::vector<double>(mu.atoms().begin(), mu.atoms().end())},
                     {"weights", std::vector<double>(mu.weights().begin(), mu.weights().end())}};
}

/// Loads {"atoms": [...], "weights": [...]}; `path` names the object in errors.
inline DiscreteMeasure measure_from_json(const nlohmann::json& j, const std::string& path = "") {
  if (!j.is_object()) throw ValidationError(path, "measure must be an object");
  for (const char* key : {"atoms", "weights"}) {
    if (!j.contains(key)) throw ValidationError(path + "/" + key, "missing field");
    if (!j.at(key).is_array()) throw ValidationError(path + "/" + key, "must be an array of numbers");
    for (const auto& v : j.at(key))
      if (!v.is_number()) throw ValidationError(path + "/" + key, "must be an array of numbers");
  }
  auto xs = j.at("atoms").get<std::vector<double>>();
  auto ws = j.at("weights").get<std::vector<double>>();
  if (xs.size() != ws.size()) throw ValidationError(path + "/weights", "length differs from atoms");
  if (xs.empty()) throw ValidationError(path + "/atoms", "empty measure");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1])) throw ValidationError(path + "/atoms", "atoms must be strictly increasing");
  for (double w : ws)
    if (!(w > 0.0)) throw ValidationError(path + "/weights", "weights must be positive");
  const double total = std::accumulate(ws.begin(), ws.end(), 0.0);
  if (std::abs(total - 1.0) > kWeightSumTol)
    throw ValidationError(path + "/weights", "weights sum to " + std::to_string(total) + ", expected 1");
  try {
    return DiscreteMeasure(std::move(xs), std::move(ws));
  } catch (const StructuralError& e) {
    throw ValidationError(path, e.what());
  }
}

}  // namespace ringlaw
