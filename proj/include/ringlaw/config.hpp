#pragma once

// JSON run configurations: {"measure", "ensemble", "grid", "thresholds", "seed"}.
// Every parser validates fully and reports the offending JSON pointer.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ringlaw/errors.hpp"
#include "ringlaw/locallaw.hpp"
#include "ringlaw/measure.hpp"
#include "ringlaw/models.hpp"

namespace ringlaw::config {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Field access

inline const json* find(const json& j, const char* key) {
  if (!j.is_object()) return nullptr;
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

inline const json& require(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) throw ValidationError(path, "must be an object");
  const json* v = find(j, key);
  if (!v) throw ValidationError(path + "/" + key, "missing field");
  return *v;
}

inline double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ValidationError(path, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ValidationError(path, "must be finite");
  return x;
}

inline double number(const json& j, const std::string& path, const char* key, std::optional<double> fallback = {}) {
  const json* v = find(j, key);
  if (!v) {
    if (fallback) return *fallback;
    throw ValidationError(path + "/" + key, "missing field");
  }
  return as_number(*v, path + "/" + key);
}

inline double positive(const json& j, const std::string& path, const char* key, std::optional<double> fallback = {}) {
  const double x = number(j, path, key, fallback);
  if (!(x > 0.0)) throw ValidationError(path + "/" + key, "must be positive");
  return x;
}

inline std::size_t count(const json& j, const std::string& path, const char* key, std::optional<std::size_t> fallback = {}) {
  const json* v = find(j, key);
  if (!v) {
    if (fallback) return *fallback;
    throw ValidationError(path + "/" + key, "missing field");
  }
  if (!v->is_number_integer() || v->get<long long>() < 1) throw ValidationError(path + "/" + key, "must be a positive integer");
  return v->get<std::size_t>();
}

/// A number or an array of numbers.
inline std::vector<double> numbers(const json& j, const std::string& path, const char* key,
                                   std::optional<std::vector<double>> fallback = {}) {
  const json* v = find(j, key);
  const std::string p = path + "/" + key;
  if (!v) {
    if (fallback) return *fallback;
    throw ValidationError(p, "missing field");
  }
  if (v->is_number()) return {as_number(*v, p)};
  if (!v->is_array() || v->empty()) throw ValidationError(p, "must be a number or a nonempty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v->size(); ++i) out.push_back(as_number((*v)[i], p + "/" + std::to_string(i)));
  return out;
}

inline std::vector<std::size_t> sizes(const json& j, const std::string& path, const char* key) {
  const json* v = find(j, key);
  const std::string p = path + "/" + key;
  if (!v) throw ValidationError(p, "missing field");
  std::vector<json> items = v->is_array() ? std::vector<json>(v->begin(), v->end()) : std::vector<json>{*v};
  if (items.empty()) throw ValidationError(p, "must not be empty");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!items[i].is_number_integer() || items[i].get<long long>() < 1)
      throw ValidationError(v->is_array() ? p + "/" + std::to_string(i) : p, "must be a positive integer");
    out.push_back(items[i].get<std::size_t>());
  }
  return out;
}

/// Complex values as [re, im] pairs or plain reals; a single value may be given unwrapped.
inline std::vector<cplx> complexes(const json& j, const std::string& path, const char* key) {
  const json* v = find(j, key);
  const std::string p = path + "/" + key;
  if (!v) throw ValidationError(p, "missing field");
  auto one = [&](const json& x, const std::string& q) -> cplx {
    if (x.is_number()) return {as_number(x, q), 0.0};
    if (x.is_array() && x.size() == 2) return {as_number(x[0], q + "/0"), as_number(x[1], q + "/1")};
    throw ValidationError(q, "complex values are [re, im] pairs or numbers");
  };
  if (v->is_number()) return {one(*v, p)};
  if (!v->is_array() || v->empty()) throw ValidationError(p, "must be a nonempty array");
  if (v->size() == 2 && (*v)[0].is_number() && (*v)[1].is_number()) return {one(*v, p)};
  std::vector<cplx> out;
  for (std::size_t i = 0; i < v->size(); ++i) out.push_back(one((*v)[i], p + "/" + std::to_string(i)));
  return out;
}

// ---------------------------------------------------------------------------
// Sections

/// Either {"atoms", "weights"} or {"reference": name, "params": [...], "n_atoms": n}.
inline DiscreteMeasure measure(const json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path, "measure must be an object");
  if (const json* ref = find(j, "reference")) {
    if (!ref->is_string()) throw ValidationError(path + "/reference", "must be a string");
    const auto params = numbers(j, path, "params", std::vector<double>{});
    const auto n = count(j, path, "n_atoms", 2000);
    try {
      return reference_measure(ref->get<std::string>(), params, n);
    } catch (const StructuralError& e) {
      throw ValidationError(path, e.what());
    } catch (const DomainError& e) {
      throw ValidationError(path, e.what());
    }
  }
  return measure_from_json(j, path);
}

inline Symmetry symmetry(const json& ensemble, const std::string& path) {
  const json* v = find(ensemble, "symmetry");
  if (!v) return Symmetry::unitary;
  if (!v->is_string()) throw ValidationError(path + "/symmetry", "must be \"unitary\" or \"orthogonal\"");
  try {
    return symmetry_from_string(v->get<std::string>());
  } catch (const StructuralError& e) {
    throw ValidationError(path + "/symmetry", e.what());
  }
}

inline const json& section(const json& cfg, const char* key) { return require(cfg, "", key); }

inline json optional_section(const json& cfg, const char* key) {
  const json* v = find(cfg, key);
  if (!v) return json::object();
  if (!v->is_object()) throw ValidationError(std::string("/") + key, "must be an object");
  return *v;
}

inline std::uint64_t seed(const json& cfg) {
  const json* v = find(cfg, "seed");
  if (!v) return 0;
  if (!v->is_number_unsigned()) throw ValidationError("/seed", "must be a nonnegative integer");
  return v->get<std::uint64_t>();
}

/// tau with its annulus check; the error cites the ring bounds.
inline double tau(const json& ensemble, const std::string& path, const DiscreteMeasure& mu) {
  const json* v = find(ensemble, "tau");
  const Radii r = radii(mu);
  if (r.degenerate) throw ValidationError("/measure", "a point mass has no ring");
  const double t = v ? as_number(*v, path + "/tau") : 0.05 * (r.r_plus - r.r_minus);
  if (t < 0.0) throw ValidationError(path + "/tau", "must be nonnegative");
  if (!(r.r_minus + t < r.r_plus - t))
    throw ValidationError(path + "/tau", "tau = " + std::to_string(t) + " leaves an empty annulus inside the ring [" +
                                             std::to_string(r.r_minus) + ", " + std::to_string(r.r_plus) + "]");
  return t;
}

inline void require_annulus(const std::vector<cplx>& ws, const std::string& path, const DiscreteMeasure& mu, double t) {
  const auto g = ring_geometry(mu, t);
  for (std::size_t i = 0; i < ws.size(); ++i)
    if (!g.contains(ws[i]))
      throw ValidationError(path + "/" + std::to_string(i), "|w| = " + std::to_string(std::abs(ws[i])) +
                                                                " outside the annulus [" + std::to_string(g.inner()) +
                                                                ", " + std::to_string(g.outer()) + "]");
}

// ---------------------------------------------------------------------------
// Commands

struct RadiiParams {
  DiscreteMeasure mu;
};

inline RadiiParams radii_params(const json& cfg) { return {measure(section(cfg, "measure"), "/measure")}; }

struct FreeconvParams {
  DiscreteMeasure mu1;
  DiscreteMeasure mu2;
  std::vector<cplx> z;
  std::vector<double> E;
  std::vector<double> eta;
};

inline FreeconvParams freeconv_params(const json& cfg) {
  FreeconvParams p{measure(section(cfg, "measure"), "/measure"), DiscreteMeasure::point_mass(0.0), {}, {}, {}};
  p.mu2 = find(cfg, "measure2") ? measure(cfg["measure2"], "/measure2") : p.mu1;
  const json& g = section(cfg, "grid");
  if (!find(g, "z") && !find(g, "E")) throw ValidationError("/grid", "needs z or E values");
  if (find(g, "z")) p.z = complexes(g, "/grid", "z");
  for (std::size_t i = 0; i < p.z.size(); ++i)
    if (!(p.z[i].imag() > 0.0)) throw ValidationError("/grid/z/" + std::to_string(i), "needs Im z > 0");
  if (find(g, "E")) p.E = numbers(g, "/grid", "E");
  p.eta = numbers(g, "/grid", "eta", default_eta_sequence());
  for (double e : p.eta)
    if (!(e > 0.0)) throw ValidationError("/grid/eta", "must be positive");
  return p;
}

struct CertificateParams {
  DiscreteMeasure mu_sym;
  double r = 0.0;
  double eta_max = 10.0;
  std::size_t points = 24;
};

inline CertificateParams certificate_params(const json& cfg) {
  const auto mu = measure(section(cfg, "measure"), "/measure");
  if (!mu.is_nonnegative()) throw ValidationError("/measure/atoms", "singular value profile must be nonnegative");
  const json& g = section(cfg, "grid");
  CertificateParams p{symmetrize(mu), number(g, "/grid", "r"), positive(g, "/grid", "eta_max", 10.0),
                      count(g, "/grid", "points", 24)};
  const auto rr = radii(mu);
  if (!(p.r > rr.r_minus && p.r < rr.r_plus))
    throw ValidationError("/grid/r", "r = " + std::to_string(p.r) + " outside the open ring (" +
                                         std::to_string(rr.r_minus) + ", " + std::to_string(rr.r_plus) + ")");
  return p;
}

struct RingDensityParams {
  DiscreteMeasure mu;
  std::vector<double> s;
  double h = -1.0;
  double K = -1.0;
  double quad_tol = kDefaultQuadTol;
  std::optional<double> mass_tau;
  std::size_t mass_nodes = 0;
};

inline RingDensityParams ring_density_params(const json& cfg) {
  RingDensityParams p{measure(section(cfg, "measure"), "/measure"), {}, -1.0, -1.0, kDefaultQuadTol, {}, 0};
  if (!p.mu.is_nonnegative()) throw ValidationError("/measure/atoms", "singular value profile must be nonnegative");
  const auto rr = radii(p.mu);
  if (rr.degenerate) throw ValidationError("/measure", "a point mass has no ring");
  const json& g = section(cfg, "grid");
  if (find(g, "s")) {
    p.s = numbers(g, "/grid", "s");
  } else {
    const double a = number(g, "/grid", "s_min", rr.r_minus);
    const double b = number(g, "/grid", "s_max", rr.r_plus);
    const auto n = count(g, "/grid", "n", 50);
    if (!(b >= a)) throw ValidationError("/grid/s_max", "must be at least s_min");
    for (std::size_t i = 0; i < n; ++i) p.s.push_back(n == 1 ? a : a + (b - a) * double(i) / double(n - 1));
  }
  p.h = positive(g, "/grid", "h", default_fd_step(p.mu));
  for (std::size_t i = 0; i < p.s.size(); ++i)
    if (!(p.s[i] - 2.0 * p.h > 0.0)) throw ValidationError("/grid/s/" + std::to_string(i), "stencil reaches s <= 0");
  const double Kmin = 10.0 * std::max(support_stats(p.mu).s_plus, *std::max_element(p.s.begin(), p.s.end()) + 2.0 * p.h);
  if (find(g, "K")) {
    p.K = positive(g, "/grid", "K");
    if (p.K < Kmin) throw ValidationError("/grid/K", "must be at least " + std::to_string(Kmin));
  } else {
    p.K = std::max(default_split_height(p.mu), Kmin);
  }
  p.quad_tol = positive(g, "/grid", "quad_tol", kDefaultQuadTol);
  if (find(g, "mass_tau")) {
    const double t = number(g, "/grid", "mass_tau");
    if (t < 0.0) throw ValidationError("/grid/mass_tau", "must be nonnegative");
    p.mass_tau = t;
    if (find(g, "mass_nodes")) p.mass_nodes = count(g, "/grid", "mass_nodes");
  }
  return p;
}

struct LocalLawParams {
  SingleRingSetup setup;
  ScanGrid grid;
  double slope = kDefaultSlopePass;
  double max_dev = 20.0;
};

inline ScanGrid scan_grid(const json& ensemble, const json& g) {
  ScanGrid s;
  s.N_values = sizes(ensemble, "/ensemble", "N");
  s.trials = count(ensemble, "/ensemble", "trials", 1);
  if (find(g, "eta")) {
    s.eta_values = numbers(g, "/grid", "eta");
    for (double e : s.eta_values)
      if (!(e > 0.0)) throw ValidationError("/grid/eta", "must be positive");
  }
  s.eta_max = positive(g, "/grid", "eta_max", 1.0);
  s.gamma = number(g, "/grid", "gamma", kDefaultGamma);
  if (!(s.gamma > 0.0 && s.gamma < 1.0)) throw ValidationError("/grid/gamma", "must lie in (0, 1)");
  return s;
}

inline LocalLawParams local_law_params(const json& cfg) {
  LocalLawParams p;
  p.setup.mu_sigma = measure(section(cfg, "measure"), "/measure");
  if (!p.setup.mu_sigma.is_nonnegative()) throw ValidationError("/measure/atoms", "singular value profile must be nonnegative");
  const json& e = section(cfg, "ensemble");
  const json& g = section(cfg, "grid");
  p.setup.symmetry = symmetry(e, "/ensemble");
  p.setup.tau = tau(e, "/ensemble", p.setup.mu_sigma);
  p.grid = scan_grid(e, g);
  p.grid.w_values = complexes(g, "/grid", "w");
  require_annulus(p.grid.w_values, "/grid/w", p.setup.mu_sigma, p.setup.tau);
  const json t = optional_section(cfg, "thresholds");
  p.slope = number(t, "/thresholds", "slope", kDefaultSlopePass);
  p.max_dev = positive(t, "/thresholds", "max_dev", 20.0);
  return p;
}

struct MainGapParams {
  SingleRingSetup setup;
  std::vector<std::size_t> N;
  std::size_t trials = 1;
  cplx w0;
  std::vector<double> alpha;
  std::vector<double> bump_radius;  // one per alpha
  std::size_t quad_grid = 64;
  double max_gap = 10.0;
  double fraction = 0.9;
};

inline MainGapParams main_gap_params(const json& cfg) {
  MainGapParams p;
  p.setup.mu_sigma = measure(section(cfg, "measure"), "/measure");
  if (!p.setup.mu_sigma.is_nonnegative()) throw ValidationError("/measure/atoms", "singular value profile must be nonnegative");
  const json& e = section(cfg, "ensemble");
  const json& g = section(cfg, "grid");
  p.setup.symmetry = symmetry(e, "/ensemble");
  p.setup.tau = tau(e, "/ensemble", p.setup.mu_sigma);
  p.N = sizes(e, "/ensemble", "N");
  p.trials = count(e, "/ensemble", "trials", 1);
  const auto w0 = complexes(g, "/grid", "w0");
  if (w0.size() != 1) throw ValidationError("/grid/w0", "must be a single point");
  p.w0 = w0[0];
  p.alpha = numbers(g, "/grid", "alpha");
  for (std::size_t i = 0; i < p.alpha.size(); ++i)
    if (!(p.alpha[i] >= 0.0 && p.alpha[i] < 0.5)) throw ValidationError("/grid/alpha/" + std::to_string(i), "must lie in [0, 1/2)");
  p.bump_radius = numbers(g, "/grid", "bump_radius", std::vector<double>{1.0});
  if (p.bump_radius.size() == 1) p.bump_radius.assign(p.alpha.size(), p.bump_radius[0]);
  if (p.bump_radius.size() != p.alpha.size()) throw ValidationError("/grid/bump_radius", "needs one radius per alpha");
  p.quad_grid = count(g, "/grid", "quad_grid", 64);
  const auto geo = ring_geometry(p.setup.mu_sigma, p.setup.tau);
  for (auto N : p.N)
    for (std::size_t i = 0; i < p.alpha.size(); ++i) {
      if (!(p.bump_radius[i] > 0.0)) throw ValidationError("/grid/bump_radius", "must be positive");
      try {
        require_support_in_annulus(geo, p.w0, p.alpha[i], N, {p.bump_radius[i], p.quad_grid});
      } catch (const DomainError& ex) {
        throw ValidationError("/grid/bump_radius", std::string(ex.what()) + " at N = " + std::to_string(N) +
                                                       ", alpha = " + std::to_string(p.alpha[i]));
      }
    }
  const json t = optional_section(cfg, "thresholds");
  p.max_gap = positive(t, "/thresholds", "max_gap", 10.0);
  p.fraction = number(t, "/thresholds", "fraction", 0.9);
  return p;
}

struct SsvParams {
  SingleRingSetup setup;
  std::vector<std::size_t> N;
  std::size_t trials = 1;
  cplx w;
  std::vector<double> t;  // empty: default grid
  std::size_t bootstrap = 1000;
};

inline SsvParams ssv_params(const json& cfg) {
  SsvParams p;
  p.setup.mu_sigma = measure(section(cfg, "measure"), "/measure");
  if (!p.setup.mu_sigma.is_nonnegative()) throw ValidationError("/measure/atoms", "singular value profile must be nonnegative");
  const json& e = section(cfg, "ensemble");
  const json& g = section(cfg, "grid");
  p.setup.symmetry = symmetry(e, "/ensemble");
  p.N = sizes(e, "/ensemble", "N");
  p.trials = count(e, "/ensemble", "trials", 1);
  const auto w = complexes(g, "/grid", "w");
  if (w.size() != 1) throw ValidationError("/grid/w", "must be a single point");
  p.w = w[0];
  if (!(std::abs(p.w) > 0.0)) throw ValidationError("/grid/w", "must be nonzero");
  if (find(g, "t")) {
    p.t = numbers(g, "/grid", "t");
    for (double x : p.t)
      if (!(x > 0.0)) throw ValidationError("/grid/t", "must be positive");
  }
  if (p.setup.symmetry == Symmetry::orthogonal)
    for (auto N : p.N)
      if (levy_distance(empirical_measure_abs(quantile_profile(p.setup.mu_sigma, N)), DiscreteMeasure::point_mass(1.0)) <=
          kIdentityLevyTol)
        throw ValidationError("/measure", "orthogonal class needs Sigma away from the identity");
  const json th = optional_section(cfg, "thresholds");
  p.bootstrap = count(th, "/thresholds", "bootstrap", 1000);
  return p;
}

inline BlockSetup block_setup(const json& cfg) {
  const json& e = section(cfg, "ensemble");
  BlockSetup s{measure(require(e, "/ensemble", "sigma_profile"), "/ensemble/sigma_profile"),
               measure(require(e, "/ensemble", "xi_profile"), "/ensemble/xi_profile"), symmetry(e, "/ensemble"), 1e-3,
               false};
  const json t = optional_section(cfg, "thresholds");
  s.bulk_threshold = positive(t, "/thresholds", "bulk_density", 1e-3);
  if (const json* tg = find(cfg, "target")) {
    if (!tg->is_string() || (*tg != "arcsine" && *tg != "subordination"))
      throw ValidationError("/target", "must be \"arcsine\" or \"subordination\"");
    s.arcsine_target = *tg == "arcsine";
  }
  return s;
}

inline void require_block_bulk(const BlockSetup& s, const std::vector<std::size_t>& Ns, const std::vector<double>& Es,
                               const std::string& path) {
  for (auto N : Ns) {
    const auto m = block_measures(complex_profile(s.sigma_profile, N), complex_profile(s.xi_profile, N));
    try {
      require_bulk(m, Es, s.bulk_threshold);
    } catch (const DomainError& ex) {
      throw ValidationError(path, ex.what());
    }
  }
}

struct BlockLawParams {
  BlockSetup setup;
  ScanGrid grid;
  double slope = kDefaultSlopePass;
};

inline BlockLawParams block_law_params(const json& cfg) {
  BlockLawParams p;
  p.setup = block_setup(cfg);
  const json& e = section(cfg, "ensemble");
  const json& g = section(cfg, "grid");
  p.grid = scan_grid(e, g);
  p.grid.E_values = numbers(g, "/grid", "E");
  require_block_bulk(p.setup, p.grid.N_values, p.grid.E_values, "/grid/E");
  const json t = optional_section(cfg, "thresholds");
  p.slope = number(t, "/thresholds", "slope", kDefaultSlopePass);
  return p;
}

struct GreenSubParams {
  BlockSetup setup;
  std::vector<std::size_t> N;
  std::size_t trials = 1;
  std::vector<cplx> z;
  double window_lo = -1.0;
  double window_hi = 1.0;
  double max_lambda = 20.0;
  double max_eigvec = 10.0;
};

inline GreenSubParams green_sub_params(const json& cfg) {
  GreenSubParams p;
  p.setup = block_setup(cfg);
  const json& e = section(cfg, "ensemble");
  const json& g = section(cfg, "grid");
  p.N = sizes(e, "/ensemble", "N");
  p.trials = count(e, "/ensemble", "trials", 1);
  p.z = complexes(g, "/grid", "z");
  std::vector<double> Es;
  for (std::size_t i = 0; i < p.z.size(); ++i) {
    if (!(p.z[i].imag() > 0.0)) throw ValidationError("/grid/z/" + std::to_string(i), "needs Im z > 0");
    Es.push_back(p.z[i].real());
  }
  const auto win = numbers(g, "/grid", "window", std::vector<double>{-1.0, 1.0});
  if (win.size() != 2 || !(win[0] < win[1])) throw ValidationError("/grid/window", "must be [lo, hi] with lo < hi");
  p.window_lo = win[0];
  p.window_hi = win[1];
  require_block_bulk(p.setup, p.N, Es, "/grid/z");
  const json t = optional_section(cfg, "thresholds");
  p.max_lambda = positive(t, "/thresholds", "lambda_d", 20.0);
  p.max_eigvec = positive(t, "/thresholds", "eigvec", 10.0);
  return p;
}

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"radii",   "freeconv", "certificate", "ring-density", "local-law",
                                          "main-gap", "ssv-tail", "block-law",   "green-sub"};
  return c;
}

/// Schema validation for a numeric command; never runs the experiment.
inline void validate(const std::string& command, const json& cfg) {
  if (!cfg.is_object()) throw ValidationError("", "config must be a JSON object");
  seed(cfg);
  if (command == "radii") radii_params(cfg);
  else if (command == "freeconv") freeconv_params(cfg);
  else if (command == "certificate") certificate_params(cfg);
  else if (command == "ring-density") ring_density_params(cfg);
  else if (command == "local-law") local_law_params(cfg);
  else if (command == "main-gap") main_gap_params(cfg);
  else if (command == "ssv-tail") ssv_params(cfg);
  else if (command == "block-law") block_law_params(cfg);
  else if (command == "green-sub") green_sub_params(cfg);
  else throw ValidationError("/command", "unknown command '" + command + "'");
}

}  // namespace ringlaw::config
