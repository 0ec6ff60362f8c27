#pragma once

// Command-line front end. Each numeric command reads a JSON config, writes CSV
// files plus manifest.json into --out and prints a short summary.
//
// Exit codes: 0 success, 2 validation error, 3 numerical failure, 64 usage.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ringlaw/config.hpp"
#include "ringlaw/errors.hpp"
#include "ringlaw/freeconv.hpp"
#include "ringlaw/locallaw.hpp"
#include "ringlaw/manifest.hpp"
#include "ringlaw/measure.hpp"
#include "ringlaw/parallel.hpp"
#include "ringlaw/single_ring.hpp"

namespace ringlaw::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitUsage = 64;

struct Options {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool overwrite = false;
  std::string command_hint;      // validate: command when the config does not name one
  std::vector<std::string> runs;  // report inputs
};

// ---------------------------------------------------------------------------
// Output

/// %.17g, lossless for doubles.
inline std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path, std::ios::binary) {
    if (!out_) throw ValidationError("--out", "cannot write " + path.string());
    write(header);
  }

  template <class... T>
  void row(const T&... v) {
    std::vector<std::string> cells{cell(v)...};
    write(cells);
  }

 private:
  static std::string cell(double x) { return num(x); }
  static std::string cell(std::size_t x) { return std::to_string(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(const std::string& s) { return s; }

  void write(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

  std::ofstream out_;
};

inline void prepare_out_dir(const std::string& out, bool overwrite) {
  const fs::path p(out);
  if (fs::exists(p)) {
    if (!fs::is_directory(p)) throw ValidationError("--out", out + " exists and is not a directory");
    if (!fs::is_empty(p) && !overwrite) throw ValidationError("--out", out + " is not empty; pass --overwrite");
  }
  fs::create_directories(p);
}

inline json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

struct RunContext {
  const Options& opts;
  json config;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  ExperimentManifest manifest;
  std::ostream& out;

  bool writes() const { return !opts.out.empty(); }
  fs::path path(const std::string& name) {
    manifest.outputs.push_back(name);
    return fs::path(opts.out) / name;
  }
};

inline json per_N_json(const DominationReport& r) {
  json a = json::array();
  for (const auto& s : r.per_N)
    a.push_back({{"N", s.N}, {"count", s.count}, {"failed", s.failed}, {"max", finite_or_null(s.max)},
                 {"q95", finite_or_null(s.q95)}});
  return a;
}

inline json fit_json(const std::optional<DominationFit>& f) {
  if (!f) return nullptr;
  return {{"slope", f->slope}, {"intercept", f->intercept}, {"pass", f->pass}};
}

// ---------------------------------------------------------------------------
// Commands

inline void run_radii(RunContext& c) {
  const auto p = config::radii_params(c.config);
  const Radii r = radii(p.mu);
  c.out << num(r.r_minus) << ' ' << num(r.r_plus) << '\n';
  c.manifest.summary = {{"r_minus", r.r_minus}, {"r_plus", r.r_plus}, {"degenerate", r.degenerate}};
  if (c.writes()) {
    const auto st = support_stats(p.mu);
    CsvWriter w(c.path("radii.csv"), {"r_minus", "r_plus", "s_plus", "second_moment"});
    w.row(r.r_minus, r.r_plus, st.s_plus, st.second_moment);
  }
}

inline void run_freeconv(RunContext& c) {
  const auto p = config::freeconv_params(c.config);
  const auto states = parallel_map(p.z.size(), c.threads, [&](std::size_t i) { return solve_phi_system(p.mu1, p.mu2, p.z[i]); });
  const auto dens = parallel_map(p.E.size(), c.threads, [&](std::size_t i) { return boundary_density(p.mu1, p.mu2, p.E[i], p.eta); });
  std::ostringstream zs, ds;
  auto emit = [&](std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  const std::vector<std::string> zh{"z_re", "z_im", "omega1_re", "omega1_im", "omega2_re", "omega2_im", "m_re", "m_im", "residual", "iterations"};
  const std::vector<std::string> dh{"E", "density", "error_estimate", "reliable"};
  if (!states.empty()) emit(zs, zh);
  for (const auto& s : states)
    emit(zs, {num(s.z.real()), num(s.z.imag()), num(s.omega1.real()), num(s.omega1.imag()), num(s.omega2.real()),
              num(s.omega2.imag()), num(s.m.real()), num(s.m.imag()), num(s.residual), std::to_string(s.iterations)});
  if (!dens.empty()) emit(ds, dh);
  for (std::size_t i = 0; i < dens.size(); ++i)
    emit(ds, {num(p.E[i]), num(dens[i].value), num(dens[i].error_estimate), dens[i].reliable ? "1" : "0"});
  c.out << zs.str() << ds.str();
  if (c.writes()) {
    if (!states.empty()) std::ofstream(c.path("freeconv.csv"), std::ios::binary) << zs.str();
    if (!dens.empty()) std::ofstream(c.path("density.csv"), std::ios::binary) << ds.str();
  }
  c.manifest.summary = {{"points", states.size()}, {"densities", dens.size()}};
}

inline void run_certificate(RunContext& c) {
  const auto p = config::certificate_params(c.config);
  const auto rep = bulk_bound_certificate(p.mu_sym, p.r, p.eta_max, p.points);
  json j = rep;
  c.out << j.dump(2) << '\n';
  if (c.writes()) std::ofstream(c.path("certificate.json"), std::ios::binary) << j.dump(2) << '\n';
  c.manifest.summary = {{"lower_ok", rep.lower_ok}, {"upper_ok", rep.upper_ok}, {"s_minus", rep.s_minus},
                        {"b_minus", rep.b_minus}};
}

inline void run_ring_density(RunContext& c) {
  const auto p = config::ring_density_params(c.config);
  const RingPotential L(p.mu, p.K, p.quad_tol);
  const auto pts = parallel_map(p.s.size(), c.threads, [&](std::size_t i) { return ring_density_point(L, p.s[i], p.h); });
  if (c.writes()) {
    CsvWriter w(c.path("ring_density.csv"), {"s", "L", "dL", "d2L", "rho"});
    for (const auto& q : pts) w.row(q.s, q.L, q.dL, q.d2L, q.rho);
  }
  c.manifest.summary = {{"points", pts.size()}, {"K", L.K()}, {"h", p.h}};
  c.out << "ring-density: " << pts.size() << " radii, K = " << num(L.K()) << ", h = " << num(p.h) << '\n';
  if (p.mass_tau) {
    const double mass = ring_mass(p.mu, *p.mass_tau, p.mass_nodes, c.threads, p.K, p.quad_tol);
    c.manifest.summary["ring_mass"] = mass;
    c.manifest.summary["mass_tau"] = *p.mass_tau;
    c.out << "ring mass (tau = " << num(*p.mass_tau) << "): " << num(mass) << '\n';
  }
}

inline void run_local_law(RunContext& c) {
  const auto p = config::local_law_params(c.config);
  auto rep = local_law_scan(p.setup, p.grid, c.seed, c.threads);
  finalize(rep, p.slope);
  if (c.writes()) {
    CsvWriter w(c.path("local_law.csv"), {"N", "trial", "w_re", "w_im", "eta", "dev"});
    for (const auto& r : rep.records) w.row(r.N, r.trial, r.point.real(), r.point.imag(), r.eta, r.dev);
  }
  bool max_ok = true;
  for (const auto& s : rep.per_N) {
    max_ok = max_ok && s.max <= p.max_dev;
    c.out << "N = " << s.N << ": max " << num(s.max) << ", q95 " << num(s.q95) << ", failed " << s.failed << '\n';
  }
  if (rep.fit) c.out << "slope " << num(rep.fit->slope) << (rep.fit->pass ? " (pass)" : " (fail)") << '\n';
  c.manifest.summary = {{"per_N", per_N_json(rep)}, {"fit", fit_json(rep.fit)}, {"failures", rep.failures()},
                        {"max_ok", max_ok}, {"pass", max_ok && rep.failures() == 0 && (!rep.fit || rep.fit->pass)}};
}

inline void run_main_gap(RunContext& c) {
  const auto p = config::main_gap_params(c.config);
  std::vector<GapRecord> all;
  json per = json::array();
  bool pass = true;
  std::uint64_t block = 0;
  for (auto N : p.N)
    for (std::size_t i = 0; i < p.alpha.size(); ++i, ++block) {
      // one seed stream per (N, alpha) block
      const auto recs = main_theorem_gap(p.setup, N, p.w0, p.alpha[i], {p.bump_radius[i], p.quad_grid}, p.trials,
                                         child_seed(c.seed, block), c.threads);
      std::size_t ok = 0, jit = 0;
      for (const auto& r : recs) {
        ok += r.gap_norm <= p.max_gap;
        jit += r.jittered;
      }
      const double frac = static_cast<double>(ok) / static_cast<double>(recs.size());
      pass = pass && frac >= p.fraction;
      per.push_back({{"N", N}, {"alpha", p.alpha[i]}, {"fraction_within", frac}, {"jittered_nodes", jit}});
      c.out << "N = " << N << ", alpha = " << num(p.alpha[i]) << ": " << ok << "/" << recs.size()
            << " trials with normalized gap <= " << num(p.max_gap) << '\n';
      all.insert(all.end(), recs.begin(), recs.end());
    }
  if (c.writes()) {
    CsvWriter w(c.path("main_gap.csv"), {"N", "trial", "alpha", "w0_re", "w0_im", "lhs", "rhs", "gap_norm"});
    for (const auto& r : all) w.row(r.N, r.trial, r.alpha, r.w0.real(), r.w0.imag(), r.lhs, r.rhs, r.gap_norm);
  }
  c.manifest.summary = {{"blocks", per}, {"pass", pass}};
}

inline void run_ssv_tail(RunContext& c) {
  const auto p = config::ssv_params(c.config);
  std::optional<CsvWriter> rec, tail;
  if (c.writes()) {
    rec.emplace(c.path("ssv.csv"), std::vector<std::string>{"N", "trial", "w_abs", "t", "lambda1"});
    tail.emplace(c.path("ssv_tail.csv"), std::vector<std::string>{"N", "t", "probability", "hits"});
  }
  json per = json::array();
  bool pass = true;
  for (std::size_t b = 0; b < p.N.size(); ++b) {
    const auto N = p.N[b];
    const auto r = smallest_sv_tail(p.setup, N, p.w, p.t, p.trials, child_seed(c.seed, b), c.threads, p.bootstrap);
    if (rec)
      for (const auto& x : r.records) rec->row(x.N, x.trial, x.w_abs, x.t, x.lambda1);
    if (tail)
      for (const auto& x : r.tail) tail->row(N, x.t, x.probability, x.hits);
    const bool ok = r.monotone && r.slope > 0.0 && r.ci_lo > 0.0;
    pass = pass && ok;
    per.push_back({{"N", N}, {"monotone", r.monotone}, {"slope", finite_or_null(r.slope)}, {"ci_lo", finite_or_null(r.ci_lo)},
                   {"ci_hi", finite_or_null(r.ci_hi)}, {"fit_points", r.fit_points}, {"bootstrap_used", r.bootstrap_used}});
    c.out << "N = " << N << ": slope " << num(r.slope) << ", 95% CI [" << num(r.ci_lo) << ", " << num(r.ci_hi) << "]"
          << (r.monotone ? "" : ", tail not monotone") << '\n';
  }
  c.manifest.summary = {{"per_N", per}, {"pass", pass}};
}

inline void run_block_law(RunContext& c) {
  const auto p = config::block_law_params(c.config);
  auto rep = block_local_law_scan(p.setup, p.grid, c.seed, c.threads);
  finalize(rep, p.slope);
  if (c.writes()) {
    CsvWriter w(c.path("block_law.csv"), {"N", "trial", "E", "eta", "dev"});
    for (const auto& r : rep.records) w.row(r.N, r.trial, r.point.real(), r.eta, r.dev);
  }
  for (const auto& s : rep.per_N) c.out << "N = " << s.N << ": max " << num(s.max) << ", q95 " << num(s.q95) << '\n';
  if (rep.fit) c.out << "slope " << num(rep.fit->slope) << (rep.fit->pass ? " (pass)" : " (fail)") << '\n';
  c.manifest.summary = {{"per_N", per_N_json(rep)}, {"fit", fit_json(rep.fit)}, {"failures", rep.failures()},
                        {"pass", rep.failures() == 0 && (!rep.fit || rep.fit->pass)}};
}

inline void run_green_sub(RunContext& c) {
  const auto p = config::green_sub_params(c.config);
  std::vector<SubordinationRecord> all;
  for (std::size_t b = 0; b < p.N.size(); ++b) {
    const auto r = green_subordination_scan(p.setup, p.N[b], p.z, p.window_lo, p.window_hi, p.trials,
                                            child_seed(c.seed, b), c.threads);
    all.insert(all.end(), r.begin(), r.end());
  }
  double ml = 0.0, me = 0.0, mi = 0.0;
  for (const auto& r : all) {
    ml = std::max(ml, r.lambda_d_scaled);
    me = std::max(me, r.eigvec_sup);
    mi = std::max(mi, r.identity_residual);
  }
  if (c.writes()) {
    CsvWriter w(c.path("green_sub.csv"),
                {"N", "trial", "z_re", "z_im", "lambda_d_scaled", "omegaB_gap", "omegaA_gap", "eigvec_sup"});
    for (const auto& r : all)
      w.row(r.N, r.trial, r.z.real(), r.z.imag(), r.lambda_d_scaled, r.omegaB_gap, r.omegaA_gap, r.eigvec_sup);
  }
  c.out << "max sqrt(N eta) Lambda_d " << num(ml) << ", max eigvec_sup " << num(me) << ", max identity residual "
        << num(mi) << '\n';
  c.manifest.summary = {{"max_lambda_d_scaled", ml}, {"max_eigvec_sup", me}, {"max_identity_residual", mi},
                        {"pass", ml <= p.max_lambda && me <= p.max_eigvec}};
}

inline void dispatch(const std::string& cmd, RunContext& c) {
  if (cmd == "radii") run_radii(c);
  else if (cmd == "freeconv") run_freeconv(c);
  else if (cmd == "certificate") run_certificate(c);
  else if (cmd == "ring-density") run_ring_density(c);
  else if (cmd == "local-law") run_local_law(c);
  else if (cmd == "main-gap") run_main_gap(c);
  else if (cmd == "ssv-tail") run_ssv_tail(c);
  else if (cmd == "block-law") run_block_law(c);
  else if (cmd == "green-sub") run_green_sub(c);
}

inline bool needs_out(const std::string& cmd) {
  return cmd != "radii" && cmd != "certificate" && cmd != "freeconv";
}

/// Effective config: file contents, --seed override, command check.
inline json effective_config(const std::string& cmd, const Options& o) {
  if (o.config_path.empty()) throw ValidationError("--config", "missing");
  json cfg = load_config(o.config_path);
  if (!cfg.is_object()) throw ValidationError("", "config must be a JSON object");
  if (const json* named = config::find(cfg, "command")) {
    if (!named->is_string() || *named != cmd)
      throw ValidationError("/command", "config is for '" + named->dump() + "', not '" + cmd + "'");
  }
  if (o.seed) cfg["seed"] = *o.seed;
  return cfg;
}

inline void run_command(const std::string& cmd, const Options& o, std::ostream& out) {
  json cfg = effective_config(cmd, o);
  config::validate(cmd, cfg);
  if (needs_out(cmd) && o.out.empty()) throw ValidationError("--out", "required for " + cmd);
  if (!o.out.empty()) prepare_out_dir(o.out, o.overwrite);
  RunContext c{o, cfg, config::seed(cfg), resolve_threads(o.threads), {}, out};
  c.manifest.command = cmd;
  c.manifest.config = cfg;
  c.manifest.seed = c.seed;
  c.manifest.threads = c.threads;
  c.manifest.started = std::chrono::system_clock::now();
  dispatch(cmd, c);
  c.manifest.finished = std::chrono::system_clock::now();
  if (c.writes()) std::ofstream(fs::path(o.out) / "manifest.json", std::ios::binary) << c.manifest.to_json().dump(2) << '\n';
}

inline void run_validate(const Options& o, std::ostream& out) {
  if (o.config_path.empty()) throw ValidationError("--config", "missing");
  json cfg = load_config(o.config_path);
  std::string cmd = o.command_hint;
  if (const json* named = config::find(cfg, "command")) {
    if (!named->is_string()) throw ValidationError("/command", "must be a string");
    cmd = named->get<std::string>();
  }
  if (cmd.empty()) throw ValidationError("/command", "missing; name the command in the config or with --command");
  config::validate(cmd, cfg);
  out << json{{"command", cmd}, {"errors", json::array()}}.dump() << '\n';
}

// ---------------------------------------------------------------------------
// report

struct RunData {
  std::string command;
  json manifest;
  std::vector<DeviationRecord> records;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

inline RunData read_run(const std::string& dir) {
  const fs::path mpath = fs::path(dir) / "manifest.json";
  std::ifstream in(mpath);
  if (!in) throw ValidationError(dir, "no manifest.json");
  RunData d;
  try {
    d.manifest = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(mpath.string(), e.what());
  }
  d.command = d.manifest.value("command", "");
  std::string file;
  if (d.command == "local-law") file = "local_law.csv";
  else if (d.command == "block-law") file = "block_law.csv";
  else throw ValidationError(mpath.string() + "/command", "report merges local-law or block-law runs, got '" + d.command + "'");
  std::ifstream csv(fs::path(dir) / file);
  if (!csv) throw ValidationError(dir, "missing " + file);
  std::string line;
  std::getline(csv, line);
  const auto header = split_csv_line(line);
  const auto col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ValidationError(dir + "/" + file, "missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t cN = col("N"), cT = col("trial"), cE = col("eta"), cD = col("dev");
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw ValidationError(dir + "/" + file, "ragged row");
    DeviationRecord r;
    r.N = std::stoul(cells[cN]);
    r.trial = std::stoul(cells[cT]);
    r.eta = std::stod(cells[cE]);
    r.dev = std::stod(cells[cD]);
    r.failed = !std::isfinite(r.dev);
    d.records.push_back(r);
  }
  return d;
}

inline void run_report(const Options& o, std::ostream& out) {
  if (o.runs.empty()) throw ValidationError("runs", "no run directories given");
  if (o.out.empty()) throw ValidationError("--out", "required for report");
  std::vector<RunData> runs;
  for (const auto& r : o.runs) runs.push_back(read_run(r));
  for (const auto& r : runs)
    if (r.command != runs[0].command)
      throw ValidationError("runs", "mixed schemas: " + runs[0].command + " and " + r.command);
  prepare_out_dir(o.out, o.overwrite);
  const auto started = std::chrono::system_clock::now();
  DominationReport rep;
  double slope_pass = kDefaultSlopePass;
  json hashes = json::array();
  for (const auto& r : runs) {
    rep.records.insert(rep.records.end(), r.records.begin(), r.records.end());
    hashes.push_back(r.manifest.value("config_hash", ""));
    const auto& cfg = r.manifest["config"];
    if (cfg.contains("thresholds") && cfg["thresholds"].contains("slope")) slope_pass = cfg["thresholds"]["slope"].get<double>();
  }
  finalize(rep, slope_pass);

  ExperimentManifest m;
  m.command = "report";
  m.config = {{"command", "report"}, {"runs", o.runs}, {"run_hashes", hashes}};
  m.started = started;
  {
    m.outputs.push_back("summary.csv");
    CsvWriter w(fs::path(o.out) / "summary.csv", {"N", "count", "failed", "max", "q95"});
    for (const auto& s : rep.per_N) w.row(s.N, s.count, s.failed, s.max, s.q95);
  }
  {
    m.outputs.push_back("summary.dat");
    std::ofstream g(fs::path(o.out) / "summary.dat", std::ios::binary);
    g << "# N q95 max\n";
    for (const auto& s : rep.per_N) g << s.N << ' ' << num(s.q95) << ' ' << num(s.max) << '\n';
  }
  if (rep.fit) {
    m.outputs.push_back("fit.csv");
    CsvWriter w(fs::path(o.out) / "fit.csv", {"command", "slope", "intercept", "threshold", "pass"});
    w.row(runs[0].command, rep.fit->slope, rep.fit->intercept, slope_pass, std::string(rep.fit->pass ? "pass" : "fail"));
    out << runs[0].command << ": slope " << num(rep.fit->slope) << (rep.fit->pass ? " pass" : " fail") << '\n';
  } else {
    out << runs[0].command << ": fewer than 3 N values, quantiles only\n";
  }
  m.summary = {{"per_N", per_N_json(rep)}, {"fit", fit_json(rep.fit)}};
  m.finished = std::chrono::system_clock::now();
  std::ofstream(fs::path(o.out) / "manifest.json", std::ios::binary) << m.to_json().dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Entry point

inline int main(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Free convolution, single-ring densities and local-law experiments"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("--config", o.config_path, "JSON config or manifest")->required();
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "overrides the config seed");
    sub->add_option("--threads", o.threads, "worker threads (fallback: RINGLAW_THREADS)");
    sub->add_flag("--overwrite", o.overwrite, "allow a non-empty output directory");
  };
  for (const auto& name : config::commands()) common(app.add_subcommand(name, "run " + name), true);
  auto* report = app.add_subcommand("report", "merge local-law or block-law runs and fit the N dependence");
  common(report, false);
  report->add_option("runs", o.runs, "run directories");
  auto* validate = app.add_subcommand("validate", "check a config without running it");
  validate->add_option("--config", o.config_path, "JSON config or manifest")->required();
  validate->add_option("--command", o.command_hint, "command when the config does not name one");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (cmd == "report") run_report(o, out);
    else if (cmd == "validate") run_validate(o, out);
    else run_command(cmd, o, out);
    return kExitOk;
  } catch (const ValidationError& e) {
    if (cmd == "validate")
      out << json{{"errors", json::array({json{{"path", e.path()}, {"message", e.what()}}})}}.dump() << '\n';
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const StructuralError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DomainError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ConvergenceError& e) {
    err << "numerical failure: " << e.what() << " (last residual " << num(e.last_residual()) << ")\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace ringlaw::cli
