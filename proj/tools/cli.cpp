#include "cli.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>

#include "artifacts.hpp"
#include "config.hpp"
#include "frontlab/cauchy.hpp"
#include "frontlab/errors.hpp"
#include "frontlab/selection.hpp"
#include "frontlab/supersol.hpp"

namespace frontlab::cli {

namespace {

namespace fs = std::filesystem;

struct Context {
  fs::path out_dir;
  int threads = 1;
  bool verbose = false;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
  std::vector<std::string> artifacts;

  void log(const std::string& msg) const {
    if (verbose) *err << "[frontlab] " << msg << '\n';
  }
  fs::path file(const std::string& name) {
    artifacts.push_back(name);
    log("writing " + (out_dir / name).string());
    return out_dir / name;
  }
};

ojson number_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

ojson family_json(const FamilySpec& f) {
  ojson j;
  j["kind"] = to_string(f.kind());
  j["gamma0"] = f.gamma0();
  j["s_range"] = {f.s_range().lo, number_or_null(f.s_range().hi)};
  if (f.kind() == FamilyKind::PolyAffine) {
    ojson c = ojson::array();
    for (const auto& row : f.coefficients()) c.push_back({row[0], row[1]});
    j["coefficients"] = c;
  }
  return j;
}

ojson kernel_json(const KernelSpec& k) {
  ojson j;
  j["kind"] = to_string(k.kind());
  if (!k.is_local()) j["L"] = k.L();
  return j;
}

double require_s(const ExperimentConfig& cfg, const std::string& command) {
  if (!cfg.s) throw ConfigError("field 's' is required for " + command);
  return *cfg.s;
}

double default_tol(const KernelSpec& k, double tol) { return tol > 0.0 ? tol : (k.is_local() ? 1e-8 : 1e-9); }

ojson fit_json(const DecayFit& f) {
  ojson j;
  j["lambda_hat"] = f.lambda_hat;
  j["A_hat"] = f.A_hat;
  j["B_hat"] = f.B_hat;
  j["A_stderr"] = f.A_stderr;
  j["residual"] = f.residual;
  j["window"] = {f.xi_lo, f.xi_hi};
  j["samples"] = f.samples;
  return j;
}

ojson point_json(const CurvePoint& p) {
  ojson j;
  j["s"] = p.s;
  j["c_star"] = p.c_star;
  j["class"] = class_label(p);
  j["fit"] = fit_json(p.fit);
  j["evidence"] = p.evidence;
  return j;
}

CsvTable curve_table(const std::vector<CurvePoint>& rows) {
  CsvTable t;
  t.header = {"s", "c_star", "class", "lambda_hat", "A_hat", "B_hat"};
  for (const auto& r : rows)
    t.rows.push_back({num(r.s), num(r.c_star), class_label(r), num(r.fit.lambda_hat), num(r.fit.A_hat),
                      num(r.fit.B_hat)});
  return t;
}

struct Simulation {
  EvolveResult run;
  SpeedEstimate speed;
  double dt = 0.0;
};

Simulation simulate_front(const ExperimentConfig& cfg, double s, const Context& ctx) {
  const auto& G = cfg.grid;
  const Grid1D grid = Grid1D::span(G.x_min, G.x_max, G.dx);
  const Field init = mollified_indicator(grid, G.init_a, G.init_b, G.init_width);
  Simulation sim;
  sim.dt = G.dt > 0.0 ? G.dt : std::min(0.01, 0.9 * max_stable_dt(cfg.family, s, cfg.kernel, grid.dx));
  EvolveOptions eo;
  eo.sample_interval = G.sample_interval;
  ctx.log("evolving to T = " + num(G.T) + " with dt = " + num(sim.dt) + " on " + std::to_string(grid.n) + " nodes");
  sim.run = evolve(cfg.family, s, cfg.kernel, init, G.T, sim.dt, G.level, eo);
  const auto window = G.window.value_or(std::make_pair(0.6 * G.T, G.T));
  sim.speed = estimate_speed(sim.run.track, window.first, window.second);
  return sim;
}

int cmd_spectral(const ExperimentConfig& cfg, Context& ctx) {
  const SpectralData sd = linear_speed(cfg.kernel, cfg.family.gamma0());
  ojson j;
  j["kernel"] = kernel_json(cfg.kernel);
  j["gamma0"] = sd.gamma0;
  j["c0_star"] = sd.c0_star;
  j["lambda0"] = sd.lambda0;
  j["minimizer_tol"] = sd.minimizer_tol;
  j["newton_iterations"] = sd.newton_iterations;
  j["stationarity_residual"] = sd.stationarity_residual;
  if (!cfg.kernel.is_local())
    j["first_moment_residual"] = std::abs(mgf_moment(cfg.kernel, sd.lambda0, 1) - sd.c0_star);
  write_json(ctx.file("spectral.json"), j);

  CsvTable t;
  t.header = {"lambda", "h", "h_over_lambda"};
  for (int i = 1; i <= 300; ++i) {
    const double l = 3.0 * sd.lambda0 * i / 300.0;
    const double h = h_value(cfg.kernel, sd.gamma0, l);
    t.rows.push_back({num(l), num(h), num(h / l)});
  }
  write_csv(ctx.file("h_curve.csv"), t);
  *ctx.out << "spectral: c0* = " << num(sd.c0_star) << ", lambda0 = " << num(sd.lambda0) << '\n';
  return 0;
}

int cmd_simulate(const ExperimentConfig& cfg, Context& ctx) {
  const double s = require_s(cfg, "simulate");
  const Simulation sim = simulate_front(cfg, s, ctx);
  const auto& tr = sim.run.track;
  CsvTable t;
  t.header = {"t", "x_front"};
  for (std::size_t i = 0; i < tr.times.size(); ++i) t.rows.push_back({num(tr.times[i]), num(tr.positions[i])});
  write_csv(ctx.file("front.csv"), t);
  if (cfg.grid.write_field) {
    CsvTable f;
    f.header = {"x", "w"};
    const auto& fld = sim.run.field;
    for (int i = 0; i < fld.grid.n; ++i)
      f.rows.push_back({num(fld.grid.x(i)), num(fld.values[static_cast<std::size_t>(i)])});
    write_csv(ctx.file("field.csv"), f);
  }
  const SpectralData sd = linear_speed(cfg.kernel, cfg.family.gamma0());
  ojson j;
  j["s"] = s;
  j["family"] = family_json(cfg.family);
  j["kernel"] = kernel_json(cfg.kernel);
  j["c_hat"] = sim.speed.c_hat;
  j["stderr"] = sim.speed.std_error;
  j["window"] = {sim.speed.t_lo, sim.speed.t_hi};
  j["samples"] = sim.speed.samples;
  j["level"] = tr.level;
  j["backward_steps"] = tr.backward_steps;
  j["grid"] = {{"x0", sim.run.field.grid.x0},
               {"dx", sim.run.field.grid.dx},
               {"n", sim.run.field.grid.n},
               {"dt", sim.run.dt_used},
               {"T", cfg.grid.T},
               {"steps", sim.run.steps}};
  j["c0_star"] = sd.c0_star;
  write_json(ctx.file("simulate.json"), j);
  *ctx.out << "simulate: c_hat = " << num(sim.speed.c_hat) << " +- " << num(sim.speed.std_error) << '\n';
  return 0;
}

int cmd_wave(const ExperimentConfig& cfg, Context& ctx) {
  const double s = require_s(cfg, "wave");
  const SpectralData sd = linear_speed(cfg.kernel, cfg.family.gamma0());
  WaveProfile profile;
  const bool minimal = !cfg.wave.c;
  if (minimal) {
    ctx.log("searching the minimal speed");
    profile = minimal_wave(cfg.family, s, cfg.kernel, default_tol(cfg.kernel, cfg.wave.speed_tol)).profile;
  } else if (cfg.kernel.is_local()) {
    auto outcome = solve_wave_local(cfg.family, s, *cfg.wave.c);
    if (!outcome)
      throw AssumptionViolation("no traveling wave at c = " + num(*cfg.wave.c) + ": " + outcome.reason);
    profile = std::move(*outcome.profile);
  } else {
    profile = solve_wave_nonlocal(cfg.family, s, *cfg.wave.c, cfg.kernel);
  }

  ojson j;
  j["s"] = s;
  j["c"] = profile.c;
  j["minimal"] = minimal;
  j["mode"] = to_string(profile.mode);
  j["family"] = family_json(cfg.family);
  j["kernel"] = kernel_json(cfg.kernel);
  j["residual"] = profile.residual;
  j["tolerance"] = profile.tolerance;
  j["iterations"] = profile.iterations;
  j["points"] = profile.xi.size();
  j["c0_star"] = sd.c0_star;
  j["lambda0"] = sd.lambda0;
  try {
    const DecayResult d = fit_decay(profile, sd, profile.c);
    j["class"] = to_string(d.front.kind);
    j["fit"] = fit_json(d.fit);
    j["lambda_minus"] = d.front.lambda_minus;
    j["lambda_plus"] = d.front.lambda_plus;
    j["a_ratio"] = d.front.a_ratio;
    j["evidence"] = d.front.evidence;
  } catch (const Unclassified& e) {
    j["class"] = "Unclassified";
    j["fit"] = fit_json(fit_tail(profile));
    j["evidence"] = e.what();
  } catch (const PreconditionError& e) {
    j["class"] = nullptr;
    j["evidence"] = e.what();
  }
  try {
    const LeftTailFit lt = fit_left_tail(profile);
    j["left_tail"] = {{"mu_hat", lt.mu_hat},
                      {"mu", mu_root(cfg.kernel, cfg.family.df(1.0, s), profile.c)},
                      {"window", {lt.xi_lo, lt.xi_hi}},
                      {"residual", lt.residual}};
  } catch (const Error& e) {
    j["left_tail"] = {{"error", e.what()}};
  }
  int status = 0;
  if (cfg.wave.cross_check && minimal && !cfg.kernel.is_local()) {
    const Simulation sim = simulate_front(cfg, s, ctx);
    const double rel = std::abs(sim.speed.c_hat - profile.c) / profile.c;
    j["cross_check"] = {{"c_hat", sim.speed.c_hat}, {"relative_difference", rel}, {"within_3_percent", rel <= 0.03}};
    if (rel > 0.03) {
      *ctx.err << "wave: simulated speed " << num(sim.speed.c_hat) << " differs from c* = " << num(profile.c)
               << " by more than 3%\n";
      status = 1;
    }
  }
  CsvTable t;
  t.header = {"xi", "W"};
  for (std::size_t i = 0; i < profile.xi.size(); ++i) t.rows.push_back({num(profile.xi[i]), num(profile.W[i])});
  write_csv(ctx.file("profile.csv"), t);
  write_json(ctx.file("wave.json"), j);
  *ctx.out << "wave: c = " << num(profile.c) << ", class " << (j["class"].is_null() ? "n/a" : j["class"].get<std::string>())
           << '\n';
  return status;
}

int cmd_speed_curve(const ExperimentConfig& cfg, Context& ctx) {
  if (cfg.speed_curve.s_list.empty()) throw ConfigError("field 'speed_curve.s_list' is required for speed-curve");
  SelectionOptions o;
  o.speed_tol = cfg.speed_curve.speed_tol;
  o.threads = ctx.threads;
  ctx.log("evaluating " + std::to_string(cfg.speed_curve.s_list.size()) + " parameters on " +
          std::to_string(ctx.threads) + " threads");
  const auto rows = speed_curve(cfg.family, cfg.kernel, cfg.speed_curve.s_list, o);
  write_csv(ctx.file("curve.csv"), curve_table(rows));
  ojson j;
  j["family"] = family_json(cfg.family);
  j["kernel"] = kernel_json(cfg.kernel);
  j["c_lin"] = linear_speed(cfg.kernel, cfg.family.gamma0()).c0_star;
  j["rows"] = ojson::array();
  for (const auto& r : rows) j["rows"].push_back(point_json(r));
  write_json(ctx.file("curve.json"), j);
  *ctx.out << "speed-curve: " << rows.size() << " rows\n";
  return 0;
}

int cmd_threshold(const ExperimentConfig& cfg, Context& ctx) {
  const auto& T = cfg.threshold;
  SelectionOptions o;
  o.speed_tol = T.speed_tol;
  o.threads = ctx.threads;
  ctx.log("bisecting on [" + num(T.s_lo) + ", " + num(T.s_hi) + "]");
  const ThresholdResult r = find_threshold(cfg.family, cfg.kernel, T.s_lo, T.s_hi, T.tol_s, T.eps_c, o);
  ojson j;
  j["family"] = family_json(cfg.family);
  j["kernel"] = kernel_json(cfg.kernel);
  j["s_star"] = r.s_star;
  j["bracket"] = {r.s_lo, r.s_hi};
  j["range"] = {r.range_lo, r.range_hi};
  j["tol_s"] = r.tol_s;
  j["eps_c"] = r.eps_c;
  j["c_lin"] = r.c_lin;
  j["transition"] = r.transition ? point_json(*r.transition) : ojson(nullptr);
  int status = 0;
  if (T.certificate) {
    ctx.log("certifying the transition");
    const CertificateReport cert = transition_certificate(r);
    ojson c;
    c["pass"] = cert.pass;
    c["probes"] = ojson::array();
    for (const auto& p : cert.probes) {
      ojson pj;
      pj["role"] = p.role;
      pj["s"] = p.s;
      pj["expected"] = p.expected;
      pj["class"] = class_label(p.point);
      pj["ok"] = p.ok;
      pj["c_star"] = p.point.c_star;
      pj["fit"] = fit_json(p.point.fit);
      pj["evidence"] = p.point.evidence;
      c["probes"].push_back(pj);
    }
    c["notes"] = cert.notes;
    j["certificate"] = c;
    if (!cert.pass) status = 1;
  }
  write_json(ctx.file("threshold.json"), j);
  write_csv(ctx.file("threshold_curve.csv"), curve_table(r.curve));
  *ctx.out << "threshold: s* = " << num(r.s_star) << " in [" << num(r.s_lo) << ", " << num(r.s_hi) << "]";
  if (T.certificate) *ctx.out << ", certificate " << (status == 0 ? "PASS" : "FAIL");
  *ctx.out << '\n';
  return status;
}

ojson params_json(const SupersolParams& p) {
  ojson j;
  j["mode"] = to_string(p.mode);
  j["c"] = p.c;
  j["lambda0"] = p.lambda0;
  j["L"] = p.L;
  j["mu"] = p.mu;
  j["xi1"] = p.xi1;
  j["xi2"] = p.xi2;
  j["delta0"] = p.delta0;
  j["delta1"] = p.delta1;
  j["delta2"] = p.delta2;
  j["delta3"] = p.delta3;
  j["delta4"] = p.delta4;
  j["eps1"] = p.eps1;
  j["eps2"] = p.eps2;
  j["eps3"] = p.eps3;
  j["eps4"] = p.eps4;
  j["lambda1"] = p.lambda1;
  j["lambda2"] = p.lambda2;
  j["K1"] = p.K1;
  j["K2"] = p.K2;
  j["K3"] = p.K3;
  j["K4"] = p.K4;
  j["L0"] = p.L0;
  j["A_hat"] = p.A_hat;
  j["validated"] = p.validated;
  return j;
}

int cmd_supersol(const ExperimentConfig& cfg, Context& ctx) {
  const double s = require_s(cfg, "supersol-check");
  const auto& S = cfg.supersol;
  ctx.log("computing the minimal wave");
  const MinimalWave mw = minimal_wave(cfg.family, s, cfg.kernel, default_tol(cfg.kernel, S.speed_tol));
  const SpectralData sd = linear_speed(cfg.kernel, cfg.family.gamma0());
  ParamOverrides ov;
  ov.lambda1 = S.lambda1;
  ov.allow_invalid = S.allow_invalid;
  const SupersolParams p = auto_params(mw.profile, sd, cfg.family, s, S.delta0, ov);
  write_json(ctx.file("supersol_params.json"), params_json(p));
  const PiecewiseBump bump = build_Rw(p, !S.allow_invalid);
  const Grid1D grid = verification_grid(mw.profile, bump);
  ctx.log("verifying on " + std::to_string(grid.n) + " points");
  std::vector<VerifySample> samples;
  const VerificationReport rep = verify(mw.profile, bump, cfg.family, s, S.delta0, grid, S.dump_csv ? &samples : nullptr);

  ojson j;
  j["pass"] = rep.pass;
  j["failure"] = rep.failure;
  j["delta0"] = rep.delta0;
  j["max_delta0"] = rep.max_delta0;
  j["tolerance"] = rep.tolerance;
  j["pieces"] = ojson::array();
  for (const auto& pr : rep.pieces)
    j["pieces"].push_back({{"piece", pr.piece},
                           {"max_residual", pr.max_residual},
                           {"at", pr.at},
                           {"points", pr.points},
                           {"ok", pr.ok}});
  j["corners"] = ojson::array();
  for (const auto& c : rep.corners)
    j["corners"].push_back({{"at", c.at}, {"dR_right", c.dR_right}, {"dR_left", c.dR_left}, {"ok", c.ok}});
  j["constraints"] = ojson::array();
  for (const auto& c : rep.constraints)
    j["constraints"].push_back({{"name", c.name}, {"ok", c.ok}, {"detail", c.detail}});
  j["continuity_jump"] = rep.continuity_jump;
  j["plateau_xi"] = rep.plateau_xi;
  j["tail_ratio"] = rep.tail_ratio;
  j["grid"] = {{"x0", grid.x0}, {"dx", grid.dx}, {"n", grid.n}};
  write_json(ctx.file("supersol_report.json"), j);
  if (S.dump_csv) {
    CsvTable t;
    t.header = {"xi", "W_star", "R", "W_bar", "N0"};
    for (const auto& v : samples) t.rows.push_back({num(v.xi), num(v.W_star), num(v.R), num(v.W_bar), num(v.N0)});
    write_csv(ctx.file("supersol_samples.csv"), t);
  }
  *ctx.out << "supersol-check: " << (rep.pass ? "PASS" : "FAIL") << " at delta0 = " << num(S.delta0)
           << ", max delta0 = " << num(rep.max_delta0);
  if (!rep.pass) *ctx.out << " (" << rep.failure << ")";
  *ctx.out << '\n';
  return rep.pass ? 0 : 1;
}

ojson versions_json() {
  ojson v;
  v["frontlab"] = "0.1.0";
  v["compiler"] = __VERSION__;
  v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  v["boost"] = BOOST_LIB_VERSION;
  v["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                       std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  v["cli11"] = CLI11_VERSION;
  return v;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"frontlab: front speed selection experiments"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_override;
  int threads = 1;
  bool verbose = false;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"spectral", "linear speed c0* and decay rate lambda0"},
      {"simulate", "Cauchy problem and spreading-speed estimate"},
      {"wave", "traveling-wave profile and tail classification"},
      {"speed-curve", "minimal speed and front class over a parameter list"},
      {"threshold", "linear-to-nonlinear selection threshold with certificate"},
      {"supersol-check", "super-solution construction and verification"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON experiment config")->required();
    sub->add_option("--out", out_override, "output directory (overrides output_dir)");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024));
    sub->add_flag("--verbose", verbose, "progress on stderr");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  Context ctx;
  ctx.threads = threads;
  ctx.verbose = verbose;
  ctx.out = &out;
  ctx.err = &err;

  const auto t0 = std::chrono::steady_clock::now();
  int status = 0;
  std::string error;
  ExperimentConfig cfg;
  bool have_out = false;
  try {
    cfg = load_config(config_path);
    ctx.out_dir = out_override.empty() ? fs::path(cfg.output_dir) : fs::path(out_override);
    fs::create_directories(ctx.out_dir);
    have_out = true;
    static const std::map<std::string, std::function<int(const ExperimentConfig&, Context&)>> table{
        {"spectral", cmd_spectral},   {"simulate", cmd_simulate},   {"wave", cmd_wave},
        {"speed-curve", cmd_speed_curve}, {"threshold", cmd_threshold}, {"supersol-check", cmd_supersol}};
    status = table.at(command)(cfg, ctx);
  } catch (const NonconvergenceError& e) {
    status = 2;
    error = e.what();
  } catch (const Error& e) {
    status = 1;
    error = e.what();
  } catch (const nlohmann::json::exception& e) {
    status = 1;
    error = e.what();
  } catch (const fs::filesystem_error& e) {
    status = 1;
    error = e.what();
  } catch (const std::exception& e) {
    status = 2;
    error = e.what();
  }
  if (!error.empty()) err << "frontlab " << command << ": " << error << '\n';

  if (have_out) {
    ojson m;
    m["command"] = command;
    m["config_source"] = config_path;
    m["config"] = cfg.echo;
    m["threads"] = threads;
    m["deterministic"] = cfg.deterministic;
    m["versions"] = versions_json();
    m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    m["exit_code"] = status;
    m["error"] = error.empty() ? ojson(nullptr) : ojson(error);
    m["artifacts"] = ctx.artifacts;
    try {
      write_json(ctx.out_dir / "manifest.json", m);
    } catch (const Error& e) {
      err << "frontlab: " << e.what() << '\n';
      if (status == 0) status = 1;
    }
  }
  return status;
}

}  // namespace frontlab::cli
