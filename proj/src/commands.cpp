#include "critgrowth/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "critgrowth/criterion.hpp"
#include "critgrowth/errors.hpp"
#include "critgrowth/lyapunov.hpp"
#include "critgrowth/montecarlo.hpp"
#include "critgrowth/report.hpp"
#include "critgrowth/rng.hpp"

namespace critgrowth {

using nlohmann::json;

namespace {

struct Setup {
  std::unique_ptr<Model> model;
  PerronData pd;
};

Setup prepare(const RunConfig& cfg) {
  Setup s;
  s.model = build_model(cfg);
  PerronOptions po;
  po.tol = cfg.spectral.tol;
  po.max_iter = cfg.spectral.max_iter;
  s.pd = perron(s.model->mean_matrix(), po);
  return s;
}

json header(const std::string& command, const RunConfig& cfg, const Setup& s) {
  return {{"command", command},
          {"config", to_json(cfg)},
          {"seed", cfg.simulation.seed},
          {"model", s.model->kind()},
          {"perron", report_json(s.pd)},
          {"criticality", to_string(classify_criticality(s.pd, cfg.spectral.criticality_tol))}};
}

Sigma2Options sigma2_options(const RunConfig& cfg) {
  Sigma2Options so;
  so.force_monte_carlo = cfg.criterion.sigma2_monte_carlo;
  so.samples = cfg.criterion.mc_samples;
  so.seed = cfg.simulation.seed;
  return so;
}

LyapunovOptions lyapunov_options(const RunConfig& cfg, std::int64_t samples) {
  LyapunovOptions lo;
  lo.samples = samples;
  lo.seed = cfg.simulation.seed;
  lo.band = cfg.lyapunov.band;
  lo.threads = cfg.simulation.threads;
  return lo;
}

}  // namespace

State resolve_x0(const RunConfig& cfg, const PerronData& pd) {
  if (cfg.x0) return *cfg.x0;
  State x(pd.v.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<std::int64_t>(std::llround(100.0 * pd.v[i]));
  if (is_zero(x)) x[0] = 1;
  return x;
}

CommandOutput cmd_analyze(const RunConfig& cfg) {
  auto s = prepare(cfg);
  CommandOutput out{"analyze", header("analyze", cfg, s), {}};
  const auto crit = classify_criticality(s.pd, cfg.spectral.criticality_tol);
  out.report["contraction_factor"] =
      crit == Criticality::Critical
          ? json(contraction_factor(s.model->mean_matrix(), s.pd, cfg.spectral.criticality_tol))
          : json(nullptr);
  const auto rep = analyze_criterion(*s.model, s.pd, cfg.criterion.radii, sigma2_options(cfg),
                                     cfg.spectral.criticality_tol, cfg.criterion.stabilization_tol);
  out.report["criterion"] = report_json(rep);
  out.tables.emplace_back("ratio_samples.csv", ratio_samples_csv(rep));
  return out;
}

CommandOutput cmd_simulate(const RunConfig& cfg) {
  cfg.simulation.validate();
  auto s = prepare(cfg);
  CommandOutput out{"simulate", header("simulate", cfg, s), {}};
  const State x0 = resolve_x0(cfg, s.pd);
  const auto rep = run_ensemble(*s.model, s.pd, x0, cfg.simulation);
  out.report["ensemble"] = report_json(rep);
  // GWI in the critical case: E[Z_T u] = Z_0 u + T a u exactly.
  if (const auto* gwi = dynamic_cast<const GwiModel*>(s.model.get());
      gwi && classify_criticality(s.pd, cfg.spectral.criticality_tol) == Criticality::Critical) {
    const double au = dot(gwi->immigration_mean(), s.pd.u);
    out.report["ensemble"]["expected_final_u"] =
        rep.x0_u + static_cast<double>(cfg.simulation.horizon) * au;
  }
  out.tables.emplace_back("trajectories.csv", trajectories_csv(rep));
  return out;
}

CommandOutput cmd_lyapunov(const RunConfig& cfg) {
  auto s = prepare(cfg);
  CommandOutput out{"lyapunov", header("lyapunov", cfg, s), {}};
  const auto& ls = cfg.lyapunov;
  const auto grid = probe_grid(s.pd, ls.magnitudes, ls.off_ray, ls.perturbation);
  const auto lo = lyapunov_options(cfg, ls.samples);

  std::vector<ScanResult> scans;
  json jscans = json::array();
  for (const auto& name : ls.phi) {
    const Phi phi = name == "log" ? Phi::Log : Phi::InvLog;
    scans.push_back(scan_k(*s.model, s.pd, phi, grid, ls.k_max, lo));
    jscans.push_back(report_json(scans.back()));
  }
  out.report["scans"] = jscans;

  const auto est = estimate_c1_d1(*s.model, s.pd, cfg.criterion.radii, sigma2_options(cfg),
                                  cfg.criterion.stabilization_tol);
  const auto moments = moment_scan(*s.model, s.pd, grid, ls.moment_k, est.c1.value, est.d1.value, lo);
  out.report["moments"] = report_json(moments);

  const State x0 = resolve_x0(cfg, s.pd);
  out.report["transverse"] = {
      {"x0", x0},
      {"profile", report_json(transverse_profile(*s.model, s.pd, x0, ls.transverse_steps,
                                                 lyapunov_options(cfg, ls.transverse_samples)))}};
  if (classify_criticality(s.pd, cfg.spectral.criticality_tol) == Criticality::Critical)
    out.report["transverse"]["contraction_factor"] =
        contraction_factor(s.model->mean_matrix(), s.pd, cfg.spectral.criticality_tol);

  out.tables.emplace_back("gaps.csv", gaps_csv(scans));
  out.tables.emplace_back("moments.csv", moments_csv(moments));
  return out;
}

CommandOutput cmd_audit(const RunConfig& cfg) {
  auto s = prepare(cfg);
  CommandOutput out{"audit", header("audit", cfg, s), {}};
  out.report["audit"] = report_json(assumption_audit(
      *s.model, s.pd, cfg.lyapunov.magnitudes, lyapunov_options(cfg, cfg.lyapunov.audit_samples)));
  return out;
}

CommandOutput run_command(const std::string& name, const RunConfig& cfg) {
  if (name == "analyze") return cmd_analyze(cfg);
  if (name == "simulate") return cmd_simulate(cfg);
  if (name == "lyapunov") return cmd_lyapunov(cfg);
  if (name == "audit") return cmd_audit(cfg);
  throw ConfigError("", "unknown command '" + name + "'");
}

std::string dump_report(const json& j) { return j.dump(2) + "\n"; }

std::vector<std::string> write_outputs(const CommandOutput& out, const OutputSettings& settings) {
  namespace fs = std::filesystem;
  const fs::path dir(settings.dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("output.dir", "cannot create '" + settings.dir + "': " + ec.message());

  std::vector<std::string> written;
  auto write = [&](const std::string& name, const std::string& body) {
    const auto path = (dir / name).string();
    std::ofstream f(path, std::ios::binary);
    f << body;
    if (!f) throw ConfigError("output.dir", "cannot write '" + path + "'");
    written.push_back(path);
  };
  const bool json_on = settings.format == "json" || settings.format == "both";
  const bool csv_on = settings.format == "csv" || settings.format == "both";
  if (json_on) write(out.command + ".json", dump_report(out.report));
  if (csv_on)
    for (const auto& [name, body] : out.tables) write(name, body);
  return written;
}

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return err->exit_code();
  return 2;
}

json error_json(const std::exception& e) {
  json body = {{"message", e.what()}, {"exit_code", exit_code_for(e)}};
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    body["kind"] = err->kind();
    if (const auto* ce = dynamic_cast<const ConfigError*>(&e); ce && !ce->path().empty())
      body["path"] = ce->path();
    if (const auto* pe = dynamic_cast<const PerronConvergenceError*>(&e))
      body["last_iterate"] = report_json(pe->last_iterate());
  } else {
    body["kind"] = "internal";
  }
  return {{"error", body}};
}

}  // namespace critgrowth
