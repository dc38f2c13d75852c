// Acceptance run: one PASS/FAIL line per criterion. Exit status 0 iff all pass.
//   acceptance [N ...]   run only the listed criteria
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "critgrowth/commands.hpp"
#include "critgrowth/config.hpp"
#include "critgrowth/criterion.hpp"
#include "critgrowth/lyapunov.hpp"
#include "critgrowth/montecarlo.hpp"
#include "critgrowth/spectral.hpp"

using namespace critgrowth;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string config_path(const std::string& name) {
  return std::string(CRITGROWTH_CONFIG_DIR) + "/" + name + ".json";
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Outcome eigendata() {
  const NonNegMatrix m({{0.3, 0.7}, {0.6, 0.4}});
  const auto pd = perron(m);
  const double r = 1.0 / std::sqrt(2.0);
  const double s2 = std::sqrt(2.0);
  double err = std::abs(pd.rho - 1.0);
  err = std::max({err, std::abs(pd.u[0] - r), std::abs(pd.u[1] - r)});
  err = std::max({err, std::abs(pd.v[0] - s2 * 6.0 / 13.0), std::abs(pd.v[1] - s2 * 7.0 / 13.0)});
  const double norm_err = std::max(std::abs(dot(pd.v, pd.u) - 1.0), std::abs(dot(pd.u, pd.u) - 1.0));
  return {err <= 1e-10 && norm_err <= 1e-12,
          "max eigendata error " + fmt("%.2e", err) + ", normalization error " + fmt("%.2e", norm_err)};
}

Outcome contraction() {
  const NonNegMatrix m({{0.3, 0.7}, {0.6, 0.4}});
  const double lambda = contraction_factor(m, perron(m));
  // 2x2 stochastic oracle: the second eigenvalue is p - p'
  const double oracle = std::abs(0.3 - 0.6);
  std::mt19937_64 gen(12345);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int below_one = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + trial % 3;
    std::vector<double> a(d * d);
    for (auto& x : a) x = unif(gen) < 0.2 ? 0.0 : unif(gen);
    for (std::size_t i = 0; i < d; ++i) a[i * d + (i + 1) % d] += 0.1;  // cycle
    a[0] += 0.1;                                                       // aperiodic
    NonNegMatrix raw(d, a);
    const auto scaled = raw.scaled(1.0 / perron(raw).rho);
    const double l = contraction_factor(scaled, perron(scaled));
    worst = std::max(worst, l);
    if (l < 1.0) ++below_one;
  }
  return {std::abs(lambda - oracle) <= 1e-8 && below_one == 100,
          "lambda = " + fmt("%.12f", lambda) + ", random critical matrices below 1: " +
              std::to_string(below_one) + "/100 (max " + fmt("%.4f", worst) + ")"};
}

Outcome threshold_grid() {
  const std::vector<double> ps{0.3, 0.4, 0.5, 0.6, 0.7};
  const std::vector<double> bs{0.05, 0.1, 0.15, 0.2, 0.25};
  const std::vector<double> cs{0.02, 0.1, 0.2, 0.3, 0.45};
  int agree = 0, total = 0, excluded = 0;
  for (double p : ps)
    for (double b : bs)
      for (double c : cs) {
        const double t = cell_division_threshold(p, p, b, b);
        if (std::abs(c - t) < 0.05) {
          ++excluded;
          continue;
        }
        CellDivisionParams q;
        q.p = q.p_prime = p;
        q.b1 = q.b2 = b;
        q.c1 = q.c2 = 0.5 * c;
        const CellDivisionModel m(q);
        const auto pd = perron(m.mean_matrix());
        const auto est = estimate_c1_d1(m, pd);
        const auto cls = classify_growth(est);
        const auto expected = c > t ? GrowthClass::UnboundedPositiveProb : GrowthClass::BoundedAS;
        ++total;
        if (cls == expected) ++agree;
      }
  return {agree == total && total > 0,
          std::to_string(agree) + "/" + std::to_string(total) + " cells agree (" +
              std::to_string(excluded) + " excluded near the threshold)"};
}

Outcome gwi_mean() {
  auto cfg = parse_config(config_path("gwi_recurrent"));
  const auto m = build_model(cfg);
  const auto pd = perron(m->mean_matrix());
  auto sim = cfg.simulation;
  sim.horizon = 500;
  sim.n_traj = 10000;
  const State x0 = resolve_x0(cfg, pd);
  const auto rep = run_ensemble(*m, pd, x0, sim);
  const auto& gwi = dynamic_cast<const GwiModel&>(*m);
  const double expected = dot(x0, pd.u) + 500.0 * dot(gwi.immigration_mean(), pd.u);
  const double z = (rep.mean_final_u - expected) / rep.se_final_u;
  return {std::abs(z) <= 4.0, "mean X_T u = " + fmt("%.4f", rep.mean_final_u) + ", expected " +
                                  fmt("%.4f", expected) + ", z = " + fmt("%.2f", z)};
}

EnsembleReport desk_run(const std::string& name) {
  auto cfg = parse_config(config_path(name));
  const auto m = build_model(cfg);
  const auto pd = perron(m->mean_matrix());
  auto sim = cfg.simulation;
  sim.horizon = 10000;
  sim.n_traj = 10000;
  return run_ensemble(*m, pd, resolve_x0(cfg, pd), sim);
}

Outcome dichotomy() {
  const auto ext = desk_run("cell_division_extinct");
  const auto sur = desk_run("cell_division_survive");
  return {ext.growth.value < 0.01 && sur.growth.value > 0.05,
          "growth fraction extinct " + fmt("%.4f", ext.growth.value) + " (< 0.01), survive " +
              fmt("%.4f", sur.growth.value) + " (> 0.05)"};
}

Outcome recurrence_contrast() {
  const auto rec = parse_config(config_path("gwi_recurrent"));
  const auto tra = parse_config(config_path("gwi_transient"));
  const auto mr = build_model(rec), mt = build_model(tra);
  const auto pr = perron(mr->mean_matrix()), pt = perron(mt->mean_matrix());
  const auto& gr = dynamic_cast<const GwiModel&>(*mr);
  const auto& gt = dynamic_cast<const GwiModel&>(*mt);
  const auto vr = classify_gwi(gr, pr), vt = classify_gwi(gt, pt);
  bool ok = vr.verdict == GwiClass::Recurrent && vt.verdict == GwiClass::Transient;
  std::ostringstream os;
  os << "median returns (recurrent vs transient):";
  for (std::uint64_t k = 0; k < 5; ++k) {
    auto sim = rec.simulation;
    sim.horizon = 10000;
    sim.n_traj = 200;
    sim.lower = 50.0;
    sim.seed = rec.simulation.seed + k;
    const auto a = run_ensemble(*mr, pr, resolve_x0(rec, pr), sim);
    const auto b = run_ensemble(*mt, pt, resolve_x0(tra, pt), sim);
    os << ' ' << a.median_returns << '/' << b.median_returns;
    if (!(a.median_returns > b.median_returns)) ok = false;
  }
  return {ok, os.str()};
}

Outcome lyapunov_scans() {
  struct Case {
    const char* config;
    Phi phi;
    int pinned_k;
  };
  bool ok = true;
  std::ostringstream os;
  for (const Case c : {Case{"cell_division_survive", Phi::InvLog, 7},
                       Case{"cell_division_extinct", Phi::Log, 25}}) {
    const auto cfg = parse_config(config_path(c.config));
    const auto m = build_model(cfg);
    const auto pd = perron(m->mean_matrix());
    LyapunovOptions opts;
    opts.samples = cfg.lyapunov.samples;
    opts.seed = cfg.simulation.seed;
    opts.band = 2.0;
    const auto grid = probe_grid(pd, {1e2, 1e3, 1e4}, cfg.lyapunov.off_ray, cfg.lyapunov.perturbation);
    const auto scan = scan_k(*m, pd, c.phi, grid, 64, opts);
    const bool found = scan.k.has_value();
    os << c.config << ' ' << to_string(c.phi) << ": k = " << (found ? std::to_string(*scan.k) : "none")
       << " (pinned " << c.pinned_k << "); ";
    if (!found || *scan.k != c.pinned_k) ok = false;
  }
  return {ok, os.str()};
}

// Exact E[log X_1] for one type, offspring {0,1,2} and immigration {0,1}.
double enumerated_log_mean(const std::vector<double>& off, const std::vector<double>& imm, int x) {
  std::vector<double> dist{1.0};
  auto conv = [](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
  };
  for (int i = 0; i < x; ++i) dist = conv(dist, off);
  dist = conv(dist, imm);
  double num = 0.0, mass = 0.0;
  for (std::size_t j = 1; j < dist.size(); ++j) {
    num += dist[j] * std::log(static_cast<double>(j));
    mass += dist[j];
  }
  return num / mass;
}

Outcome brute_force() {
  const std::vector<double> off{0.25, 0.5, 0.25};
  const std::vector<double> imm{0.8, 0.2};
  const GwiModel m({OffspringLaw({{0}, {1}, {2}}, off)}, OffspringLaw({{0}, {1}}, imm));
  const auto pd = perron(m.mean_matrix());
  LyapunovOptions opts;
  opts.samples = 200000;
  opts.seed = 20240917;
  const auto rec = check_supermartingale(m, pd, Phi::Log, State{20}, 1, opts);
  const double exact = enumerated_log_mean(off, imm, 20) - std::log(20.0);
  const bool mc_ok = std::abs(rec.gap - exact) <= 3.0 * rec.se;

  // scalar criterion: 2a against the offspring variance
  bool cls_ok = true;
  const double var = 0.5 * 1 + 0.25 * 4 - 1.0;
  for (double a : {0.1, 0.2, 0.25, 0.3, 0.6}) {
    const GwiModel g({OffspringLaw({{0}, {1}, {2}}, off)}, OffspringLaw({{0}, {1}}, {1.0 - a, a}));
    const auto v = classify_gwi(g, perron(g.mean_matrix()));
    const GwiClass expect = 2 * a < var   ? GwiClass::Recurrent
                            : 2 * a > var ? GwiClass::Transient
                                          : GwiClass::Inconclusive;
    if (v.verdict != expect) cls_ok = false;
  }
  return {mc_ok && cls_ok, "MC gap " + fmt("%.6f", rec.gap) + " vs exact " + fmt("%.6f", exact) +
                               " (se " + fmt("%.2e", rec.se) + "), classify_gwi " +
                               (cls_ok ? "matches" : "differs")};
}

Outcome reproducibility() {
  bool ok = true;
  std::ostringstream os;
  for (const char* name : {"gwi_recurrent", "cell_division_survive"}) {
    auto cfg = parse_config(config_path(name));
    cfg.simulation.horizon = 300;
    cfg.simulation.n_traj = 100;
    cfg.lyapunov.samples = 2000;
    cfg.lyapunov.k_max = 4;
    cfg.lyapunov.transverse_samples = 500;
    cfg.lyapunov.audit_samples = 1000;
    for (const char* cmd : {"analyze", "simulate", "lyapunov", "audit"}) {
      const auto a = run_command(cmd, cfg);
      const auto b = run_command(cmd, cfg);
      const bool same = dump_report(a.report) == dump_report(b.report) && a.tables == b.tables;
      if (!same) {
        ok = false;
        os << name << '/' << cmd << " differs; ";
      }
    }
  }
  return {ok, ok ? "all four commands byte-identical on two configs" : os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, eigendata},   {2, contraction},         {3, threshold_grid},
      {4, gwi_mean},    {5, dichotomy},           {6, recurrence_contrast},
      {7, lyapunov_scans}, {8, brute_force},      {9, reproducibility}};
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& [n, fn] : criteria) {
    if (!only.empty() && !only.count(n)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", n, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
