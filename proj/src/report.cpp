#include "critgrowth/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace critgrowth {

using nlohmann::json;

namespace {

// NaN and infinities have no JSON literal; emit them as strings.
json num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

json nums(const std::vector<double>& xs) {
  json arr = json::array();
  for (double x : xs) arr.push_back(num(x));
  return arr;
}

json estimate_json(const Estimate& e) {
  return {{"value", num(e.value)}, {"uncertainty", num(e.uncertainty)}};
}

json fraction_json(const Fraction& f) {
  return {{"count", f.count},
          {"total", f.total},
          {"value", num(f.value)},
          {"wilson95", {num(f.wilson.lo), num(f.wilson.hi)}}};
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string state_str(const State& x) {
  std::string s;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(x[i]);
  }
  return s;
}

}  // namespace

json report_json(const PerronData& pd) {
  return {{"rho", num(pd.rho)},
          {"u", nums(pd.u)},
          {"v", nums(pd.v)},
          {"residual", num(pd.residual)},
          {"iterations", pd.iterations}};
}

json report_json(const CriterionReport& rep) {
  json j = {{"rho", num(rep.rho)},
            {"criticality", to_string(rep.criticality)},
            {"alpha", num(rep.alpha)},
            {"c1", estimate_json(rep.c1)},
            {"d1", estimate_json(rep.d1)},
            {"classification", to_string(rep.classification)},
            {"margin", num(rep.margin)},
            {"non_stabilizing", rep.non_stabilizing},
            {"sigma2_estimated", rep.sigma2_estimated},
            {"notes", rep.notes}};
  json samples = json::array();
  for (const auto& s : rep.ratio_samples)
    samples.push_back({{"r", num(s.r)},
                       {"xu", num(s.xu)},
                       {"gu", num(s.gu)},
                       {"sigma2", num(s.sigma2)},
                       {"sigma2_se", num(s.sigma2_se)},
                       {"c1", num(s.c1)},
                       {"d1", num(s.d1)},
                       {"d1_secant", num(s.d1_secant)},
                       {"ratio", num(s.ratio)}});
  j["ratio_samples"] = samples;
  if (rep.gwi)
    j["gwi"] = {{"two_au", num(rep.gwi->two_au)},
                {"uVu", num(rep.gwi->uvu)},
                {"verdict", to_string(rep.gwi->verdict)}};
  if (rep.cell_division_threshold) j["cell_division_threshold"] = num(*rep.cell_division_threshold);
  return j;
}

json report_json(const EnsembleReport& rep) {
  const auto& c = rep.config;
  json cfg = {{"horizon", c.horizon},
              {"n_traj", c.n_traj},
              {"seed", c.seed},
              {"s", num(c.lower)},
              {"R", num(c.upper)},
              {"burn_in", rep.burn_in},
              {"ceiling", c.ceiling},
              {"mixed_max_fraction", num(c.mixed_max_fraction)},
              {"growth_min_fraction", num(c.growth_min_fraction)}};
  json j = {{"settings", cfg},
            {"x0", rep.x0},
            {"x0_u", num(rep.x0_u)},
            {"absorbing", rep.absorbing},
            {"growth", fraction_json(rep.growth)},
            {"below_s", fraction_json(rep.below_lower)},
            {"between_s_and_R", fraction_json(rep.between)},
            {"mean_final_u", num(rep.mean_final_u)},
            {"se_final_u", num(rep.se_final_u)},
            {"median_returns_below_s", num(rep.median_returns)},
            {"overflow_count", rep.overflow_count},
            {"ceiling_count", rep.ceiling_count},
            {"absorbed_violations", rep.absorbed_violations},
            {"verdict", to_string(rep.verdict)},
            {"growth_proxy", "X_T u > R and X_t u > s for every burn_in < t <= T; "
                             "trajectories stopped at the population ceiling count as growth"}};
  if (rep.verdict == Dichotomy::Mixed)
    j["advice"] = "more than mixed_max_fraction of the trajectories end between s and R; "
                  "increase the horizon";
  j["survival"] = rep.survival ? fraction_json(*rep.survival) : json(nullptr);
  j["extinction"] = rep.extinction ? fraction_json(*rep.extinction) : json(nullptr);
  json cps = json::array();
  for (const auto& cp : rep.checkpoints)
    cps.push_back({{"t", cp.t}, {"mean_u", num(cp.mean_u)}, {"se", num(cp.se)}});
  j["checkpoints"] = cps;
  json hist = json::array();
  for (const auto& b : rep.absorption_histogram)
    hist.push_back({{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}});
  j["absorption_histogram"] = hist;
  return j;
}

json report_json(const GapRecord& r) {
  return {{"x", r.x},
          {"xu", num(r.xu)},
          {"k", r.k},
          {"gap", num(r.gap)},
          {"se", num(r.se)},
          {"samples", r.samples},
          {"absorbed", r.absorbed},
          {"absorption_fraction", num(r.absorption_fraction)},
          {"shifted", r.shifted},
          {"verdict", to_string(r.verdict)}};
}

json report_json(const ScanResult& scan) {
  json j = {{"phi", to_string(scan.phi)},
            {"k", scan.k ? json(*scan.k) : json(nullptr)},
            {"s", num(scan.s)},
            {"k_max", scan.k_max},
            {"steps_evaluated", scan.history.size()}};
  json recs = json::array();
  if (!scan.history.empty()) {
    const auto& row = scan.k ? scan.history[static_cast<std::size_t>(*scan.k - 1)] : scan.history.back();
    for (const auto& r : row) recs.push_back(report_json(r));
  }
  j["records"] = recs;
  return j;
}

json report_json(const MomentScan& scan) {
  json j = {{"c1", num(scan.c1)}, {"d1", num(scan.d1)}, {"alpha", num(scan.alpha)}, {"delta", num(scan.delta)}};
  json recs = json::array();
  for (const auto& r : scan.records)
    recs.push_back({{"x", r.x},
                    {"xu", num(r.xu)},
                    {"y_norm", num(r.y_norm)},
                    {"k", r.k},
                    {"mean_delta", num(r.mean_delta)},
                    {"se_mean_delta", num(r.se_mean_delta)},
                    {"mean_delta2", num(r.mean_delta2)},
                    {"se_mean_delta2", num(r.se_mean_delta2)},
                    {"mean_abs_delta_2pd", num(r.mean_abs_delta_2pd)},
                    {"se_mean_abs_delta_2pd", num(r.se_mean_abs_delta_2pd)},
                    {"ref_mean", num(r.ref_mean)},
                    {"ref_second", num(r.ref_second)},
                    {"resid_mean", num(r.resid_mean)},
                    {"resid_second", num(r.resid_second)}});
  j["records"] = recs;
  return j;
}

json report_json(const std::vector<TransversePoint>& profile) {
  json arr = json::array();
  for (const auto& p : profile)
    arr.push_back({{"step", p.step}, {"mean_norm", num(p.mean_norm)}, {"se", num(p.se)}});
  return arr;
}

json report_json(const AuditReport& rep) {
  json a2 = json::array();
  for (const auto& r : rep.a2)
    a2.push_back({{"x", r.x},
                  {"xu", num(r.xu)},
                  {"ratio", num(r.ratio)},
                  {"se", num(r.se)},
                  {"increase_fraction", num(r.increase_fraction)}});
  json a4 = json::array();
  for (const auto& a : rep.a4) a4.push_back({{"lo", num(a.lo)}, {"hi", num(a.hi)}, {"min_gu", num(a.min_gu)}});
  json a5 = json::array();
  for (const auto& b : rep.a5)
    a5.push_back({{"radius", num(b.radius)}, {"max_sigma2", num(b.max_sigma2)}, {"points", b.points}});
  json mc = json::array();
  for (const auto& m : rep.mean_check) mc.push_back({{"x", m.x}, {"max_abs_z", num(m.max_abs_z)}});
  return {{"delta", num(rep.delta)},
          {"A2", {{"records", a2}, {"max_ratio", num(rep.a2_max_ratio)}, {"growth_trend", rep.a2_growth_trend}}},
          {"A3_proxy_holds", rep.a3_proxy_holds},
          {"A4", {{"annuli", a4}, {"min_gu", num(rep.a4_min)}, {"violated", rep.a4_violated}}},
          {"A5", {{"balls", a5}, {"finite", rep.a5_finite}}},
          {"step_mean", {{"records", mc}, {"max_abs_z", num(rep.mean_check_max_z)}}},
          {"notes", rep.notes}};
}

std::string ratio_samples_csv(const CriterionReport& rep) {
  std::ostringstream os;
  os << "r,xu,gu,sigma2,sigma2_se,c1,d1,d1_secant,ratio\n";
  for (const auto& s : rep.ratio_samples)
    os << fmt(s.r) << ',' << fmt(s.xu) << ',' << fmt(s.gu) << ',' << fmt(s.sigma2) << ','
       << fmt(s.sigma2_se) << ',' << fmt(s.c1) << ',' << fmt(s.d1) << ',' << fmt(s.d1_secant)
       << ',' << fmt(s.ratio) << '\n';
  return os.str();
}

std::string trajectories_csv(const EnsembleReport& rep) {
  std::ostringstream os;
  os << "index,final_state,final_u,min_u_post,max_u_post,returns_below_s,absorption_time,"
        "ceiling_crossed,overflow,generations,u_T4,u_T2,u_T,growth_proxy\n";
  for (const auto& t : rep.trajectories)
    os << t.index << ',' << state_str(t.final_state) << ',' << fmt(t.final_u) << ','
       << fmt(t.min_u_post) << ',' << fmt(t.max_u_post) << ',' << t.returns_below_s << ','
       << (t.absorption_time ? std::to_string(*t.absorption_time) : "") << ','
       << int(t.ceiling_crossed) << ',' << int(t.overflow) << ',' << t.generations << ','
       << fmt(t.checkpoints[0]) << ',' << fmt(t.checkpoints[1]) << ',' << fmt(t.checkpoints[2])
       << ',' << int(t.growth_proxy) << '\n';
  return os.str();
}

std::string gaps_csv(const std::vector<ScanResult>& scans) {
  std::ostringstream os;
  os << "phi,k,x,xu,gap,se,samples,absorbed,shifted,verdict\n";
  for (const auto& scan : scans)
    for (const auto& row : scan.history)
      for (const auto& r : row)
        os << to_string(scan.phi) << ',' << r.k << ',' << state_str(r.x) << ',' << fmt(r.xu)
           << ',' << fmt(r.gap) << ',' << fmt(r.se) << ',' << r.samples << ',' << r.absorbed
           << ',' << r.shifted << ',' << to_string(r.verdict) << '\n';
  return os.str();
}

std::string moments_csv(const MomentScan& scan) {
  std::ostringstream os;
  os << "x,xu,y_norm,k,mean_delta,se_mean_delta,mean_delta2,se_mean_delta2,"
        "mean_abs_delta_2pd,se_mean_abs_delta_2pd,ref_mean,ref_second,resid_mean,resid_second\n";
  for (const auto& r : scan.records)
    os << state_str(r.x) << ',' << fmt(r.xu) << ',' << fmt(r.y_norm) << ',' << r.k << ','
       << fmt(r.mean_delta) << ',' << fmt(r.se_mean_delta) << ',' << fmt(r.mean_delta2) << ','
       << fmt(r.se_mean_delta2) << ',' << fmt(r.mean_abs_delta_2pd) << ','
       << fmt(r.se_mean_abs_delta_2pd) << ',' << fmt(r.ref_mean) << ',' << fmt(r.ref_second)
       << ',' << fmt(r.resid_mean) << ',' << fmt(r.resid_second) << '\n';
  return os.str();
}

}  // namespace critgrowth
