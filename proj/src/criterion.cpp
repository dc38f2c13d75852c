#include "critgrowth/criterion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "critgrowth/errors.hpp"

namespace critgrowth {

std::string to_string(Criticality c) {
  switch (c) {
    case Criticality::Subcritical: return "Subcritical";
    case Criticality::Critical: return "Critical";
    case Criticality::Supercritical: return "Supercritical";
  }
  return "?";
}

std::string to_string(GrowthClass c) {
  switch (c) {
    case GrowthClass::BoundedAS: return "BoundedAS";
    case GrowthClass::UnboundedPositiveProb: return "UnboundedPositiveProb";
    case GrowthClass::Inconclusive: return "Inconclusive";
  }
  return "?";
}

std::string to_string(GwiClass c) {
  switch (c) {
    case GwiClass::Recurrent: return "Recurrent";
    case GwiClass::Transient: return "Transient";
    case GwiClass::Inconclusive: return "Inconclusive";
  }
  return "?";
}

Criticality classify_criticality(const PerronData& pd, double tol) {
  if (pd.rho < 1.0 - tol) return Criticality::Subcritical;
  if (pd.rho > 1.0 + tol) return Criticality::Supercritical;
  return Criticality::Critical;
}

Sigma2Value sigma2_at(const Model& m, std::span<const double> x, const PerronData& pd,
                      const Sigma2Options& opts, std::uint64_t stream) {
  if (!opts.force_monte_carlo) {
    if (auto s = m.sigma2(x, pd.u)) return {*s, 0.0, false};
  }
  if (opts.samples < 2) throw PreconditionError("sigma2 Monte Carlo needs at least 2 samples");
  State z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    z[i] = static_cast<std::int64_t>(std::llround(std::max(0.0, x[i])));
  const Vec zr = to_real(z);
  const double mean_u = dot(m.one_step_mean(zr), pd.u);
  Philox rng(opts.seed, stream_id(stream_tag::kSigma2, stream));
  State next(z.size());
  StepInfo info;
  // squared deviations from the known conditional mean
  double sum = 0.0, sum_sq = 0.0;
  for (std::int64_t k = 0; k < opts.samples; ++k) {
    m.step_into(z, rng, next, info);
    const double dev = dot(next, pd.u) - mean_u;
    const double q = dev * dev;
    sum += q;
    sum_sq += q * q;
  }
  const double n = static_cast<double>(opts.samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq / n - mean * mean)) * n / (n - 1.0);
  return {mean, std::sqrt(var / n), true};
}

namespace {

void require_critical(const PerronData& pd, const char* who) {
  if (classify_criticality(pd) != Criticality::Critical) {
    std::ostringstream os;
    os << who << ": model is not critical (rho = " << pd.rho << ")";
    throw PreconditionError(os.str());
  }
}

Vec ray_point(const PerronData& pd, double r) {
  Vec x = pd.v;
  for (double& c : x) c *= r;
  return x;
}

RadiusSample sample_radius(const Model& m, const PerronData& pd, double r,
                           const Sigma2Options& opts, std::uint64_t stream, bool& estimated) {
  RadiusSample s;
  s.r = r;
  Vec x = ray_point(pd, r);
  Sigma2Value sv = sigma2_at(m, x, pd, opts, stream);
  if (sv.estimated) {
    // g is evaluated where sigma^2 was sampled, at the rounded state
    for (double& c : x) c = std::round(c);
    estimated = true;
  }
  s.gu = dot(m.drift(x), pd.u);
  s.sigma2 = sv.value;
  s.sigma2_se = sv.std_error;
  const double xu = dot(x, pd.u);
  s.xu = xu;
  const double alpha = m.alpha();
  s.c1 = s.gu / std::pow(xu, alpha);
  s.d1 = s.sigma2 / std::pow(xu, 1.0 + alpha);
  s.ratio = s.sigma2 > 0.0 ? 2.0 * r * s.gu / s.sigma2 : std::numeric_limits<double>::infinity();
  return s;
}

}  // namespace

double growth_ratio(const Model& m, const PerronData& pd, double r, const Sigma2Options& opts) {
  require_critical(pd, "growth_ratio");
  if (!(r > 0.0)) throw PreconditionError("growth_ratio: r must be positive");
  bool estimated = false;
  RadiusSample s = sample_radius(m, pd, r, opts, 0, estimated);
  if (!(s.sigma2 > 0.0)) {
    std::ostringstream os;
    os << "growth_ratio: sigma^2(rv) = " << s.sigma2 << " at r = " << r
       << "; the criterion is undefined for a degenerate variance";
    throw DegenerateVarianceError(os.str());
  }
  return s.ratio;
}

C1D1Estimate estimate_c1_d1(const Model& m, const PerronData& pd, const std::vector<double>& radii,
                            const Sigma2Options& opts, double stabilization_tol) {
  require_critical(pd, "estimate_c1_d1");
  if (radii.size() < 3) throw PreconditionError("estimate_c1_d1: need at least three radii");
  for (std::size_t k = 0; k < radii.size(); ++k)
    if (!(radii[k] > 0.0) || (k > 0 && !(radii[k] > radii[k - 1])))
      throw PreconditionError("estimate_c1_d1: radii must be positive and increasing");
  const double alpha = m.alpha();
  if (!(alpha > -1.0 && alpha < 1.0)) throw PreconditionError("estimate_c1_d1: alpha must lie in (-1,1)");

  C1D1Estimate est;
  est.alpha = alpha;
  for (std::size_t k = 0; k < radii.size(); ++k)
    est.samples.push_back(sample_radius(m, pd, radii[k], opts, k, est.sigma2_estimated));

  const std::size_t n = est.samples.size();
  for (std::size_t k = 1; k < n; ++k) {
    auto& s = est.samples[k];
    const auto& prev = est.samples[k - 1];
    const double w = std::pow(s.xu, 1.0 + alpha) - std::pow(prev.xu, 1.0 + alpha);
    s.d1_secant = (s.sigma2 - prev.sigma2) / w;
  }
  est.samples.front().d1_secant = est.samples.front().d1;

  auto spread = [&](auto field) {
    double lo = field(est.samples[n - 3]), hi = lo;
    for (std::size_t k = n - 3; k < n; ++k) {
      lo = std::min(lo, field(est.samples[k]));
      hi = std::max(hi, field(est.samples[k]));
    }
    return hi - lo;
  };
  const RadiusSample& last = est.samples.back();
  est.c1 = {last.c1, spread([](const RadiusSample& s) { return s.c1; })};
  est.d1 = {last.d1_secant, spread([](const RadiusSample& s) { return s.d1_secant; })};
  double mc = 0.0;
  for (std::size_t k = n - 3; k < n; ++k) {
    const auto& s = est.samples[k];
    const auto& prev = est.samples[k - 1];
    const double w = std::pow(s.xu, 1.0 + alpha) - std::pow(prev.xu, 1.0 + alpha);
    mc = std::max(mc, 2.0 * (s.sigma2_se + prev.sigma2_se) / w);
  }
  est.d1.uncertainty += mc;

  auto unstable = [&](const Estimate& e) {
    return e.uncertainty > stabilization_tol * std::abs(e.value) && e.uncertainty > 1e-12;
  };
  est.non_stabilizing = unstable(est.c1) || unstable(est.d1);
  return est;
}

GrowthClass classify_growth(const Estimate& c1, const Estimate& d1, bool non_stabilizing) {
  if (non_stabilizing) return GrowthClass::Inconclusive;
  const double diff = 2.0 * c1.value - d1.value;
  const double combined =
      2.0 * c1.uncertainty + d1.uncertainty + 1e-12 * std::max(1.0, std::abs(d1.value));
  if (-diff > combined) return GrowthClass::BoundedAS;
  if (diff > combined) return GrowthClass::UnboundedPositiveProb;
  return GrowthClass::Inconclusive;
}

GrowthClass classify_growth(const C1D1Estimate& est) {
  return classify_growth(est.c1, est.d1, est.non_stabilizing);
}

GwiVerdict classify_gwi(const GwiModel& m, const PerronData& pd) {
  require_critical(pd, "classify_gwi");
  GwiVerdict g;
  g.two_au = 2.0 * dot(m.immigration_mean(), pd.u);
  g.uvu = m.dispersion_along(pd.v, pd.u);
  const double diff = g.two_au - g.uvu;
  if (std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(g.uvu)))
    g.verdict = GwiClass::Inconclusive;
  else
    g.verdict = diff < 0.0 ? GwiClass::Recurrent : GwiClass::Transient;
  return g;
}

double cell_division_threshold(double p, double p_prime, double b1, double b2) {
  if (!(p > 0.0 && p < 1.0) || !(p_prime > 0.0 && p_prime < 1.0))
    throw DomainError("cell_division_threshold: p and p' must lie in (0, 1)");
  if (!(b1 >= 0.0 && b1 <= 1.0) || !(b2 >= 0.0 && b2 <= 1.0))
    throw DomainError("cell_division_threshold: b1 and b2 must lie in [0, 1]");
  const double w = 1.0 - p + p_prime;
  return p_prime / w * b1 + (1.0 - p) / w * b2;
}

CriterionReport analyze_criterion(const Model& m, const PerronData& pd,
                                  const std::vector<double>& radii, const Sigma2Options& opts,
                                  double crit_tol, double stabilization_tol) {
  CriterionReport rep;
  rep.rho = pd.rho;
  rep.criticality = classify_criticality(pd, crit_tol);
  rep.alpha = m.alpha();
  if (rep.criticality != Criticality::Critical) {
    rep.notes.push_back("mean matrix is " + to_string(rep.criticality) +
                        "; the growth criterion applies to critical models only");
    return rep;
  }
  C1D1Estimate est = estimate_c1_d1(m, pd, radii, opts, stabilization_tol);
  rep.c1 = est.c1;
  rep.d1 = est.d1;
  rep.ratio_samples = est.samples;
  rep.non_stabilizing = est.non_stabilizing;
  rep.sigma2_estimated = est.sigma2_estimated;
  if (!(est.d1.value > 0.0)) {
    throw DegenerateVarianceError(
        "analyze: sigma^2 vanishes along the Perron ray; the criterion is undefined");
  }
  rep.classification = classify_growth(est);
  rep.margin = std::abs(2.0 * est.c1.value / est.d1.value - 1.0);
  if (est.non_stabilizing)
    rep.notes.push_back("NonStabilizing: last-three-radii spread exceeds the stabilization tolerance");
  if (est.sigma2_estimated)
    rep.notes.push_back("sigma^2 estimated by one-step Monte Carlo at rounded states");

  if (const auto* gwi = dynamic_cast<const GwiModel*>(&m)) rep.gwi = classify_gwi(*gwi, pd);
  if (const auto* cell = dynamic_cast<const CellDivisionModel*>(&m)) {
    const auto& q = cell->params();
    rep.cell_division_threshold = cell_division_threshold(q.p, q.p_prime, q.b1, q.b2);
    if (q.beta1 != 0.0 || q.beta2 != 0.0)
      rep.notes.push_back("b_i(z) = b_i + beta_i / (1 + |z|_1) is an implementation choice of vanishing perturbation");
  }
  return rep;
}

}  // namespace critgrowth
