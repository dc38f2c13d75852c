#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "critgrowth/models.hpp"
#include "critgrowth/spectral.hpp"

namespace critgrowth {

enum class Criticality { Subcritical, Critical, Supercritical };
enum class GrowthClass { BoundedAS, UnboundedPositiveProb, Inconclusive };
enum class GwiClass { Recurrent, Transient, Inconclusive };

std::string to_string(Criticality c);
std::string to_string(GrowthClass c);
std::string to_string(GwiClass c);

inline constexpr double kCriticalityTol = 1e-9;

Criticality classify_criticality(const PerronData& pd, double tol = kCriticalityTol);

/// How sigma^2 is obtained when estimating the criterion.
struct Sigma2Options {
  /// Force the one-step Monte Carlo estimate even where a closed form exists.
  bool force_monte_carlo = false;
  std::int64_t samples = 100000;
  std::uint64_t seed = 0;
};

struct Sigma2Value {
  double value = 0.0;
  double std_error = 0.0;
  bool estimated = false;
};

/// sigma^2 at x: the model's closed form when it has one, otherwise the
/// variance of X_1 u over `samples` one-step draws from round(x).
Sigma2Value sigma2_at(const Model& m, std::span<const double> x, const PerronData& pd,
                      const Sigma2Options& opts = {}, std::uint64_t stream = 0);

/// 2 r (g(rv) u) / sigma^2(rv). Throws DegenerateVarianceError when sigma^2
/// vanishes and PreconditionError when the mean matrix is not critical.
double growth_ratio(const Model& m, const PerronData& pd, double r, const Sigma2Options& opts = {});

struct Estimate {
  double value = 0.0;
  double uncertainty = 0.0;
};

struct RadiusSample {
  double r = 0.0;
  double xu = 0.0;      // (rv) u, after rounding when sigma^2 was sampled
  double gu = 0.0;      // g(rv) u
  double sigma2 = 0.0;  // sigma^2(rv)
  double sigma2_se = 0.0;
  double c1 = 0.0;      // g(rv)u / (rv u)^alpha
  double d1 = 0.0;      // sigma^2(rv) / (rv u)^(1+alpha)
  /// Secant of sigma^2 against (rv u)^(1+alpha) from the previous radius;
  /// cancels constant residuals such as the immigration variance.
  double d1_secant = 0.0;
  double ratio = 0.0;   // 2 r g(rv)u / sigma^2(rv)
};

struct C1D1Estimate {
  Estimate c1;
  Estimate d1;
  std::vector<RadiusSample> samples;
  bool non_stabilizing = false;
  bool sigma2_estimated = false;
  double alpha = 0.0;
};

inline const std::vector<double> kDefaultRadii{1e2, 1e3, 1e4, 1e5, 1e6};
/// Relative last-three spread above which an estimate is NonStabilizing.
inline constexpr double kStabilizationTol = 0.25;

/// Fits c1 and d1 of (A1) along the ray r v over an increasing radii schedule.
/// c1 is read at the last radius, d1 from the last secant; each uncertainty is
/// the spread over the last three radii plus two standard errors of any Monte
/// Carlo sigma^2.
C1D1Estimate estimate_c1_d1(const Model& m, const PerronData& pd,
                            const std::vector<double>& radii = kDefaultRadii,
                            const Sigma2Options& opts = {},
                            double stabilization_tol = kStabilizationTol);

/// Theorem dichotomy: BoundedAS iff d1 - 2 c1 exceeds the combined
/// uncertainty, UnboundedPositiveProb iff 2 c1 - d1 does; otherwise (and
/// whenever the estimate did not stabilize) Inconclusive.
GrowthClass classify_growth(const Estimate& c1, const Estimate& d1, bool non_stabilizing = false);
GrowthClass classify_growth(const C1D1Estimate& est);

struct GwiVerdict {
  double two_au = 0.0;  // 2 a u
  double uvu = 0.0;     // u' V(v) u
  GwiClass verdict = GwiClass::Inconclusive;
};

/// Closed-form recurrence/transience comparison of 2 a u against u' V(v) u;
/// Inconclusive when they agree within 1e-12.
GwiVerdict classify_gwi(const GwiModel& m, const PerronData& pd);

/// p' b1 / (1 - p + p') + (1 - p) b2 / (1 - p + p').
double cell_division_threshold(double p, double p_prime, double b1, double b2);

struct CriterionReport {
  double rho = 0.0;
  Criticality criticality = Criticality::Critical;
  double alpha = 0.0;
  Estimate c1;
  Estimate d1;
  std::vector<RadiusSample> ratio_samples;
  GrowthClass classification = GrowthClass::Inconclusive;
  /// |2 c1 / d1 - 1|
  double margin = 0.0;
  bool non_stabilizing = false;
  bool sigma2_estimated = false;
  std::optional<GwiVerdict> gwi;
  std::optional<double> cell_division_threshold;
  std::vector<std::string> notes;
};

/// Full criterion pipeline. Non-critical models get criticality only, with
/// classification Inconclusive and a note.
CriterionReport analyze_criterion(const Model& m, const PerronData& pd,
                                  const std::vector<double>& radii = kDefaultRadii,
                                  const Sigma2Options& opts = {},
                                  double crit_tol = kCriticalityTol,
                                  double stabilization_tol = kStabilizationTol);

}  // namespace critgrowth
