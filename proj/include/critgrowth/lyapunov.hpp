#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "critgrowth/criterion.hpp"
#include "critgrowth/models.hpp"
#include "critgrowth/spectral.hpp"

namespace critgrowth {

/// Lyapunov functions of the u-projection: log y, and L(y) = 1 / log y.
enum class Phi { Log, InvLog };
enum class Verdict { Satisfied, Violated, Indeterminate };

std::string to_string(Phi p);
std::string to_string(Verdict v);

/// Satisfied iff gap + band*se <= 0, Violated iff gap - band*se >= 0.
Verdict verdict_from(double gap, double se, double band = 2.0);

struct GapRecord {
  State x;
  double xu = 0.0;
  int k = 0;
  /// mean of phi(X_{n+k} u) - phi(x u) over the evaluated samples
  double gap = 0.0;
  double se = 0.0;
  std::int64_t samples = 0;
  /// Log only: paths with X_{n+k} u = 0, excluded from the gap
  std::int64_t absorbed = 0;
  double absorption_fraction = 0.0;
  /// InvLog only: paths evaluated at X + 3v because X u < 3
  std::int64_t shifted = 0;
  Verdict verdict = Verdict::Indeterminate;
};

struct LyapunovOptions {
  std::int64_t samples = 100000;
  std::uint64_t seed = 0;
  double band = 2.0;
  unsigned threads = 0;
};

/// Monte Carlo estimate of E[phi(X_{n+k} u) | X_n = x] - phi(x u).
/// `state_index` selects the sub-stream family, so the same (x, index) pair
/// reproduces the record that scan_k computes for it.
GapRecord check_supermartingale(const Model& m, const PerronData& pd, Phi phi, const State& x,
                                int k, const LyapunovOptions& opts,
                                std::uint64_t state_index = 0);

struct ScanResult {
  Phi phi = Phi::Log;
  /// smallest k with Satisfied verdicts at every grid state
  std::optional<int> k;
  /// smallest grid u-projection (the implied s)
  double s = 0.0;
  int k_max = 0;
  /// history[k-1][j]: record at step k for grid state j
  std::vector<std::vector<GapRecord>> history;
};

/// Searches k = 1..k_max. Grid states must be sorted by u-projection.
ScanResult scan_k(const Model& m, const PerronData& pd, Phi phi, const std::vector<State>& grid,
                  int k_max, const LyapunovOptions& opts);

struct MomentRecord {
  State x;
  double xu = 0.0;
  /// |x (I - u v)|
  double y_norm = 0.0;
  int k = 0;
  double mean_delta = 0.0, se_mean_delta = 0.0;
  double mean_delta2 = 0.0, se_mean_delta2 = 0.0;
  double mean_abs_delta_2pd = 0.0, se_mean_abs_delta_2pd = 0.0;
  double ref_mean = 0.0;    // c1 k (x u)^alpha
  double ref_second = 0.0;  // k d1 (x u)^(1+alpha)
  /// |E[Delta] - ref_mean| / (x u)^alpha
  double resid_mean = 0.0;
  /// |E[Delta^2] - ref_second| / (x u)^(1+alpha)
  double resid_second = 0.0;
};

struct MomentScan {
  double c1 = 0.0;
  double d1 = 0.0;
  double alpha = 0.0;
  double delta = 1.0;
  std::vector<MomentRecord> records;
};

/// Delta_{n,k} = X_{n+k} u - X_n u moments per grid state for each k in ks.
MomentScan moment_scan(const Model& m, const PerronData& pd, const std::vector<State>& grid,
                       const std::vector<int>& ks, double c1, double d1,
                       const LyapunovOptions& opts);

struct TransversePoint {
  int step = 0;
  double mean_norm = 0.0;
  double se = 0.0;
};

/// Mean |Y_i| = |X_i (I - u v)| for i = 1..steps from x0.
std::vector<TransversePoint> transverse_profile(const Model& m, const PerronData& pd,
                                                const State& x0, int steps,
                                                const LyapunovOptions& opts);

/// Grid of probe states: round(r v) for every magnitude r, plus (optionally)
/// two off-ray states adding +-perturbation * r to the first coordinate.
/// Sorted by u-projection.
std::vector<State> probe_grid(const PerronData& pd, const std::vector<double>& magnitudes,
                              bool off_ray = true, double perturbation = 0.2);

struct A2Record {
  State x;
  double xu = 0.0;
  double ratio = 0.0;  // E|xi|^(2+delta) / sigma^(2+delta)
  double se = 0.0;
  double increase_fraction = 0.0;  // P(X_1 u > x u), (A3) proxy
};

struct AuditReport {
  double delta = 1.0;
  std::vector<A2Record> a2;
  double a2_max_ratio = 0.0;
  /// ratio at the largest magnitude exceeds twice the ratio at the smallest
  bool a2_growth_trend = false;
  bool a3_proxy_holds = false;
  struct Annulus {
    double lo = 0.0, hi = 0.0;
    double min_gu = 0.0;
  };
  std::vector<Annulus> a4;
  double a4_min = 0.0;
  bool a4_violated = false;
  struct Ball {
    double radius = 0.0;
    double max_sigma2 = 0.0;
    std::int64_t points = 0;
  };
  std::vector<Ball> a5;
  bool a5_finite = true;
  /// one-step sample mean of X_1 against x M + g(x), per coordinate
  struct MeanCheck {
    State x;
    double max_abs_z = 0.0;
  };
  std::vector<MeanCheck> mean_check;
  double mean_check_max_z = 0.0;
  std::vector<std::string> notes;
};

/// Empirical checks of the moment, positivity and finiteness assumptions,
/// plus the unboundedness proxy. Reports findings; never throws on a failed
/// check.
AuditReport assumption_audit(const Model& m, const PerronData& pd,
                             const std::vector<double>& magnitudes,
                             const LyapunovOptions& opts);

}  // namespace critgrowth
