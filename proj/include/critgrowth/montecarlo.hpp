#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "critgrowth/models.hpp"
#include "critgrowth/spectral.hpp"

namespace critgrowth {

struct SimConfig {
  std::int64_t horizon = 1000;
  std::int64_t n_traj = 1000;
  std::uint64_t seed = 0;
  /// return level s
  double lower = 50.0;
  /// growth threshold R
  double upper = 1e4;
  /// defaults to horizon / 10
  std::optional<std::int64_t> burn_in;
  std::int64_t ceiling = kDefaultPopulationCeiling;
  /// Mixed verdict when more than this fraction ends strictly between s and R
  double mixed_max_fraction = 0.05;
  /// GrowthObserved needs at least this growth-proxy fraction
  double growth_min_fraction = 0.01;
  /// 0 = hardware concurrency
  unsigned threads = 0;

  std::int64_t resolved_burn_in() const { return burn_in.value_or(horizon / 10); }
  /// Throws ConfigError naming the offending field.
  void validate() const;

  bool operator==(const SimConfig&) const = default;
};

struct TrajectorySummary {
  std::int64_t index = 0;
  State final_state;
  double final_u = 0.0;
  /// extrema of X_t u over burn_in < t <= generations
  double min_u_post = 0.0;
  double max_u_post = 0.0;
  /// number of t > burn_in with X_{t-1} u > s and X_t u <= s
  std::int64_t returns_below_s = 0;
  std::optional<std::int64_t> absorption_time;
  /// the absorbing state reproduced itself when stepped once more
  bool stayed_absorbed = true;
  bool ceiling_crossed = false;
  bool overflow = false;
  /// generations actually simulated (< horizon when truncated or absorbed)
  std::int64_t generations = 0;
  /// X_t u at t = T/4, T/2, T (held at the last value after truncation)
  std::array<double, 3> checkpoints{};
  bool growth_proxy = false;
};

/// One trajectory from x0 on the counter-based stream (seed, traj_index).
TrajectorySummary simulate_trajectory(const Model& m, const PerronData& pd, const State& x0,
                                      const SimConfig& cfg, std::int64_t traj_index);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct Fraction {
  std::int64_t count = 0;
  std::int64_t total = 0;
  double value = 0.0;
  Interval wilson;  // 95%
};

Fraction wilson_fraction(std::int64_t count, std::int64_t total, double z = 1.959963984540054);

enum class Dichotomy { ExtinctOrBounded, GrowthObserved, Mixed };
std::string to_string(Dichotomy d);

struct Checkpoint {
  std::int64_t t = 0;
  double mean_u = 0.0;
  double se = 0.0;
};

struct HistogramBin {
  std::int64_t lo = 0;  // inclusive
  std::int64_t hi = 0;  // exclusive
  std::int64_t count = 0;
};

struct EnsembleReport {
  SimConfig config;
  std::int64_t burn_in = 0;
  State x0;
  double x0_u = 0.0;
  bool absorbing = false;
  std::optional<Fraction> survival;
  std::optional<Fraction> extinction;
  Fraction growth;
  /// X_T u <= s
  Fraction below_lower;
  /// s < X_T u <= R
  Fraction between;
  double mean_final_u = 0.0;
  double se_final_u = 0.0;
  std::vector<Checkpoint> checkpoints;
  double median_returns = 0.0;
  std::vector<HistogramBin> absorption_histogram;
  std::int64_t overflow_count = 0;
  std::int64_t ceiling_count = 0;
  std::int64_t absorbed_violations = 0;
  Dichotomy verdict = Dichotomy::ExtinctOrBounded;
  std::vector<TrajectorySummary> trajectories;
};

/// n_traj independent trajectories; deterministic given (model, x0, cfg).
EnsembleReport run_ensemble(const Model& m, const PerronData& pd, const State& x0,
                            const SimConfig& cfg);

/// Finite-horizon reading of the growth dichotomy from an assembled ensemble.
Dichotomy dichotomy_probe(const EnsembleReport& rep);

}  // namespace critgrowth
