#include "critgrowth/montecarlo.hpp"

#include <algorithm>
#include <cmath>

#include "critgrowth/errors.hpp"
#include "critgrowth/parallel.hpp"

namespace critgrowth {

void SimConfig::validate() const {
  if (horizon <= 0) throw ConfigError("simulation.horizon", "must be a positive integer");
  if (n_traj <= 0) throw ConfigError("simulation.n_traj", "must be a positive integer");
  if (!(lower > 0.0)) throw ConfigError("simulation.s", "must be positive");
  if (!(upper > lower)) throw ConfigError("simulation.R", "must exceed s");
  const auto b = resolved_burn_in();
  if (b < 0 || b >= horizon) throw ConfigError("simulation.burn_in", "must satisfy 0 <= burn_in < horizon");
  if (ceiling <= 0) throw ConfigError("simulation.ceiling", "must be positive");
  if (!(mixed_max_fraction >= 0.0 && mixed_max_fraction <= 1.0))
    throw ConfigError("simulation.mixed_max_fraction", "must lie in [0,1]");
  if (!(growth_min_fraction >= 0.0 && growth_min_fraction <= 1.0))
    throw ConfigError("simulation.growth_min_fraction", "must lie in [0,1]");
}

TrajectorySummary simulate_trajectory(const Model& m, const PerronData& pd, const State& x0,
                                      const SimConfig& cfg, std::int64_t traj_index) {
  if (x0.size() != m.dim()) throw PreconditionError("simulate_trajectory: x0 has the wrong dimension");
  for (auto c : x0)
    if (c < 0) throw PreconditionError("simulate_trajectory: x0 must be non-negative");
  if (m.absorbing_zero() && is_zero(x0))
    throw PreconditionError("simulate_trajectory: x0 = 0 is absorbing for this model");

  const std::int64_t T = cfg.horizon;
  const std::int64_t burn = cfg.resolved_burn_in();
  const std::array<std::int64_t, 3> marks{T / 4, T / 2, T};

  TrajectorySummary s;
  s.index = traj_index;
  Philox rng(cfg.seed, stream_id(stream_tag::kEnsemble, static_cast<std::uint64_t>(traj_index)));

  State cur = x0, next(x0.size());
  double u_prev = dot(cur, pd.u);
  s.min_u_post = std::numeric_limits<double>::infinity();
  s.max_u_post = -std::numeric_limits<double>::infinity();
  std::size_t mark = 0;
  while (mark < marks.size() && marks[mark] == 0) s.checkpoints[mark++] = u_prev;

  std::int64_t t = 1;
  for (; t <= T; ++t) {
    StepInfo info;
    try {
      m.step_into(cur, rng, next, info);
    } catch (const PopulationOverflow&) {
      s.overflow = true;
      break;
    }
    cur.swap(next);
    const double u = dot(cur, pd.u);
    s.generations = t;
    if (t > burn) {
      s.min_u_post = std::min(s.min_u_post, u);
      s.max_u_post = std::max(s.max_u_post, u);
      if (u_prev > cfg.lower && u <= cfg.lower) ++s.returns_below_s;
    }
    u_prev = u;
    while (mark < marks.size() && marks[mark] == t) s.checkpoints[mark++] = u;

    if (m.absorbing_zero() && is_zero(cur)) {
      s.absorption_time = t;
      m.step_into(cur, rng, next, info);
      s.stayed_absorbed = is_zero(next);
      break;
    }
    if (std::any_of(cur.begin(), cur.end(), [&](std::int64_t c) { return c > cfg.ceiling; })) {
      s.ceiling_crossed = true;
      break;
    }
  }
  while (mark < marks.size()) s.checkpoints[mark++] = u_prev;

  // After absorption the chain sits at 0 for the rest of the horizon.
  if (s.absorption_time && *s.absorption_time < T && burn < T) {
    s.min_u_post = std::min(s.min_u_post, 0.0);
    s.max_u_post = std::max(s.max_u_post, 0.0);
  }
  if (s.min_u_post > s.max_u_post) s.min_u_post = s.max_u_post = u_prev;
  s.final_state = cur;
  s.final_u = u_prev;
  s.growth_proxy = s.ceiling_crossed ||
                   (!s.overflow && s.generations == T && s.final_u > cfg.upper &&
                    s.min_u_post > cfg.lower);
  return s;
}

Fraction wilson_fraction(std::int64_t count, std::int64_t total, double z) {
  Fraction f;
  f.count = count;
  f.total = total;
  if (total <= 0) return f;
  const double n = static_cast<double>(total);
  const double p = static_cast<double>(count) / n;
  f.value = p;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  f.wilson = {std::max(0.0, std::min(p, centre - half)), std::min(1.0, std::max(p, centre + half))};
  return f;
}

std::string to_string(Dichotomy d) {
  switch (d) {
    case Dichotomy::ExtinctOrBounded: return "ExtinctOrBounded";
    case Dichotomy::GrowthObserved: return "GrowthObserved";
    case Dichotomy::Mixed: return "Mixed";
  }
  return "?";
}

Dichotomy dichotomy_probe(const EnsembleReport& rep) {
  if (rep.between.value > rep.config.mixed_max_fraction) return Dichotomy::Mixed;
  if (rep.growth.count > 0 && rep.growth.value >= rep.config.growth_min_fraction)
    return Dichotomy::GrowthObserved;
  return Dichotomy::ExtinctOrBounded;
}

namespace {

double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

std::pair<double, double> mean_se(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double se = xs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return {mean, se};
}

}  // namespace

EnsembleReport run_ensemble(const Model& m, const PerronData& pd, const State& x0,
                            const SimConfig& cfg) {
  cfg.validate();
  EnsembleReport rep;
  rep.config = cfg;
  rep.burn_in = cfg.resolved_burn_in();
  rep.x0 = x0;
  rep.x0_u = dot(x0, pd.u);
  rep.absorbing = m.absorbing_zero();

  rep.trajectories.resize(static_cast<std::size_t>(cfg.n_traj));
  parallel_for(cfg.n_traj, cfg.threads, [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i)
      rep.trajectories[static_cast<std::size_t>(i)] = simulate_trajectory(m, pd, x0, cfg, i);
  });

  const std::int64_t n = cfg.n_traj;
  std::int64_t survived = 0, grown = 0, below = 0, between = 0;
  std::vector<double> finals, returns;
  std::array<std::vector<double>, 3> marks;
  for (const auto& s : rep.trajectories) {
    if (!s.absorption_time) ++survived;
    if (s.growth_proxy) ++grown;
    if (!s.ceiling_crossed && s.final_u <= cfg.lower) ++below;
    if (!s.ceiling_crossed && s.final_u > cfg.lower && s.final_u <= cfg.upper) ++between;
    if (s.overflow) ++rep.overflow_count;
    if (s.ceiling_crossed) ++rep.ceiling_count;
    if (!s.stayed_absorbed) ++rep.absorbed_violations;
    finals.push_back(s.final_u);
    returns.push_back(static_cast<double>(s.returns_below_s));
    for (std::size_t k = 0; k < 3; ++k) marks[k].push_back(s.checkpoints[k]);
  }
  if (rep.absorbing) {
    rep.survival = wilson_fraction(survived, n);
    rep.extinction = wilson_fraction(n - survived, n);
  }
  rep.growth = wilson_fraction(grown, n);
  rep.below_lower = wilson_fraction(below, n);
  rep.between = wilson_fraction(between, n);
  std::tie(rep.mean_final_u, rep.se_final_u) = mean_se(finals);
  const std::array<std::int64_t, 3> ts{cfg.horizon / 4, cfg.horizon / 2, cfg.horizon};
  for (std::size_t k = 0; k < 3; ++k) {
    auto [mu, se] = mean_se(marks[k]);
    rep.checkpoints.push_back({ts[k], mu, se});
  }
  rep.median_returns = median(returns);

  if (rep.absorbing) {
    for (std::int64_t lo = 1; lo <= cfg.horizon; lo *= 2) rep.absorption_histogram.push_back({lo, lo * 2, 0});
    for (const auto& s : rep.trajectories)
      if (s.absorption_time)
        for (auto& bin : rep.absorption_histogram)
          if (*s.absorption_time >= bin.lo && *s.absorption_time < bin.hi) ++bin.count;
  }
  rep.verdict = dichotomy_probe(rep);
  return rep;
}

}  // namespace critgrowth
