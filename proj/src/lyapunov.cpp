#include "critgrowth/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "critgrowth/errors.hpp"
#include "critgrowth/parallel.hpp"

namespace critgrowth {

std::string to_string(Phi p) { return p == Phi::Log ? "log" : "invlog"; }

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Satisfied: return "Satisfied";
    case Verdict::Violated: return "Violated";
    case Verdict::Indeterminate: return "Indeterminate";
  }
  return "?";
}

Verdict verdict_from(double gap, double se, double band) {
  if (gap + band * se <= 0.0) return Verdict::Satisfied;
  if (gap - band * se >= 0.0) return Verdict::Violated;
  return Verdict::Indeterminate;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// n independent copies of the chain started at x0, advanced one generation at
// a time. Step t of path p draws from its own counter-based stream, so no
// generator state has to be kept per path.
class PathBatch {
 public:
  PathBatch(const Model& m, const State& x0, std::int64_t n, std::uint64_t seed,
            std::uint64_t tag, std::uint64_t family, unsigned threads)
      : m_(m), d_(x0.size()), n_(n), seed_(seed), tag_(tag), family_(family), threads_(threads) {
    states_.resize(static_cast<std::size_t>(n) * d_);
    for (std::int64_t p = 0; p < n; ++p)
      std::copy(x0.begin(), x0.end(), states_.begin() + p * d_);
  }

  void advance() {
    ++steps_;
    parallel_for(n_, threads_, [&](std::int64_t b, std::int64_t e) {
      State next(d_);
      StepInfo info;
      for (std::int64_t p = b; p < e; ++p) {
        std::span<std::int64_t> cur(states_.data() + p * d_, d_);
        if (m_.absorbing_zero() && is_zero(cur)) continue;
        Philox rng(seed_, stream_id(tag_, family_,
                                    stream_id(0, static_cast<std::uint64_t>(p),
                                              static_cast<std::uint64_t>(steps_))));
        m_.step_into(cur, rng, next, info);
        std::copy(next.begin(), next.end(), cur.begin());
      }
    });
  }

  std::span<const std::int64_t> path(std::int64_t p) const {
    return {states_.data() + p * d_, d_};
  }
  std::int64_t size() const { return n_; }
  int steps() const { return steps_; }

 private:
  const Model& m_;
  std::size_t d_;
  std::int64_t n_;
  std::uint64_t seed_, tag_, family_;
  unsigned threads_;
  int steps_ = 0;
  std::vector<std::int64_t> states_;
};

double phi_of(Phi phi, double y) { return phi == Phi::Log ? std::log(y) : 1.0 / std::log(y); }

void check_start(Phi phi, double xu) {
  if (phi == Phi::Log && !(xu > 1.0)) {
    std::ostringstream os;
    os << "check_supermartingale: log needs x u > 1 (got " << xu << ")";
    throw PreconditionError(os.str());
  }
  if (phi == Phi::InvLog && !(xu > 3.0)) {
    std::ostringstream os;
    os << "check_supermartingale: 1/log needs x u > 3 (got " << xu << ")";
    throw PreconditionError(os.str());
  }
}

GapRecord gap_record(const PathBatch& batch, const PerronData& pd, Phi phi, const State& x,
                     double band) {
  GapRecord rec;
  rec.x = x;
  rec.xu = dot(x, pd.u);
  rec.k = batch.steps();
  const double base = phi_of(phi, rec.xu);
  double sum = 0.0, sum_sq = 0.0;
  std::int64_t used = 0;
  for (std::int64_t p = 0; p < batch.size(); ++p) {
    double y = dot(batch.path(p), pd.u);
    if (phi == Phi::Log) {
      if (!(y > 0.0)) {
        ++rec.absorbed;
        continue;
      }
    } else if (y < 3.0) {
      y += 3.0;  // (X + 3v) u = X u + 3
      ++rec.shifted;
    }
    const double d = phi_of(phi, y) - base;
    sum += d;
    sum_sq += d * d;
    ++used;
  }
  rec.samples = used;
  rec.absorption_fraction = static_cast<double>(rec.absorbed) / static_cast<double>(batch.size());
  if (used > 0) {
    const double n = static_cast<double>(used);
    rec.gap = sum / n;
    const double var = used > 1 ? std::max(0.0, sum_sq - n * rec.gap * rec.gap) / (n - 1.0) : 0.0;
    rec.se = std::sqrt(var / n);
  } else {
    rec.gap = kNaN;
    rec.se = kNaN;
  }
  rec.verdict = used > 0 ? verdict_from(rec.gap, rec.se, band) : Verdict::Indeterminate;
  return rec;
}

std::pair<double, double> mean_se(double sum, double sum_sq, std::int64_t count) {
  if (count == 0) return {0.0, 0.0};
  const double n = static_cast<double>(count);
  const double mean = sum / n;
  const double var = count > 1 ? std::max(0.0, sum_sq - n * mean * mean) / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

}  // namespace

GapRecord check_supermartingale(const Model& m, const PerronData& pd, Phi phi, const State& x,
                                int k, const LyapunovOptions& opts, std::uint64_t state_index) {
  if (k <= 0) throw PreconditionError("check_supermartingale: k must be positive");
  if (opts.samples <= 0) throw PreconditionError("check_supermartingale: need samples > 0");
  check_start(phi, dot(x, pd.u));
  PathBatch batch(m, x, opts.samples, opts.seed, stream_tag::kLyapunov, state_index, opts.threads);
  for (int t = 0; t < k; ++t) batch.advance();
  return gap_record(batch, pd, phi, x, opts.band);
}

ScanResult scan_k(const Model& m, const PerronData& pd, Phi phi, const std::vector<State>& grid,
                  int k_max, const LyapunovOptions& opts) {
  if (grid.empty()) throw PreconditionError("scan_k: empty grid");
  if (k_max <= 0) throw PreconditionError("scan_k: k_max must be positive");
  for (std::size_t j = 1; j < grid.size(); ++j)
    if (dot(grid[j], pd.u) < dot(grid[j - 1], pd.u))
      throw PreconditionError("scan_k: grid must be sorted by u-projection");
  for (const auto& x : grid) check_start(phi, dot(x, pd.u));

  ScanResult res;
  res.phi = phi;
  res.k_max = k_max;
  res.s = dot(grid.front(), pd.u);
  std::vector<PathBatch> batches;
  batches.reserve(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j)
    batches.emplace_back(m, grid[j], opts.samples, opts.seed, stream_tag::kLyapunov, j, opts.threads);

  for (int k = 1; k <= k_max; ++k) {
    std::vector<GapRecord> row;
    bool all = true;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      batches[j].advance();
      row.push_back(gap_record(batches[j], pd, phi, grid[j], opts.band));
      all = all && row.back().verdict == Verdict::Satisfied;
    }
    res.history.push_back(std::move(row));
    if (all) {
      res.k = k;
      break;
    }
  }
  return res;
}

MomentScan moment_scan(const Model& m, const PerronData& pd, const std::vector<State>& grid,
                       const std::vector<int>& ks, double c1, double d1,
                       const LyapunovOptions& opts) {
  std::vector<int> sorted = ks;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.empty() || sorted.front() <= 0) throw PreconditionError("moment_scan: k values must be positive");
  MomentScan scan;
  scan.c1 = c1;
  scan.d1 = d1;
  scan.alpha = m.alpha();
  scan.delta = m.delta();
  const double pw = 2.0 + scan.delta;

  for (std::size_t j = 0; j < grid.size(); ++j) {
    const State& x = grid[j];
    const double xu = dot(x, pd.u);
    const Vec y = transverse(to_real(x), pd);
    PathBatch batch(m, x, opts.samples, opts.seed, stream_tag::kMoments, j, opts.threads);
    for (int k : sorted) {
      while (batch.steps() < k) batch.advance();
      double s1 = 0, s1q = 0, s2 = 0, s2q = 0, s3 = 0, s3q = 0;
      for (std::int64_t p = 0; p < batch.size(); ++p) {
        const double delta = dot(batch.path(p), pd.u) - xu;
        const double d2 = delta * delta;
        const double d3 = std::pow(std::abs(delta), pw);
        s1 += delta, s1q += d2;
        s2 += d2, s2q += d2 * d2;
        s3 += d3, s3q += d3 * d3;
      }
      MomentRecord r;
      r.x = x;
      r.xu = xu;
      r.y_norm = norm2(y);
      r.k = k;
      std::tie(r.mean_delta, r.se_mean_delta) = mean_se(s1, s1q, batch.size());
      std::tie(r.mean_delta2, r.se_mean_delta2) = mean_se(s2, s2q, batch.size());
      std::tie(r.mean_abs_delta_2pd, r.se_mean_abs_delta_2pd) = mean_se(s3, s3q, batch.size());
      const double scale1 = xu > 0.0 ? std::pow(xu, scan.alpha) : 1.0;
      const double scale2 = xu > 0.0 ? std::pow(xu, 1.0 + scan.alpha) : 1.0;
      r.ref_mean = c1 * k * scale1;
      r.ref_second = k * d1 * scale2;
      r.resid_mean = std::abs(r.mean_delta - r.ref_mean) / scale1;
      r.resid_second = std::abs(r.mean_delta2 - r.ref_second) / scale2;
      scan.records.push_back(std::move(r));
    }
  }
  return scan;
}

std::vector<TransversePoint> transverse_profile(const Model& m, const PerronData& pd,
                                                const State& x0, int steps,
                                                const LyapunovOptions& opts) {
  PathBatch batch(m, x0, opts.samples, opts.seed, stream_tag::kTransverse, 0, opts.threads);
  std::vector<TransversePoint> out;
  for (int i = 1; i <= steps; ++i) {
    batch.advance();
    double s = 0, sq = 0;
    for (std::int64_t p = 0; p < batch.size(); ++p) {
      const double yn = norm2(transverse(to_real(batch.path(p)), pd));
      s += yn;
      sq += yn * yn;
    }
    TransversePoint tp;
    tp.step = i;
    std::tie(tp.mean_norm, tp.se) = mean_se(s, sq, batch.size());
    out.push_back(tp);
  }
  return out;
}

std::vector<State> probe_grid(const PerronData& pd, const std::vector<double>& magnitudes,
                              bool off_ray, double perturbation) {
  std::vector<State> grid;
  for (double r : magnitudes) {
    State x(pd.v.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = static_cast<std::int64_t>(std::llround(r * pd.v[i]));
    grid.push_back(x);
    if (off_ray) {
      for (double sign : {-1.0, 1.0}) {
        State y = x;
        const double shifted = static_cast<double>(y[0]) + sign * perturbation * r;
        y[0] = static_cast<std::int64_t>(std::llround(std::max(0.0, shifted)));
        grid.push_back(y);
      }
    }
  }
  std::stable_sort(grid.begin(), grid.end(), [&](const State& a, const State& b) {
    return dot(a, pd.u) < dot(b, pd.u);
  });
  return grid;
}

AuditReport assumption_audit(const Model& m, const PerronData& pd,
                             const std::vector<double>& magnitudes, const LyapunovOptions& opts) {
  AuditReport rep;
  rep.delta = m.delta();
  const double pw = 2.0 + rep.delta;
  const std::size_t d = m.dim();

  // (A2) and the (A3) proxy from one-step samples on the probe grid.
  const auto grid = probe_grid(pd, magnitudes, true);
  rep.a3_proxy_holds = true;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const State& x = grid[j];
    A2Record rec;
    rec.x = x;
    rec.xu = dot(x, pd.u);
    const Vec xr = to_real(x);
    try {
      const Vec mean = m.one_step_mean(xr);
      Sigma2Options so;
      so.seed = opts.seed;
      so.samples = std::max<std::int64_t>(opts.samples, 2);
      const double s2 = sigma2_at(m, xr, pd, so, 1000 + j).value;
      PathBatch batch(m, x, opts.samples, opts.seed, stream_tag::kAudit, j, opts.threads);
      batch.advance();
      double s = 0, sq = 0;
      std::int64_t up = 0;
      Vec cs(d, 0.0), csq(d, 0.0);
      for (std::int64_t p = 0; p < batch.size(); ++p) {
        auto z = batch.path(p);
        double nrm = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          const double e = static_cast<double>(z[i]) - mean[i];
          nrm += e * e;
          cs[i] += e;
          csq[i] += e * e;
        }
        const double v = std::pow(std::sqrt(nrm), pw);
        s += v;
        sq += v * v;
        if (dot(z, pd.u) > rec.xu) ++up;
      }
      auto [mu, se] = mean_se(s, sq, batch.size());
      const double denom = std::pow(s2, pw / 2.0);
      rec.ratio = denom > 0.0 ? mu / denom : (mu > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
      rec.se = denom > 0.0 ? se / denom : 0.0;
      rec.increase_fraction = static_cast<double>(up) / static_cast<double>(batch.size());
      if (up == 0) rep.a3_proxy_holds = false;
      AuditReport::MeanCheck mc{x, 0.0};
      for (std::size_t i = 0; i < d; ++i) {
        auto [dm, dse] = mean_se(cs[i], csq[i], batch.size());
        const double z = dse > 0.0 ? std::abs(dm) / dse : (dm == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        mc.max_abs_z = std::max(mc.max_abs_z, z);
      }
      rep.mean_check_max_z = std::max(rep.mean_check_max_z, mc.max_abs_z);
      rep.mean_check.push_back(std::move(mc));
    } catch (const Error& e) {
      rep.notes.push_back(std::string("(A2) skipped a grid state: ") + e.what());
      continue;
    }
    rep.a2_max_ratio = std::max(rep.a2_max_ratio, rec.ratio);
    rep.a2.push_back(std::move(rec));
  }
  if (!rep.a2.empty()) {
    double first = 0.0, last = 0.0;
    const double lo_u = rep.a2.front().xu, hi_u = rep.a2.back().xu;
    for (const auto& r : rep.a2) {
      if (r.xu <= lo_u * 1.5) first = std::max(first, r.ratio);
      if (r.xu >= hi_u / 1.5) last = std::max(last, r.ratio);
    }
    rep.a2_growth_trend = last > 2.0 * first;
  }

  // (A4): min g(x) u over decade annuli, on and off the Perron ray.
  rep.a4_min = std::numeric_limits<double>::infinity();
  for (double lo = 1.0; lo < 1e5; lo *= 10.0) {
    AuditReport::Annulus ann{lo, lo * 10.0, std::numeric_limits<double>::infinity()};
    for (double t : {0.25, 0.5, 0.75}) {
      const double r = lo * std::pow(10.0, t);
      Vec x = pd.v;
      for (double& c : x) c *= r;
      std::vector<Vec> probes{x};
      for (double sign : {-1.0, 1.0}) {
        Vec y = x;
        y[0] = std::max(0.0, y[0] + sign * 0.2 * r);
        const double yu = dot(y, pd.u);
        if (yu > lo && yu < lo * 10.0) probes.push_back(y);
      }
      for (const auto& p : probes) {
        try {
          ann.min_gu = std::min(ann.min_gu, dot(m.drift(p), pd.u));
        } catch (const Error& e) {
          rep.notes.push_back(std::string("(A4) skipped a probe: ") + e.what());
        }
      }
    }
    rep.a4_min = std::min(rep.a4_min, ann.min_gu);
    rep.a4.push_back(ann);
  }
  rep.a4_violated = !(rep.a4_min > 1e-12);

  // (A5): max sigma^2 over lattice points in balls |x| < a.
  for (double a : {10.0, 100.0, 1000.0}) {
    AuditReport::Ball ball{a, 0.0, 0};
    const int per_axis = d <= 4 ? 11 : 1;
    std::vector<int> idx(d, 0);
    std::int64_t total = 1;
    for (std::size_t i = 0; i < d; ++i) total *= per_axis;
    std::int64_t skipped = 0;
    for (std::int64_t c = 0; c < total; ++c) {
      std::int64_t rem = c;
      Vec x(d);
      for (std::size_t i = 0; i < d; ++i) {
        x[i] = std::floor(a * static_cast<double>(rem % per_axis) / per_axis);
        rem /= per_axis;
      }
      if (!(norm2(x) < a)) continue;
      try {
        Sigma2Options so;
        so.seed = opts.seed;
        so.samples = 1000;
        const double s2 = sigma2_at(m, x, pd, so, 5000 + static_cast<std::uint64_t>(c)).value;
        ball.max_sigma2 = std::max(ball.max_sigma2, s2);
        ++ball.points;
      } catch (const Error&) {
        ++skipped;
      }
    }
    if (!std::isfinite(ball.max_sigma2)) rep.a5_finite = false;
    if (skipped > 0) {
      std::ostringstream os;
      os << "(A5) ball radius " << a << ": " << skipped
         << " lattice points have no valid offspring law and were skipped";
      rep.notes.push_back(os.str());
    }
    rep.a5.push_back(ball);
  }
  rep.notes.push_back(
      "(A3) is checked through a proxy: positive empirical probability of a strict u-increase "
      "from every probe state; this is not a verification of unboundedness");
  return rep;
}

}  // namespace critgrowth
