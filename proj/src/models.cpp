#include "critgrowth/models.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "critgrowth/errors.hpp"

namespace critgrowth {

// ---------------------------------------------------------------- Model

State Model::step(std::span<const std::int64_t> z, Philox& rng) const {
  State out(z.size(), 0);
  StepInfo info;
  step_into(z, rng, out, info);
  return out;
}

Vec Model::one_step_mean(std::span<const double> x) const {
  Vec m = mean_matrix().left_multiply(x);
  Vec g = drift(x);
  for (std::size_t j = 0; j < m.size(); ++j) m[j] += g[j];
  return m;
}

void Model::set_population_ceiling(std::int64_t c) {
  if (c <= 0) throw DomainError("population ceiling must be positive");
  ceiling_ = c;
}

namespace {

NonNegMatrix means_of(const std::vector<OffspringLaw>& laws) {
  const std::size_t d = laws.size();
  std::vector<double> data;
  data.reserve(d * d);
  for (const auto& law : laws) data.insert(data.end(), law.mean().begin(), law.mean().end());
  return NonNegMatrix(d, std::move(data));
}

void check_law_shapes(const std::vector<OffspringLaw>& laws, const char* what) {
  if (laws.empty()) throw DomainError(std::string(what) + ": need at least one type");
  for (const auto& law : laws)
    if (law.dim() != laws.size()) {
      std::ostringstream os;
      os << what << ": offspring vectors must have length " << laws.size();
      throw DomainError(os.str());
    }
}

void sample_offspring(const std::vector<OffspringLaw>& laws, std::span<const std::int64_t> z,
                      Philox& rng, std::span<std::int64_t> out, std::int64_t ceiling,
                      StepInfo& info) {
  for (std::size_t i = 0; i < laws.size(); ++i)
    if (laws[i].add_sum(z[i], rng, out, ceiling)) info.gaussian = true;
}

}  // namespace

// ---------------------------------------------------------------- GWI

GwiModel::GwiModel(std::vector<OffspringLaw> offspring, OffspringLaw immigration)
    : offspring_(std::move(offspring)), immigration_(std::move(immigration)) {
  check_law_shapes(offspring_, "gwi");
  if (immigration_.dim() != offspring_.size())
    throw DomainError("gwi: immigration vectors must have the model dimension");
  mean_ = means_of(offspring_);
}

std::vector<double> GwiModel::dispersion(std::span<const double> x) const {
  const std::size_t d = dim();
  std::vector<double> v(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    const auto& g = offspring_[i].covariance();
    for (std::size_t k = 0; k < d * d; ++k) v[k] += x[i] * g[k];
  }
  return v;
}

double GwiModel::dispersion_along(std::span<const double> x, std::span<const double> u) const {
  double s = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) s += x[i] * offspring_[i].variance_along(u);
  return s;
}

std::optional<double> GwiModel::sigma2(std::span<const double> x,
                                       std::span<const double> u) const {
  return dispersion_along(x, u) + tau2(u);
}

void GwiModel::step_into(std::span<const std::int64_t> z, Philox& rng,
                         std::span<std::int64_t> out, StepInfo& info) const {
  std::fill(out.begin(), out.end(), 0);
  sample_offspring(offspring_, z, rng, out, population_ceiling(), info);
  immigration_.add_sum(1, rng, out, population_ceiling());
}

std::vector<std::string> GwiModel::standing_assumption_violations() const {
  std::vector<std::string> out;
  if (!(immigration_.prob_zero_vector() > 0.0))
    out.push_back("immigration law puts no mass on the zero vector");
  for (std::size_t i = 0; i < dim(); ++i)
    for (std::size_t j = 0; j < dim(); ++j)
      if (!(offspring_[i].prob_zero_coordinate(j) > 0.0)) {
        std::ostringstream os;
        os << "offspring law of type " << i << " never produces zero type-" << j << " children";
        out.push_back(os.str());
      }
  return out;
}

// ---------------------------------------------------------------- SDGW

std::string StateDependentGw::describe_state(std::span<const double> z) {
  std::ostringstream os;
  os.precision(12);
  os << "state (";
  for (std::size_t i = 0; i < z.size(); ++i) os << (i ? ", " : "") << z[i];
  os << ")";
  return os.str();
}

NonNegMatrix StateDependentGw::mean_matrix_at(std::span<const double> z) const {
  return means_of(laws_at(z));
}

Vec StateDependentGw::drift(std::span<const double> x) const {
  Vec gz = mean_matrix_at(x).left_multiply(x);
  Vec base = mean_matrix().left_multiply(x);
  for (std::size_t j = 0; j < gz.size(); ++j) gz[j] -= base[j];
  return gz;
}

std::optional<double> StateDependentGw::sigma2(std::span<const double> x,
                                               std::span<const double> u) const {
  if (l1(x) == 0.0) return 0.0;
  auto laws = laws_at(x);
  double s = 0.0;
  for (std::size_t i = 0; i < laws.size(); ++i)
    if (x[i] != 0.0) s += x[i] * laws[i].variance_along(u);
  return s;
}

void StateDependentGw::step_into(std::span<const std::int64_t> z, Philox& rng,
                                 std::span<std::int64_t> out, StepInfo& info) const {
  std::fill(out.begin(), out.end(), 0);
  if (is_zero(z)) return;
  Vec zr = to_real(z);
  sample_offspring(laws_at(zr), z, rng, out, population_ceiling(), info);
}

void StateDependentGw::validate_on(const std::vector<Vec>& states) const {
  for (const auto& z : states)
    if (l1(z) > 0.0) laws_at(z);
}

// ---------------------------------------------------------------- mixture SDGW

MixtureSdgwModel::MixtureSdgwModel(std::vector<OffspringLaw> base,
                                   std::vector<OffspringLaw> boost, double kappa)
    : StateDependentGw((check_law_shapes(base, "sdgw"), means_of(base))),
      base_(std::move(base)),
      boost_(std::move(boost)),
      kappa_(kappa) {
  check_law_shapes(boost_, "sdgw boost");
  if (boost_.size() != base_.size())
    throw DomainError("sdgw: boost laws must match the number of types");
  if (!(kappa_ >= 0.0) || !std::isfinite(kappa_))
    throw DomainError("sdgw: kappa must be finite and non-negative");
  for (std::size_t i = 0; i < base_.size(); ++i)
    for (std::size_t j = 0; j < base_.size(); ++j)
      if (boost_[i].mean()[j] < base_[i].mean()[j]) {
        std::ostringstream os;
        os << "sdgw: boost mean (" << i << "," << j
           << ") is below the baseline mean, so C(z) would be negative";
        throw DomainError(os.str());
      }
}

double MixtureSdgwModel::boost_weight(std::span<const double> z) const {
  const double total = l1(z);
  if (total <= 0.0) return 0.0;
  return std::min(1.0, kappa_ / total);
}

std::vector<OffspringLaw> MixtureSdgwModel::laws_at(std::span<const double> z) const {
  const double w = boost_weight(z);
  std::vector<OffspringLaw> out;
  out.reserve(base_.size());
  for (std::size_t i = 0; i < base_.size(); ++i)
    out.push_back(w == 0.0 ? base_[i] : OffspringLaw::mixture(base_[i], boost_[i], w));
  return out;
}

// ---------------------------------------------------------------- banded table

namespace {

NonNegMatrix last_band_means(const std::vector<BandedSdgwModel::Band>& bands) {
  if (bands.empty()) throw DomainError("table: at least one band is required");
  check_law_shapes(bands.back().laws, "table");
  return means_of(bands.back().laws);
}

}  // namespace

BandedSdgwModel::BandedSdgwModel(std::vector<Band> bands, double alpha, double delta)
    : StateDependentGw(last_band_means(bands)), bands_(std::move(bands)), alpha_(alpha), delta_(delta) {
  if (!(alpha_ > -1.0 && alpha_ < 1.0)) throw DomainError("table: alpha must lie in (-1, 1)");
  if (!(delta_ > 0.0)) throw DomainError("table: delta must be positive");
  double prev = -1.0;
  for (std::size_t k = 0; k < bands_.size(); ++k) {
    check_law_shapes(bands_[k].laws, "table");
    if (bands_[k].laws.size() != dim()) throw DomainError("table: bands differ in dimension");
    const bool last = k + 1 == bands_.size();
    if (last) {
      bands_[k].max_total = std::numeric_limits<double>::infinity();
    } else if (!(bands_[k].max_total > prev)) {
      throw DomainError("table: band bounds must be strictly increasing");
    }
    prev = bands_[k].max_total;
  }
}

std::vector<OffspringLaw> BandedSdgwModel::laws_at(std::span<const double> z) const {
  const double total = l1(z);
  for (const auto& band : bands_)
    if (total <= band.max_total) return band.laws;
  return bands_.back().laws;
}

// ---------------------------------------------------------------- cell division

OffspringLaw bernoulli_pair_law(double m1, double m2, double b) {
  auto snap = [](double x) { return (x < 0.0 && x > -1e-12) ? 0.0 : x; };
  const double c11 = snap(b);
  const double c10 = snap(m1 - b);
  const double c01 = snap(m2 - b);
  const double c00 = 1.0 - (c11 + c10 + c01);
  if (c11 < 0.0 || c10 < 0.0 || c01 < 0.0 || c11 > 1.0 || !(c00 > 0.0)) {
    std::ostringstream os;
    os << "joint 0/1 law with marginals (" << m1 << ", " << m2 << ") and P(1,1) = " << b
       << " has cells (" << c11 << ", " << c10 << ", " << c01 << ", " << c00
       << "); all must be non-negative and P(0,0) positive";
    throw DomainError(os.str());
  }
  return OffspringLaw({{1, 1}, {1, 0}, {0, 1}, {0, 0}}, {c11, c10, c01, c00});
}

namespace {

NonNegMatrix cell_baseline(const CellDivisionParams& p) {
  if (!(p.p > 0.0 && p.p < 1.0) || !(p.p_prime > 0.0 && p.p_prime < 1.0))
    throw DomainError("cell_division: p and p' must lie in (0, 1)");
  return NonNegMatrix({{p.p, 1.0 - p.p}, {p.p_prime, 1.0 - p.p_prime}});
}

}  // namespace

CellDivisionModel::CellDivisionModel(CellDivisionParams params)
    : StateDependentGw(cell_baseline(params)), params_(params) {
  const auto& q = params_;
  if (!(q.c1 > 0.0) || !(q.c2 > 0.0)) throw DomainError("cell_division: c1 and c2 must be positive");
  if (!(q.b1 >= 0.0 && q.b1 <= 1.0) || !(q.b2 >= 0.0 && q.b2 <= 1.0))
    throw DomainError("cell_division: b1 and b2 must lie in [0, 1]");
  if (!std::isfinite(q.beta1) || !std::isfinite(q.beta2))
    throw DomainError("cell_division: beta must be finite");
  for (const auto& row : q.a)
    for (double x : row)
      if (!(x > 0.0) || !std::isfinite(x))
        throw DomainError("cell_division: coefficients a_ij must be positive");
}

NonNegMatrix CellDivisionModel::mean_matrix_at(std::span<const double> z) const {
  const auto& q = params_;
  const double den1 = z[0] * q.a[0][0] + z[1] * q.a[1][0];
  const double den2 = z[0] * q.a[0][1] + z[1] * q.a[1][1];
  if (!(den1 > 0.0) || !(den2 > 0.0))
    throw DomainError("cell_division: mean matrix undefined at " + describe_state(z));
  return NonNegMatrix({{q.p + q.c1 * q.a[0][0] / den1, 1.0 - q.p + q.c2 * q.a[0][1] / den2},
                       {q.p_prime + q.c1 * q.a[1][0] / den1,
                        1.0 - q.p_prime + q.c2 * q.a[1][1] / den2}});
}

Vec CellDivisionModel::drift(std::span<const double> x) const {
  if (l1(x) == 0.0) return Vec(2, 0.0);
  const auto& q = params_;
  const double den1 = x[0] * q.a[0][0] + x[1] * q.a[1][0];
  const double den2 = x[0] * q.a[0][1] + x[1] * q.a[1][1];
  return {q.c1 * (x[0] * q.a[0][0] + x[1] * q.a[1][0]) / den1,
          q.c2 * (x[0] * q.a[0][1] + x[1] * q.a[1][1]) / den2};
}

double CellDivisionModel::b_at(std::span<const double> z, std::size_t i) const {
  const double b = i == 0 ? params_.b1 : params_.b2;
  const double beta = i == 0 ? params_.beta1 : params_.beta2;
  return b + beta / (1.0 + l1(z));
}

std::array<double, 4> CellDivisionModel::cells(std::span<const double> z, std::size_t i) const {
  if (i > 1) throw DomainError("cell_division: type index must be 0 or 1");
  const auto& q = params_;
  const double den1 = z[0] * q.a[0][0] + z[1] * q.a[1][0];
  const double den2 = z[0] * q.a[0][1] + z[1] * q.a[1][1];
  if (!(den1 > 0.0) || !(den2 > 0.0))
    throw DomainError("cell_division: mean matrix undefined at " + describe_state(z));
  const double m1 = (i == 0 ? q.p : q.p_prime) + q.c1 * q.a[i][0] / den1;
  const double m2 = (i == 0 ? 1.0 - q.p : 1.0 - q.p_prime) + q.c2 * q.a[i][1] / den2;
  const double b = b_at(z, i);
  auto snap = [](double x) { return (x < 0.0 && x > -1e-12) ? 0.0 : x; };
  const double c11 = snap(b), c10 = snap(m1 - b), c01 = snap(m2 - b);
  const double c00 = 1.0 - (c11 + c10 + c01);
  if (c11 < 0.0 || c10 < 0.0 || c01 < 0.0 || c11 > 1.0 || !(c00 > 0.0)) {
    std::ostringstream os;
    os << "cell_division law of type " << i + 1 << " at " << describe_state(z)
       << ": joint 0/1 law with marginals (" << m1 << ", " << m2 << ") and P(1,1) = " << b
       << " has cells (" << c11 << ", " << c10 << ", " << c01 << ", " << c00
       << "); all must be non-negative and P(0,0) positive";
    throw ConfigError("model", os.str());
  }
  return {c11, c10, c01, c00};
}

OffspringLaw CellDivisionModel::offspring_law(std::span<const double> z, std::size_t i) const {
  const auto c = cells(z, i);
  return OffspringLaw({{1, 1}, {1, 0}, {0, 1}, {0, 0}}, std::vector<double>(c.begin(), c.end()));
}

void CellDivisionModel::step_into(std::span<const std::int64_t> z, Philox& rng,
                                  std::span<std::int64_t> out, StepInfo& info) const {
  if (z[0] > population_ceiling() || z[1] > population_ceiling()) {
    StateDependentGw::step_into(z, rng, out, info);
    return;
  }
  out[0] = out[1] = 0;
  if (z[0] == 0 && z[1] == 0) return;
  const double zr[2] = {static_cast<double>(z[0]), static_cast<double>(z[1])};
  // Same sequential-binomial multinomial as OffspringLaw::add_sum, without
  // materializing the law.
  for (std::size_t i = 0; i < 2; ++i) {
    if (z[i] == 0) continue;
    const auto c = cells(zr, i);
    std::int64_t remaining = z[i];
    double mass = 1.0;
    std::int64_t n[3] = {0, 0, 0};
    for (std::size_t k = 0; k < 3 && remaining > 0; ++k) {
      const double p = mass > 0.0 ? std::clamp(c[k] / mass, 0.0, 1.0) : 1.0;
      if (p >= 1.0) {
        n[k] = remaining;
      } else if (p > 0.0) {
        std::binomial_distribution<std::int64_t> binom(remaining, p);
        n[k] = binom(rng);
      }
      remaining -= n[k];
      mass -= c[k];
    }
    out[0] += n[0] + n[1];
    out[1] += n[0] + n[2];
  }
}

std::vector<OffspringLaw> CellDivisionModel::laws_at(std::span<const double> z) const {
  return {offspring_law(z, 0), offspring_law(z, 1)};
}

}  // namespace critgrowth
