#include "critgrowth/offspring_law.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "critgrowth/errors.hpp"

namespace critgrowth {

std::int64_t checked_add_mul(std::int64_t a, std::int64_t b, std::int64_t c) {
  std::int64_t prod = 0;
  std::int64_t sum = 0;
  if (__builtin_mul_overflow(b, c, &prod) || __builtin_add_overflow(a, prod, &sum))
    throw PopulationOverflow("population count exceeds 2^63 - 1");
  return sum;
}

OffspringLaw::OffspringLaw(std::vector<State> support, std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (support.empty()) throw DomainError("offspring law has empty support");
  if (support.size() != probs_.size()) {
    std::ostringstream os;
    os << "offspring law has " << support.size() << " support vectors but "
       << probs_.size() << " probabilities";
    throw DomainError(os.str());
  }
  dim_ = support.front().size();
  if (dim_ == 0) throw DomainError("offspring law support vectors are empty");
  double total = 0.0;
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (support[k].size() != dim_) throw DomainError("offspring law support vectors differ in length");
    for (auto c : support[k])
      if (c < 0) throw DomainError("offspring law support has a negative count");
    if (!(probs_[k] >= 0.0) || !std::isfinite(probs_[k])) {
      std::ostringstream os;
      os << "offspring law probability " << probs_[k] << " is negative or not finite";
      throw DomainError(os.str());
    }
    total += probs_[k];
    support_.insert(support_.end(), support[k].begin(), support[k].end());
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(15);
    os << "offspring law probabilities sum to " << total << ", not 1";
    throw DomainError(os.str());
  }
  finalize();
}

OffspringLaw OffspringLaw::degenerate(State atom) {
  return OffspringLaw({std::move(atom)}, {1.0});
}

OffspringLaw OffspringLaw::mixture(const OffspringLaw& a, const OffspringLaw& b, double w) {
  if (a.dim() != b.dim()) throw DomainError("mixture of laws with different dimensions");
  if (!(w >= 0.0 && w <= 1.0)) throw DomainError("mixture weight outside [0,1]");
  std::map<State, double> mass;
  for (std::size_t k = 0; k < a.size(); ++k) {
    auto at = a.atom(k);
    mass[State(at.begin(), at.end())] += (1.0 - w) * a.prob(k);
  }
  for (std::size_t k = 0; k < b.size(); ++k) {
    auto at = b.atom(k);
    mass[State(at.begin(), at.end())] += w * b.prob(k);
  }
  std::vector<State> sup;
  std::vector<double> pr;
  for (auto& [s, p] : mass) {
    sup.push_back(s);
    pr.push_back(p);
  }
  return OffspringLaw(std::move(sup), std::move(pr));
}

void OffspringLaw::finalize() {
  mean_.assign(dim_, 0.0);
  cov_.assign(dim_ * dim_, 0.0);
  for (std::size_t k = 0; k < probs_.size(); ++k) {
    auto at = atom(k);
    for (std::size_t j = 0; j < dim_; ++j) mean_[j] += probs_[k] * static_cast<double>(at[j]);
  }
  for (std::size_t k = 0; k < probs_.size(); ++k) {
    auto at = atom(k);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j)
        cov_[i * dim_ + j] += probs_[k] * (static_cast<double>(at[i]) - mean_[i]) *
                              (static_cast<double>(at[j]) - mean_[j]);
  }
}

std::vector<State> OffspringLaw::support() const {
  std::vector<State> out;
  for (std::size_t k = 0; k < size(); ++k) {
    auto at = atom(k);
    out.emplace_back(at.begin(), at.end());
  }
  return out;
}

double OffspringLaw::variance_along(std::span<const double> u) const {
  double s = 0.0;
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) s += u[i] * cov_[i * dim_ + j] * u[j];
  return s;
}

double OffspringLaw::prob_zero_coordinate(std::size_t j) const {
  double p = 0.0;
  for (std::size_t k = 0; k < size(); ++k)
    if (atom(k)[j] == 0) p += probs_[k];
  return p;
}

double OffspringLaw::prob_zero_vector() const {
  double p = 0.0;
  for (std::size_t k = 0; k < size(); ++k)
    if (is_zero(atom(k))) p += probs_[k];
  return p;
}

State OffspringLaw::sample(Philox& rng) const {
  double x = rng.uniform();
  std::size_t k = 0;
  for (; k + 1 < size(); ++k) {
    if (x < probs_[k]) break;
    x -= probs_[k];
  }
  auto at = atom(k);
  return State(at.begin(), at.end());
}

namespace {

// Lower-triangular factor of a PSD matrix; zero pivots leave a zero column.
std::vector<double> psd_cholesky(const std::vector<double>& a, std::size_t d) {
  std::vector<double> l(d * d, 0.0);
  double scale = 0.0;
  for (std::size_t i = 0; i < d; ++i) scale = std::max(scale, std::abs(a[i * d + i]));
  for (std::size_t j = 0; j < d; ++j) {
    double diag = a[j * d + j];
    for (std::size_t k = 0; k < j; ++k) diag -= l[j * d + k] * l[j * d + k];
    if (diag <= 1e-14 * scale) continue;
    const double ljj = std::sqrt(diag);
    l[j * d + j] = ljj;
    for (std::size_t i = j + 1; i < d; ++i) {
      double s = a[i * d + j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i * d + k] * l[j * d + k];
      l[i * d + j] = s / ljj;
    }
  }
  return l;
}

}  // namespace

bool OffspringLaw::add_sum(std::int64_t count, Philox& rng, std::span<std::int64_t> out,
                           std::int64_t ceiling) const {
  if (count <= 0) return false;
  if (count > ceiling) {
    const double n = static_cast<double>(count);
    std::vector<double> l = psd_cholesky(cov_, dim_);
    std::normal_distribution<double> normal;
    Vec z(dim_);
    for (auto& x : z) x = normal(rng);
    for (std::size_t i = 0; i < dim_; ++i) {
      double x = n * mean_[i];
      for (std::size_t k = 0; k <= i; ++k) x += std::sqrt(n) * l[i * dim_ + k] * z[k];
      x = std::max(0.0, std::round(x));
      if (x >= 9.2e18) throw PopulationOverflow("population count exceeds 2^63 - 1");
      out[i] = checked_add_mul(out[i], 1, static_cast<std::int64_t>(x));
    }
    return true;
  }
  std::int64_t remaining = count;
  double mass = 1.0;
  const std::size_t last = size() - 1;
  for (std::size_t k = 0; k <= last && remaining > 0; ++k) {
    std::int64_t n_k = remaining;
    if (k < last) {
      const double p = mass > 0.0 ? std::clamp(probs_[k] / mass, 0.0, 1.0) : 1.0;
      if (p <= 0.0) {
        n_k = 0;
      } else if (p < 1.0) {
        std::binomial_distribution<std::int64_t> binom(remaining, p);
        n_k = binom(rng);
      }
      mass -= probs_[k];
    }
    if (n_k == 0) continue;
    remaining -= n_k;
    auto at = atom(k);
    for (std::size_t j = 0; j < dim_; ++j)
      if (at[j] != 0) out[j] = checked_add_mul(out[j], n_k, at[j]);
  }
  return false;
}

}  // namespace critgrowth
