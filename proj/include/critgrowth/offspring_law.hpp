#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "critgrowth/linalg.hpp"
#include "critgrowth/rng.hpp"

namespace critgrowth {

/// Finite-support law on non-negative integer vectors of length `dim`.
class OffspringLaw {
 public:
  OffspringLaw() = default;
  /// Throws DomainError if probabilities are negative, do not sum to 1 within
  /// 1e-12, or a support vector has the wrong length or a negative entry.
  OffspringLaw(std::vector<State> support, std::vector<double> probs);

  /// Point mass at `atom`.
  static OffspringLaw degenerate(State atom);
  /// Mixture (1 - w) * a + w * b over the union of supports.
  static OffspringLaw mixture(const OffspringLaw& a, const OffspringLaw& b, double w);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return probs_.size(); }
  std::span<const std::int64_t> atom(std::size_t k) const {
    return {support_.data() + k * dim_, dim_};
  }
  double prob(std::size_t k) const { return probs_[k]; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  std::vector<State> support() const;

  const Vec& mean() const noexcept { return mean_; }
  /// Row-major dim x dim covariance of one draw.
  const std::vector<double>& covariance() const noexcept { return cov_; }
  /// u' Cov u
  double variance_along(std::span<const double> u) const;
  /// P(coordinate j == 0)
  double prob_zero_coordinate(std::size_t j) const;
  /// P(draw == 0 vector)
  double prob_zero_vector() const;

  State sample(Philox& rng) const;

  /// Adds the coordinate-wise sum of `count` independent draws to `out`.
  /// Exact (multinomial over atoms) while count <= ceiling; beyond it, a
  /// Gaussian with matching mean and covariance, rounded and clamped at 0.
  /// Returns true iff the Gaussian branch was taken. Throws PopulationOverflow.
  bool add_sum(std::int64_t count, Philox& rng, std::span<std::int64_t> out,
               std::int64_t ceiling) const;

 private:
  void finalize();

  std::size_t dim_ = 0;
  std::vector<std::int64_t> support_;  // size() * dim_, row per atom
  std::vector<double> probs_;
  Vec mean_;
  std::vector<double> cov_;
};

/// Checked a + b * c for population arithmetic; throws PopulationOverflow.
std::int64_t checked_add_mul(std::int64_t a, std::int64_t b, std::int64_t c);

}  // namespace critgrowth
