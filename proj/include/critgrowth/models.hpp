#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "critgrowth/linalg.hpp"
#include "critgrowth/offspring_law.hpp"
#include "critgrowth/rng.hpp"
#include "critgrowth/spectral.hpp"

namespace critgrowth {

inline constexpr std::int64_t kDefaultPopulationCeiling = 1'000'000'000'000;

struct StepInfo {
  /// A per-type offspring sum exceeded the population ceiling and was drawn
  /// from the Gaussian approximation.
  bool gaussian = false;
};

/// X_{n+1} = X_n M + g(X_n) + xi_n with E[xi_n | X_n] = 0, on integer states.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string kind() const = 0;
  virtual std::size_t dim() const = 0;
  virtual const NonNegMatrix& mean_matrix() const = 0;
  /// g(x), evaluated at a real (not necessarily integer) state.
  virtual Vec drift(std::span<const double> x) const = 0;
  /// sigma^2(x) = E[(xi u)^2 | X = x]; nullopt when only a Monte Carlo
  /// estimate is available.
  virtual std::optional<double> sigma2(std::span<const double> x,
                                       std::span<const double> u) const = 0;
  /// Draws X_{n+1} given X_n = z into `out` (same length as z).
  virtual void step_into(std::span<const std::int64_t> z, Philox& rng,
                         std::span<std::int64_t> out, StepInfo& info) const = 0;
  /// Zero is absorbing (no immigration).
  virtual bool absorbing_zero() const = 0;

  /// Exponent of (A1); every shipped model is alpha = 0.
  virtual double alpha() const { return 0.0; }
  /// Moment exponent used by the (A2) audit.
  virtual double delta() const { return 1.0; }

  State step(std::span<const std::int64_t> z, Philox& rng) const;
  /// x M + g(x)
  Vec one_step_mean(std::span<const double> x) const;

  std::int64_t population_ceiling() const noexcept { return ceiling_; }
  void set_population_ceiling(std::int64_t c);

 private:
  std::int64_t ceiling_ = kDefaultPopulationCeiling;
};

/// Multitype Galton-Watson process with immigration:
/// Z_{n+1} = sum of per-parent offspring vectors + A_n.
class GwiModel : public Model {
 public:
  /// One law per parent type plus the immigration law. Only PMF validity and
  /// shape are enforced here; see standing_assumption_violations().
  GwiModel(std::vector<OffspringLaw> offspring, OffspringLaw immigration);

  std::string kind() const override { return "gwi"; }
  std::size_t dim() const override { return offspring_.size(); }
  const NonNegMatrix& mean_matrix() const override { return mean_; }
  Vec drift(std::span<const double>) const override { return immigration_.mean(); }
  /// u' V(x) u + tau^2
  std::optional<double> sigma2(std::span<const double> x,
                               std::span<const double> u) const override;
  void step_into(std::span<const std::int64_t> z, Philox& rng, std::span<std::int64_t> out,
                 StepInfo& info) const override;
  /// Only without immigration (A_1 = 0 almost surely).
  bool absorbing_zero() const override { return immigration_.prob_zero_vector() == 1.0; }

  const std::vector<OffspringLaw>& offspring() const noexcept { return offspring_; }
  const OffspringLaw& immigration() const noexcept { return immigration_; }
  /// a = E[A_1]
  const Vec& immigration_mean() const noexcept { return immigration_.mean(); }
  /// tau^2 = Var(A_1 u)
  double tau2(std::span<const double> u) const { return immigration_.variance_along(u); }
  /// V(x) = sum_i x_i Gamma_i, row-major.
  std::vector<double> dispersion(std::span<const double> x) const;
  /// u' V(x) u
  double dispersion_along(std::span<const double> x, std::span<const double> u) const;

  /// Checks P(A_1 = 0) > 0 and P(X_ij = 0) > 0 for every i, j. Empty when all hold.
  std::vector<std::string> standing_assumption_violations() const;

 private:
  std::vector<OffspringLaw> offspring_;
  OffspringLaw immigration_;
  NonNegMatrix mean_;
};

/// State-dependent multitype Galton-Watson process: offspring laws are
/// regenerated from the current state, M(z) = M + C(z), g(z) = z C(z).
class StateDependentGw : public Model {
 public:
  explicit StateDependentGw(NonNegMatrix baseline) : baseline_(std::move(baseline)) {}

  /// One law per parent type at state z. Throws ConfigError naming z when
  /// the generated law is not a valid PMF.
  virtual std::vector<OffspringLaw> laws_at(std::span<const double> z) const = 0;
  /// M(z)
  virtual NonNegMatrix mean_matrix_at(std::span<const double> z) const;

  std::size_t dim() const override { return baseline_.dim(); }
  const NonNegMatrix& mean_matrix() const override { return baseline_; }
  Vec drift(std::span<const double> x) const override;
  /// u' (sum_i x_i Gamma_i(x)) u
  std::optional<double> sigma2(std::span<const double> x,
                               std::span<const double> u) const override;
  void step_into(std::span<const std::int64_t> z, Philox& rng, std::span<std::int64_t> out,
                 StepInfo& info) const override;
  bool absorbing_zero() const override { return true; }

  /// Generates the laws at every state; throws ConfigError at the first bad one.
  void validate_on(const std::vector<Vec>& states) const;

 protected:
  static std::string describe_state(std::span<const double> z);

 private:
  NonNegMatrix baseline_;
};

/// Offspring law of type i at state z is (1 - eps(z)) base_i + eps(z) boost_i
/// with eps(z) = min(1, kappa / |z|_1). The boost laws must have entry-wise
/// larger means so that C(z) >= 0.
class MixtureSdgwModel : public StateDependentGw {
 public:
  MixtureSdgwModel(std::vector<OffspringLaw> base, std::vector<OffspringLaw> boost, double kappa);

  std::string kind() const override { return "sdgw"; }
  std::vector<OffspringLaw> laws_at(std::span<const double> z) const override;

  double boost_weight(std::span<const double> z) const;
  const std::vector<OffspringLaw>& base() const noexcept { return base_; }
  const std::vector<OffspringLaw>& boost() const noexcept { return boost_; }
  double kappa() const noexcept { return kappa_; }

 private:
  std::vector<OffspringLaw> base_;
  std::vector<OffspringLaw> boost_;
  double kappa_;
};

/// User-defined table: offspring laws piecewise constant in the total
/// population |z|_1. The last band is unbounded and defines the baseline M.
class BandedSdgwModel : public StateDependentGw {
 public:
  struct Band {
    double max_total;  // inclusive upper bound; +inf for the last band
    std::vector<OffspringLaw> laws;
  };

  BandedSdgwModel(std::vector<Band> bands, double alpha = 0.0, double delta = 1.0);

  std::string kind() const override { return "table"; }
  std::vector<OffspringLaw> laws_at(std::span<const double> z) const override;
  double alpha() const override { return alpha_; }
  double delta() const override { return delta_; }
  const std::vector<Band>& bands() const noexcept { return bands_; }

 private:
  std::vector<Band> bands_;
  double alpha_;
  double delta_;
};

struct CellDivisionParams {
  double p = 0.5;
  double p_prime = 0.5;
  double c1 = 0.05;
  double c2 = 0.05;
  /// limits of b_i(z) = P(both children) for a type-i parent
  double b1 = 0.3;
  double b2 = 0.3;
  /// b_i(z) = b_i + beta_i / (1 + |z|_1)
  double beta1 = 0.0;
  double beta2 = 0.0;
  /// a_{i,j}, positive constants
  std::array<std::array<double, 2>, 2> a{{{1.0, 1.0}, {1.0, 1.0}}};

  bool operator==(const CellDivisionParams&) const = default;
};

/// Two-type cell division process with 0/1 offspring coordinates.
class CellDivisionModel : public StateDependentGw {
 public:
  /// Throws DomainError when p, p' are outside (0,1), c_i <= 0, b_i outside
  /// [0,1] or some a_ij <= 0.
  explicit CellDivisionModel(CellDivisionParams params);

  std::string kind() const override { return "cell_division"; }
  /// Baseline plus the c_j a_ij / (z_1 a_1j + z_2 a_2j) correction. Throws
  /// DomainError at z = 0.
  NonNegMatrix mean_matrix_at(std::span<const double> z) const override;
  /// Exactly (c1, c2) * [denominator > 0]; computed from the correction.
  Vec drift(std::span<const double> x) const override;
  std::vector<OffspringLaw> laws_at(std::span<const double> z) const override;

  /// Joint 0/1 law of a type-i parent (i in {0,1}) at state z, with cells
  /// (1,1): b, (1,0): m1 - b, (0,1): m2 - b, (0,0): 1 - m1 - m2 + b.
  OffspringLaw offspring_law(std::span<const double> z, std::size_t i) const;
  double b_at(std::span<const double> z, std::size_t i) const;

  const CellDivisionParams& params() const noexcept { return params_; }

  void step_into(std::span<const std::int64_t> z, Philox& rng, std::span<std::int64_t> out,
                 StepInfo& info) const override;

 private:
  /// P(1,1), P(1,0), P(0,1), P(0,0) for a type-i parent at z.
  std::array<double, 4> cells(std::span<const double> z, std::size_t i) const;

  CellDivisionParams params_;
};

/// Joint law on {0,1}^2 with marginals (m1, m2) and P(1,1) = b. Throws
/// DomainError if a cell is negative or P(0,0) is not positive.
OffspringLaw bernoulli_pair_law(double m1, double m2, double b);

}  // namespace critgrowth
