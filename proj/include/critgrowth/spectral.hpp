#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "critgrowth/errors.hpp"
#include "critgrowth/linalg.hpp"

namespace critgrowth {

/// Square matrix with non-negative entries, stored row-major.
class NonNegMatrix {
 public:
  NonNegMatrix() = default;
  /// Throws DomainError on an empty, non-square or negative input.
  explicit NonNegMatrix(const std::vector<std::vector<double>>& rows);
  NonNegMatrix(std::size_t dim, std::vector<double> row_major);

  static NonNegMatrix identity(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<std::vector<double>> rows() const;

  /// Column vector product M x.
  Vec right_multiply(std::span<const double> x) const;
  /// Row vector product x M.
  Vec left_multiply(std::span<const double> x) const;

  NonNegMatrix scaled(double factor) const;

  bool operator==(const NonNegMatrix&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Perron root with right (column) eigenvector u and left (row) eigenvector v,
/// jointly normalized so that u'u = 1 and v u = 1.
struct PerronData {
  double rho = 0.0;
  Vec u;
  Vec v;
  /// max(|Mu - rho u|_inf, |vM - rho v|_inf)
  double residual = 0.0;
  int iterations = 0;
};

struct PerronOptions {
  double tol = 1e-12;
  int max_iter = 100000;
};

/// Raised when power iteration does not settle; carries the last iterate.
class PerronConvergenceError : public ComputationError {
 public:
  PerronConvergenceError(const std::string& what, PerronData last)
      : ComputationError(what), last_(std::move(last)) {}
  const PerronData& last_iterate() const noexcept { return last_; }
  const char* kind() const noexcept override { return "non_convergence"; }

 private:
  PerronData last_;
};

/// True iff some power of M is entry-wise positive. Decided with boolean
/// matrix powers up to the Wielandt bound d^2 - 2d + 2.
bool is_primitive(const NonNegMatrix& m);

/// Power iteration from the all-ones vector on M (for u) and M' (for v).
/// Throws PreconditionError for non-primitive input.
PerronData perron(const NonNegMatrix& m, const PerronOptions& opts = {});

/// Spectral radius of M - u v for a critical M, via Gelfand's formula on
/// repeated squares. Throws PreconditionError unless |rho - 1| <= crit_tol.
double contraction_factor(const NonNegMatrix& m, const PerronData& pd,
                          double crit_tol = 1e-9);

/// Transverse component x (I - u v).
Vec transverse(std::span<const double> x, const PerronData& pd);

}  // namespace critgrowth
