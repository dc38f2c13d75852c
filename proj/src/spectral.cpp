#include "critgrowth/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace critgrowth {

NonNegMatrix::NonNegMatrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw DomainError("matrix must have at least one row");
  dim_ = rows.size();
  data_.reserve(dim_ * dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    if (rows[i].size() != dim_) {
      std::ostringstream os;
      os << "matrix is not square: row " << i << " has " << rows[i].size()
         << " entries, expected " << dim_;
      throw DomainError(os.str());
    }
    data_.insert(data_.end(), rows[i].begin(), rows[i].end());
  }
  for (std::size_t k = 0; k < data_.size(); ++k) {
    if (!(data_[k] >= 0.0) || !std::isfinite(data_[k])) {
      std::ostringstream os;
      os << "matrix entry (" << k / dim_ << "," << k % dim_ << ") = " << data_[k]
         << " is not a finite non-negative number";
      throw DomainError(os.str());
    }
  }
}

NonNegMatrix::NonNegMatrix(std::size_t dim, std::vector<double> row_major)
    : dim_(dim), data_(std::move(row_major)) {
  if (dim_ == 0 || data_.size() != dim_ * dim_)
    throw DomainError("row-major data does not describe a square matrix");
  for (double x : data_)
    if (!(x >= 0.0) || !std::isfinite(x))
      throw DomainError("matrix entries must be finite and non-negative");
}

NonNegMatrix NonNegMatrix::identity(std::size_t dim) {
  std::vector<double> d(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) d[i * dim + i] = 1.0;
  return NonNegMatrix(dim, std::move(d));
}

std::vector<std::vector<double>> NonNegMatrix::rows() const {
  std::vector<std::vector<double>> out(dim_);
  for (std::size_t i = 0; i < dim_; ++i) out[i].assign(row(i).begin(), row(i).end());
  return out;
}

Vec NonNegMatrix::right_multiply(std::span<const double> x) const {
  Vec y(dim_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i) y[i] = dot(row(i), x);
  return y;
}

Vec NonNegMatrix::left_multiply(std::span<const double> x) const {
  Vec y(dim_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) y[j] += x[i] * data_[i * dim_ + j];
  return y;
}

NonNegMatrix NonNegMatrix::scaled(double factor) const {
  std::vector<double> d = data_;
  for (double& x : d) x *= factor;
  return NonNegMatrix(dim_, std::move(d));
}

namespace {

using BoolMatrix = std::vector<char>;

BoolMatrix bool_product(const BoolMatrix& a, const BoolMatrix& b, std::size_t d) {
  BoolMatrix c(d * d, 0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k)
      if (a[i * d + k])
        for (std::size_t j = 0; j < d; ++j) c[i * d + j] |= b[k * d + j];
  return c;
}

bool all_true(const BoolMatrix& a) {
  return std::all_of(a.begin(), a.end(), [](char c) { return c != 0; });
}

// One power-iteration sweep: y = A x (or x A), normalized to unit 2-norm.
// Returns the norm before normalization.
double sweep(const NonNegMatrix& m, bool transpose, Vec& x) {
  Vec y = transpose ? m.left_multiply(x) : m.right_multiply(x);
  double n = norm2(y);
  if (n == 0.0) return 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) x[i] = y[i] / n;
  return n;
}

struct PowerResult {
  Vec vec;
  double rho = 0.0;
  int iterations = 0;
  bool converged = false;
};

PowerResult power_iterate(const NonNegMatrix& m, bool transpose, const PerronOptions& opts) {
  const std::size_t d = m.dim();
  PowerResult r;
  r.vec.assign(d, 1.0 / std::sqrt(static_cast<double>(d)));
  double prev = std::numeric_limits<double>::infinity();
  Vec last = r.vec;
  for (int it = 1; it <= opts.max_iter; ++it) {
    r.rho = sweep(m, transpose, r.vec);
    r.iterations = it;
    double dv = 0.0;
    for (std::size_t i = 0; i < d; ++i) dv = std::max(dv, std::abs(r.vec[i] - last[i]));
    if (std::abs(r.rho - prev) < opts.tol && dv < opts.tol) {
      r.converged = true;
      break;
    }
    prev = r.rho;
    last = r.vec;
  }
  return r;
}

double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

bool is_primitive(const NonNegMatrix& m) {
  const std::size_t d = m.dim();
  if (d == 0) throw DomainError("empty matrix");
  BoolMatrix pattern(d * d);
  for (std::size_t k = 0; k < d * d; ++k) pattern[k] = m.data()[k] > 0.0;
  const std::size_t bound = d * d - 2 * d + 2;
  BoolMatrix power = pattern;
  if (all_true(power)) return true;
  for (std::size_t k = 2; k <= bound; ++k) {
    power = bool_product(power, pattern, d);
    if (all_true(power)) return true;
  }
  return false;
}

PerronData perron(const NonNegMatrix& m, const PerronOptions& opts) {
  if (!is_primitive(m)) throw PreconditionError("perron: matrix is not primitive");
  if (!(opts.tol > 0.0) || opts.max_iter <= 0)
    throw PreconditionError("perron: tol and max_iter must be positive");

  PowerResult right = power_iterate(m, false, opts);
  PowerResult left = power_iterate(m, true, opts);

  PerronData pd;
  pd.u = right.vec;
  pd.v = left.vec;
  pd.iterations = std::max(right.iterations, left.iterations);

  // u is already unit length; scale v so that v u = 1.
  const double vu = dot(pd.v, pd.u);
  for (double& x : pd.v) x /= vu;
  // Rayleigh-type quotient v M u / v u, with v u = 1 now.
  pd.rho = dot(pd.v, m.right_multiply(pd.u));

  Vec mu = m.right_multiply(pd.u);
  Vec vm = m.left_multiply(pd.v);
  double res = 0.0;
  for (std::size_t i = 0; i < m.dim(); ++i) {
    res = std::max(res, std::abs(mu[i] - pd.rho * pd.u[i]));
    res = std::max(res, std::abs(vm[i] - pd.rho * pd.v[i]));
  }
  pd.residual = res;

  if (!right.converged || !left.converged) {
    std::ostringstream os;
    os << "perron: power iteration did not converge within " << opts.max_iter
       << " iterations (residual " << res << ")";
    throw PerronConvergenceError(os.str(), pd);
  }
  return pd;
}

double contraction_factor(const NonNegMatrix& m, const PerronData& pd, double crit_tol) {
  if (std::abs(pd.rho - 1.0) > crit_tol)
    throw PreconditionError("contraction_factor: matrix is not critical (rho != 1)");
  const std::size_t d = m.dim();
  if (pd.u.size() != d || pd.v.size() != d)
    throw PreconditionError("contraction_factor: eigenvector dimension mismatch");

  std::vector<double> b(d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) b[i * d + j] = m(i, j) - pd.u[i] * pd.v[j];

  double scale = max_abs(b);
  if (scale == 0.0) return 0.0;
  for (double& x : b) x /= scale;
  // b holds A^n / exp(log_norm); estimate is exp(log_norm / n).
  double log_norm = std::log(scale);
  double n = 1.0;
  double estimate = scale;
  std::vector<double> sq(d * d);
  for (int k = 0; k < 64; ++k) {
    std::fill(sq.begin(), sq.end(), 0.0);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t l = 0; l < d; ++l) {
        const double a = b[i * d + l];
        if (a == 0.0) continue;
        for (std::size_t j = 0; j < d; ++j) sq[i * d + j] += a * b[l * d + j];
      }
    n *= 2.0;
    log_norm *= 2.0;
    const double s = max_abs(sq);
    if (s == 0.0) return 0.0;
    for (std::size_t t = 0; t < sq.size(); ++t) b[t] = sq[t] / s;
    log_norm += std::log(s);
    const double next = std::exp(log_norm / n);
    const bool settled = std::abs(next - estimate) <= 1e-15 * std::max(next, 1e-300);
    estimate = next;
    if (settled && k >= 8) break;
  }
  return estimate;
}

Vec transverse(std::span<const double> x, const PerronData& pd) {
  const double xu = dot(x, pd.u);
  Vec y(x.begin(), x.end());
  for (std::size_t j = 0; j < y.size(); ++j) y[j] -= xu * pd.v[j];
  return y;
}

}  // namespace critgrowth
