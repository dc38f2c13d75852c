#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "critgrowth/spectral.hpp"

using namespace critgrowth;
using Catch::Matchers::WithinAbs;

namespace {

Eigen::MatrixXd to_eigen(const NonNegMatrix& m) {
  Eigen::MatrixXd e(m.dim(), m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) e(i, j) = m(i, j);
  return e;
}

// Eigenvalue moduli sorted descending, from a general dense solver.
std::vector<double> moduli(const NonNegMatrix& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(to_eigen(m), false);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(std::abs(es.eigenvalues()(i)));
  std::sort(out.rbegin(), out.rend());
  return out;
}

// Random matrix with a random zero pattern, rescaled to spectral radius 1.
// Zero patterns that break primitivity are redrawn.
NonNegMatrix random_critical(std::mt19937_64& gen, std::size_t d) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (;;) {
    std::vector<double> a(d * d);
    for (auto& x : a) x = unif(gen) < 0.3 ? 0.0 : unif(gen);
    NonNegMatrix m(d, a);
    if (!is_primitive(m)) continue;
    return m.scaled(1.0 / moduli(m).front());
  }
}

}  // namespace

TEST_CASE("two-type example has closed-form eigendata", "[spectral]") {
  const NonNegMatrix m({{0.3, 0.7}, {0.6, 0.4}});
  const auto pd = perron(m);
  CHECK_THAT(pd.rho, WithinAbs(1.0, 1e-10));
  const double r = 1.0 / std::sqrt(2.0);
  CHECK_THAT(pd.u[0], WithinAbs(r, 1e-10));
  CHECK_THAT(pd.u[1], WithinAbs(r, 1e-10));
  CHECK_THAT(pd.v[0], WithinAbs(std::sqrt(2.0) * 6.0 / 13.0, 1e-10));
  CHECK_THAT(pd.v[1], WithinAbs(std::sqrt(2.0) * 7.0 / 13.0, 1e-10));
  CHECK_THAT(dot(pd.v, pd.u), WithinAbs(1.0, 1e-12));
  CHECK_THAT(dot(pd.u, pd.u), WithinAbs(1.0, 1e-12));
  CHECK(pd.residual < 1e-10);
  // second eigenvalue p - p' = 0.3 - 0.6
  CHECK_THAT(contraction_factor(m, pd), WithinAbs(0.3, 1e-8));
}

TEST_CASE("perron agrees with a dense eigen-solver on random matrices", "[spectral]") {
  std::mt19937_64 gen(12345);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 1 + trial % 5;
    auto m = random_critical(gen, d).scaled(0.5 + 0.02 * trial);
    const auto pd = perron(m);
    CHECK_THAT(pd.rho, WithinAbs(moduli(m).front(), 1e-9));
    const auto mu = m.right_multiply(pd.u);
    const auto vm = m.left_multiply(pd.v);
    for (std::size_t i = 0; i < d; ++i) {
      CHECK_THAT(mu[i], WithinAbs(pd.rho * pd.u[i], 1e-9));
      CHECK_THAT(vm[i], WithinAbs(pd.rho * pd.v[i], 1e-9));
      CHECK(pd.u[i] > 0.0);
      CHECK(pd.v[i] > 0.0);
    }
    CHECK_THAT(dot(pd.v, pd.u), WithinAbs(1.0, 1e-12));
    CHECK_THAT(norm2(pd.u), WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("contraction factor is the second eigenvalue modulus", "[spectral]") {
  std::mt19937_64 gen(777);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + trial % 3;
    const auto m = random_critical(gen, d);
    const auto pd = perron(m);
    const double lambda = contraction_factor(m, pd);
    CHECK(lambda < 1.0);
    CHECK_THAT(lambda, WithinAbs(moduli(m)[1], 1e-6));
  }
}

TEST_CASE("primitivity", "[spectral]") {
  CHECK_FALSE(is_primitive(NonNegMatrix({{0, 1}, {1, 0}})));
  CHECK_FALSE(is_primitive(NonNegMatrix({{1, 1}, {0, 1}})));  // reducible
  CHECK(is_primitive(NonNegMatrix({{0, 1}, {1, 1}})));
  // Wielandt matrix: primitive with exponent exactly d^2 - 2d + 2
  const std::size_t d = 5;
  std::vector<double> w(d * d, 0.0);
  for (std::size_t i = 0; i + 1 < d; ++i) w[i * d + i + 1] = 1.0;
  w[(d - 1) * d + 0] = 1.0;
  w[(d - 1) * d + 1] = 1.0;
  CHECK(is_primitive(NonNegMatrix(d, w)));
  CHECK_THROWS_AS(perron(NonNegMatrix({{0, 1}, {1, 0}})), PreconditionError);
}

TEST_CASE("matrix validation", "[spectral]") {
  CHECK_THROWS_AS(NonNegMatrix({{0.5, -0.1}, {0.3, 0.2}}), DomainError);
  CHECK_THROWS_AS(NonNegMatrix({{0.5, 0.1}, {0.3}}), DomainError);
  CHECK_THROWS_AS(NonNegMatrix(std::vector<std::vector<double>>{}), DomainError);
}

TEST_CASE("contraction factor requires a critical matrix", "[spectral]") {
  const NonNegMatrix m({{0.3, 0.7}, {0.6, 0.4}});
  const auto sub = m.scaled(0.9);
  CHECK_THROWS_AS(contraction_factor(sub, perron(sub)), PreconditionError);
}

TEST_CASE("perron reports non-convergence with its last iterate", "[spectral]") {
  const NonNegMatrix m({{0.3, 0.7}, {0.6, 0.4}});
  PerronOptions opts;
  opts.max_iter = 2;
  try {
    perron(m, opts);
    FAIL("expected PerronConvergenceError");
  } catch (const PerronConvergenceError& e) {
    CHECK(e.exit_code() == 2);
    CHECK(e.last_iterate().u.size() == 2);
  }
}

TEST_CASE("transverse part is annihilated by the Perron projection", "[spectral]") {
  const NonNegMatrix m({{0.3, 0.7}, {0.6, 0.4}});
  const auto pd = perron(m);
  const Vec x{17.0, 3.0};
  const auto y = transverse(x, pd);
  CHECK_THAT(dot(y, pd.u), WithinAbs(0.0, 1e-12));
  // Y M = (x - (xu) v) M = xM - (xu) v, so the transverse part of xM is y M
  const auto ym = m.left_multiply(y);
  const auto t = transverse(m.left_multiply(x), pd);
  CHECK_THAT(ym[0], WithinAbs(t[0], 1e-10));
  CHECK_THAT(ym[1], WithinAbs(t[1], 1e-10));
}
