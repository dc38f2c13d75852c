#include <catch_amalgamated.hpp>

#include <cmath>

#include "critgrowth/errors.hpp"
#include "critgrowth/models.hpp"

using namespace critgrowth;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

GwiModel example_gwi() {
  return GwiModel({OffspringLaw({{0, 0}, {1, 0}, {0, 1}, {1, 2}}, {0.4, 0.1, 0.3, 0.2}),
                   OffspringLaw({{0, 0}, {1, 0}, {2, 2}}, {0.6, 0.2, 0.2})},
                  OffspringLaw({{0, 0}, {1, 0}, {0, 1}}, {0.8, 0.1, 0.1}));
}

struct Moments {
  Vec mean;
  double var_u = 0.0;
};

Moments sample_moments(const Model& m, const State& x, const Vec& u, int n, std::uint64_t seed) {
  Moments r{Vec(m.dim(), 0.0), 0.0};
  double s = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    Philox rng(seed, static_cast<std::uint64_t>(i));
    const auto y = m.step(x, rng);
    for (std::size_t j = 0; j < y.size(); ++j) r.mean[j] += static_cast<double>(y[j]) / n;
    const double yu = dot(y, u);
    s += yu;
    sq += yu * yu;
  }
  r.var_u = sq / n - (s / n) * (s / n);
  return r;
}

}  // namespace

TEST_CASE("GWI mean matrix, drift and variance", "[models]") {
  const auto m = example_gwi();
  const std::vector<double> expect_m{0.3, 0.7, 0.6, 0.4};
  for (std::size_t k = 0; k < 4; ++k) CHECK_THAT(m.mean_matrix().data()[k], WithinAbs(expect_m[k], 1e-15));
  CHECK_THAT(m.drift(Vec{5, 5})[0], WithinAbs(0.1, 1e-15));
  CHECK(m.standing_assumption_violations().empty());

  const double r = 1.0 / std::sqrt(2.0);
  const Vec u{r, r};
  const Vec x{40, 25};
  // u' Gamma_1 u and u' Gamma_2 u by hand: Var of (X1 + X2)/sqrt2
  const double g1 = 0.5 * (0.1 + 0.3 + 0.2 * 9 - 1.0);
  const double g2 = 0.5 * (0.2 + 0.2 * 16 - 1.0);
  const double tau2 = 0.5 * (0.2 - 0.04);
  CHECK_THAT(*m.sigma2(x, u), WithinAbs(40 * g1 + 25 * g2 + tau2, 1e-12));
  CHECK_THAT(m.tau2(u), WithinAbs(tau2, 1e-15));

  const auto mc = sample_moments(m, {40, 25}, u, 40000, 11);
  const auto mean = m.one_step_mean(x);
  for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(mc.mean[j] - mean[j]) < 0.1);
  CHECK_THAT(mc.var_u, WithinRel(*m.sigma2(x, u), 0.05));
  CHECK_FALSE(m.absorbing_zero());
}

TEST_CASE("GWI standing assumptions", "[models]") {
  const GwiModel no_zero_immigration({OffspringLaw({{0}, {2}}, {0.5, 0.5})},
                                     OffspringLaw::degenerate({1}));
  CHECK(no_zero_immigration.standing_assumption_violations().size() == 1);
  const GwiModel always_child({OffspringLaw::degenerate({1})}, OffspringLaw::degenerate({0}));
  CHECK(always_child.standing_assumption_violations().size() == 1);
}

TEST_CASE("cell division corrections and laws", "[models]") {
  CellDivisionParams p;
  p.p = 0.4;
  p.p_prime = 0.7;
  p.c1 = 0.2;
  p.c2 = 0.1;
  p.b1 = 0.25;
  p.b2 = 0.15;
  const CellDivisionModel m(p);
  CHECK(m.absorbing_zero());

  const Vec z{30, 50};
  const auto mz = m.mean_matrix_at(z);
  CHECK_THAT(mz(0, 0), WithinAbs(0.4 + 0.2 / 80.0, 1e-15));
  CHECK_THAT(mz(1, 1), WithinAbs(0.3 + 0.1 / 80.0, 1e-15));
  // with constant a_ij the drift is exactly (c1, c2)
  const auto g = m.drift(z);
  CHECK_THAT(g[0], WithinAbs(0.2, 1e-15));
  CHECK_THAT(g[1], WithinAbs(0.1, 1e-15));
  const auto zm = m.one_step_mean(z);
  const auto base = m.mean_matrix().left_multiply(z);
  CHECK_THAT(zm[0], WithinAbs(base[0] + 0.2, 1e-12));

  // u' Gamma_i u = (m1 + m2 - (m1 + m2)^2 + 2 b) / 2 with u = (1,1)/sqrt2
  const double r = 1.0 / std::sqrt(2.0);
  const Vec u{r, r};
  double expect = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto law = m.offspring_law(z, i);
    const double s = mz(i, 0) + mz(i, 1);
    const double b = i == 0 ? 0.25 : 0.15;
    CHECK_THAT(law.variance_along(u), WithinAbs(0.5 * (s - s * s + 2 * b), 1e-14));
    CHECK_THAT(law.mean()[0], WithinAbs(mz(i, 0), 1e-15));
    CHECK_THAT(law.mean()[1], WithinAbs(mz(i, 1), 1e-15));
    expect += z[i] * 0.5 * (s - s * s + 2 * b);
  }
  CHECK_THAT(*m.sigma2(z, u), WithinAbs(expect, 1e-12));

  const auto mc = sample_moments(m, {30, 50}, u, 40000, 3);
  CHECK(std::abs(mc.mean[0] - zm[0]) < 0.1);
  CHECK(std::abs(mc.mean[1] - zm[1]) < 0.1);
  CHECK_THAT(mc.var_u, WithinRel(expect, 0.05));
}

TEST_CASE("cell division fast step equals the generic law sampler", "[models]") {
  CellDivisionParams p;
  p.c1 = p.c2 = 0.4;
  p.beta1 = p.beta2 = 1.1;
  const CellDivisionModel m(p);
  for (const State z : {State{1, 0}, State{3, 4}, State{250, 1000}}) {
    for (std::uint64_t s = 0; s < 20; ++s) {
      Philox r1(s, 1), r2(s, 1);
      const auto fast = m.step(z, r1);
      State slow(2, 0);
      const auto laws = m.laws_at(to_real(z));
      for (std::size_t i = 0; i < 2; ++i) laws[i].add_sum(z[i], r2, slow, m.population_ceiling());
      CHECK(fast == slow);
    }
  }
  Philox rng(0, 0);
  CHECK(is_zero(m.step(State{0, 0}, rng)));
}

TEST_CASE("cell division rejects impossible laws with the state named", "[models]") {
  CellDivisionParams p;
  p.b1 = 0.6;  // exceeds the marginal 0.5 for large populations
  const CellDivisionModel m(p);
  try {
    m.offspring_law(Vec{1000, 1000}, 0);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("(1000, 1000)") != std::string::npos);
  }
  CellDivisionParams q;
  q.p = 1.0;
  CHECK_THROWS_AS(CellDivisionModel(q), DomainError);
  CHECK_THROWS_AS(bernoulli_pair_law(0.6, 0.6, 0.1), DomainError);  // P(0,0) < 0
  CHECK_THROWS_AS(bernoulli_pair_law(0.5, 0.5, 0.0), DomainError);  // P(0,0) = 0
  CHECK_NOTHROW(bernoulli_pair_law(0.5, 0.5, 0.1));
}

TEST_CASE("mixture SDGW weights and drift", "[models]") {
  const std::vector<OffspringLaw> base{OffspringLaw({{0, 0}, {1, 1}}, {0.5, 0.5}),
                                       OffspringLaw({{0, 0}, {1, 1}}, {0.5, 0.5})};
  const std::vector<OffspringLaw> boost{OffspringLaw({{0, 0}, {1, 1}}, {0.25, 0.75}),
                                        OffspringLaw({{0, 0}, {1, 1}}, {0.25, 0.75})};
  const MixtureSdgwModel m(base, boost, 2.0);
  CHECK_THAT(m.boost_weight(Vec{1, 0}), WithinAbs(1.0, 0.0));
  CHECK_THAT(m.boost_weight(Vec{30, 10}), WithinAbs(0.05, 1e-15));
  // g(z) = z C(z) = eps |z|_1 (0.25, 0.25) = (0.5, 0.5) once |z|_1 >= kappa
  const auto g = m.drift(Vec{30, 10});
  CHECK_THAT(g[0], WithinAbs(0.5, 1e-12));
  CHECK_THAT(g[1], WithinAbs(0.5, 1e-12));
  CHECK_THROWS_AS(MixtureSdgwModel(boost, base, 1.0), DomainError);
}

TEST_CASE("banded table model", "[models]") {
  const std::vector<OffspringLaw> hi{OffspringLaw({{0}, {3}}, {0.5, 0.5})};
  const std::vector<OffspringLaw> lo{OffspringLaw({{0}, {2}}, {0.5, 0.5})};
  const BandedSdgwModel m({{10.0, hi}, {0.0, lo}});
  CHECK(m.mean_matrix() == NonNegMatrix(1, {1.0}));
  CHECK_THAT(m.drift(Vec{5})[0], WithinAbs(2.5, 1e-15));
  CHECK_THAT(m.drift(Vec{11})[0], WithinAbs(0.0, 1e-15));
  CHECK_THROWS_AS(BandedSdgwModel({{10.0, hi}, {0.0, lo}}, 1.5), DomainError);
}

TEST_CASE("population ceiling switches to the Gaussian branch", "[models]") {
  auto m = example_gwi();
  m.set_population_ceiling(100);
  Philox rng(1, 1);
  StepInfo info;
  State out(2);
  m.step_into(State{500, 500}, rng, out, info);
  CHECK(info.gaussian);
  CHECK(out[0] > 0);
  CHECK_THROWS_AS(m.set_population_ceiling(0), DomainError);
}
