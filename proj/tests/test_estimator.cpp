#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "sastro/estimator.hpp"

using namespace sastro;

namespace {

const VectorXd kTheta = VectorXd::Zero(1);

double identity_oracle(const VectorXd&, const VectorXd& x) { return x[0]; }

struct Moments {
  double mean;
  double var;
};

Moments repeat(std::int64_t n, std::int64_t ell, int reps, std::uint64_t seed) {
  const auto map = InverseMap::uniform(1);
  const KeyedStream root(seed);
  std::vector<double> v(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    v[static_cast<std::size_t>(r)] =
        stratified_estimate(kTheta, n, n / ell, map, identity_oracle, root.child(r)).mean;
  }
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= reps;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return {mean, var / (reps - 1)};
}

}  // namespace

TEST_CASE("schedules") {
  SamplingSchedule s;
  auto lg = lambda_gamma(s, 7, 1);
  CHECK(lg.lambda == doctest::Approx(2.2973967099940698));
  CHECK(lg.gamma == doctest::Approx(2.0 / 3.0));

  s.regime = Regime::NsChebyshev;
  lg = lambda_gamma(s, 7, 1);
  CHECK(lg.lambda == doctest::Approx(12.125732532083184));
  CHECK(lg.gamma == doctest::Approx(2.0));

  s.regime = Regime::StratSeEx;
  s.kappa_min = 4.0;
  s.b_max = 1.0;
  CHECK(lambda_gamma(s, 3, 1).gamma == doctest::Approx(4.0 / 3.0));
  s.kappa_min = 2.0;
  CHECK_THROWS_AS(lambda_gamma(s, 3, 1), std::invalid_argument);

  s = SamplingSchedule{};
  s.regime = Regime::NsBernstein;
  lg = lambda_gamma(s, 0, 1);
  CHECK(lg.lambda == doctest::Approx(std::pow(std::log(2.0), 1.2)));
  CHECK(lg.gamma == 2.0);

  s.regime = Regime::StratSgPo;
  lg = lambda_gamma(s, 0, 2);
  CHECK(lg.lambda == doctest::Approx(1.0));
  CHECK(lg.gamma == doctest::Approx(4.1 * 2 / 6.0));

  s.delta = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  CHECK(regime_from_string("STRAT_SG_EX") == Regime::StratSgEx);
  CHECK_THROWS(regime_from_string("nope"));
}

TEST_CASE("lambda is non-decreasing in k for every regime") {
  for (auto r : {Regime::StratBounded, Regime::StratSePo, Regime::StratSeEx, Regime::StratSgPo,
                 Regime::StratSgEx, Regime::NsChebyshev, Regime::NsBernstein}) {
    SamplingSchedule s;
    s.regime = r;
    double prev = 0.0;
    for (std::int64_t k = 0; k < 200; ++k) {
      const double l = lambda_gamma(s, k, 2).lambda;
      CHECK(l > 0.0);
      CHECK(l >= prev);
      prev = l;
    }
  }
}

TEST_CASE("constant oracle") {
  const auto map = InverseMap::uniform(1);
  auto c = [](const VectorXd&, const VectorXd&) { return 3.5; };
  for (std::int64_t n : {2, 8, 32}) {
    const auto r = stratified_estimate(kTheta, n, 2, map, c, KeyedStream(1));
    CHECK(r.mean == 3.5);
    CHECK(r.pooled_variance == 0.0);
    CHECK(r.ell == n / 2);
    CHECK(r.oracle_calls == n);
  }
  CHECK(plain_estimate(kTheta, 10, c, map, KeyedStream(1)).pooled_variance == 0.0);
}

TEST_CASE("invalid sizes") {
  const auto map = InverseMap::uniform(1);
  CHECK_THROWS_AS(stratified_estimate(kTheta, 4, 1, map, identity_oracle, KeyedStream(0)),
                  InsufficientSamples);
  CHECK_THROWS_AS(stratified_estimate(kTheta, 6, 2, InverseMap::uniform(2), identity_oracle,
                                      KeyedStream(0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(plain_estimate(kTheta, 1, identity_oracle, map, KeyedStream(0)),
                  InsufficientSamples);
}

TEST_CASE("stratified variance closed form") {
  // Var = 1 / (12 n ell^2) for the mean of uniforms with ell strata.
  const auto m84 = repeat(8, 4, 10000, 1);
  CHECK(std::abs(m84.var / 6.510416666666667e-4 - 1.0) < 0.05);
  const auto m81 = repeat(8, 1, 10000, 2);
  CHECK(std::abs(m81.var / (1.0 / 96.0) - 1.0) < 0.05);
}

TEST_CASE("unbiasedness and variance ordering") {
  for (auto [n, ell] : std::vector<std::pair<std::int64_t, std::int64_t>>{
           {8, 1}, {8, 2}, {8, 4}, {18, 9}, {32, 16}}) {
    const auto m = repeat(n, ell, 10000, static_cast<std::uint64_t>(100 + n + ell));
    CHECK(std::abs(m.mean - 0.5) < 4.0 * std::sqrt(m.var / 10000));
  }
  const auto v1 = repeat(8, 1, 10000, 7).var;
  const auto v2 = repeat(8, 2, 10000, 8).var;
  const auto v4 = repeat(8, 4, 10000, 9).var;
  CHECK(v4 < v2);
  CHECK(v2 < v1);
}

TEST_CASE("plain estimate is the single-stratum estimate") {
  const auto map = InverseMap::truncated_standard_gaussian(1, 5.0);
  auto f = [](const VectorXd& t, const VectorXd& x) { return t[0] * x[0] * x[0]; };
  const VectorXd theta = VectorXd::Constant(1, 2.0);
  const auto a = plain_estimate(theta, 37, f, map, KeyedStream(4));
  const auto b = stratified_estimate(theta, 37, 37, map, f, KeyedStream(4));
  CHECK(a.mean == b.mean);
  CHECK(a.pooled_variance == b.pooled_variance);

  const auto big = plain_estimate(kTheta, 100000, identity_oracle, InverseMap::uniform(1),
                                  KeyedStream(12));
  CHECK(std::abs(big.mean - 0.5) < 3.0 * std::sqrt(1.0 / (12.0 * 100000)));
}

TEST_CASE("stratified estimate in two dimensions") {
  const auto map = InverseMap::uniform(2);
  auto f = [](const VectorXd&, const VectorXd& x) { return x[0] + 2.0 * x[1]; };
  const auto r = stratified_estimate(kTheta, 2 * 25, 2, map, f, KeyedStream(3));
  CHECK(r.ell == 25);
  CHECK(std::abs(r.mean - 1.5) < 0.05);
}

TEST_CASE("stopping rule examples") {
  const auto map = InverseMap::uniform(1);
  auto c = [](const VectorXd&, const VectorXd&) { return 1.0; };
  SamplingSchedule s;
  s.sigma2_min = 1.0;
  s.kappa_as = 1.0;
  auto r = adaptive_estimate(kTheta, LambdaGamma{4.0, 2.0 / 3.0}, 1.0, s, 2, map, c, KeyedStream(0));
  CHECK(r.n == 4);

  s.sigma2_min = 1e-12;
  r = adaptive_estimate(kTheta, LambdaGamma{4.5, 2.0 / 3.0}, 1.0, s, 2, map, c, KeyedStream(0));
  CHECK(r.n == 6);
  CHECK(r.oracle_calls == 6);

  // At a fixed variance the demand scales as Delta^(-2 gamma).
  s.sigma2_min = 1.0;
  for (double gamma : {1.0, 2.0}) {
    const LambdaGamma lg{1.0, gamma};
    const auto n1 = adaptive_estimate(kTheta, lg, 0.5, s, 2, map, c, KeyedStream(0)).n;
    const auto n2 = adaptive_estimate(kTheta, lg, 0.25, s, 2, map, c, KeyedStream(0)).n;
    CHECK(n2 == static_cast<std::int64_t>(std::round(n1 * std::pow(2.0, 2.0 * gamma))));
  }
}

TEST_CASE("returned sizes satisfy the rule and every call is charged") {
  const auto map = InverseMap::truncated_standard_gaussian(1, 5.0);
  std::int64_t counted = 0;
  auto f = [&counted](const VectorXd& t, const VectorXd& x) {
    ++counted;
    return t.squaredNorm() + 2.0 * x[0];
  };
  const VectorXd theta = VectorXd::Ones(2);
  for (auto regime : {Regime::StratBounded, Regime::StratSgPo, Regime::NsChebyshev,
                      Regime::NsBernstein}) {
    SamplingSchedule s;
    s.regime = regime;
    const AdmissibleSizes sizes(2, 1);
    for (std::int64_t k : {0, 5, 40}) {
      for (double Delta : {1.0, 0.6}) {
        counted = 0;
        const auto lg = lambda_gamma(s, k, 1);
        const auto r = adaptive_estimate(theta, lg, Delta, s, 2, map, f, KeyedStream(k));
        CHECK(r.oracle_calls == counted);
        CHECK(r.n >= lg.lambda);
        CHECK(rule_satisfied(s, lg, Delta, r.n, r.pooled_variance));
        if (is_stratified(regime)) {
          CHECK(sizes.contains(r.n));
        } else {
          CHECK(r.ell == 1);
        }
      }
    }
  }
}

TEST_CASE("demand is monotone in Delta and k at fixed variance") {
  const auto map = InverseMap::uniform(1);
  auto c = [](const VectorXd&, const VectorXd&) { return 0.0; };
  SamplingSchedule s;
  s.sigma2_min = 0.5;
  std::int64_t prev = std::numeric_limits<std::int64_t>::max();
  for (double Delta = 0.05; Delta <= 2.0; Delta *= 1.3) {
    const auto n = adaptive_estimate(kTheta, std::int64_t{3}, Delta, s, 2, map, c, KeyedStream(0)).n;
    CHECK(n <= prev);
    prev = n;
  }
  prev = 0;
  for (std::int64_t k = 0; k < 60; k += 3) {
    const auto n = adaptive_estimate(kTheta, k, 0.4, s, 2, map, c, KeyedStream(0)).n;
    CHECK(n >= prev);
    prev = n;
  }
}

TEST_CASE("budget caps") {
  const auto map = InverseMap::uniform(1);
  auto c = [](const VectorXd&, const VectorXd&) { return 0.0; };
  SamplingSchedule s;
  s.sigma2_min = 1.0;
  AdaptiveLimits limits;
  limits.max_n = 100;
  try {
    adaptive_estimate(kTheta, LambdaGamma{1.0, 2.0}, 0.01, s, 2, map, c, KeyedStream(0), limits);
    FAIL("expected BudgetExhausted");
  } catch (const BudgetExhausted& e) {
    CHECK(e.partial().n == 100);
    CHECK(e.partial().oracle_calls == 2550);  // 2 + 4 + ... + 100
  }
  limits = AdaptiveLimits{};
  limits.max_oracle_calls = 20;
  try {
    adaptive_estimate(kTheta, LambdaGamma{1.0, 2.0}, 0.01, s, 2, map, c, KeyedStream(0), limits);
    FAIL("expected BudgetExhausted");
  } catch (const BudgetExhausted& e) {
    CHECK(e.partial().oracle_calls == 20);  // 2 + 4 + 6 + 8
    CHECK(e.partial().n == 8);
  }
  CHECK_THROWS_AS(adaptive_estimate(kTheta, LambdaGamma{1.0, 2.0}, 0.0, s, 2, map, c, KeyedStream(0)),
                  std::invalid_argument);
  s.regime = Regime::Fixed;
  CHECK_THROWS_AS(adaptive_estimate(kTheta, LambdaGamma{1.0, 2.0}, 1.0, s, 2, map, c, KeyedStream(0)),
                  std::invalid_argument);
}
