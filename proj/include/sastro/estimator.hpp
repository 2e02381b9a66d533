#ifndef SASTRO_ESTIMATOR_HPP_
#define SASTRO_ESTIMATOR_HPP_

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string_view>

#include <Eigen/Dense>

#include "sastro/rng.hpp"
#include "sastro/sampling.hpp"

namespace sastro {

// Stochastic oracle F(theta, x).
using Oracle = std::function<double(const VectorXd& theta, const VectorXd& x)>;

// Which deflation schedule (lambda_k, gamma) drives the sampling rule.
//   StratBounded   bounded inverse-map gradient on the closed cube
//   StratSePo/SeEx sub-exponential margins, polynomial/exponential oracle
//   StratSgPo/SgEx sub-gaussian margins, polynomial/exponential oracle
//   NsChebyshev    no stratification, Chebyshev-type power schedule
//   NsBernstein    no stratification, logarithmic schedule
//   Fixed          constant sample size, no rule
enum class Regime {
  StratBounded,
  StratSePo,
  StratSeEx,
  StratSgPo,
  StratSgEx,
  NsChebyshev,
  NsBernstein,
  Fixed,
};

std::string_view to_string(Regime regime);
Regime regime_from_string(std::string_view name);
bool is_stratified(Regime regime);

struct SamplingSchedule {
  Regime regime = Regime::StratBounded;
  double delta = 0.2;
  double varrho = 0.1;
  double kappa_min = 4.0;
  double b_max = 1.0;
  double kappa_as = 1.0;
  double sigma2_min = 1e-6;
  // Sample size for the Fixed regime.
  std::int64_t fixed_n = 30;

  // Throws std::invalid_argument on out-of-range constants.
  void validate() const;
};

struct LambdaGamma {
  double lambda;
  double gamma;
};

// Power schedules are evaluated at k + 1 and the logarithmic one at k + 2,
// so that lambda is positive from the first iteration.
LambdaGamma lambda_gamma(const SamplingSchedule& schedule, std::int64_t k, int q);

struct EstimateResult {
  double mean = 0.0;
  // (1/ell) * sum of per-stratum unbiased sample variances; not divided by n.
  double pooled_variance = 0.0;
  std::int64_t n = 0;
  std::int64_t ell = 0;
  // Every oracle evaluation spent, including rejected rounds of a stopping rule.
  std::int64_t oracle_calls = 0;
};

class InsufficientSamples : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class BudgetExhausted : public std::runtime_error {
 public:
  BudgetExhausted(const std::string& what, EstimateResult partial)
      : std::runtime_error(what), partial_(partial) {}
  // Last completed round; oracle_calls covers everything spent.
  const EstimateResult& partial() const { return partial_; }

 private:
  EstimateResult partial_;
};

// Stratified estimate with ell = n / nbar equiprobable strata and nbar draws
// per stratum. Stratum j draws from stream.child(j).
EstimateResult stratified_estimate(const VectorXd& theta, std::int64_t n, std::int64_t nbar,
                                   const InverseMap& map, const Oracle& oracle,
                                   const KeyedStream& stream);

// Single stratum; same code path as stratified_estimate(theta, n, n, ...).
EstimateResult plain_estimate(const VectorXd& theta, std::int64_t n, const Oracle& oracle,
                              const InverseMap& map, const KeyedStream& stream);

// kappa_as * Delta^gamma / sqrt(lambda).
double rule_threshold(const SamplingSchedule& schedule, const LambdaGamma& lg, double Delta);

// sqrt(max(sigma2_min, pooled_variance) / n) <= rule_threshold.
bool rule_satisfied(const SamplingSchedule& schedule, const LambdaGamma& lg, double Delta,
                    std::int64_t n, double pooled_variance);

struct AdaptiveLimits {
  std::int64_t max_n = 10'000'000;
  std::int64_t max_oracle_calls = std::numeric_limits<std::int64_t>::max();
};

// Smallest admissible n >= lambda meeting the sampling rule.
//
// Stratified regimes walk the sizes nbar * m^q; no-stratification regimes use
// ell = 1 and walk max(2, ceil(lambda)), +1, +2, ... Each candidate size is a
// fresh estimate on stream.child(round) and all rounds are charged.
//
// Throws BudgetExhausted when the next candidate exceeds limits.max_n or its
// cost would push the oracle calls past limits.max_oracle_calls.
EstimateResult adaptive_estimate(const VectorXd& theta, const LambdaGamma& lg, double Delta,
                                 const SamplingSchedule& schedule, std::int64_t nbar,
                                 const InverseMap& map, const Oracle& oracle,
                                 const KeyedStream& stream, const AdaptiveLimits& limits = {});

inline EstimateResult adaptive_estimate(const VectorXd& theta, std::int64_t k, double Delta,
                                        const SamplingSchedule& schedule, std::int64_t nbar,
                                        const InverseMap& map, const Oracle& oracle,
                                        const KeyedStream& stream,
                                        const AdaptiveLimits& limits = {}) {
  return adaptive_estimate(theta, lambda_gamma(schedule, k, map.input_dim()), Delta, schedule,
                           nbar, map, oracle, stream, limits);
}

}  // namespace sastro

#endif  // SASTRO_ESTIMATOR_HPP_
