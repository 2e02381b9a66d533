#include "sastro/estimator.hpp"

#include <cmath>
#include <string>

namespace sastro {

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::StratBounded: return "STRAT_BOUNDED";
    case Regime::StratSePo: return "STRAT_SE_PO";
    case Regime::StratSeEx: return "STRAT_SE_EX";
    case Regime::StratSgPo: return "STRAT_SG_PO";
    case Regime::StratSgEx: return "STRAT_SG_EX";
    case Regime::NsChebyshev: return "NS_CHEBYSHEV";
    case Regime::NsBernstein: return "NS_BERNSTEIN";
    case Regime::Fixed: return "FIXED";
  }
  return "?";
}

Regime regime_from_string(std::string_view name) {
  for (auto r : {Regime::StratBounded, Regime::StratSePo, Regime::StratSeEx, Regime::StratSgPo,
                 Regime::StratSgEx, Regime::NsChebyshev, Regime::NsBernstein, Regime::Fixed}) {
    if (to_string(r) == name) return r;
  }
  throw std::invalid_argument("unknown sampling regime: " + std::string(name));
}

bool is_stratified(Regime regime) {
  switch (regime) {
    case Regime::StratBounded:
    case Regime::StratSePo:
    case Regime::StratSeEx:
    case Regime::StratSgPo:
    case Regime::StratSgEx:
      return true;
    default:
      return false;
  }
}

void SamplingSchedule::validate() const {
  if (regime == Regime::Fixed) {
    if (fixed_n < 2) throw std::invalid_argument("fixed sample size must be >= 2");
    return;
  }
  if (!(delta > 0.0)) throw std::invalid_argument("schedule: delta must be positive");
  if (!(varrho > 0.0)) throw std::invalid_argument("schedule: varrho must be positive");
  if (!(kappa_as > 0.0)) throw std::invalid_argument("schedule: kappa_as must be positive");
  if (!(sigma2_min > 0.0)) throw std::invalid_argument("schedule: sigma2_min must be positive");
  if (regime == Regime::StratSeEx && !(kappa_min > 2.0 * b_max)) {
    throw std::invalid_argument("schedule: STRAT_SE_EX requires kappa_min > 2 b_max");
  }
}

LambdaGamma lambda_gamma(const SamplingSchedule& s, std::int64_t k, int q) {
  if (k < 0) throw std::invalid_argument("lambda_gamma: negative iteration");
  if (q < 1) throw std::invalid_argument("lambda_gamma: dimension must be positive");
  s.validate();
  const double kk = static_cast<double>(k) + 1.0;
  const double qd = q;
  switch (s.regime) {
    case Regime::StratBounded:
      return {std::pow(kk, (1.0 + s.delta) * qd / (qd + 2.0)), 2.0 * qd / (qd + 2.0)};
    case Regime::StratSePo:
    case Regime::StratSgPo:
    case Regime::StratSgEx:
      return {std::pow(kk, (1.0 + s.delta) * qd / (qd + 1.0)),
              (4.0 + s.varrho) * qd / (2.0 * (qd + 1.0))};
    case Regime::StratSeEx: {
      const double denom = (qd + 1.0) * s.kappa_min - 2.0 * s.b_max;
      return {std::pow(kk, (1.0 + s.delta) * qd * s.kappa_min / denom),
              2.0 * qd * s.kappa_min / denom};
    }
    case Regime::NsChebyshev:
      return {std::pow(kk, 1.0 + s.delta), 2.0};
    case Regime::NsBernstein:
      return {std::pow(std::log(kk + 1.0), 1.0 + s.delta), 2.0};
    case Regime::Fixed:
      return {static_cast<double>(s.fixed_n), 0.0};
  }
  throw std::logic_error("lambda_gamma: unhandled regime");
}

EstimateResult stratified_estimate(const VectorXd& theta, std::int64_t n, std::int64_t nbar,
                                   const InverseMap& map, const Oracle& oracle,
                                   const KeyedStream& stream) {
  if (nbar < 2) {
    throw InsufficientSamples("stratified_estimate: per-stratum variance needs nbar >= 2");
  }
  if (n < nbar || n % nbar != 0) {
    throw std::invalid_argument("stratified_estimate: n must be a multiple of nbar");
  }
  const StrataGrid grid(n / nbar, map.input_dim());
  const auto ell = grid.count();

  double mean_sum = 0.0;
  double var_sum = 0.0;
  VectorXd values(nbar);
  for (std::int64_t s = 0; s < ell; ++s) {
    KeyedStream draws = stream.child(static_cast<std::uint64_t>(s));
    const VectorXd left = grid.left_endpoint(s);
    for (std::int64_t i = 0; i < nbar; ++i) {
      values[i] = oracle(theta, map(sample_in_stratum(left, grid.splits(), draws)));
    }
    const double m = values.mean();
    mean_sum += m;
    var_sum += (values.array() - m).square().sum() / static_cast<double>(nbar - 1);
  }

  EstimateResult r;
  r.mean = mean_sum / static_cast<double>(ell);
  r.pooled_variance = var_sum / static_cast<double>(ell);
  r.n = n;
  r.ell = ell;
  r.oracle_calls = n;
  return r;
}

EstimateResult plain_estimate(const VectorXd& theta, std::int64_t n, const Oracle& oracle,
                              const InverseMap& map, const KeyedStream& stream) {
  return stratified_estimate(theta, n, n, map, oracle, stream);
}

double rule_threshold(const SamplingSchedule& schedule, const LambdaGamma& lg, double Delta) {
  return schedule.kappa_as * std::pow(Delta, lg.gamma) / std::sqrt(lg.lambda);
}

bool rule_satisfied(const SamplingSchedule& schedule, const LambdaGamma& lg, double Delta,
                    std::int64_t n, double pooled_variance) {
  const double floored = std::max(schedule.sigma2_min, pooled_variance);
  return std::sqrt(floored / static_cast<double>(n)) <= rule_threshold(schedule, lg, Delta);
}

namespace {

// Each candidate size gets a fresh estimate on stream.child(round); every
// evaluation, including rejected rounds, is charged.
template <typename Next, typename Estimate>
EstimateResult stopping_loop(const LambdaGamma& lg, double Delta, const SamplingSchedule& schedule,
                             const AdaptiveLimits& limits, std::int64_t n, Next next,
                             Estimate estimate) {
  EstimateResult last;
  std::int64_t calls = 0;
  for (std::uint64_t round = 0;; ++round) {
    if (n > limits.max_n || calls > limits.max_oracle_calls - n) {
      last.oracle_calls = calls;
      throw BudgetExhausted("adaptive_estimate: sample size " + std::to_string(n) +
                                " exceeds the available budget",
                            last);
    }
    last = estimate(n, round);
    calls += last.oracle_calls;
    last.oracle_calls = calls;
    if (rule_satisfied(schedule, lg, Delta, n, last.pooled_variance)) return last;
    n = next(n);
  }
}

}  // namespace

EstimateResult adaptive_estimate(const VectorXd& theta, const LambdaGamma& lg, double Delta,
                                 const SamplingSchedule& schedule, std::int64_t nbar,
                                 const InverseMap& map, const Oracle& oracle,
                                 const KeyedStream& stream, const AdaptiveLimits& limits) {
  if (!(Delta > 0.0)) throw std::invalid_argument("adaptive_estimate: Delta must be positive");
  if (schedule.regime == Regime::Fixed) {
    throw std::invalid_argument("adaptive_estimate: FIXED regime has no sampling rule");
  }
  if (!(lg.lambda > 0.0)) throw std::invalid_argument("adaptive_estimate: lambda must be positive");
  schedule.validate();
  if (is_stratified(schedule.regime)) {
    const AdmissibleSizes sizes(nbar, map.input_dim());
    return stopping_loop(
        lg, Delta, schedule, limits, sizes.first_at_least(lg.lambda),
        [&](std::int64_t n) { return sizes.next(n); },
        [&](std::int64_t n, std::uint64_t round) {
          return stratified_estimate(theta, n, nbar, map, oracle, stream.child(round));
        });
  }
  // ell = 1: every n >= 2 is admissible.
  return stopping_loop(
      lg, Delta, schedule, limits,
      std::max<std::int64_t>(2, static_cast<std::int64_t>(std::ceil(lg.lambda))),
      [](std::int64_t n) { return n + 1; },
      [&](std::int64_t n, std::uint64_t round) {
        return plain_estimate(theta, n, oracle, map, stream.child(round));
      });
}

}  // namespace sastro
