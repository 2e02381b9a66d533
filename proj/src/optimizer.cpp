#include "sastro/optimizer.hpp"

#include <cmath>
#include <stdexcept>

#include "sastro/problems.hpp"

namespace sastro {

void TrustRegionConfig::validate() const {
  if (!(gamma_down > 0.0 && gamma_down < 1.0 && gamma_up > 1.0)) {
    throw std::invalid_argument("trust region: need 0 < gamma_down < 1 < gamma_up");
  }
  if (!(delta0 > 0.0 && delta0 <= delta_max)) {
    throw std::invalid_argument("trust region: need 0 < delta0 <= delta_max");
  }
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("trust region: eta must be in (0,1)");
  if (!(eta_tilde > 0.0)) throw std::invalid_argument("trust region: eta_tilde must be positive");
  if (k_max < 1 || w_max < 1) throw std::invalid_argument("trust region: caps must be positive");
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::SASTRODF: return "SASTRODF";
    case Variant::ASTRODF_C: return "ASTRODF-C";
    case Variant::ASTRODF_B: return "ASTRODF-B";
    case Variant::TRODF: return "TRODF";
  }
  return "?";
}

std::string_view to_string(TerminalReason r) {
  switch (r) {
    case TerminalReason::Budget: return "budget";
    case TerminalReason::Iterations: return "iterations";
    case TerminalReason::Stationarity: return "stationarity";
  }
  return "?";
}

AcceptanceRatio acceptance_ratio(double f_center, double f_candidate, double m_center,
                                 double m_candidate) {
  const double model_reduction = m_center - m_candidate;
  if (model_reduction < 1e-12 * (1.0 + std::abs(m_center))) return {0.0, true};
  return {(f_center - f_candidate) / model_reduction, false};
}

RadiusUpdate update_radius(double Delta, std::optional<double> rho, double grad_norm,
                           const TrustRegionConfig& config) {
  if (rho && *rho >= config.eta && Delta <= config.eta_tilde * grad_norm) {
    return {std::min(config.gamma_up * Delta, config.delta_max), true};
  }
  return {config.gamma_down * Delta, false};
}

SamplingSchedule schedule_for(Variant variant, SamplingSchedule base) {
  switch (variant) {
    case Variant::SASTRODF:
      if (!is_stratified(base.regime)) base.regime = Regime::StratBounded;
      break;
    case Variant::ASTRODF_C: base.regime = Regime::NsChebyshev; break;
    case Variant::ASTRODF_B: base.regime = Regime::NsBernstein; break;
    case Variant::TRODF: base.regime = Regime::Fixed; break;
  }
  return base;
}

namespace {

class BudgetStop : public std::exception {};

struct Runner {
  const Problem& problem;
  const TrustRegionConfig& config;
  const RunOptions& options;
  const SamplingSchedule& schedule;
  KeyedStream stream;

  std::int64_t w = 0;
  std::int64_t spent = 0;  // calls in the current iteration

  EstimateResult estimate(const VectorXd& point, const LambdaGamma& lg, double Delta,
                          const KeyedStream& point_stream) {
    const std::int64_t remaining = config.w_max - w - spent;
    if (schedule.regime == Regime::Fixed) {
      if (schedule.fixed_n > remaining) throw BudgetStop();
      auto r = plain_estimate(point, schedule.fixed_n, problem.oracle, problem.map, point_stream);
      spent += r.oracle_calls;
      return r;
    }
    AdaptiveLimits limits;
    limits.max_oracle_calls = std::max<std::int64_t>(0, remaining);
    try {
      auto r = adaptive_estimate(point, lg, Delta, schedule, options.nbar, problem.map,
                                 problem.oracle, point_stream, limits);
      spent += r.oracle_calls;
      return r;
    } catch (const BudgetExhausted& e) {
      spent += e.partial().oracle_calls;
      throw BudgetStop();
    }
  }

  std::optional<double> true_value(const VectorXd& theta) const {
    if (!problem.true_objective) return std::nullopt;
    return problem.true_objective(theta);
  }
};

PointSample summarize(const EstimateResult& r) { return {r.n, r.ell, r.pooled_variance}; }

}  // namespace

RunTrace run(const Problem& problem, const TrustRegionConfig& config, const RunOptions& options,
             std::uint64_t seed) {
  config.validate();
  const SamplingSchedule schedule = schedule_for(options.variant, options.schedule);
  schedule.validate();
  if (problem.theta0.size() != problem.d || problem.map.input_dim() != problem.q) {
    throw std::invalid_argument("run: problem dimensions are inconsistent");
  }
  if (options.variant == Variant::SASTRODF && options.nbar < 2) {
    throw std::invalid_argument("run: nbar must be >= 2");
  }
  if (config.stationarity_tol && !problem.true_gradient) {
    throw std::invalid_argument("run: stationarity test needs a true gradient");
  }

  Runner runner{problem, config, options, schedule,
                KeyedStream(seed).child(options.rep)};

  RunTrace trace;
  trace.seed = seed;
  trace.variant = options.label.empty() ? std::string(to_string(options.variant)) : options.label;

  VectorXd theta = problem.theta0;
  double Delta = config.delta0;
  std::optional<double> f_tilde;

  IterationRecord initial;
  initial.k = 0;
  initial.theta = theta;
  initial.Delta = initial.Delta_used = Delta;
  initial.true_f_incumbent = runner.true_value(theta);
  trace.records.push_back(initial);

  const auto d = problem.d;
  for (std::int64_t k = 0;; ++k) {
    if (runner.w >= config.w_max) {
      trace.reason = TerminalReason::Budget;
      break;
    }
    if (k >= config.k_max) {
      trace.reason = TerminalReason::Iterations;
      break;
    }
    if (config.stationarity_tol && problem.true_gradient(theta).norm() <= *config.stationarity_tol) {
      trace.reason = TerminalReason::Stationarity;
      break;
    }

    const LambdaGamma lg = schedule.regime == Regime::Fixed
                               ? LambdaGamma{static_cast<double>(schedule.fixed_n), 0.0}
                               : lambda_gamma(schedule, k, problem.q);
    const KeyedStream iteration_stream = runner.stream.child(static_cast<std::uint64_t>(k));

    IterationRecord rec;
    rec.k = k + 1;
    rec.Delta_used = Delta;
    rec.lambda = lg.lambda;
    rec.gamma = lg.gamma;
    runner.spent = 0;

    try {
      const auto design = design_points<double>(theta, Delta);
      VectorXd values(2 * d + 1);
      for (int i = 0; i < 2 * d + 1; ++i) {
        auto est = runner.estimate(design.points[i], lg, Delta,
                                   iteration_stream.child(static_cast<std::uint64_t>(i)));
        values[i] = est.mean;
        rec.samples.push_back(summarize(est));
      }
      const auto model = fit_dq_model<double>(values, theta, Delta);
      const VectorXd candidate = solve_subproblem(model);
      const double step = (candidate - theta).norm();

      std::optional<double> rho;
      double f_candidate = 0.0;
      if (step > 0.0) {
        auto est = runner.estimate(candidate, lg, Delta,
                                   iteration_stream.child(static_cast<std::uint64_t>(2 * d + 1)));
        f_candidate = est.mean;
        rec.samples.push_back(summarize(est));
        const auto ratio = acceptance_ratio(values[0], f_candidate, model.intercept, model(candidate));
        if (!ratio.degenerate) rho = ratio.value;
      }
      const auto upd = update_radius(Delta, rho, model_gradient_norm(model), config);
      rec.rho = rho;
      rec.accepted = upd.accepted && step > 0.0;
      if (rec.accepted) {
        theta = candidate;
        f_tilde = f_candidate;
      } else {
        f_tilde = values[0];
      }
      Delta = upd.Delta;
    } catch (const BudgetStop&) {
      runner.w += runner.spent;
      if (runner.spent > 0) {
        rec.theta = theta;
        rec.Delta = Delta;
        rec.rho.reset();
        rec.accepted = false;
        rec.w_cum = runner.w;
        rec.f_tilde_incumbent = f_tilde;
        rec.true_f_incumbent = trace.records.back().true_f_incumbent;
        trace.records.push_back(std::move(rec));
      }
      trace.reason = TerminalReason::Budget;
      break;
    }

    runner.w += runner.spent;
    rec.theta = theta;
    rec.Delta = Delta;
    rec.w_cum = runner.w;
    rec.f_tilde_incumbent = f_tilde;
    rec.true_f_incumbent =
        rec.accepted ? runner.true_value(theta) : trace.records.back().true_f_incumbent;
    trace.records.push_back(std::move(rec));
  }
  return trace;
}

}  // namespace sastro
