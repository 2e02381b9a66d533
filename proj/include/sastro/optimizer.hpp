#ifndef SASTRO_OPTIMIZER_HPP_
#define SASTRO_OPTIMIZER_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "sastro/estimator.hpp"
#include "sastro/model.hpp"

namespace sastro {

struct Problem;

struct TrustRegionConfig {
  double delta0 = 1.0;
  double delta_max = 100.0;
  double eta = 0.1;
  double eta_tilde = 10.0;
  double gamma_up = 2.0;
  double gamma_down = 0.5;
  std::int64_t k_max = 1'000'000;
  std::int64_t w_max = 200'000;
  // Stop once the true gradient norm drops below this; needs a problem that
  // exposes its gradient. Disabled when unset.
  std::optional<double> stationarity_tol;

  void validate() const;
};

enum class Variant { SASTRODF, ASTRODF_C, ASTRODF_B, TRODF };

std::string_view to_string(Variant v);

enum class TerminalReason { Budget, Iterations, Stationarity };

std::string_view to_string(TerminalReason r);

// Sample statistics of one estimated point, kept for post-hoc audits.
struct PointSample {
  std::int64_t n = 0;
  std::int64_t ell = 0;
  double pooled_variance = 0.0;
};

// State after one iteration. Row k = 0 of a trace is the initial state.
struct IterationRecord {
  std::int64_t k = 0;
  VectorXd theta;
  double Delta = 0.0;
  // Radius the iteration was run with (equals Delta for the initial row).
  double Delta_used = 0.0;
  std::optional<double> rho;
  bool accepted = false;
  double lambda = 0.0;
  double gamma = 0.0;
  // 2d+1 design points, then the candidate when it was estimated.
  std::vector<PointSample> samples;
  std::int64_t w_cum = 0;
  std::optional<double> f_tilde_incumbent;
  std::optional<double> true_f_incumbent;
};

struct RunTrace {
  std::vector<IterationRecord> records;
  std::uint64_t seed = 0;
  std::string variant;
  TerminalReason reason = TerminalReason::Budget;
};

struct AcceptanceRatio {
  double value = 0.0;
  bool degenerate = false;
};

// (f_center - f_candidate) / (m_center - m_candidate), degenerate when the
// model reduction is below 1e-12 (1 + |m_center|).
AcceptanceRatio acceptance_ratio(double f_center, double f_candidate, double m_center,
                                 double m_candidate);

struct RadiusUpdate {
  double Delta;
  bool accepted;
};

// Expands (capped at delta_max) and accepts when rho >= eta and
// Delta <= eta_tilde * grad_norm; otherwise contracts and rejects.
RadiusUpdate update_radius(double Delta, std::optional<double> rho, double grad_norm,
                           const TrustRegionConfig& config);

struct RunOptions {
  Variant variant = Variant::SASTRODF;
  SamplingSchedule schedule;
  std::int64_t nbar = 2;
  // Replication index mixed into the stream keys.
  std::uint64_t rep = 0;
  std::string label;
};

// Derives the schedule regime that matches a variant: SASTRODF keeps the
// stratified regime from `base` (STRAT_BOUNDED unless set), ASTRODF_C uses
// NS_CHEBYSHEV, ASTRODF_B uses NS_BERNSTEIN and TRODF uses FIXED.
SamplingSchedule schedule_for(Variant variant, SamplingSchedule base);

RunTrace run(const Problem& problem, const TrustRegionConfig& config, const RunOptions& options,
             std::uint64_t seed);

}  // namespace sastro

#endif  // SASTRO_OPTIMIZER_HPP_
