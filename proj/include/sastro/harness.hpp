#ifndef SASTRO_HARNESS_HPP_
#define SASTRO_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sastro/optimizer.hpp"
#include "sastro/problems.hpp"

namespace sastro {

// Named solver configuration: "SASTRODF-<nbar>", "ASTRODF-C", "ASTRODF-B", "TRODF".
struct VariantSpec {
  std::string name;
  Variant variant;
  std::int64_t nbar;
};

VariantSpec parse_variant(const std::string& name);

struct ExperimentConfig {
  std::vector<std::string> problems;
  std::vector<std::string> variants;
  int reps = 20;
  std::int64_t w_max = 200'000;
  std::uint64_t seed = 0;
  // Empty means default_budget_grid(w_max).
  std::vector<std::int64_t> budget_grid;
  double gap_fraction = 0.1;
  std::string out_dir;
  SamplingSchedule schedule;
  TrustRegionConfig trust_region;
  // Worker threads; 0 picks the hardware concurrency.
  int threads = 0;

  void validate() const;
  std::vector<std::int64_t> grid() const;
};

// 50 log-spaced integer budgets ending at w_max, deduplicated.
std::vector<std::int64_t> default_budget_grid(std::int64_t w_max, int points = 50);

// Flat key=value text; '#' starts a comment. Unknown keys are rejected.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig read_config_file(const std::filesystem::path& path);

// Trace of true incumbent values indexed by cumulative oracle calls.
struct TraceSeries {
  std::string problem;
  std::string variant;
  int rep = 0;
  std::vector<std::int64_t> w;
  std::vector<double> f;
};

TraceSeries to_series(const RunTrace& trace, const std::string& problem, int rep);

// Value of the last record with w_cum <= g, for each g in the grid.
std::vector<double> interpolate_on_grid(const TraceSeries& series,
                                        const std::vector<std::int64_t>& grid);

// Linear-interpolation percentile (p in [0, 1]) of a non-empty sample.
double percentile(std::vector<double> values, double p);

struct CurveRow {
  std::string problem;
  std::string variant;
  std::int64_t budget;
  double mean_f;
  double p10_f;
  double p90_f;
};

using CurveSummary = std::vector<CurveRow>;

// Rows sorted by (problem, variant, budget).
CurveSummary summarize_curves(const std::vector<TraceSeries>& traces,
                              const std::vector<std::int64_t>& grid);

struct ExperimentRun {
  std::string problem;
  std::string variant;
  int rep;
  RunTrace trace;
};

struct ExperimentResult {
  std::vector<ExperimentRun> runs;
  CurveSummary summary;
  std::vector<std::int64_t> grid;
};

// Runs problems x variants x reps with seed = config.seed + rep. When
// out_dir is set, writes traces/<problem>__<variant>__rep<r>.csv,
// summary.csv and manifest.txt there.
ExperimentResult run_experiment(const ExperimentConfig& config);

void write_trace_csv(std::ostream& out, const RunTrace& trace, int rep, int d);
void write_summary_csv(std::ostream& out, const CurveSummary& summary);

// Parses a trace CSV written by write_trace_csv.
TraceSeries read_trace_csv(std::istream& in, const std::string& problem,
                           const std::string& variant);
// Loads every "<problem>__<variant>__rep<r>.csv" in a directory.
std::vector<TraceSeries> read_trace_dir(const std::filesystem::path& dir);

// First budget at which f - f_star <= gap_fraction (f(theta0) - f_star).
std::optional<std::int64_t> solve_budget(const TraceSeries& series, double f_star,
                                         double gap_fraction);

struct ProfileCurve {
  std::string variant;
  std::vector<double> fractions;
  std::vector<double> solved;
};

// Fraction of (problem, rep) pairs solved by budget fraction b * w_max. Pairs
// whose problem has no entry in f_star are skipped with a warning on stderr.
std::vector<ProfileCurve> solvability_profile(
    const std::vector<TraceSeries>& traces,
    const std::vector<std::pair<std::string, double>>& f_star, std::int64_t w_max,
    double gap_fraction, const std::vector<double>& fractions);

std::vector<double> default_fractions(int points = 100);

void write_profile_csv(std::ostream& out, const std::vector<ProfileCurve>& curves);

}  // namespace sastro

#endif  // SASTRO_HARNESS_HPP_
