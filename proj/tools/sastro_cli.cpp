// sastro: run single solves, full experiments and solvability profiles.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sastro/harness.hpp"
#include "sastro/optimizer.hpp"
#include "sastro/problems.hpp"

namespace fs = std::filesystem;

namespace {

std::optional<std::int64_t> manifest_wmax(const fs::path& traces) {
  for (const fs::path& dir : {traces.parent_path(), traces}) {
    std::ifstream in(dir / "manifest.txt");
    std::string line;
    while (in && std::getline(in, line)) {
      if (line.rfind("w_max=", 0) == 0) return std::stoll(line.substr(6));
    }
  }
  return std::nullopt;
}

int cmd_run(const std::string& problem_name, const std::string& variant_name, std::uint64_t seed,
            std::int64_t w_max, std::optional<std::int64_t> nbar, std::optional<double> delta,
            std::optional<double> varrho, const std::string& out_path) {
  const sastro::Problem problem = sastro::make_problem(problem_name);
  sastro::VariantSpec spec = sastro::parse_variant(variant_name);
  if (nbar) spec.nbar = *nbar;

  sastro::TrustRegionConfig config;
  config.w_max = w_max;
  sastro::RunOptions options;
  options.variant = spec.variant;
  options.nbar = spec.nbar;
  options.label = spec.name;
  if (delta) options.schedule.delta = *delta;
  if (varrho) options.schedule.varrho = *varrho;

  const sastro::RunTrace trace = sastro::run(problem, config, options, seed);
  if (out_path.empty() || out_path == "-") {
    sastro::write_trace_csv(std::cout, trace, 0, problem.d);
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    sastro::write_trace_csv(out, trace, 0, problem.d);
  }
  const auto& last = trace.records.back();
  std::cerr << problem.name << ' ' << spec.name << ": " << last.k << " iterations, "
            << last.w_cum << " oracle calls, stop=" << sastro::to_string(trace.reason);
  if (last.true_f_incumbent) std::cerr << ", f=" << *last.true_f_incumbent;
  std::cerr << '\n';
  return 0;
}

int cmd_experiment(const std::string& config_path) {
  const sastro::ExperimentConfig config = sastro::read_config_file(config_path);
  const sastro::ExperimentResult result = sastro::run_experiment(config);
  if (config.out_dir.empty()) sastro::write_summary_csv(std::cout, result.summary);
  std::cerr << result.runs.size() << " runs finished\n";
  return 0;
}

int cmd_profile(const std::string& traces_dir, double gap, std::optional<std::int64_t> w_max,
                const std::string& out_path) {
  const auto traces = sastro::read_trace_dir(traces_dir);
  if (traces.empty()) throw std::runtime_error("no trace files in " + traces_dir);
  if (!w_max) w_max = manifest_wmax(traces_dir);
  if (!w_max) throw std::runtime_error("w_max unknown: pass --wmax or keep manifest.txt");

  std::map<std::string, std::optional<double>> known;
  std::vector<std::pair<std::string, double>> f_star;
  for (const auto& t : traces) {
    if (known.count(t.problem)) continue;
    std::optional<double> value;
    try {
      value = sastro::make_problem(t.problem).f_star;
    } catch (const std::invalid_argument&) {
    }
    known[t.problem] = value;
    if (value) f_star.emplace_back(t.problem, *value);
  }
  const auto curves =
      sastro::solvability_profile(traces, f_star, *w_max, gap, sastro::default_fractions());
  if (out_path.empty() || out_path == "-") {
    sastro::write_profile_csv(std::cout, curves);
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    sastro::write_profile_csv(out, curves);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stratified adaptive-sampling trust-region solver"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Solve one problem with one variant and print its trace");
  std::string problem = "ex1";
  std::string variant = "SASTRODF-2";
  std::uint64_t seed = 0;
  std::int64_t w_max = 200'000;
  std::optional<std::int64_t> nbar;
  std::optional<double> delta;
  std::optional<double> varrho;
  std::string run_out;
  run->add_option("--problem", problem, "ex1, ex2, ex3, portfolio or portfolio-alt")
      ->capture_default_str();
  run->add_option("--variant", variant, "SASTRODF-<nbar>, ASTRODF-C, ASTRODF-B or TRODF")
      ->capture_default_str();
  run->add_option("--seed", seed)->capture_default_str();
  run->add_option("--wmax", w_max, "Oracle call budget")->capture_default_str()->check(CLI::PositiveNumber);
  run->add_option("--nbar", nbar, "Draws per stratum (overrides the variant name)")
      ->check(CLI::Range(std::int64_t{2}, std::int64_t{1'000'000}));
  run->add_option("--delta", delta, "Schedule exponent slack")->check(CLI::PositiveNumber);
  run->add_option("--varrho", varrho, "Sub-gaussian/sub-exponential exponent slack")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--out", run_out, "Trace CSV path (stdout when omitted)");

  auto* experiment = app.add_subcommand("experiment", "Run a replicated experiment from a config file");
  std::string config_path;
  experiment->add_option("--config", config_path, "key=value config file")
      ->required()
      ->check(CLI::ExistingFile);

  auto* profile = app.add_subcommand("profile", "Solvability profile from a directory of traces");
  std::string traces_dir;
  double gap = 0.1;
  std::optional<std::int64_t> profile_wmax;
  std::string profile_out;
  profile->add_option("--traces", traces_dir, "Directory of trace CSVs")
      ->required()
      ->check(CLI::ExistingDirectory);
  profile->add_option("--gap", gap, "Fraction of the initial optimality gap")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  profile->add_option("--wmax", profile_wmax, "Budget (read from manifest.txt when omitted)");
  profile->add_option("--out", profile_out, "Profile CSV path (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(problem, variant, seed, w_max, nbar, delta, varrho, run_out);
    if (*experiment) return cmd_experiment(config_path);
    if (*profile) return cmd_profile(traces_dir, gap, profile_wmax, profile_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
