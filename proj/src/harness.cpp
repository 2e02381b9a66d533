#include "sastro/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace sastro {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  in >> out;
  if (in.fail() || !in.eof()) {
    throw std::invalid_argument("config: bad value for " + key + ": '" + value + "'");
  }
  return out;
}

}  // namespace

VariantSpec parse_variant(const std::string& name) {
  if (name == "ASTRODF-C") return {name, Variant::ASTRODF_C, 1};
  if (name == "ASTRODF-B") return {name, Variant::ASTRODF_B, 1};
  if (name == "TRODF") return {name, Variant::TRODF, 1};
  static const std::regex sastro(R"(SASTRODF-([0-9]+))");
  std::smatch m;
  if (std::regex_match(name, m, sastro)) {
    const auto nbar = std::stoll(m[1]);
    if (nbar < 2) throw std::invalid_argument("variant " + name + ": nbar must be >= 2");
    return {name, Variant::SASTRODF, nbar};
  }
  throw std::invalid_argument("unknown variant: " + name);
}

void ExperimentConfig::validate() const {
  if (problems.empty()) throw std::invalid_argument("config: no problems");
  if (variants.empty()) throw std::invalid_argument("config: no variants");
  if (reps < 1) throw std::invalid_argument("config: reps must be >= 1");
  if (w_max < 1) throw std::invalid_argument("config: w_max must be positive");
  if (!(gap_fraction > 0.0)) throw std::invalid_argument("config: gap_fraction must be positive");
  for (std::size_t i = 1; i < budget_grid.size(); ++i) {
    if (budget_grid[i] <= budget_grid[i - 1]) {
      throw std::invalid_argument("config: budget_grid must be strictly increasing");
    }
  }
  for (const auto& v : variants) parse_variant(v);
  const auto known = problem_names();
  for (const auto& p : problems) {
    if (std::find(known.begin(), known.end(), p) == known.end()) {
      throw std::invalid_argument("unknown problem: " + p);
    }
  }
  schedule.validate();
  trust_region.validate();
}

std::vector<std::int64_t> ExperimentConfig::grid() const {
  return budget_grid.empty() ? default_budget_grid(w_max) : budget_grid;
}

std::vector<std::int64_t> default_budget_grid(std::int64_t w_max, int points) {
  std::vector<std::int64_t> grid;
  const double lo = std::log(std::min<double>(100.0, static_cast<double>(w_max)));
  const double hi = std::log(static_cast<double>(w_max));
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? 1.0 : static_cast<double>(i) / (points - 1);
    const auto g = static_cast<std::int64_t>(std::llround(std::exp(lo + t * (hi - lo))));
    if (grid.empty() || g > grid.back()) grid.push_back(g);
  }
  grid.back() = w_max;
  return grid;
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "problems") {
      c.problems = split(value, ',');
    } else if (key == "variants") {
      c.variants = split(value, ',');
    } else if (key == "reps") {
      c.reps = parse_number<int>(key, value);
    } else if (key == "w_max") {
      c.w_max = parse_number<std::int64_t>(key, value);
    } else if (key == "seed") {
      c.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "budget_grid") {
      c.budget_grid.clear();
      for (const auto& g : split(value, ',')) c.budget_grid.push_back(parse_number<std::int64_t>(key, g));
    } else if (key == "gap_fraction") {
      c.gap_fraction = parse_number<double>(key, value);
    } else if (key == "out_dir") {
      c.out_dir = value;
    } else if (key == "delta") {
      c.schedule.delta = parse_number<double>(key, value);
    } else if (key == "varrho") {
      c.schedule.varrho = parse_number<double>(key, value);
    } else if (key == "kappa_as") {
      c.schedule.kappa_as = parse_number<double>(key, value);
    } else if (key == "sigma2_min") {
      c.schedule.sigma2_min = parse_number<double>(key, value);
    } else if (key == "regime") {
      c.schedule.regime = regime_from_string(value);
    } else if (key == "trodf_n") {
      c.schedule.fixed_n = parse_number<std::int64_t>(key, value);
    } else if (key == "delta0") {
      c.trust_region.delta0 = parse_number<double>(key, value);
    } else if (key == "delta_max") {
      c.trust_region.delta_max = parse_number<double>(key, value);
    } else if (key == "eta") {
      c.trust_region.eta = parse_number<double>(key, value);
    } else if (key == "eta_tilde") {
      c.trust_region.eta_tilde = parse_number<double>(key, value);
    } else if (key == "gamma_up") {
      c.trust_region.gamma_up = parse_number<double>(key, value);
    } else if (key == "gamma_down") {
      c.trust_region.gamma_down = parse_number<double>(key, value);
    } else if (key == "k_max") {
      c.trust_region.k_max = parse_number<std::int64_t>(key, value);
    } else if (key == "threads") {
      c.threads = parse_number<int>(key, value);
    } else {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": unknown key '" +
                                  key + "'");
    }
  }
  c.trust_region.w_max = c.w_max;
  c.validate();
  return c;
}

ExperimentConfig read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return parse_config(in);
}

TraceSeries to_series(const RunTrace& trace, const std::string& problem, int rep) {
  TraceSeries s{problem, trace.variant, rep, {}, {}};
  for (const auto& r : trace.records) {
    s.w.push_back(r.w_cum);
    s.f.push_back(r.true_f_incumbent.value_or(std::nan("")));
  }
  return s;
}

std::vector<double> interpolate_on_grid(const TraceSeries& series,
                                        const std::vector<std::int64_t>& grid) {
  if (series.w.empty()) throw std::invalid_argument("interpolate_on_grid: empty trace");
  std::vector<double> out;
  out.reserve(grid.size());
  std::size_t i = 0;
  for (const auto g : grid) {
    while (i + 1 < series.w.size() && series.w[i + 1] <= g) ++i;
    out.push_back(series.f[i]);
  }
  return out;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

CurveSummary summarize_curves(const std::vector<TraceSeries>& traces,
                              const std::vector<std::int64_t>& grid) {
  std::map<std::pair<std::string, std::string>, std::vector<std::vector<double>>> groups;
  for (const auto& t : traces) groups[{t.problem, t.variant}].push_back(interpolate_on_grid(t, grid));

  CurveSummary rows;
  for (const auto& [key, curves] : groups) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      std::vector<double> column;
      column.reserve(curves.size());
      for (const auto& c : curves) column.push_back(c[g]);
      double sum = 0.0;
      for (double v : column) sum += v;
      rows.push_back({key.first, key.second, grid[g], sum / static_cast<double>(column.size()),
                      percentile(column, 0.1), percentile(column, 0.9)});
    }
  }
  return rows;
}

void write_trace_csv(std::ostream& out, const RunTrace& trace, int rep, int d) {
  out << "rep,k,w_cum,delta,rho,accepted,f_tilde,f_true";
  for (int j = 1; j <= d; ++j) out << ",theta_" << j;
  out << '\n';
  for (const auto& r : trace.records) {
    out << rep << ',' << r.k << ',' << r.w_cum << ',' << num(r.Delta) << ','
        << (r.rho ? num(*r.rho) : "") << ',' << (r.accepted ? 1 : 0) << ','
        << (r.f_tilde_incumbent ? num(*r.f_tilde_incumbent) : "") << ','
        << (r.true_f_incumbent ? num(*r.true_f_incumbent) : "");
    for (int j = 0; j < d; ++j) out << ',' << num(r.theta[j]);
    out << '\n';
  }
}

void write_summary_csv(std::ostream& out, const CurveSummary& summary) {
  out << "problem,variant,budget,mean_f,p10_f,p90_f\n";
  for (const auto& r : summary) {
    out << r.problem << ',' << r.variant << ',' << r.budget << ',' << num(r.mean_f) << ','
        << num(r.p10_f) << ',' << num(r.p90_f) << '\n';
  }
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  TrustRegionConfig tr = config.trust_region;
  tr.w_max = config.w_max;

  std::vector<Problem> problems;
  for (const auto& name : config.problems) {
    problems.push_back(make_problem(name));
    problems.back().name = name;
  }
  std::vector<VariantSpec> variants;
  for (const auto& v : config.variants) variants.push_back(parse_variant(v));

  ExperimentResult result;
  result.grid = config.grid();
  for (std::size_t p = 0; p < problems.size(); ++p) {
    for (const auto& v : variants) {
      for (int rep = 0; rep < config.reps; ++rep) {
        result.runs.push_back({problems[p].name, v.name, rep, {}});
      }
    }
  }

  const std::size_t total = result.runs.size();
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      auto& job = result.runs[i];
      try {
        const auto& problem =
            *std::find_if(problems.begin(), problems.end(),
                          [&](const Problem& pr) { return pr.name == job.problem; });
        const auto spec = parse_variant(job.variant);
        RunOptions opts;
        opts.variant = spec.variant;
        opts.nbar = spec.nbar;
        opts.schedule = config.schedule;
        opts.label = spec.name;
        job.trace = run(problem, tr, opts, config.seed + static_cast<std::uint64_t>(job.rep));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto n_threads = static_cast<std::size_t>(
      std::min<std::size_t>(config.threads > 0 ? static_cast<std::size_t>(config.threads) : hw, total));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  std::vector<TraceSeries> series;
  for (const auto& r : result.runs) series.push_back(to_series(r.trace, r.problem, r.rep));
  result.summary = summarize_curves(series, result.grid);

  if (!config.out_dir.empty()) {
    const fs::path root(config.out_dir);
    const fs::path traces = root / "traces";
    std::error_code ec;
    fs::create_directories(traces, ec);
    if (ec) throw std::runtime_error("cannot create " + traces.string() + ": " + ec.message());
    for (const auto& r : result.runs) {
      const auto d = static_cast<int>(r.trace.records.front().theta.size());
      const fs::path file = traces / (r.problem + "__" + r.variant + "__rep" + std::to_string(r.rep) + ".csv");
      std::ofstream out(file);
      if (!out) throw std::runtime_error("cannot write " + file.string());
      write_trace_csv(out, r.trace, r.rep, d);
    }
    std::ofstream summary(root / "summary.csv");
    if (!summary) throw std::runtime_error("cannot write summary.csv in " + root.string());
    write_summary_csv(summary, result.summary);
    std::ofstream manifest(root / "manifest.txt");
    manifest << "w_max=" << config.w_max << "\nreps=" << config.reps << "\nseed=" << config.seed
             << "\ngap_fraction=" << num(config.gap_fraction) << '\n';
  }
  return result;
}

TraceSeries read_trace_csv(std::istream& in, const std::string& problem, const std::string& variant) {
  TraceSeries s{problem, variant, 0, {}, {}};
  std::string line;
  if (!std::getline(in, line) || line.rfind("rep,k,w_cum,delta,rho,accepted,f_tilde,f_true", 0) != 0) {
    throw std::runtime_error("trace csv: unexpected header");
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() < 8) throw std::runtime_error("trace csv line " + std::to_string(line_no) + ": too few fields");
    s.rep = std::stoi(fields[0]);
    s.w.push_back(std::stoll(fields[2]));
    s.f.push_back(fields[7].empty() ? std::nan("") : std::stod(fields[7]));
  }
  if (s.w.empty()) throw std::runtime_error("trace csv: no rows");
  return s;
}

std::vector<TraceSeries> read_trace_dir(const fs::path& dir) {
  static const std::regex name_re(R"((.+)__(.+)__rep([0-9]+)\.csv)");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<TraceSeries> out;
  for (const auto& path : files) {
    std::smatch m;
    const std::string fname = path.filename().string();
    if (!std::regex_match(fname, m, name_re)) continue;
    std::ifstream in(path);
    out.push_back(read_trace_csv(in, m[1], m[2]));
  }
  return out;
}

std::optional<std::int64_t> solve_budget(const TraceSeries& series, double f_star, double gap_fraction) {
  if (series.f.empty()) return std::nullopt;
  const double threshold = gap_fraction * (series.f.front() - f_star);
  for (std::size_t i = 0; i < series.f.size(); ++i) {
    if (series.f[i] - f_star <= threshold) return series.w[i];
  }
  return std::nullopt;
}

std::vector<ProfileCurve> solvability_profile(const std::vector<TraceSeries>& traces,
                                              const std::vector<std::pair<std::string, double>>& f_star,
                                              std::int64_t w_max, double gap_fraction,
                                              const std::vector<double>& fractions) {
  std::map<std::string, std::vector<std::optional<std::int64_t>>> by_variant;
  std::vector<std::string> warned;
  for (const auto& t : traces) {
    auto it = std::find_if(f_star.begin(), f_star.end(), [&](const auto& e) { return e.first == t.problem; });
    if (it == f_star.end()) {
      if (std::find(warned.begin(), warned.end(), t.problem) == warned.end()) {
        std::cerr << "warning: no known optimum for problem '" << t.problem << "', excluded\n";
        warned.push_back(t.problem);
      }
      continue;
    }
    by_variant[t.variant].push_back(solve_budget(t, it->second, gap_fraction));
  }
  std::vector<ProfileCurve> curves;
  for (const auto& [variant, solved_at] : by_variant) {
    ProfileCurve c{variant, fractions, {}};
    for (double b : fractions) {
      const double budget = b * static_cast<double>(w_max);
      std::size_t count = 0;
      for (const auto& s : solved_at) {
        if (s && static_cast<double>(*s) <= budget) ++count;
      }
      c.solved.push_back(static_cast<double>(count) / static_cast<double>(solved_at.size()));
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

std::vector<double> default_fractions(int points) {
  std::vector<double> out;
  for (int i = 0; i <= points; ++i) out.push_back(static_cast<double>(i) / points);
  return out;
}

void write_profile_csv(std::ostream& out, const std::vector<ProfileCurve>& curves) {
  out << "variant,budget_fraction,solved_fraction\n";
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.fractions.size(); ++i) {
      out << c.variant << ',' << num(c.fractions[i]) << ',' << num(c.solved[i]) << '\n';
    }
  }
}

}  // namespace sastro
