#include "sastro/datadriven.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>

namespace sastro {

Eigen::Index DiscreteMap::rank_for(double u) const {
  if (!(u > 0.0 && u <= 1.0)) throw std::domain_error("discrete map: u outside (0, 1]");
  const auto n = size();
  const auto rank = static_cast<Eigen::Index>(std::floor(u * static_cast<double>(n)));
  return std::min(rank, n - 1);
}

VectorXd leading_eigenvector(const MatrixXd& a, double tol, int max_iter) {
  Eigen::Index start = 0;
  a.colwise().norm().maxCoeff(&start);
  VectorXd v = a.col(start);
  if (v.norm() == 0.0) throw std::invalid_argument("leading_eigenvector: zero matrix");
  v.normalize();
  for (int it = 0; it < max_iter; ++it) {
    VectorXd next = a * v;
    const double norm = next.norm();
    if (norm == 0.0) break;
    next /= norm;
    const double change = (next - v).norm();
    v = std::move(next);
    if (change <= tol) break;
  }
  Eigen::Index big = 0;
  v.cwiseAbs().maxCoeff(&big);
  if (v[big] < 0.0) v = -v;
  return v;
}

DiscreteMap build_discrete_map(const MatrixXd& data) {
  if (data.rows() < 2) throw std::invalid_argument("build_discrete_map: need at least two rows");
  if (data.cols() < 1) throw std::invalid_argument("build_discrete_map: need at least one column");
  const MatrixXd centered = data.rowwise() - data.colwise().mean();
  const MatrixXd cov = centered.transpose() * centered / static_cast<double>(data.rows() - 1);
  if (cov.trace() <= 0.0) throw std::invalid_argument("build_discrete_map: zero covariance");

  DiscreteMap map;
  map.data = data;
  map.loading = leading_eigenvector(cov);
  map.scores = centered * map.loading;
  map.order.resize(static_cast<std::size_t>(data.rows()));
  std::iota(map.order.begin(), map.order.end(), Eigen::Index{0});
  std::stable_sort(map.order.begin(), map.order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return map.scores[a] < map.scores[b]; });
  return map;
}

MatrixXd sample_discrete(const DiscreteMap& map, std::int64_t n_hat, KeyedStream& stream) {
  if (n_hat < 1) throw std::invalid_argument("sample_discrete: n_hat must be positive");
  MatrixXd out(n_hat, map.data.cols());
  for (std::int64_t i = 0; i < n_hat; ++i) out.row(i) = map.data.row(map.row_for(stream.uniform()));
  return out;
}

DiscreteEstimate estimate_discrete(const VectorXd& theta, const Oracle& oracle,
                                   const DiscreteMap& map, std::span<const double> uniforms) {
  if (uniforms.size() < 2) throw InsufficientSamples("estimate_discrete: need nbar >= 2");
  VectorXd values(static_cast<Eigen::Index>(uniforms.size()));
  for (std::size_t i = 0; i < uniforms.size(); ++i) {
    const VectorXd row = map.data.row(map.row_for(uniforms[i])).transpose();
    values[static_cast<Eigen::Index>(i)] = oracle(theta, row);
  }
  const double mean = values.mean();
  const double var =
      (values.array() - mean).square().sum() / static_cast<double>(values.size() - 1);
  return {mean, var};
}

DiscreteEstimate estimate_discrete(const VectorXd& theta, const Oracle& oracle,
                                   const DiscreteMap& map, std::int64_t nbar,
                                   KeyedStream& stream) {
  if (nbar < 2) throw InsufficientSamples("estimate_discrete: need nbar >= 2");
  std::vector<double> u(static_cast<std::size_t>(nbar));
  for (auto& x : u) x = stream.uniform();
  return estimate_discrete(theta, oracle, map, u);
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto is_sep = [](char c) { return c == ',' || c == ';' || c == '\t' || c == ' ' || c == '\r'; };
  const bool has_hard_sep = line.find_first_of(",;\t") != std::string_view::npos;
  while (i <= line.size()) {
    std::size_t j = i;
    while (j < line.size() && !(has_hard_sep ? (line[j] == ',' || line[j] == ';' || line[j] == '\t')
                                             : is_sep(line[j]))) {
      ++j;
    }
    std::string_view field = line.substr(i, j - i);
    while (!field.empty() && is_sep(field.front())) field.remove_prefix(1);
    while (!field.empty() && is_sep(field.back())) field.remove_suffix(1);
    if (has_hard_sep || !field.empty()) out.push_back(field);
    if (j >= line.size()) break;
    i = j + 1;
  }
  return out;
}

std::optional<std::vector<double>> parse_row(std::string_view line) {
  std::vector<double> row;
  for (auto field : split_fields(line)) {
    double v = 0.0;
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
    row.push_back(v);
  }
  if (row.empty()) return std::nullopt;
  return row;
}

}  // namespace

MatrixXd read_delimited(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto row = parse_row(line);
    if (!row) {
      if (first_content) {  // header
        first_content = false;
        continue;
      }
      throw MalformedData("line " + std::to_string(line_no) + ": non-numeric field");
    }
    first_content = false;
    if (!rows.empty() && row->size() != rows.front().size()) {
      throw MalformedData("line " + std::to_string(line_no) + ": expected " +
                          std::to_string(rows.front().size()) + " fields, found " +
                          std::to_string(row->size()));
    }
    rows.push_back(std::move(*row));
  }
  if (rows.empty()) throw MalformedData("no data rows");
  MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return out;
}

MatrixXd read_delimited_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_delimited(in);
}

}  // namespace sastro
