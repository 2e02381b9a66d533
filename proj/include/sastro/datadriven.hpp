#ifndef SASTRO_DATADRIVEN_HPP_
#define SASTRO_DATADRIVEN_HPP_

#include <cstdint>
#include <istream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sastro/estimator.hpp"
#include "sastro/rng.hpp"

namespace sastro {

// Rows of a dataset ranked by their first principal component score, so that
// a scalar uniform selects a row: u is floored onto {0, 1/n, ..., (n-1)/n}
// and endpoint j/n picks the row of rank j.
struct DiscreteMap {
  MatrixXd data;
  VectorXd loading;  // unit leading eigenvector of the covariance
  VectorXd scores;   // centered rows projected on `loading`
  std::vector<Eigen::Index> order;  // order[j] = row index of rank j

  Eigen::Index size() const { return data.rows(); }
  double endpoint(Eigen::Index rank) const {
    return static_cast<double>(rank) / static_cast<double>(size());
  }
  // Rank selected by u in (0, 1].
  Eigen::Index rank_for(double u) const;
  Eigen::Index row_for(double u) const { return order[static_cast<std::size_t>(rank_for(u))]; }
};

// Leading eigenvector of a symmetric positive semidefinite matrix by power
// iteration; sign chosen so the largest-magnitude entry is positive.
VectorXd leading_eigenvector(const MatrixXd& symmetric, double tol = 1e-10,
                             int max_iter = 1'000'000);

// Throws std::invalid_argument for fewer than two rows or zero covariance.
DiscreteMap build_discrete_map(const MatrixXd& data);

// n_hat independent rows (with replacement), one per row of the result.
MatrixXd sample_discrete(const DiscreteMap& map, std::int64_t n_hat, KeyedStream& stream);

struct DiscreteEstimate {
  double mean;
  double variance;  // unbiased sample variance of the oracle values
};

DiscreteEstimate estimate_discrete(const VectorXd& theta, const Oracle& oracle,
                                   const DiscreteMap& map, std::int64_t nbar,
                                   KeyedStream& stream);

// Same estimate on caller-supplied uniforms.
DiscreteEstimate estimate_discrete(const VectorXd& theta, const Oracle& oracle,
                                   const DiscreteMap& map, std::span<const double> uniforms);

class MalformedData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numeric table from delimited text. Fields split on commas, semicolons,
// tabs or spaces. A first line that does not parse as numbers is taken as a
// header. Throws MalformedData naming the 1-based line of the first bad row.
MatrixXd read_delimited(std::istream& in);
MatrixXd read_delimited_file(const std::string& path);

}  // namespace sastro

#endif  // SASTRO_DATADRIVEN_HPP_
