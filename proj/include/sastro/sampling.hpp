#ifndef SASTRO_SAMPLING_HPP_
#define SASTRO_SAMPLING_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "sastro/rng.hpp"

namespace sastro {

using Eigen::MatrixXd;
using Eigen::VectorXd;

class InvalidStrataCount : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// m such that m^q == ell, if it exists.
std::optional<std::int64_t> integer_root(std::int64_t ell, int q);

// Equiprobable partition of (0,1]^q into ell = m^q half-open boxes
// (left, left + 1/m] of side 1/m. Strata are indexed 0..ell-1 in
// lexicographic order of their left endpoints, first coordinate most
// significant.
class StrataGrid {
 public:
  StrataGrid(std::int64_t ell, int q);

  int dim() const { return q_; }
  std::int64_t count() const { return ell_; }
  std::int64_t splits() const { return m_; }
  double width() const { return 1.0 / static_cast<double>(m_); }

  VectorXd left_endpoint(std::int64_t index) const;

  // Index of the stratum containing u in (0,1]^q.
  std::int64_t locate(const Eigen::Ref<const VectorXd>& u) const;

 private:
  int q_;
  std::int64_t ell_;
  std::int64_t m_;
};

// All left endpoints as rows of an ell x q matrix.
MatrixXd strata_left_endpoints(std::int64_t ell, int q);

// Admissible sample totals {nbar * m^q : m = 1, 2, ...}.
class AdmissibleSizes {
 public:
  AdmissibleSizes(std::int64_t nbar, int q);

  std::int64_t per_stratum() const { return nbar_; }
  int dim() const { return q_; }

  // Smallest admissible size strictly greater than n.
  std::int64_t next(std::int64_t n) const;
  // Smallest admissible size >= x.
  std::int64_t first_at_least(double x) const;
  bool contains(std::int64_t n) const;
  // ell = n / nbar for an admissible n.
  std::int64_t strata_for(std::int64_t n) const;

 private:
  std::int64_t nbar_;
  int q_;
};

std::int64_t next_admissible(std::int64_t n, std::int64_t nbar, int q);

// Smallest perfect q-th power >= ceil(c^{q/2}): the strata count for a
// c-fold variance reduction under a bounded inverse-map gradient.
std::int64_t strata_for_speedup(double c, int q);

// left + v / m, with v in (0,1]^q.
VectorXd map_to_stratum(const Eigen::Ref<const VectorXd>& left, std::int64_t m,
                        const Eigen::Ref<const VectorXd>& v);

// Uniform point in the box (left, left + 1/m]^q drawn from `stream`.
VectorXd sample_in_stratum(const Eigen::Ref<const VectorXd>& left, std::int64_t m,
                           KeyedStream& stream);

// ---------------------------------------------------------------------------
// Inverse-transform maps from the unit cube to the noise space.

using ScalarQuantile = std::function<double(double)>;

ScalarQuantile uniform_quantile(double lo = 0.0, double hi = 1.0);
ScalarQuantile gaussian_quantile(double mean = 0.0, double sd = 1.0);
ScalarQuantile truncated_gaussian_quantile(double mean, double sd, double a, double b);

struct TruncatedGaussianMap {
  VectorXd mean;
  VectorXd sd;
  VectorXd lower;
  VectorXd upper;
};

// Rosenblatt map with independent margins.
struct QuantileMap {
  std::vector<ScalarQuantile> margins;
};

// X_i = Y_i + sum_m loadings(i, m) Z_m with independent Y and Z. Input
// coordinates are (u_Y, u_Z), so the input dimension is rows + cols of
// `loadings` and the output dimension is its row count.
struct FactorMap {
  std::vector<ScalarQuantile> idiosyncratic;
  std::vector<ScalarQuantile> factors;
  MatrixXd loadings;
};

struct CustomMap {
  int input_dim = 0;
  int output_dim = 0;
  std::function<VectorXd(const VectorXd&)> apply;
};

class InverseMap {
 public:
  using Kind = std::variant<TruncatedGaussianMap, QuantileMap, FactorMap, CustomMap>;

  explicit InverseMap(Kind kind);

  static InverseMap truncated_gaussian(VectorXd mean, VectorXd sd, VectorXd lower,
                                       VectorXd upper);
  static InverseMap truncated_standard_gaussian(int q, double bound);
  static InverseMap uniform(int q);
  static InverseMap quantiles(std::vector<ScalarQuantile> margins);
  static InverseMap factor(std::vector<ScalarQuantile> idiosyncratic,
                           std::vector<ScalarQuantile> factors, MatrixXd loadings);
  static InverseMap custom(int input_dim, int output_dim,
                           std::function<VectorXd(const VectorXd&)> apply);

  // Dimension q of the unit cube that is stratified.
  int input_dim() const { return input_dim_; }
  int output_dim() const { return output_dim_; }

  // Throws std::domain_error unless u lies in (0,1]^q.
  VectorXd operator()(const VectorXd& u) const;

  const Kind& kind() const { return kind_; }

 private:
  Kind kind_;
  int input_dim_;
  int output_dim_;
};

inline VectorXd apply_inverse_map(const InverseMap& map, const VectorXd& u) { return map(u); }

}  // namespace sastro

#endif  // SASTRO_SAMPLING_HPP_
