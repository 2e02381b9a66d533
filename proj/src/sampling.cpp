#include "sastro/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "sastro/normal.hpp"

namespace sastro {

namespace {

// m^q, or nullopt on overflow past int64.
std::optional<std::int64_t> checked_pow(std::int64_t m, int q) {
  std::int64_t r = 1;
  for (int i = 0; i < q; ++i) {
    if (m != 0 && r > std::numeric_limits<std::int64_t>::max() / m) return std::nullopt;
    r *= m;
  }
  return r;
}

// Smallest m >= 1 with nbar * m^q >= target.
std::int64_t smallest_multiplier(double target, std::int64_t nbar, int q) {
  if (target <= static_cast<double>(nbar)) return 1;
  auto m = static_cast<std::int64_t>(std::floor(std::pow(target / nbar, 1.0 / q)));
  if (m < 1) m = 1;
  while (m > 1) {
    auto p = checked_pow(m - 1, q);
    if (p && static_cast<double>(nbar) * static_cast<double>(*p) >= target) {
      --m;
    } else {
      break;
    }
  }
  for (;;) {
    auto p = checked_pow(m, q);
    if (!p) throw std::overflow_error("admissible size overflows int64");
    if (static_cast<double>(nbar) * static_cast<double>(*p) >= target) return m;
    ++m;
  }
}

void require_unit_cube(const VectorXd& u) {
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    if (!(u[j] > 0.0 && u[j] <= 1.0)) {
      throw std::domain_error("inverse map: coordinate " + std::to_string(j) +
                              " outside (0, 1]");
    }
  }
}

}  // namespace

std::optional<std::int64_t> integer_root(std::int64_t ell, int q) {
  if (ell < 1 || q < 1) return std::nullopt;
  const auto guess =
      static_cast<std::int64_t>(std::llround(std::pow(static_cast<double>(ell), 1.0 / q)));
  for (std::int64_t m = std::max<std::int64_t>(1, guess - 1); m <= guess + 1; ++m) {
    auto p = checked_pow(m, q);
    if (p && *p == ell) return m;
  }
  return std::nullopt;
}

StrataGrid::StrataGrid(std::int64_t ell, int q) : q_(q), ell_(ell), m_(0) {
  if (q < 1) throw std::invalid_argument("StrataGrid: dimension must be positive");
  auto m = integer_root(ell, q);
  if (!m) {
    throw InvalidStrataCount("strata count " + std::to_string(ell) +
                             " has no integer root of order " + std::to_string(q));
  }
  m_ = *m;
}

VectorXd StrataGrid::left_endpoint(std::int64_t index) const {
  if (index < 0 || index >= ell_) throw std::out_of_range("StrataGrid: stratum index");
  VectorXd left(q_);
  for (int j = q_ - 1; j >= 0; --j) {
    left[j] = static_cast<double>(index % m_) / static_cast<double>(m_);
    index /= m_;
  }
  return left;
}

std::int64_t StrataGrid::locate(const Eigen::Ref<const VectorXd>& u) const {
  std::int64_t index = 0;
  for (int j = 0; j < q_; ++j) {
    auto cell = static_cast<std::int64_t>(std::ceil(u[j] * static_cast<double>(m_))) - 1;
    cell = std::clamp<std::int64_t>(cell, 0, m_ - 1);
    index = index * m_ + cell;
  }
  return index;
}

MatrixXd strata_left_endpoints(std::int64_t ell, int q) {
  const StrataGrid grid(ell, q);
  MatrixXd out(ell, q);
  for (std::int64_t i = 0; i < ell; ++i) out.row(i) = grid.left_endpoint(i).transpose();
  return out;
}

AdmissibleSizes::AdmissibleSizes(std::int64_t nbar, int q) : nbar_(nbar), q_(q) {
  if (nbar < 1) throw std::invalid_argument("AdmissibleSizes: nbar must be positive");
  if (q < 1) throw std::invalid_argument("AdmissibleSizes: dimension must be positive");
}

std::int64_t AdmissibleSizes::next(std::int64_t n) const {
  const std::int64_t m = smallest_multiplier(static_cast<double>(n) + 1.0, nbar_, q_);
  return nbar_ * *checked_pow(m, q_);
}

std::int64_t AdmissibleSizes::first_at_least(double x) const {
  const std::int64_t m = smallest_multiplier(x, nbar_, q_);
  return nbar_ * *checked_pow(m, q_);
}

bool AdmissibleSizes::contains(std::int64_t n) const {
  return n > 0 && n % nbar_ == 0 && integer_root(n / nbar_, q_).has_value();
}

std::int64_t AdmissibleSizes::strata_for(std::int64_t n) const {
  if (!contains(n)) {
    throw std::invalid_argument("sample size " + std::to_string(n) + " is not admissible");
  }
  return n / nbar_;
}

std::int64_t next_admissible(std::int64_t n, std::int64_t nbar, int q) {
  return AdmissibleSizes(nbar, q).next(n);
}

std::int64_t strata_for_speedup(double c, int q) {
  if (!(c >= 1.0)) throw std::invalid_argument("strata_for_speedup: c must be >= 1");
  const double raw = std::pow(c, 0.5 * q);
  const double nearest = std::round(raw);
  const double target = std::abs(raw - nearest) <= 1e-9 * nearest ? nearest : std::ceil(raw);
  return *checked_pow(smallest_multiplier(target, 1, q), q);
}

VectorXd map_to_stratum(const Eigen::Ref<const VectorXd>& left, std::int64_t m,
                        const Eigen::Ref<const VectorXd>& v) {
  return left + v / static_cast<double>(m);
}

VectorXd sample_in_stratum(const Eigen::Ref<const VectorXd>& left, std::int64_t m,
                           KeyedStream& stream) {
  VectorXd v(left.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = stream.uniform();
  VectorXd u = map_to_stratum(left, m, v);
  // left + 1/m can round above 1 in the top stratum.
  for (Eigen::Index j = 0; j < u.size(); ++j) u[j] = std::min(u[j], 1.0);
  return u;
}

// ---------------------------------------------------------------------------

ScalarQuantile uniform_quantile(double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("uniform_quantile: empty range");
  return [lo, hi](double u) { return lo + (hi - lo) * u; };
}

ScalarQuantile gaussian_quantile(double mean, double sd) {
  if (!(sd > 0.0)) throw std::invalid_argument("gaussian_quantile: sd must be positive");
  return [mean, sd](double u) {
    // Keep u = 1 finite; the top 2^-53 of mass is not representable anyway.
    constexpr double kTop = 1.0 - 0x1.0p-53;
    return mean + sd * normal_quantile(std::min(u, kTop));
  };
}

ScalarQuantile truncated_gaussian_quantile(double mean, double sd, double a, double b) {
  if (!(sd > 0.0) || !(a < b)) {
    throw std::invalid_argument("truncated_gaussian_quantile: invalid parameters");
  }
  return [=](double u) { return truncated_quantile(u, mean, sd, a, b); };
}

InverseMap::InverseMap(Kind kind) : kind_(std::move(kind)), input_dim_(0), output_dim_(0) {
  std::visit(
      [this](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, TruncatedGaussianMap>) {
          const auto q = k.mean.size();
          if (q < 1 || k.sd.size() != q || k.lower.size() != q || k.upper.size() != q) {
            throw std::invalid_argument("truncated gaussian map: inconsistent dimensions");
          }
          if ((k.sd.array() <= 0.0).any() || (k.lower.array() >= k.upper.array()).any()) {
            throw std::invalid_argument("truncated gaussian map: invalid parameters");
          }
          input_dim_ = output_dim_ = static_cast<int>(q);
        } else if constexpr (std::is_same_v<T, QuantileMap>) {
          if (k.margins.empty()) throw std::invalid_argument("quantile map: no margins");
          input_dim_ = output_dim_ = static_cast<int>(k.margins.size());
        } else if constexpr (std::is_same_v<T, FactorMap>) {
          if (k.idiosyncratic.empty() ||
              k.loadings.rows() != static_cast<Eigen::Index>(k.idiosyncratic.size()) ||
              k.loadings.cols() != static_cast<Eigen::Index>(k.factors.size())) {
            throw std::invalid_argument("factor map: loadings must be (q~ x r)");
          }
          output_dim_ = static_cast<int>(k.idiosyncratic.size());
          input_dim_ = output_dim_ + static_cast<int>(k.factors.size());
        } else {
          if (k.input_dim < 1 || k.output_dim < 1 || !k.apply) {
            throw std::invalid_argument("custom map: invalid definition");
          }
          input_dim_ = k.input_dim;
          output_dim_ = k.output_dim;
        }
      },
      kind_);
}

InverseMap InverseMap::truncated_gaussian(VectorXd mean, VectorXd sd, VectorXd lower,
                                          VectorXd upper) {
  return InverseMap(TruncatedGaussianMap{std::move(mean), std::move(sd), std::move(lower),
                                         std::move(upper)});
}

InverseMap InverseMap::truncated_standard_gaussian(int q, double bound) {
  return truncated_gaussian(VectorXd::Zero(q), VectorXd::Ones(q),
                            VectorXd::Constant(q, -bound), VectorXd::Constant(q, bound));
}

InverseMap InverseMap::uniform(int q) {
  return quantiles(std::vector<ScalarQuantile>(static_cast<std::size_t>(q), uniform_quantile()));
}

InverseMap InverseMap::quantiles(std::vector<ScalarQuantile> margins) {
  return InverseMap(QuantileMap{std::move(margins)});
}

InverseMap InverseMap::factor(std::vector<ScalarQuantile> idiosyncratic,
                              std::vector<ScalarQuantile> factors, MatrixXd loadings) {
  return InverseMap(FactorMap{std::move(idiosyncratic), std::move(factors), std::move(loadings)});
}

InverseMap InverseMap::custom(int input_dim, int output_dim,
                              std::function<VectorXd(const VectorXd&)> apply) {
  return InverseMap(CustomMap{input_dim, output_dim, std::move(apply)});
}

VectorXd InverseMap::operator()(const VectorXd& u) const {
  if (u.size() != input_dim_) throw std::invalid_argument("inverse map: wrong input dimension");
  require_unit_cube(u);
  return std::visit(
      [&u](const auto& k) -> VectorXd {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, TruncatedGaussianMap>) {
          VectorXd x(u.size());
          for (Eigen::Index j = 0; j < u.size(); ++j) {
            x[j] = truncated_quantile(u[j], k.mean[j], k.sd[j], k.lower[j], k.upper[j]);
          }
          return x;
        } else if constexpr (std::is_same_v<T, QuantileMap>) {
          VectorXd x(u.size());
          for (Eigen::Index j = 0; j < u.size(); ++j) x[j] = k.margins[j](u[j]);
          return x;
        } else if constexpr (std::is_same_v<T, FactorMap>) {
          const auto q = k.loadings.rows();
          const auto r = k.loadings.cols();
          VectorXd z(r);
          for (Eigen::Index m = 0; m < r; ++m) z[m] = k.factors[m](u[q + m]);
          VectorXd x = k.loadings * z;
          for (Eigen::Index i = 0; i < q; ++i) x[i] += k.idiosyncratic[i](u[i]);
          return x;
        } else {
          return k.apply(u);
        }
      },
      kind_);
}

}  // namespace sastro
