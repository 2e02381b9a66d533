#ifndef SASTRO_MODEL_HPP_
#define SASTRO_MODEL_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace sastro {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Coordinate design {c, c + D e_1, ..., c + D e_d, c - D e_1, ..., c - D e_d}.
template <typename Scalar>
struct DesignSet {
  Vec<Scalar> center;
  Scalar radius;
  std::vector<Vec<Scalar>> points;

  int dim() const { return static_cast<int>(center.size()); }
};

template <typename Scalar>
DesignSet<Scalar> design_points(const Vec<Scalar>& center, Scalar Delta) {
  if (!(Delta > Scalar(0))) throw std::invalid_argument("design_points: radius must be positive");
  const auto d = center.size();
  DesignSet<Scalar> set{center, Delta, {}};
  set.points.reserve(static_cast<std::size_t>(2 * d + 1));
  set.points.push_back(center);
  for (Eigen::Index j = 0; j < d; ++j) {
    Vec<Scalar> p = center;
    p[j] += Delta;
    set.points.push_back(std::move(p));
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    Vec<Scalar> p = center;
    p[j] -= Delta;
    set.points.push_back(std::move(p));
  }
  return set;
}

// M(t) = intercept + grad . s + 1/2 sum_j diag_hess_j s_j^2, with s = t - center.
template <typename Scalar>
struct DQModel {
  Scalar intercept;
  Vec<Scalar> grad;
  Vec<Scalar> diag_hess;
  Vec<Scalar> center;
  Scalar radius;

  Scalar value_at_step(const Vec<Scalar>& step) const {
    return intercept + grad.dot(step) +
           Scalar(0.5) * (diag_hess.array() * step.array().square()).sum();
  }
  Scalar operator()(const Vec<Scalar>& point) const { return value_at_step(point - center); }
  Vec<Scalar> gradient(const Vec<Scalar>& point) const {
    return grad + (diag_hess.array() * (point - center).array()).matrix();
  }
};

// Solves the interpolation system on the coordinate design in closed form.
// `values` follows the ordering of design_points.
template <typename Scalar>
DQModel<Scalar> fit_dq_model(const Vec<Scalar>& values, const Vec<Scalar>& center, Scalar Delta) {
  const auto d = center.size();
  if (values.size() != 2 * d + 1) {
    throw std::invalid_argument("fit_dq_model: expected 2d+1 values");
  }
  if (!values.allFinite()) throw std::invalid_argument("fit_dq_model: non-finite value");
  if (!(Delta > Scalar(0))) throw std::invalid_argument("fit_dq_model: radius must be positive");

  DQModel<Scalar> m{values[0], Vec<Scalar>(d), Vec<Scalar>(d), center, Delta};
  for (Eigen::Index j = 0; j < d; ++j) {
    const Scalar plus = values[1 + j];
    const Scalar minus = values[1 + d + j];
    m.grad[j] = (plus - minus) / (Scalar(2) * Delta);
    m.diag_hess[j] = (plus + minus - Scalar(2) * values[0]) / (Delta * Delta);
  }
  return m;
}

template <typename Scalar>
Scalar model_gradient_norm(const DQModel<Scalar>& model) {
  return model.grad.norm();
}

namespace detail {

template <typename Scalar>
Vec<Scalar> shifted_step(const DQModel<Scalar>& m, Scalar lambda) {
  Vec<Scalar> s(m.grad.size());
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    const Scalar denom = m.diag_hess[j] + lambda;
    s[j] = m.grad[j] == Scalar(0) ? Scalar(0) : -m.grad[j] / denom;
  }
  return s;
}

}  // namespace detail

// Global minimizer of the model over the closed Euclidean ball of radius
// model.radius around model.center. Stationary models with a positive
// semidefinite Hessian return the center. When the minimizer is not unique
// (the hard case) the lexicographically smallest one is returned.
template <typename Scalar>
Vec<Scalar> solve_subproblem(const DQModel<Scalar>& m) {
  using std::sqrt;
  const Scalar Delta = m.radius;
  if (!(Delta > Scalar(0))) throw std::invalid_argument("solve_subproblem: radius must be positive");
  const auto d = m.grad.size();
  const Scalar h_min = m.diag_hess.minCoeff();
  const Scalar g_norm = m.grad.norm();

  // Interior Newton step.
  if (h_min > Scalar(0)) {
    const Vec<Scalar> s = detail::shifted_step(m, Scalar(0));
    if (s.norm() <= Delta) return m.center + s;
  }

  const Scalar lambda_low = std::max(Scalar(0), -h_min);

  // Hard case: the gradient has no component along the most negative
  // curvature, so the secular function stays bounded at lambda_low.
  bool hard = true;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (m.diag_hess[j] == h_min && m.grad[j] != Scalar(0)) hard = false;
  }
  if (hard) {
    Vec<Scalar> s = detail::shifted_step(m, lambda_low);
    // Coordinates with curvature h_min are free at lambda_low.
    for (Eigen::Index j = 0; j < d; ++j) {
      if (m.diag_hess[j] == h_min) s[j] = Scalar(0);
    }
    const Scalar sn = s.norm();
    if (sn <= Delta) {
      if (h_min >= Scalar(0)) return m.center + s;  // flat directions do not help
      Eigen::Index first = 0;
      while (m.diag_hess[first] != h_min) ++first;
      s[first] = -sqrt(std::max(Scalar(0), Delta * Delta - sn * sn));
      return m.center + s;
    }
  }

  // Boundary solution: find lambda > lambda_low with ||s(lambda)|| = Delta.
  // ||s|| is decreasing in lambda; bracket and bisect.
  Scalar lo = lambda_low;
  Scalar hi = std::max(lambda_low, g_norm / Delta - h_min) + Scalar(1);
  while (detail::shifted_step(m, hi).norm() > Delta) hi = Scalar(2) * hi + Scalar(1);
  for (int it = 0; it < 200; ++it) {
    const Scalar mid = Scalar(0.5) * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const Scalar sn = detail::shifted_step(m, mid).norm();
    if (std::abs(sn - Delta) <= Scalar(1e-10) * Delta) {
      lo = hi = mid;
      break;
    }
    if (sn > Delta) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  Vec<Scalar> s = detail::shifted_step(m, hi);
  const Scalar sn = s.norm();
  if (sn > Delta) s *= Delta / sn;
  return m.center + s;
}

}  // namespace sastro

#endif  // SASTRO_MODEL_HPP_
