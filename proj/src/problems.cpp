#include "sastro/problems.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "sastro/normal.hpp"

namespace sastro {

namespace {

constexpr double kToyBound = 5.0;

Problem toy(std::string name, Oracle oracle, double constant) {
  Problem p;
  p.name = std::move(name);
  p.d = 2;
  p.q = 1;
  p.oracle = std::move(oracle);
  p.map = InverseMap::truncated_standard_gaussian(1, kToyBound);
  p.theta0 = VectorXd::Ones(2);
  // Every toy objective reduces to |theta|^2 + constant since E[X] = 0.
  p.true_objective = [constant](const VectorXd& t) { return t.squaredNorm() + constant; };
  p.true_gradient = [](const VectorXd& t) -> VectorXd { return 2.0 * t; };
  p.f_star = constant;
  return p;
}

double intrinsic(double s, double k, bool is_call) {
  return is_call ? std::max(s - k, 0.0) : std::max(k - s, 0.0);
}

}  // namespace

double truncated_second_moment(double bound) {
  const double mass = 1.0 - 2.0 * normal_cdf(-bound);
  return 1.0 - 2.0 * bound * normal_pdf(bound) / mass;
}

Problem make_ex1() {
  return toy("ex1", [](const VectorXd& t, const VectorXd& x) { return t.squaredNorm() + 2.0 * x[0]; },
             0.0);
}

Problem make_ex2() {
  return toy("ex2",
             [](const VectorXd& t, const VectorXd& x) { return t.squaredNorm() * (1.0 + x[0]); }, 0.0);
}

Problem make_ex3() {
  // A scalar X is broadcast against both coordinates of theta.
  return toy("ex3",
             [](const VectorXd& t, const VectorXd& x) { return (t.array() - x[0]).square().sum(); },
             2.0 * truncated_second_moment(kToyBound));
}

double bs_price(double s, double k, double r, double sigma, double t, bool is_call) {
  if (!(s > 0.0 && k > 0.0 && sigma > 0.0 && t > 0.0)) {
    throw std::invalid_argument("bs_price: s, k, sigma and t must be positive");
  }
  const double vol = sigma * std::sqrt(t);
  const double d1 = (std::log(s / k) + (r + 0.5 * sigma * sigma) * t) / vol;
  const double d2 = d1 - vol;
  const double disc = k * std::exp(-r * t);
  if (is_call) return s * normal_cdf(d1) - disc * normal_cdf(d2);
  return disc * normal_cdf(-d2) - s * normal_cdf(-d1);
}

double max_smoothing_gap(double k, double r, double sigma, double t, bool is_call) {
  auto gap = [&](double z) {
    const double s = k * std::exp(z);
    return bs_price(s, k, r, sigma, t, is_call) - intrinsic(s, k, is_call);
  };
  const double half_width = std::max(8.0 * sigma * std::sqrt(t), 1e-6);
  constexpr int kGrid = 2000;
  double best_z = 0.0;
  double best = gap(0.0);
  for (int i = 0; i <= kGrid; ++i) {
    const double z = -half_width + 2.0 * half_width * i / kGrid;
    const double g = gap(z);
    if (g > best) {
      best = g;
      best_z = z;
    }
  }
  // Golden-section search on the bracketing grid cell pair.
  const double h = 2.0 * half_width / kGrid;
  double lo = best_z - h;
  double hi = best_z + h;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double g1 = gap(x1);
  double g2 = gap(x2);
  for (int it = 0; it < 100 && hi - lo > 1e-14; ++it) {
    if (g1 < g2) {
      lo = x1;
      x1 = x2;
      g1 = g2;
      x2 = lo + inv_phi * (hi - lo);
      g2 = gap(x2);
    } else {
      hi = x2;
      x2 = x1;
      g2 = g1;
      x1 = hi - inv_phi * (hi - lo);
      g1 = gap(x1);
    }
  }
  return std::max({best, g1, g2});
}

double smoother_maturity(double k, double r, double sigma, double tol_frac, bool is_call) {
  if (!(tol_frac > 0.0)) throw std::invalid_argument("smoother_maturity: tol_frac must be positive");
  const double limit = tol_frac * k;
  auto within = [&](double t) { return max_smoothing_gap(k, r, sigma, t, is_call) < limit; };
  double lo = 0.0;
  double hi = 1e-3;
  while (within(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw std::runtime_error("smoother_maturity: no bracket");
  }
  while (hi - lo > 1e-9 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (within(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

void PortfolioParams::validate() const {
  if (!(sigma_tilde > 0.0 && tau > 0.0 && s0 > 0.0 && k_put > 0.0 && k_call > 0.0)) {
    throw std::invalid_argument("portfolio: sigma, tau, s0 and strikes must be positive");
  }
  if (!(truncation_sds > 0.0)) throw std::invalid_argument("portfolio: truncation must be positive");
  if (theta0.size() != 2) throw std::invalid_argument("portfolio: theta0 must have 2 entries");
}

PortfolioModel::PortfolioModel(PortfolioParams params) : params_(std::move(params)) {
  params_.validate();
  const auto& p = params_;
  put_premium_ = bs_price(p.s0, p.k_put, p.r, p.sigma_tilde, p.tau, false);
  call_premium_ = bs_price(p.s0, p.k_call, p.r, p.sigma_tilde, p.tau, true);
  t_put_ = smoother_maturity(p.k_put, p.r, p.sigma_tilde, 0.01, false);
  t_call_ = smoother_maturity(p.k_call, p.r, p.sigma_tilde, 0.01, true);
  lower_ = p.mu_tilde - p.truncation_sds * p.sigma_tilde;
  upper_ = p.mu_tilde + p.truncation_sds * p.sigma_tilde;

  constexpr int kIntervals = 10'000;
  const double h = (upper_ - lower_) / kIntervals;
  const double mass = normal_cdf(p.truncation_sds) - normal_cdf(-p.truncation_sds);
  weights_.resize(kIntervals + 1);
  node_payoffs_.resize(kIntervals + 1);
  for (int i = 0; i <= kIntervals; ++i) {
    const double x = lower_ + h * i;
    const double simpson = (i == 0 || i == kIntervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const double density = normal_pdf((x - p.mu_tilde) / p.sigma_tilde) / (p.sigma_tilde * mass);
    weights_[i] = simpson * h / 3.0 * density;
    node_payoffs_[i] = payoffs(x);
  }
}

PortfolioPayoffs PortfolioModel::payoffs(double log_return) const {
  const auto& p = params_;
  const double s = p.s0 * std::exp(log_return);
  return {bs_price(s, p.k_put, p.r, p.sigma_tilde, t_put_, false) - put_premium_,
          bs_price(s, p.k_call, p.r, p.sigma_tilde, t_call_, true) - call_premium_, s - p.s0};
}

double PortfolioModel::utility_loss(const VectorXd& theta, double log_return) const {
  const auto g = payoffs(log_return);
  const double wealth = theta[0] * g.put + theta[1] * g.call - params_.theta_bar * g.futures;
  return std::exp(-params_.alpha * wealth);
}

double PortfolioModel::expected_loss(const VectorXd& theta) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    const auto& g = node_payoffs_[i];
    const double wealth = theta[0] * g.put + theta[1] * g.call - params_.theta_bar * g.futures;
    sum += weights_[i] * std::exp(-params_.alpha * wealth);
  }
  return sum;
}

VectorXd PortfolioModel::expected_loss_gradient(const VectorXd& theta) const {
  VectorXd grad = VectorXd::Zero(2);
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    const auto& g = node_payoffs_[i];
    const double wealth = theta[0] * g.put + theta[1] * g.call - params_.theta_bar * g.futures;
    const double w = -params_.alpha * weights_[i] * std::exp(-params_.alpha * wealth);
    grad[0] += w * g.put;
    grad[1] += w * g.call;
  }
  return grad;
}

VectorXd PortfolioModel::minimizer() const {
  const double a = params_.alpha;
  VectorXd theta = VectorXd::Zero(2);
  for (int it = 0; it < 100; ++it) {
    VectorXd grad = VectorXd::Zero(2);
    Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      const auto& g = node_payoffs_[i];
      const double wealth = theta[0] * g.put + theta[1] * g.call - params_.theta_bar * g.futures;
      const double e = weights_[i] * std::exp(-a * wealth);
      const Eigen::Vector2d gv(g.put, g.call);
      grad -= a * e * gv;
      hess += a * a * e * gv * gv.transpose();
    }
    if (grad.norm() < 1e-13) break;
    const VectorXd step = -hess.ldlt().solve(grad);
    // Backtracking keeps the iteration monotone far from the optimum.
    double t = 1.0;
    const double f0 = expected_loss(theta);
    while (t > 1e-8 && expected_loss(theta + t * step) > f0 + 1e-4 * t * grad.dot(step)) t *= 0.5;
    theta += t * step;
    if ((t * step).norm() < 1e-14) break;
  }
  return theta;
}

Problem make_portfolio(const PortfolioParams& params) {
  auto model = std::make_shared<const PortfolioModel>(params);
  const auto& p = model->params();
  Problem prob;
  prob.name = "portfolio";
  prob.d = 2;
  prob.q = 1;
  prob.oracle = [model](const VectorXd& theta, const VectorXd& x) {
    return model->utility_loss(theta, x[0]);
  };
  prob.map = InverseMap::truncated_gaussian(VectorXd::Constant(1, p.mu_tilde),
                                            VectorXd::Constant(1, p.sigma_tilde),
                                            VectorXd::Constant(1, model->lower()),
                                            VectorXd::Constant(1, model->upper()));
  prob.theta0 = p.theta0;
  prob.true_objective = [model](const VectorXd& t) { return model->expected_loss(t); };
  prob.true_gradient = [model](const VectorXd& t) { return model->expected_loss_gradient(t); };
  prob.f_star = model->expected_loss(model->minimizer());
  return prob;
}

Problem make_problem(const std::string& name) {
  if (name == "ex1") return make_ex1();
  if (name == "ex2") return make_ex2();
  if (name == "ex3") return make_ex3();
  if (name == "portfolio") return make_portfolio();
  if (name == "portfolio-alt") {
    PortfolioParams params;
    params.theta0 = VectorXd::Ones(2);
    auto p = make_portfolio(params);
    p.name = name;
    return p;
  }
  throw std::invalid_argument("unknown problem: " + name);
}

std::vector<std::string> problem_names() {
  return {"ex1", "ex2", "ex3", "portfolio", "portfolio-alt"};
}

}  // namespace sastro
