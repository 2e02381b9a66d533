#ifndef SASTRO_PROBLEMS_HPP_
#define SASTRO_PROBLEMS_HPP_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sastro/estimator.hpp"
#include "sastro/sampling.hpp"

namespace sastro {

// min_theta f(theta) = E[F(theta, X)], X = map(U) with U uniform on (0,1]^q.
struct Problem {
  std::string name;
  int d = 0;
  int q = 0;
  Oracle oracle;
  InverseMap map = InverseMap::uniform(1);
  VectorXd theta0;
  std::function<double(const VectorXd&)> true_objective;
  std::function<VectorXd(const VectorXd&)> true_gradient;
  std::optional<double> f_star;
};

// Truncated standard gaussian noise on [-5, 5], d = 2, q = 1, theta0 = (1, 1).
Problem make_ex1();  // F = |theta|^2 + 2x
Problem make_ex2();  // F = |theta|^2 (1 + x)
Problem make_ex3();  // F = sum_j (x - theta_j)^2

// E[X^2] of a standard gaussian truncated to [-bound, bound].
double truncated_second_moment(double bound);

// Black-Scholes price. Throws std::invalid_argument unless s, k, sigma, t > 0.
double bs_price(double s, double k, double r, double sigma, double t, bool is_call);

// Largest maturity t such that max over spot of (BS(s, t) - payoff(s)) stays
// below tol_frac * k, by bisection to 1e-9 relative.
double smoother_maturity(double k, double r, double sigma, double tol_frac = 0.01,
                         bool is_call = true);

// Largest BS(s, t) - payoff(s) over spot: grid search plus golden-section
// refinement around the strike.
double max_smoothing_gap(double k, double r, double sigma, double t, bool is_call);

struct PortfolioParams {
  double alpha = 0.8;
  double r = 0.002;
  double mu_tilde = 0.05;
  double sigma_tilde = 0.4;
  double s0 = 1.0;
  double tau = 1.0;
  double k_put = 0.96;
  double k_call = 1.07;
  // Log-return truncated to mu_tilde +/- truncation_sds * sigma_tilde.
  double truncation_sds = 10.0;
  // Fixed futures holding; negative for a long position.
  double theta_bar = -1.0;
  VectorXd theta0 = VectorXd::Zero(2);

  void validate() const;
};

// Payoff pieces of the portfolio problem at a given log-return.
struct PortfolioPayoffs {
  double put;      // smoothed put payoff minus its premium
  double call;     // smoothed call payoff minus its premium
  double futures;  // S_tau - s0
};

class PortfolioModel {
 public:
  explicit PortfolioModel(PortfolioParams params);

  const PortfolioParams& params() const { return params_; }
  double put_premium() const { return put_premium_; }
  double call_premium() const { return call_premium_; }
  double put_maturity() const { return t_put_; }
  double call_maturity() const { return t_call_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }

  PortfolioPayoffs payoffs(double log_return) const;
  double utility_loss(const VectorXd& theta, double log_return) const;

  // Composite Simpson quadrature on `nodes` intervals against the truncated density.
  double expected_loss(const VectorXd& theta) const;
  VectorXd expected_loss_gradient(const VectorXd& theta) const;
  // Newton's method on the (convex) quadrature objective.
  VectorXd minimizer() const;

 private:
  PortfolioParams params_;
  double put_premium_;
  double call_premium_;
  double t_put_;
  double t_call_;
  double lower_;
  double upper_;
  // Quadrature nodes: weight (density included) and payoffs.
  std::vector<double> weights_;
  std::vector<PortfolioPayoffs> node_payoffs_;
};

Problem make_portfolio(const PortfolioParams& params = {});

// Registry: "ex1", "ex2", "ex3", "portfolio" (theta0 = (0,0)) and
// "portfolio-alt" (theta0 = (1,1)). Throws std::invalid_argument otherwise.
Problem make_problem(const std::string& name);
std::vector<std::string> problem_names();

}  // namespace sastro

#endif  // SASTRO_PROBLEMS_HPP_
