#include "sastro/normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sastro {

namespace {

// Acklam's coefficients.
constexpr double kA[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                         -2.759285104469687e+02, 1.383577518672690e+02,
                         -3.066479806614716e+01, 2.506628277459239e+00};
constexpr double kB[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                         -1.556989798598866e+02, 6.680131188771972e+01,
                         -1.328068155288572e+01};
constexpr double kC[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                         -2.400758277161838e+00, -2.549732539343734e+00,
                         4.374664141464968e+00,  2.938163982698783e+00};
constexpr double kD[] = {7.784695709041462e-03, 3.224671290700398e-01,
                         2.445134137142996e+00, 3.754408661907416e+00};

constexpr double kLow = 0.02425;

double acklam(double p) {
  if (p < kLow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
           ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
  }
  if (p > 1.0 - kLow) {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
           ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((kA[0] * r + kA[1]) * r + kA[2]) * r + kA[3]) * r + kA[4]) * r + kA[5]) * q /
         (((((kB[0] * r + kB[1]) * r + kB[2]) * r + kB[3]) * r + kB[4]) * r + 1.0);
}

// Quantile for p <= 0.5, refined in the lower tail where erfc is accurate.
double lower_quantile(double p) {
  double x = acklam(p);
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

}  // namespace

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (std::isnan(p) || p < 0.0 || p > 1.0) {
    throw std::domain_error("normal_quantile: probability outside [0, 1]");
  }
  if (p == 0.0) return -std::numeric_limits<double>::infinity();
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  if (p <= 0.5) return lower_quantile(p);
  return -lower_quantile(1.0 - p);
}

double truncated_quantile(double u, double mean, double sd, double a, double b) {
  if (!(sd > 0.0)) throw std::invalid_argument("truncated_quantile: sd must be positive");
  if (!(a < b)) throw std::invalid_argument("truncated_quantile: degenerate range");
  if (std::isnan(u) || u < 0.0 || u > 1.0) {
    throw std::domain_error("truncated_quantile: u outside [0, 1]");
  }
  const double alpha = (a - mean) / sd;
  const double beta = (b - mean) / sd;

  const double below = normal_cdf(alpha);   // P(Z < alpha)
  const double above = normal_cdf(-beta);   // P(Z > beta)
  double mass;
  if (beta <= 0.0) {
    mass = normal_cdf(beta) - below;
  } else if (alpha >= 0.0) {
    mass = normal_cdf(-alpha) - above;
  } else {
    mass = 1.0 - below - above;
  }

  // Work with whichever tail probability is smaller.
  const double lower_tail = below + u * mass;
  const double upper_tail = above + (1.0 - u) * mass;
  double z;
  if (lower_tail <= upper_tail) {
    z = lower_tail > 0.0 ? lower_quantile(lower_tail) : alpha;
  } else {
    z = upper_tail > 0.0 ? -lower_quantile(upper_tail) : beta;
  }
  z = std::clamp(z, alpha, beta);
  return mean + sd * z;
}

}  // namespace sastro
