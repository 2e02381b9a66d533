#ifndef SASTRO_NORMAL_HPP_
#define SASTRO_NORMAL_HPP_

namespace sastro {

double normal_pdf(double x);
double normal_cdf(double x);

// Inverse standard normal CDF. Acklam's rational approximation followed by one
// Halley step against erfc; absolute error is below 1e-12 on (0, 1).
// Returns -inf at 0 and +inf at 1.
double normal_quantile(double p);

// Quantile of N(mean, sd^2) truncated to [a, b], evaluated at u in [0, 1].
// The upper half is computed through complementary probabilities so that
// u -> 1 maps onto b without cancellation.
// Throws std::invalid_argument when sd <= 0 or a >= b.
double truncated_quantile(double u, double mean, double sd, double a, double b);

}  // namespace sastro

#endif  // SASTRO_NORMAL_HPP_
