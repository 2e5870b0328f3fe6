#pragma once

namespace dpwilcox {

// Standard normal inverse CDF (rational approximation, absolute error < 1e-9).
// Throws ParameterError unless 0 < q < 1.
double normal_quantile(double q);

// Standard normal CDF.
double normal_cdf(double z);

// Inverse-CDF transform of a uniform u in (0,1) to a zero-centered Laplace
// draw with the given scale. u = 0.5 maps to exactly 0.
double laplace_from_uniform(double u, double scale);

// CDF of the zero-centered Laplace with the given scale.
double laplace_cdf(double x, double scale);

// The value g with Pr[Lambda > g] = gamma for Lambda ~ Lap(scale):
// g = -scale*ln(2*gamma) for gamma <= 1/2, g = scale*ln(2*(1-gamma)) above.
// Throws ParameterError unless 0 < gamma < 1 and scale > 0.
double laplace_upper_tail_quantile(double scale, double gamma);

}  // namespace dpwilcox
