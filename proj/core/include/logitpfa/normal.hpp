#pragma once

namespace logitpfa {

/// Standard normal CDF.
double normal_cdf(double x);

/// Lower-tail standard normal quantile; p must lie in [0, 1].
double normal_quantile(double p);

/// Two-sided p-value 2 * Phi(-|z|), computed without cancellation.
double two_sided_p(double z);

}  // namespace logitpfa
