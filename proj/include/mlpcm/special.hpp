#pragma once

#include <span>

namespace mlpcm {

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
/// Series for x < a + 1, Lentz continued fraction for Q otherwise.
double regularized_gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double regularized_gamma_q(double a, double x);

/// Standard normal CDF and its tail Q(x) = 1 - Phi(x).
double normal_cdf(double x);
double gaussian_tail(double x);

/// ln I0(x) for x >= 0, accurate to ~1e-14 (power series, asymptotic
/// expansion for large arguments).
double ln_bessel_i0(double x);

/// ln sum exp(v).
double log_sum_exp(std::span<const double> v);

}  // namespace mlpcm
