#include "mlpcm/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mlpcm/error.hpp"

namespace mlpcm {

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 10000;

double log_prefactor(double a, double x) { return -x + a * std::log(x) - std::lgamma(a); }

double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxIter; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(log_prefactor(a, x));
}

double gamma_q_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(log_prefactor(a, x)) * h;
}

void check_gamma_args(double a, double x) {
  require(a > 0.0 && std::isfinite(a), "incomplete gamma: shape must be positive");
  require(x >= 0.0 && !std::isnan(x), "incomplete gamma: argument must be non-negative");
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return std::min(1.0, gamma_p_series(a, x));
  return std::clamp(1.0 - gamma_q_continued_fraction(a, x), 0.0, 1.0);
}

double regularized_gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return std::clamp(1.0 - gamma_p_series(a, x), 0.0, 1.0);
  return std::min(1.0, gamma_q_continued_fraction(a, x));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double gaussian_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double ln_bessel_i0(double x) {
  require(x >= 0.0, "ln_bessel_i0: argument must be non-negative");
  if (x < 30.0) {
    // sum_k (x^2/4)^k / (k!)^2, all terms positive.
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 500; ++k) {
      term *= q / (static_cast<double>(k) * k);
      sum += term;
      if (term < sum * kEps) break;
    }
    return std::log(sum);
  }
  // e^x / sqrt(2 pi x) * sum_k ((2k-1)!!)^2 / (k! 8^k x^k)
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 30; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = term * odd * odd / (8.0 * k * x);
    if (next > term) break;
    term = next;
    sum += term;
    if (term < sum * kEps) break;
  }
  return x - 0.5 * std::log(2.0 * std::numbers::pi * x) + std::log(sum);
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const auto top = std::max_element(v.begin(), v.end());
  const double m = *top;
  if (std::isinf(m)) return m;
  // log1p keeps the small terms when the maximum dominates.
  double s = 0.0;
  for (auto it = v.begin(); it != v.end(); ++it)
    if (it != top) s += std::exp(*it - m);
  return m + std::log1p(s);
}

}  // namespace mlpcm
