#include "mlpcm/polar.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "mlpcm/error.hpp"

namespace mlpcm {

namespace {

constexpr double kLlrClamp = 1e12;

double clamp_llr(double v) {
  if (std::isnan(v)) return 0.0;
  return std::clamp(v, -kLlrClamp, kLlrClamp);
}

}  // namespace

void polar_transform_inplace(std::span<std::uint8_t> bits) {
  const std::size_t n = bits.size();
  require(n >= 1 && std::has_single_bit(n), "polar_transform: length must be a power of two");
  for (std::size_t s = 1; s < n; s <<= 1)
    for (std::size_t start = 0; start < n; start += 2 * s)
      for (std::size_t j = start; j < start + s; ++j) bits[j] ^= bits[j + s];
}

Bits polar_transform(std::span<const std::uint8_t> u) {
  Bits x(u.begin(), u.end());
  polar_transform_inplace(x);
  return x;
}

double boxplus(double a, double b) {
  a = clamp_llr(a);
  b = clamp_llr(b);
  const double sign = (a < 0) != (b < 0) ? -1.0 : 1.0;
  return sign * std::min(std::abs(a), std::abs(b)) + std::log1p(std::exp(-std::abs(a + b))) -
         std::log1p(std::exp(-std::abs(a - b)));
}

ScDecoder::ScDecoder(std::size_t n, bool min_sum) : n_(n), min_sum_(min_sum), scratch_(2 * n) {
  require(n >= 1 && std::has_single_bit(n), "ScDecoder: block length must be a power of two");
}

double ScDecoder::f(double a, double b) const {
  if (!min_sum_) return boxplus(a, b);
  const double sign = (a < 0) != (b < 0) ? -1.0 : 1.0;
  return sign * std::min(std::abs(a), std::abs(b));
}

// llr: n channel LLRs of this sub-code; writes its codeword into x[0, n).
void ScDecoder::recurse(const double* llr, std::size_t n, std::size_t offset, double* scratch, std::uint8_t* x) {
  if (n == 1) {
    const std::uint8_t hard = llr[0] < 0.0 ? 1 : 0;
    std::uint8_t bit;
    if (truth_ != nullptr) {
      bit = truth_[offset];
      if (hard != bit) {
        errors_[offset] = 1;
        if (first_error_ == n_) first_error_ = offset;
      }
    } else {
      bit = frozen_[offset] ? frozen_values_[offset] : hard;
    }
    u_[offset] = bit;
    x[0] = bit;
    return;
  }
  const std::size_t h = n / 2;
  double* child = scratch;
  for (std::size_t i = 0; i < h; ++i) child[i] = f(llr[i], llr[i + h]);
  recurse(child, h, offset, scratch + h, x);
  for (std::size_t i = 0; i < h; ++i) child[i] = clamp_llr(llr[i + h] + (x[i] ? -llr[i] : llr[i]));
  recurse(child, h, offset + h, scratch + h, x + h);
  for (std::size_t i = 0; i < h; ++i) x[i] ^= x[i + h];
  ops_ += 2 * h;
}

void ScDecoder::decode(std::span<const double> llr, std::span<const std::uint8_t> frozen_mask,
                       std::span<const std::uint8_t> frozen_values, std::span<std::uint8_t> u_hat,
                       std::span<std::uint8_t> x_hat) {
  require(llr.size() == n_ && frozen_mask.size() == n_ && frozen_values.size() == n_ && u_hat.size() == n_ &&
              x_hat.size() == n_,
          "sc_decode: all inputs must have the block length");
  std::vector<double> clamped(llr.begin(), llr.end());
  for (auto& v : clamped) v = clamp_llr(v);
  frozen_ = frozen_mask.data();
  frozen_values_ = frozen_values.data();
  truth_ = nullptr;
  u_ = u_hat.data();
  recurse(clamped.data(), n_, 0, scratch_.data(), x_hat.data());
}

std::size_t ScDecoder::decode_genie(std::span<const double> llr, std::span<const std::uint8_t> truth,
                                    std::span<std::uint8_t> errors) {
  require(llr.size() == n_ && truth.size() == n_ && errors.size() == n_,
          "sc_decode: all inputs must have the block length");
  std::vector<double> clamped(llr.begin(), llr.end());
  for (auto& v : clamped) v = clamp_llr(v);
  Bits u(n_), x(n_);
  std::fill(errors.begin(), errors.end(), 0);
  truth_ = truth.data();
  errors_ = errors.data();
  u_ = u.data();
  first_error_ = n_;
  recurse(clamped.data(), n_, 0, scratch_.data(), x.data());
  truth_ = nullptr;
  return first_error_;
}

ScResult sc_decode(std::span<const double> llr, std::span<const std::uint8_t> frozen_mask,
                   std::span<const std::uint8_t> frozen_values) {
  ScDecoder dec(llr.size());
  ScResult out{Bits(llr.size()), Bits(llr.size())};
  dec.decode(llr, frozen_mask, frozen_values, out.u_hat, out.x_hat);
  return out;
}

}  // namespace mlpcm
