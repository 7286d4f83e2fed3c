#pragma once

// Polar transform and successive-cancellation decoding (natural order,
// no bit reversal). LLRs are ln P(0)/P(1).

#include <cstdint>
#include <span>
#include <vector>

namespace mlpcm {

using Bits = std::vector<std::uint8_t>;

/// x = u F^{(x) m} over GF(2), F = [[1, 0], [1, 1]]. An involution.
void polar_transform_inplace(std::span<std::uint8_t> bits);
Bits polar_transform(std::span<const std::uint8_t> u);

/// Exact check-node update 2 atanh(tanh(a/2) tanh(b/2)) in a form that does
/// not overflow.
double boxplus(double a, double b);

class ScDecoder {
 public:
  explicit ScDecoder(std::size_t n, bool min_sum = false);

  std::size_t size() const noexcept { return n_; }

  /// Frozen positions are forced to `frozen_values`; ties decide 0.
  void decode(std::span<const double> llr, std::span<const std::uint8_t> frozen_mask,
              std::span<const std::uint8_t> frozen_values, std::span<std::uint8_t> u_hat,
              std::span<std::uint8_t> x_hat);

  /// Genie-aided pass: each bit-channel's hard decision is compared with
  /// `truth` and the true value is fed forward. `errors[i]` is set when bit
  /// channel i would have erred. Returns the first erring index, or n.
  std::size_t decode_genie(std::span<const double> llr, std::span<const std::uint8_t> truth,
                           std::span<std::uint8_t> errors);

  /// Number of f/g LLR updates since construction or the last reset.
  std::uint64_t ops() const noexcept { return ops_; }
  void reset_ops() noexcept { ops_ = 0; }

 private:
  void recurse(const double* llr, std::size_t n, std::size_t offset, double* scratch, std::uint8_t* x);
  double f(double a, double b) const;

  std::size_t n_;
  bool min_sum_;
  std::vector<double> scratch_;
  std::uint64_t ops_ = 0;

  // Per-call context.
  const std::uint8_t* frozen_ = nullptr;
  const std::uint8_t* frozen_values_ = nullptr;
  const std::uint8_t* truth_ = nullptr;
  std::uint8_t* u_ = nullptr;
  std::uint8_t* errors_ = nullptr;
  std::size_t first_error_ = 0;
};

struct ScResult {
  Bits u_hat;
  Bits x_hat;
};

ScResult sc_decode(std::span<const double> llr, std::span<const std::uint8_t> frozen_mask,
                   std::span<const std::uint8_t> frozen_values);

}  // namespace mlpcm
