#pragma once

// Complex matrices, counter-based random streams and the i.i.d. Rayleigh
// channel / AWGN samplers everything else is built on.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mlpcm/error.hpp"

namespace mlpcm {

using cplx = std::complex<double>;

/// Dense row-major complex matrix. Sizes here are tiny (at most a few
/// antennas by a few time slots), so no expression templates.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries);
  ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

  static ComplexMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<cplx> entries() noexcept { return data_; }
  std::span<const cplx> entries() const noexcept { return data_; }

  ComplexMatrix hermitian() const;

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator-=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(cplx scale);

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(ComplexMatrix a, cplx scale);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);

/// Sum of squared magnitudes of all entries.
double frobenius_sq(const ComplexMatrix& m);

/// ||A B||_F^2 without materializing the product.
double product_frobenius_sq(const ComplexMatrix& a, const ComplexMatrix& b);

// ---------------------------------------------------------------------------
// Random streams

/// Philox4x32-10 block function (Salmon et al. counter-based generator).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// A reproducible stream of variates keyed by (seed, stream_id, substream).
/// Distinct keys never share counter space, so parallel workers can draw
/// from their own streams without coordination.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id, std::uint32_t substream = 0);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Standard normal via the Box-Muller transform.
  double normal();
  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  cplx complex_normal(double variance = 1.0);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  bool bit() { return (next_u32() & 1u) != 0; }

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> block_{};
  unsigned used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Human-readable description of the Gaussian sampler, stored in manifests.
inline constexpr const char* kRngMethod = "philox4x32-10 + box-muller";

/// Stream-id namespaces. The upper 16 bits carry the tag, the rest an index.
namespace streams {
inline constexpr std::uint64_t channel = 1;
inline constexpr std::uint64_t noise = 2;
inline constexpr std::uint64_t tv_phase = 3;
inline constexpr std::uint64_t mi = 4;
inline constexpr std::uint64_t frame = 5;
inline constexpr std::uint64_t ranking = 6;
inline constexpr std::uint64_t omega = 7;
inline constexpr std::uint64_t pso = 8;
inline constexpr std::uint64_t objective = 9;

constexpr std::uint64_t make(std::uint64_t tag, std::uint64_t index) { return (tag << 48) ^ index; }
}  // namespace streams

/// SplitMix64 finalizer, used to derive child seeds.
std::uint64_t mix64(std::uint64_t x);

// ---------------------------------------------------------------------------
// Channel and noise

struct NoiseSpec {
  explicit NoiseSpec(double n0_value);
  /// Total complex noise variance per sample (N0/2 per real dimension).
  double n0;
};

/// Noise level for a given Es/N0 per receive antenna. With E||S||_F^2 = 1
/// spread over l channel uses, the per-use energy is 1/l, so N0 = 1/(l snr).
NoiseSpec noise_from_snr_db(double snr_db, std::size_t l);
double snr_db_from_noise(const NoiseSpec& noise, std::size_t l);

struct ChannelBatch {
  std::size_t nt = 0;
  std::size_t nr = 0;
  std::vector<ComplexMatrix> matrices;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  std::size_t count() const noexcept { return matrices.size(); }
};

/// Draws one nt x nr matrix with i.i.d. CN(0, 1) entries.
ComplexMatrix sample_channel(std::size_t nt, std::size_t nr, RandomStream& rng);

/// count i.i.d. Rayleigh channels; matrix k comes from substream k so the
/// batch can be generated in parallel and regenerated bit-identically.
ChannelBatch sample_channel_batch(std::size_t nt, std::size_t nr, std::size_t count,
                                  std::uint64_t seed, std::uint64_t stream_id);

/// l x nr matrix of i.i.d. CN(0, n0) samples.
ComplexMatrix sample_noise(std::size_t l, std::size_t nr, const NoiseSpec& noise,
                           std::uint64_t seed, std::uint64_t stream_id);
void add_noise(ComplexMatrix& y, const NoiseSpec& noise, RandomStream& rng);

}  // namespace mlpcm
