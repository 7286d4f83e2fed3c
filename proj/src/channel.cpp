#include "mlpcm/channel.hpp"

#include <cmath>
#include <numbers>

namespace mlpcm {

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  require(data_.size() == rows * cols, "ComplexMatrix: entry count does not match dimensions");
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    require(row.size() == cols_, "ComplexMatrix: ragged initializer");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::hermitian() const {
  ComplexMatrix h(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) h(c, r) = std::conj((*this)(r, c));
  return h;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
  require(rows_ == other.rows_ && cols_ == other.cols_, "ComplexMatrix: dimension mismatch in +");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
  require(rows_ == other.rows_ && cols_ == other.cols_, "ComplexMatrix: dimension mismatch in -");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx scale) {
  for (auto& v : data_) v *= scale;
  return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(ComplexMatrix a, cplx scale) { return a *= scale; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  require(a.cols() == b.rows(), "ComplexMatrix: dimension mismatch in *");
  ComplexMatrix out(a.rows(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cplx v = a(r, k);
      for (std::size_t c = 0; c < b.cols(); ++c) out(r, c) += v * b(k, c);
    }
  return out;
}

double frobenius_sq(const ComplexMatrix& m) {
  double s = 0.0;
  for (const auto& v : m.entries()) s += std::norm(v);
  return s;
}

double product_frobenius_sq(const ComplexMatrix& a, const ComplexMatrix& b) {
  require(a.cols() == b.rows(), "product_frobenius_sq: dimension mismatch");
  double s = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < b.cols(); ++c) {
      cplx acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(r, k) * b(k, c);
      s += std::norm(acc);
    }
  return s;
}

// ---------------------------------------------------------------------------

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
  constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{m0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{m1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += w0;
    key[1] += w1;
  }
  return ctr;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id, std::uint32_t substream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      counter_{0u, substream, static_cast<std::uint32_t>(stream_id),
               static_cast<std::uint32_t>(stream_id >> 32)} {}

void RandomStream::refill() {
  block_ = philox4x32(counter_, key_);
  ++counter_[0];
  used_ = 0;
}

std::uint32_t RandomStream::next_u32() {
  if (used_ == 4) refill();
  return block_[used_++];
}

std::uint64_t RandomStream::next_u64() {
  const std::uint64_t hi = next_u32();
  return (hi << 32) | next_u32();
}

double RandomStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

cplx RandomStream::complex_normal(double variance) {
  const double s = std::sqrt(0.5 * variance);
  const double re = normal();
  const double im = normal();
  return {s * re, s * im};
}

std::uint64_t RandomStream::below(std::uint64_t n) {
  require(n > 0, "RandomStream::below: empty range");
  // Rejection keeps the result exactly uniform.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do x = next_u64();
  while (x >= limit);
  return x % n;
}

// ---------------------------------------------------------------------------

NoiseSpec::NoiseSpec(double n0_value) : n0(n0_value) {
  require(n0_value > 0.0 && std::isfinite(n0_value), "NoiseSpec: n0 must be positive and finite");
}

NoiseSpec noise_from_snr_db(double snr_db, std::size_t l) {
  require(l >= 1, "noise_from_snr_db: l must be >= 1");
  return NoiseSpec(1.0 / (static_cast<double>(l) * std::pow(10.0, snr_db / 10.0)));
}

double snr_db_from_noise(const NoiseSpec& noise, std::size_t l) {
  return -10.0 * std::log10(noise.n0 * static_cast<double>(l));
}

ComplexMatrix sample_channel(std::size_t nt, std::size_t nr, RandomStream& rng) {
  ComplexMatrix h(nt, nr);
  for (auto& v : h.entries()) v = rng.complex_normal(1.0);
  return h;
}

ChannelBatch sample_channel_batch(std::size_t nt, std::size_t nr, std::size_t count,
                                  std::uint64_t seed, std::uint64_t stream_id) {
  require(nt >= 1 && nr >= 1 && count >= 1, "sample_channel_batch: dimensions must be >= 1");
  ChannelBatch batch;
  batch.nt = nt;
  batch.nr = nr;
  batch.seed = seed;
  batch.stream_id = stream_id;
  batch.matrices.resize(count);
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < n; ++k) {
    RandomStream rng(seed, stream_id, static_cast<std::uint32_t>(k));
    batch.matrices[static_cast<std::size_t>(k)] = sample_channel(nt, nr, rng);
  }
  return batch;
}

ComplexMatrix sample_noise(std::size_t l, std::size_t nr, const NoiseSpec& noise,
                           std::uint64_t seed, std::uint64_t stream_id) {
  require(l >= 1 && nr >= 1, "sample_noise: dimensions must be >= 1");
  require(noise.n0 > 0.0, "sample_noise: n0 must be positive");
  RandomStream rng(seed, stream_id);
  ComplexMatrix w(l, nr);
  for (auto& v : w.entries()) v = rng.complex_normal(noise.n0);
  return w;
}

void add_noise(ComplexMatrix& y, const NoiseSpec& noise, RandomStream& rng) {
  for (auto& v : y.entries()) v += rng.complex_normal(noise.n0);
}

}  // namespace mlpcm
