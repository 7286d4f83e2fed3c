#pragma once

// Likelihoods, multistage LLRs and Monte-Carlo information estimators.

#include <cstdint>
#include <span>
#include <vector>

#include "mlpcm/labelling.hpp"
#include "mlpcm/stbc.hpp"

namespace mlpcm {

/// -L Nr ln(pi N0) - ||Y - S H||_F^2 / N0.
double log_likelihood(const ComplexMatrix& y, const ComplexMatrix& s, const ComplexMatrix& h, const NoiseSpec& noise);
double log_likelihood(const ComplexMatrix& y, const SpaceTimeSymbol& s, const ComplexMatrix& h, const NoiseSpec& noise);

/// Per-label metrics -||Y - S_{perm[label]} H||^2 / N0 for one channel.
/// Holds a reference to the codebook, which must outlive it.
class LabelMetrics {
 public:
  LabelMetrics(const Codebook& cb, std::span<const std::uint32_t> perm);

  /// Precomputes S H for every label. For TV codes pass the rotated channel.
  void set_channel(const ComplexMatrix& h_eff);

  /// Noiseless received block of `label` under the current channel.
  ComplexMatrix received(std::size_t label) const;

  void evaluate(const ComplexMatrix& y, double n0, std::span<double> out) const;

  std::size_t size() const noexcept { return perm_.size(); }
  std::size_t bits() const noexcept { return bits_; }
  std::size_t l() const noexcept { return l_; }
  std::size_t nr() const noexcept { return nr_; }

 private:
  const Codebook* cb_;
  std::vector<std::uint32_t> perm_;
  std::size_t bits_ = 0;
  std::size_t l_ = 0;
  std::size_t nr_ = 0;
  std::vector<cplx> symbols_;    // label order, l x nt blocks
  std::vector<cplx> projected_;  // size() blocks of l x nr
};

/// LLR ln P(c_b = 0 | ...) / P(c_b = 1 | ...) of level `level` (1-based)
/// given the label-ordered metrics and the b - 1 upper bits packed as an
/// integer (bit 1 most significant).
double level_llr_from_metrics(std::span<const double> metrics, std::size_t bits, std::size_t level,
                              std::uint32_t upper_bits);

double level_llr(const ComplexMatrix& y, const ComplexMatrix& h, const SetPartitionMap& spm, const Codebook& cb,
                 std::size_t level, std::span<const std::uint8_t> upper_bits, const NoiseSpec& noise);

/// I(Y; S | H) in bits with uniform priors; clamped to [0, B]. TV codes
/// average over random phases as well.
double mutual_information(const Codebook& cb, const ComplexMatrix& h, const NoiseSpec& noise, std::size_t mc,
                          std::uint64_t seed, std::uint64_t stream_id = streams::make(streams::mi, 0));

/// I_b = I(Y; c_b | c_1..c_{b-1}, H), b = 1..B, each clamped to [0, 1].
/// Draws the transmitted codebook entry exactly like mutual_information, so
/// with equal seeds the unclamped levels sum to the same total.
std::vector<double> levelwise_mi(const SetPartitionMap& spm, const Codebook& cb, const ComplexMatrix& h,
                                 const NoiseSpec& noise, std::size_t mc, std::uint64_t seed,
                                 std::uint64_t stream_id = streams::make(streams::mi, 0));

struct MiSamples {
  std::size_t b = 0;
  std::vector<double> values;  // realizations x b, row-major
  std::vector<double> total;
  std::size_t mc = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  std::size_t realizations() const noexcept { return total.size(); }
  double at(std::size_t k, std::size_t level) const { return values[k * b + level - 1]; }
  std::vector<double> level(std::size_t level) const;
};

MiSamples mi_samples(const SetPartitionMap& spm, const Codebook& cb, const NoiseSpec& noise, const ChannelBatch& batch,
                     std::size_t mc, std::uint64_t seed);

/// Early stopping of the per-realization MI estimate: once `min_samples`
/// are in, a realization is settled as soon as its running mean is more
/// than `z` standard errors away from the rate.
struct OutageOptions {
  std::size_t mc = 1000;
  bool early_stop = true;
  double z = 4.5;
  std::size_t min_samples = 32;
};

struct OutageEstimate {
  double probability = 0.0;
  std::size_t outages = 0;
  std::size_t realizations = 0;
  double mean_samples = 0.0;  // MI samples actually drawn per realization
};

OutageEstimate outage_estimate(const Codebook& cb, double rate_total, const NoiseSpec& noise,
                               const ChannelBatch& batch, const OutageOptions& opts, std::uint64_t seed);

double outage_probability(const Codebook& cb, double rate_total, const NoiseSpec& noise, const ChannelBatch& batch,
                          std::size_t mc, std::uint64_t seed);

/// Fraction of samples strictly below `rate`.
double empirical_outage(std::span<const double> samples, double rate);

/// The ceil(eps N)-th smallest sample (1-based).
double outage_capacity(std::span<const double> samples, double eps);

/// 2B - log2 sum_{i,j} rho(S_i, S_j | H).
double cutoff_rate(const Codebook& cb, const ComplexMatrix& h, const NoiseSpec& noise);

}  // namespace mlpcm
