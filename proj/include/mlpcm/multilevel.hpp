#pragma once

// Multilevel polar coded modulation: component-rate selection, encoding
// onto the labelled codebook and multistage decoding.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mlpcm/information.hpp"
#include "mlpcm/labelling.hpp"
#include "mlpcm/polar.hpp"

namespace mlpcm {

struct MlpcmCode {
  std::size_t n = 0;
  std::size_t b = 0;
  std::vector<std::vector<std::uint32_t>> info_sets;  // sorted, one per level
  std::vector<double> rates;
  double r_tot = 0.0;
  double design_snr = 0.0;
  std::uint64_t ranking_seed = 0;
  std::size_t ranking_trials = 0;

  std::size_t k() const;
  /// 1 marks a frozen bit-channel of `level` (1-based).
  Bits frozen_mask(std::size_t level) const;
};

/// Fills rates and r_tot from the info sets and validates them.
MlpcmCode make_code(std::size_t n, std::vector<std::vector<std::uint32_t>> info_sets, double design_snr = 0.0);

struct BitChannelRanking {
  std::size_t n = 0;
  std::size_t b = 0;
  std::vector<std::uint64_t> error_counts;  // b x n, row-major
  std::size_t trials = 0;
  double snr = 0.0;
  std::uint64_t seed = 0;

  std::uint64_t count(std::size_t level, std::size_t index) const { return error_counts[(level - 1) * n + index]; }
};

struct RankingOptions {
  /// Count every erring bit-channel instead of only the first per level.
  bool count_all = false;
  /// Transmit random codewords (true) or the all-zero codeword.
  bool random_codewords = true;
  std::size_t nr = 2;
};

/// Genie-aided first-error-event counts: one channel per trial, upper
/// levels known, true bits fed forward inside each SC decoder.
BitChannelRanking rank_bit_channels(const SetPartitionMap& spm, const Codebook& cb, std::size_t n, double snr_db,
                                    std::size_t trials, std::uint64_t seed, const RankingOptions& opts = {});

/// The k globally most reliable bit-channels; ties go to the lower level,
/// then to the lower index.
MlpcmCode select_information_sets(const BitChannelRanking& rank, std::size_t k);

/// The sizes[b] most reliable bit-channels of each level.
MlpcmCode select_information_sets_per_level(const BitChannelRanking& rank, std::span<const std::size_t> sizes);

/// Integer level sizes summing to k from real-valued rates: the rates are
/// scaled to sum to k / n, floored, and the remaining bits go to the largest
/// fractional parts (ties to the lower level); no level exceeds n.
std::vector<std::size_t> rates_to_sizes(std::span<const double> rates, std::size_t n, std::size_t k);

struct OutageRuleResult {
  std::vector<double> rates;
  double eps_hat = 0.0;
  std::size_t iterations = 0;
};

/// Outage rule on precomputed level-wise MI samples: starting from the
/// joint outage at r_tot * B, grow eps by factor m until the per-level
/// eps-outage capacities add up to r_tot * B.
OutageRuleResult outage_rule(const MiSamples& samples, double r_tot, double m = 1.05);

std::vector<double> outage_rule_rates(const SetPartitionMap& spm, const Codebook& cb, double r_tot,
                                      const ChannelBatch& batch, const NoiseSpec& noise, double m = 1.05,
                                      std::size_t mc = 200, std::uint64_t seed = 0);

/// Pr(all levels in outage | some level in outage) for per-level rates.
double outage_coupling(const MiSamples& samples, std::span<const double> rates);

/// Encodes K data bits; returns the N labels (level 1 in the MSB).
std::vector<std::uint32_t> mlpcm_encode(const MlpcmCode& code, std::span<const std::uint8_t> data);

/// Multistage decoding from label-ordered metrics (N rows of 2^B). When
/// `genie_x` is given, the true level codewords are fed forward instead of
/// the decisions.
Bits msd_decode_from_metrics(const MlpcmCode& code, std::span<const double> metrics, ScDecoder& decoder,
                             const std::vector<Bits>* genie_x = nullptr);

Bits msd_decode(const MlpcmCode& code, const SetPartitionMap& spm, const Codebook& cb,
                std::span<const ComplexMatrix> y_seq, const ComplexMatrix& h, const NoiseSpec& noise,
                std::optional<std::uint64_t> tv_seed = std::nullopt);

struct FerOptions {
  std::size_t max_frames = 10000;
  std::size_t min_errors = 100;
  /// Stop checks happen only at block boundaries, so the outcome does not
  /// depend on the thread count.
  std::size_t block = 128;
  std::size_t nr = 2;
  bool genie = false;
};

struct FerResult {
  std::size_t frames = 0;
  std::size_t frame_errors = 0;
  std::size_t bit_errors = 0;
  std::vector<std::size_t> level_errors;

  double fer() const { return frames == 0 ? 0.0 : static_cast<double>(frame_errors) / static_cast<double>(frames); }
};

/// Random data, one Rayleigh channel per frame. Frame f draws its data,
/// channel and noise from separate streams keyed by f, so codes with the
/// same codebook shape see identical channels and noise under one seed.
FerResult simulate_frames(const MlpcmCode& code, const SetPartitionMap& spm, const Codebook& cb,
                          const NoiseSpec& noise, const FerOptions& opts, std::uint64_t seed);

/// Seed of the TV phase sequence used by frame `frame`.
std::uint64_t frame_tv_seed(std::uint64_t seed, std::uint64_t frame);

}  // namespace mlpcm
