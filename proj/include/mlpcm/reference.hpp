#pragma once

// Slow, serial, straight-from-the-formula versions of the hot kernels.
// They consume random numbers in the same order as the fast paths, so the
// two can be compared value by value in tests and benchmarks.

#include <cstdint>
#include <span>
#include <vector>

#include "mlpcm/information.hpp"
#include "mlpcm/polar.hpp"

namespace mlpcm::reference {

double mutual_information(const Codebook& cb, const ComplexMatrix& h, const NoiseSpec& noise, std::size_t mc,
                          std::uint64_t seed, std::uint64_t stream_id = streams::make(streams::mi, 0));

std::vector<double> levelwise_mi(const SetPartitionMap& spm, const Codebook& cb, const ComplexMatrix& h,
                                 const NoiseSpec& noise, std::size_t mc, std::uint64_t seed,
                                 std::uint64_t stream_id = streams::make(streams::mi, 0));

MiSamples mi_samples(const SetPartitionMap& spm, const Codebook& cb, const NoiseSpec& noise, const ChannelBatch& batch,
                     std::size_t mc, std::uint64_t seed);

/// Outage probability with a fixed mc samples per realization.
double outage_probability(const Codebook& cb, double rate_total, const NoiseSpec& noise, const ChannelBatch& batch,
                          std::size_t mc, std::uint64_t seed);

double level_llr(const ComplexMatrix& y, const ComplexMatrix& h, const SetPartitionMap& spm, const Codebook& cb,
                 std::size_t level, std::span<const std::uint8_t> upper_bits, const NoiseSpec& noise);

/// Sum over all ordered pairs of pairwise Bhattacharyya coefficients.
double cutoff_rate(const Codebook& cb, const ComplexMatrix& h, const NoiseSpec& noise);

/// u times the explicit Kronecker power generator matrix.
Bits polar_transform(std::span<const std::uint8_t> u);

/// Exhaustive ML decoding of a polar code from bit LLRs (small k only).
Bits ml_decode(std::span<const double> llr, std::span<const std::uint8_t> frozen_mask,
               std::span<const std::uint8_t> frozen_values);

}  // namespace mlpcm::reference
