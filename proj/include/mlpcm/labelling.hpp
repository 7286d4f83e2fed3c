#pragma once

// Set-merging set-partition labelling over the full space-time codebook.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mlpcm/bounds.hpp"
#include "mlpcm/stbc.hpp"

namespace mlpcm {

enum class Measure { frobenius, determinant, singular_value, ubpop_sbc, ubpop_stbc, ubpop_tvsbc };

std::string to_string(Measure m);
Measure measure_from_string(const std::string& name);

/// Extra inputs needed by the bound-based measures.
struct MeasureContext {
  std::optional<double> n0;
  std::optional<double> q;
  std::size_t nr = 1;
  std::optional<OmegaMoments> omega;
};

/// Pairwise separation, larger meaning better separated. Bound-based
/// measures return minus the pairwise outage bound.
double pair_distance(const Codebook& cb, std::size_t i, std::size_t j, Measure measure, const MeasureContext& ctx);

/// Label -> codebook index. Level 1 is the most significant label bit and
/// is decoded first.
struct SetPartitionMap {
  std::vector<std::uint32_t> perm;
  std::size_t b = 0;
  Measure measure = Measure::frobenius;
  double rel_threshold = 0.0;

  std::size_t size() const noexcept { return perm.size(); }
  std::vector<std::uint32_t> inverse() const;
};

SetPartitionMap identity_map(std::size_t b);

/// Bottom-up set merging. Stage s pairs the current sets and its bit becomes
/// level B - s + 1, so the first merge yields the most protected level.
/// rel_threshold > 0 clusters nearly equal distances before comparing.
SetPartitionMap set_merge_labeling(const Codebook& cb, Measure measure, const MeasureContext& ctx,
                                   double rel_threshold);

/// Distance clustering used by set_merge_labeling: in ascending order, a value
/// joins the current cluster when its relative gap to the cluster's smallest
/// member is below the threshold, otherwise it starts a new cluster. Every
/// value maps to the smallest member of its cluster.
std::vector<double> quantize_distances(const std::vector<double>& values, double rel_threshold);

/// Minimum intra-subset distance (under `measure`) of the subsets fixed by
/// the first `level` - 1 label bits; index `level` - 1 of the result.
std::vector<double> intra_subset_min_distance(const Codebook& cb, const SetPartitionMap& spm, Measure measure,
                                              const MeasureContext& ctx);

}  // namespace mlpcm
