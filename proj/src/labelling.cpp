#include "mlpcm/labelling.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace mlpcm {

namespace {

// Distances closer than this (relative) are rounding noise, even with the
// clustering switched off.
constexpr double kRoundingTolerance = 1e-9;

double singular_value_product(const DifferenceMatrix& d, std::size_t nr) {
  Eigen::MatrixXcd m(static_cast<Eigen::Index>(d.rows()), static_cast<Eigen::Index>(d.cols()));
  for (std::size_t r = 0; r < d.rows(); ++r)
    for (std::size_t c = 0; c < d.cols(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = d(r, c);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  auto sv = svd.singularValues();  // descending
  const auto count = static_cast<std::size_t>(sv.size());
  const std::size_t k = std::min({d.cols(), nr, count});
  double prod = 1.0;
  for (std::size_t i = count - k; i < count; ++i) prod *= sv(static_cast<Eigen::Index>(i)) * sv(static_cast<Eigen::Index>(i));
  return prod;
}

const double& need(const std::optional<double>& v, const char* what) {
  if (!v) fail(Errc::missing_context, std::string("pair_distance: measure needs ") + what);
  return *v;
}

}  // namespace

std::string to_string(Measure m) {
  switch (m) {
    case Measure::frobenius: return "frobenius";
    case Measure::determinant: return "determinant";
    case Measure::singular_value: return "singular_value";
    case Measure::ubpop_sbc: return "ubpop_sbc";
    case Measure::ubpop_stbc: return "ubpop_stbc";
    case Measure::ubpop_tvsbc: return "ubpop_tvsbc";
  }
  return "unknown";
}

Measure measure_from_string(const std::string& name) {
  for (auto m : {Measure::frobenius, Measure::determinant, Measure::singular_value, Measure::ubpop_sbc,
                 Measure::ubpop_stbc, Measure::ubpop_tvsbc})
    if (to_string(m) == name) return m;
  if (name == "fn" || name == "mfn") return Measure::frobenius;
  fail(Errc::invalid_argument, "unknown labelling measure '" + name + "'");
}

double pair_distance(const Codebook& cb, std::size_t i, std::size_t j, Measure measure, const MeasureContext& ctx) {
  if (i == j) return measure == Measure::frobenius || measure == Measure::determinant ||
                            measure == Measure::singular_value
                        ? 0.0
                        : -1.0;
  const auto d = difference(cb, i, j);
  switch (measure) {
    case Measure::frobenius: return frobenius_sq(d);
    case Measure::determinant: return gram_determinant(d);
    case Measure::singular_value: return singular_value_product(d, ctx.nr);
    case Measure::ubpop_sbc:
      return -ubpop_sbc(d, NoiseSpec(need(ctx.n0, "N0")), need(ctx.q, "q"), ctx.nr);
    case Measure::ubpop_stbc:
      return -ubpop_stbc(d, NoiseSpec(need(ctx.n0, "N0")), need(ctx.q, "q"), ctx.nr);
    case Measure::ubpop_tvsbc: {
      if (!ctx.omega) fail(Errc::missing_context, "pair_distance: measure needs Omega moments");
      return -ubpop_tvsbc(d, NoiseSpec(need(ctx.n0, "N0")), need(ctx.q, "q"), *ctx.omega);
    }
  }
  fail(Errc::unsupported, "pair_distance: unknown measure");
}

std::vector<std::uint32_t> SetPartitionMap::inverse() const {
  std::vector<std::uint32_t> inv(perm.size());
  for (std::size_t l = 0; l < perm.size(); ++l) inv[perm[l]] = static_cast<std::uint32_t>(l);
  return inv;
}

SetPartitionMap identity_map(std::size_t b) {
  require(b <= kMaxCodebookBits, "identity_map: too many levels", Errc::too_large);
  SetPartitionMap spm;
  spm.b = b;
  spm.perm.resize(std::size_t{1} << b);
  for (std::size_t l = 0; l < spm.perm.size(); ++l) spm.perm[l] = static_cast<std::uint32_t>(l);
  return spm;
}

std::vector<double> quantize_distances(const std::vector<double>& values, double rel_threshold) {
  require(rel_threshold >= 0.0, "rel_threshold must be non-negative");
  const double thr = std::max(rel_threshold, kRoundingTolerance);
  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> rep(sorted.size());
  // Compare against the cluster's representative, not the neighbour, so a
  // chain of small steps cannot merge distances far apart.
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (k == 0) {
      rep[k] = sorted[k];
      continue;
    }
    const double a = rep[k - 1], b = sorted[k];
    const double scale = std::max(std::abs(a), std::abs(b));
    const bool joins = scale == 0.0 || (b - a) / scale < thr;
    rep[k] = joins ? a : b;
  }
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), values[i]);
    out[i] = rep[static_cast<std::size_t>(it - sorted.begin())];
  }
  return out;
}

SetPartitionMap set_merge_labeling(const Codebook& cb, Measure measure, const MeasureContext& ctx,
                                   double rel_threshold) {
  const std::size_t n = cb.size();
  require(n >= 1 && std::has_single_bit(n), "set_merge_labeling: codebook size must be a power of two");
  require(rel_threshold >= 0.0, "set_merge_labeling: rel_threshold must be non-negative");
  const auto b = static_cast<std::size_t>(std::countr_zero(n));

  // Pairwise distances, upper triangle flattened then quantized.
  std::vector<double> dist(n * n, 0.0);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
    for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n; ++j)
      dist[static_cast<std::size_t>(i) * n + j] = pair_distance(cb, static_cast<std::size_t>(i), j, measure, ctx);
  {
    std::vector<double> upper;
    upper.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) upper.push_back(dist[i * n + j]);
    const auto q = quantize_distances(upper, rel_threshold);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) dist[i * n + j] = dist[j * n + i] = q[k++];
  }

  std::vector<std::vector<std::uint32_t>> sets(n);
  for (std::size_t i = 0; i < n; ++i) sets[i] = {static_cast<std::uint32_t>(i)};
  std::vector<std::uint32_t> label(n, 0);
  std::size_t m = n;
  for (std::size_t stage = 1; stage <= b; ++stage) {
    const std::uint32_t bit = 1u << (stage - 1);
    auto at = [&](std::size_t i, std::size_t j) { return dist[i * m + j]; };

    double tau = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      double far = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < m; ++j)
        if (j != i) far = std::max(far, at(i, j));
      tau = std::min(tau, far);
    }

    std::vector<char> paired(m, 0);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < m; ++i) {
      if (paired[i]) continue;
      std::size_t best = m, fallback = m;
      for (std::size_t j = 0; j < m; ++j) {
        if (j == i || paired[j]) continue;
        const double d = at(i, j);
        if (d >= tau && (best == m || d < at(i, best))) best = j;
        if (fallback == m || d > at(i, fallback)) fallback = j;
      }
      if (best == m) best = fallback;
      paired[i] = paired[best] = 1;
      pairs.emplace_back(i, best);
    }

    const std::size_t half = m / 2;
    std::vector<std::vector<std::uint32_t>> merged(half);
    std::vector<double> next(half * half, 0.0);
    for (std::size_t p = 0; p < half; ++p) {
      const auto [a, c] = pairs[p];
      for (auto idx : sets[c]) label[idx] |= bit;
      merged[p] = sets[a];
      merged[p].insert(merged[p].end(), sets[c].begin(), sets[c].end());
    }
    for (std::size_t p = 0; p < half; ++p)
      for (std::size_t r = p + 1; r < half; ++r) {
        const auto [a1, c1] = pairs[p];
        const auto [a2, c2] = pairs[r];
        const double v = std::min({at(a1, a2), at(a1, c2), at(c1, a2), at(c1, c2)});
        next[p * half + r] = next[r * half + p] = v;
      }
    sets.swap(merged);
    dist.swap(next);
    m = half;
  }

  SetPartitionMap spm;
  spm.b = b;
  spm.measure = measure;
  spm.rel_threshold = rel_threshold;
  spm.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) spm.perm[label[i]] = static_cast<std::uint32_t>(i);
  return spm;
}

std::vector<double> intra_subset_min_distance(const Codebook& cb, const SetPartitionMap& spm, Measure measure,
                                              const MeasureContext& ctx) {
  require(spm.perm.size() == cb.size(), "intra_subset_min_distance: map and codebook sizes differ");
  std::vector<double> out(spm.b, std::numeric_limits<double>::infinity());
  for (std::size_t level = 1; level <= spm.b; ++level) {
    const std::size_t block = std::size_t{1} << (spm.b - level + 1);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t start = 0; start < cb.size(); start += block)
      for (std::size_t u = start; u < start + block; ++u)
        for (std::size_t v = u + 1; v < start + block; ++v)
          best = std::min(best, pair_distance(cb, spm.perm[u], spm.perm[v], measure, ctx));
    out[level - 1] = best;
  }
  return out;
}

}  // namespace mlpcm
