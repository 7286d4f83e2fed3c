#include "mlpcm/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mlpcm/bounds.hpp"
#include "mlpcm/special.hpp"

namespace mlpcm::reference {

namespace {

struct Draw {
  double total = 0.0;
  double deficit = 0.0;
  std::vector<double> levels;
};

// Mirrors the fast sampler: phases first (TV only), then the codebook index,
// then the noise.
Draw draw_once(const Codebook& cb, std::span<const std::uint32_t> perm, const ComplexMatrix& h, double n0,
               RandomStream& rng, bool want_levels) {
  ComplexMatrix h_eff = h;
  if (cb.spec.tv) {
    std::vector<double> phases(cb.spec.nt);
    for (auto& p : phases) p = 2.0 * std::numbers::pi * rng.uniform();
    h_eff = rotate_channel(h, phases);
  }
  const std::size_t m = cb.size();
  const std::size_t idx = rng.below(m);
  ComplexMatrix y = cb.symbols[idx] * h_eff;
  const NoiseSpec noise(n0);
  add_noise(y, noise, rng);

  std::vector<double> ll(m);  // label order
  std::size_t label = 0;
  for (std::size_t l = 0; l < m; ++l) {
    ll[l] = log_likelihood(y, cb.symbols[perm[l]], h_eff, noise);
    if (perm[l] == idx) label = l;
  }
  const double lse_all = log_sum_exp(ll);
  Draw d;
  // Formed without subtracting lse_all so deficits below an ulp of it survive.
  const auto top = static_cast<std::size_t>(std::max_element(ll.begin(), ll.end()) - ll.begin());
  double rest = 0.0;
  for (std::size_t l = 0; l < m; ++l)
    if (l != top) rest += std::exp(ll[l] - ll[top]);
  d.deficit = ((ll[top] - ll[label]) + std::log1p(rest)) / std::numbers::ln2;
  d.total = static_cast<double>(cb.bits()) - d.deficit;
  if (want_levels) {
    const std::size_t b = cb.bits();
    double prev = lse_all;
    for (std::size_t level = 1; level <= b; ++level) {
      const std::size_t shift = b - level;
      const std::size_t start = (label >> shift) << shift;
      const double lse = log_sum_exp(std::span<const double>(ll).subspan(start, std::size_t{1} << shift));
      d.levels.push_back(1.0 + (lse - prev) / std::numbers::ln2);
      prev = lse;
    }
  }
  return d;
}

std::vector<std::uint32_t> identity(std::size_t n) {
  std::vector<std::uint32_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<std::uint32_t>(i);
  return p;
}

}  // namespace

double mutual_information(const Codebook& cb, const ComplexMatrix& h, const NoiseSpec& noise, std::size_t mc,
                          std::uint64_t seed, std::uint64_t stream_id) {
  const auto perm = identity(cb.size());
  RandomStream rng(seed, stream_id);
  double sum = 0.0;
  for (std::size_t k = 0; k < mc; ++k) sum += draw_once(cb, perm, h, noise.n0, rng, false).total;
  return std::clamp(sum / static_cast<double>(mc), 0.0, static_cast<double>(cb.bits()));
}

std::vector<double> levelwise_mi(const SetPartitionMap& spm, const Codebook& cb, const ComplexMatrix& h,
                                 const NoiseSpec& noise, std::size_t mc, std::uint64_t seed, std::uint64_t stream_id) {
  RandomStream rng(seed, stream_id);
  std::vector<double> sum(cb.bits(), 0.0);
  for (std::size_t k = 0; k < mc; ++k) {
    const auto d = draw_once(cb, spm.perm, h, noise.n0, rng, true);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += d.levels[i];
  }
  for (auto& v : sum) v = std::clamp(v / static_cast<double>(mc), 0.0, 1.0);
  return sum;
}

MiSamples mi_samples(const SetPartitionMap& spm, const Codebook& cb, const NoiseSpec& noise, const ChannelBatch& batch,
                     std::size_t mc, std::uint64_t seed) {
  const std::size_t b = cb.bits();
  MiSamples out;
  out.b = b;
  out.mc = mc;
  out.seed = seed;
  out.stream_id = streams::make(streams::mi, 1);
  for (std::size_t k = 0; k < batch.count(); ++k) {
    RandomStream rng(seed, out.stream_id, static_cast<std::uint32_t>(k));
    std::vector<double> sum(b, 0.0);
    double total = 0.0;
    for (std::size_t s = 0; s < mc; ++s) {
      const auto d = draw_once(cb, spm.perm, batch.matrices[k], noise.n0, rng, true);
      total += d.total;
      for (std::size_t i = 0; i < b; ++i) sum[i] += d.levels[i];
    }
    for (std::size_t i = 0; i < b; ++i) out.values.push_back(std::clamp(sum[i] / static_cast<double>(mc), 0.0, 1.0));
    out.total.push_back(std::clamp(total / static_cast<double>(mc), 0.0, static_cast<double>(b)));
  }
  return out;
}

double outage_probability(const Codebook& cb, double rate_total, const NoiseSpec& noise, const ChannelBatch& batch,
                          std::size_t mc, std::uint64_t seed) {
  if (rate_total <= 0.0) return 0.0;
  const auto perm = identity(cb.size());
  std::size_t outages = 0;
  for (std::size_t k = 0; k < batch.count(); ++k) {
    RandomStream rng(seed, streams::make(streams::mi, 2), static_cast<std::uint32_t>(k));
    double mean = 0.0;
    for (std::size_t s = 0; s < mc; ++s) {
      const double x = draw_once(cb, perm, batch.matrices[k], noise.n0, rng, false).deficit;
      mean += (x - mean) / static_cast<double>(s + 1);
    }
    if (mean > static_cast<double>(cb.bits()) - rate_total) ++outages;
  }
  return static_cast<double>(outages) / static_cast<double>(batch.count());
}

double level_llr(const ComplexMatrix& y, const ComplexMatrix& h, const SetPartitionMap& spm, const Codebook& cb,
                 std::size_t level, std::span<const std::uint8_t> upper_bits, const NoiseSpec& noise) {
  const std::size_t b = cb.bits();
  std::vector<double> zero, one;
  for (std::size_t label = 0; label < cb.size(); ++label) {
    bool match = true;
    for (std::size_t u = 1; u < level; ++u)
      if (((label >> (b - u)) & 1u) != upper_bits[u - 1]) match = false;
    if (!match) continue;
    const double ll = log_likelihood(y, cb.symbols[spm.perm[label]], h, noise);
    (((label >> (b - level)) & 1u) == 0 ? zero : one).push_back(ll);
  }
  return log_sum_exp(zero) - log_sum_exp(one);
}

double cutoff_rate(const Codebook& cb, const ComplexMatrix& h, const NoiseSpec& noise) {
  double sum = 0.0;
  for (std::size_t i = 0; i < cb.size(); ++i)
    for (std::size_t j = 0; j < cb.size(); ++j)
      sum += i == j ? 1.0 : bhattacharyya(difference(cb, i, j), h, noise);
  return 2.0 * static_cast<double>(cb.bits()) - std::log2(sum);
}

Bits polar_transform(std::span<const std::uint8_t> u) {
  const std::size_t n = u.size();
  // G = F^{(x) m}: entry (i, j) is 1 iff the bits of j are a subset of the bits of i.
  Bits x(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    std::uint8_t acc = 0;
    for (std::size_t i = 0; i < n; ++i)
      if ((i & j) == j) acc ^= u[i];
    x[j] = acc;
  }
  return x;
}

Bits ml_decode(std::span<const double> llr, std::span<const std::uint8_t> frozen_mask,
               std::span<const std::uint8_t> frozen_values) {
  const std::size_t n = llr.size();
  std::vector<std::size_t> info;
  for (std::size_t i = 0; i < n; ++i)
    if (!frozen_mask[i]) info.push_back(i);
  require(info.size() <= 20, "ml_decode: too many information bits", Errc::too_large);
  Bits u(n), best;
  double best_metric = -std::numeric_limits<double>::infinity();
  for (std::uint64_t w = 0; w < (std::uint64_t{1} << info.size()); ++w) {
    for (std::size_t i = 0; i < n; ++i) u[i] = frozen_mask[i] ? frozen_values[i] : 0;
    for (std::size_t t = 0; t < info.size(); ++t) u[info[t]] = static_cast<std::uint8_t>((w >> t) & 1u);
    const auto x = polar_transform(u);
    double metric = 0.0;
    for (std::size_t i = 0; i < n; ++i) metric += x[i] ? -llr[i] / 2.0 : llr[i] / 2.0;
    if (metric > best_metric) {
      best_metric = metric;
      best = u;
    }
  }
  return best;
}

}  // namespace mlpcm::reference
