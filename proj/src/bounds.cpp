#include "mlpcm/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>
#include <vector>

#include "mlpcm/special.hpp"

namespace mlpcm {

namespace {

void check_q(double q) {
  require(q > 0.0 && q < 1.0 && std::isfinite(q), "pairwise outage: q must lie in (0, 1)");
}

double lognormal_cdf(double x, double m, double s) {
  if (x <= 0.0) return 0.0;
  return normal_cdf((std::log(x) - m) / s);
}

}  // namespace

double bhattacharyya(const DifferenceMatrix& d, const ComplexMatrix& h, const NoiseSpec& noise) {
  require(d.cols() == h.rows(), "bhattacharyya: Delta columns must equal channel rows");
  return std::exp(-product_frobenius_sq(d, h) / (4.0 * noise.n0));
}

double tv_pair_metric(const DifferenceMatrix& d, const ComplexMatrix& h, const NoiseSpec& noise) {
  require(d.cols() == 2 && h.rows() == 2, "bhattacharyya_tv_avg: only defined for two transmit antennas",
          Errc::unsupported);
  require(d.rows() == 1, "bhattacharyya_tv_avg: only defined for space block codes (L = 1)", Errc::unsupported);
  double energy = 0.0;
  cplx cross = 0.0;
  for (std::size_t r = 0; r < h.cols(); ++r) {
    const cplx a = d(0, 0) * h(0, r);
    const cplx b = d(0, 1) * h(1, r);
    energy += std::norm(a) + std::norm(b);
    cross += a * std::conj(b);
  }
  return energy - 4.0 * noise.n0 * ln_bessel_i0(std::abs(cross) / (2.0 * noise.n0));
}

double bhattacharyya_tv_avg(const DifferenceMatrix& d, const ComplexMatrix& h, const NoiseSpec& noise) {
  return std::exp(-tv_pair_metric(d, h, noise) / (4.0 * noise.n0));
}

double q_from_rate(double r_tot) {
  require(r_tot >= 0.0 && r_tot <= 1.0, "q_from_rate: rate must lie in [0, 1]");
  return std::exp2(1.0 - r_tot) - 1.0;
}

double ubpop_sbc(const DifferenceMatrix& d, const NoiseSpec& noise, double q, std::size_t nr) {
  check_q(q);
  require(nr >= 1, "ubpop_sbc: nr must be >= 1");
  const double energy = frobenius_sq(d);
  require(energy > 0.0, "ubpop_sbc: Delta must be non-zero");
  return regularized_gamma_p(static_cast<double>(nr), -4.0 * noise.n0 * std::log(q) / energy);
}

GammaMoments stbc_moments(const DifferenceMatrix& d, std::size_t nr) {
  const double n = static_cast<double>(nr);
  GammaMoments m;
  m.mu1 = n * frobenius_sq(d);
  m.mu2 = n * frobenius_sq(d * d.hermitian());
  return m;
}

double ubpop_stbc(const DifferenceMatrix& d, const NoiseSpec& noise, double q, std::size_t nr) {
  check_q(q);
  require(nr >= 1, "ubpop_stbc: nr must be >= 1");
  const auto m = stbc_moments(d, nr);
  require(m.mu1 > 0.0 && m.mu2 > 0.0, "ubpop_stbc: Delta must be non-zero");
  return regularized_gamma_p(m.mu1 * m.mu1 / m.mu2, -4.0 * noise.n0 * (m.mu1 / m.mu2) * std::log(q));
}

OmegaMoments omega_moments(std::size_t nr, std::size_t mc, std::uint64_t seed) {
  require(nr >= 1, "omega_moments: nr must be >= 1");
  require(mc >= 1, "omega_moments: mc must be >= 1");
  static std::mutex mutex;
  static std::map<std::tuple<std::size_t, std::size_t, std::uint64_t>, OmegaMoments> cache;
  const auto key = std::make_tuple(nr, mc, seed);
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }

  // Fixed-size chunks keep the sum independent of the thread count.
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (mc + kChunk - 1) / kChunk;
  std::vector<double> s_omega(chunks, 0.0), s_h2omega(chunks, 0.0);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
    RandomStream rng(seed, streams::make(streams::omega, nr), static_cast<std::uint32_t>(c));
    const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
    const std::size_t end = std::min(mc, begin + kChunk);
    double a = 0.0, b = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
      cplx sum = 0.0;
      double h1 = 0.0;
      for (std::size_t r = 0; r < nr; ++r) {
        const cplx x = rng.complex_normal();
        const cplx y = rng.complex_normal();
        sum += x * std::conj(y);
        if (r == 0) h1 = std::norm(x);
      }
      const double omega = std::abs(sum);
      a += omega;
      b += h1 * omega;
    }
    s_omega[static_cast<std::size_t>(c)] = a;
    s_h2omega[static_cast<std::size_t>(c)] = b;
  }
  OmegaMoments out;
  out.nr = nr;
  out.samples = mc;
  out.seed = seed;
  for (std::size_t c = 0; c < chunks; ++c) {
    out.e_omega += s_omega[c];
    out.e_h2omega += s_h2omega[c];
  }
  out.e_omega /= static_cast<double>(mc);
  out.e_h2omega /= static_cast<double>(mc);

  std::lock_guard lock(mutex);
  cache.emplace(key, out);
  return out;
}

LinearSegment ln_i0_segment(double x) {
  require(x >= 0.0, "ln_i0_piecewise: x must be non-negative");
  if (x <= 0.5) return {0.12, 0.0};
  if (x <= 1.0) return {0.35, -0.12};
  if (x <= 2.0) return {0.59, -0.37};
  if (x <= 4.0) return {0.8, -0.81};
  return {0.92, -1.3};
}

double ln_i0_piecewise(double x) {
  const auto s = ln_i0_segment(x);
  return s.a1 * x + s.a2;
}

TvsbcMoments tvsbc_moments(const DifferenceMatrix& d, const NoiseSpec& noise, const OmegaMoments& moments) {
  require(d.rows() == 1 && d.cols() == 2, "ubpop_tvsbc: needs a 1 x 2 difference matrix", Errc::unsupported);
  require(moments.e_omega > 0.0, "ubpop_tvsbc: E[Omega] must be positive", Errc::degenerate_moments);
  const double nr = static_cast<double>(moments.nr);
  const double p11 = std::norm(d(0, 0));
  const double p12 = std::norm(d(0, 1));
  const double prod = std::sqrt(p11 * p12);
  TvsbcMoments m;
  m.x = prod * moments.e_omega / (2.0 * noise.n0);
  const auto seg = ln_i0_segment(m.x);
  m.a1 = seg.a1;
  m.a2 = seg.a2;
  // Printed form of the first two moments (see README notes on the a2 term).
  m.mu1 = nr * (p11 + p12) - 2.0 * (m.a1 * prod * moments.e_omega + m.a2);
  m.mu2 = nr * (p11 * p11 + p12 * p12) +
          4.0 * m.a1 * m.a1 * prod * prod * (nr - moments.e_omega * moments.e_omega) -
          4.0 * m.a1 * nr * (p11 + p12) * prod * (moments.e_h2omega - moments.e_omega);
  return m;
}

double ubpop_tvsbc(const DifferenceMatrix& d, const NoiseSpec& noise, double q, const OmegaMoments& moments) {
  check_q(q);
  const auto m = tvsbc_moments(d, noise, moments);
  if (!(m.mu1 > 0.0) || !(m.mu2 > 0.0))
    fail(Errc::degenerate_moments, "ubpop_tvsbc: non-positive moments (mu1 = " + std::to_string(m.mu1) +
                                       ", mu2 = " + std::to_string(m.mu2) + ")");
  const double ratio = m.mu2 / (m.mu1 * m.mu1);
  const double num = std::log(-4.0 * noise.n0 * std::log(q)) + std::log(1.0 / m.mu1 + m.mu2 / (m.mu1 * m.mu1 * m.mu1));
  return 1.0 - gaussian_tail(num / std::sqrt(std::log1p(ratio)));
}

double kl_divergence(std::span<const double> p, std::span<const double> r) {
  require(p.size() == r.size(), "kl_divergence: vectors must have the same length");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    require(p[i] >= 0.0 && r[i] >= 0.0, "kl_divergence: negative probability");
    if (p[i] == 0.0) continue;
    require(r[i] > 0.0, "kl_divergence: r must be positive wherever p is");
    sum += p[i] * std::log2(p[i] / r[i]);
  }
  return std::max(sum, 0.0);
}

double lognormal_fit_divergence(std::span<const double> samples, std::size_t bins) {
  require(samples.size() >= 2, "lognormal_fit_divergence: need at least two samples");
  require(bins >= 1, "lognormal_fit_divergence: need at least one bin");
  double mean = 0.0;
  for (double v : samples) {
    require(v > 0.0 && std::isfinite(v), "lognormal_fit_divergence: samples must be positive");
    mean += v;
  }
  mean /= static_cast<double>(samples.size());
  double var = 0.0;
  for (double v : samples) var += (v - mean) * (v - mean);
  var /= static_cast<double>(samples.size() - 1);
  if (var <= 0.0) return 0.0;
  const double s2 = std::log1p(var / (mean * mean));
  const double s = std::sqrt(s2);
  const double m = std::log(mean) - 0.5 * s2;

  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it, hi = *hi_it;
  const double width = (hi - lo) / static_cast<double>(bins);
  if (width <= 0.0) return 0.0;

  std::vector<double> p(bins, 0.0), r(bins, 0.0);
  for (double v : samples) {
    auto k = static_cast<std::size_t>((v - lo) / width);
    p[std::min(k, bins - 1)] += 1.0;
  }
  for (auto& v : p) v /= static_cast<double>(samples.size());
  double prev = 0.0;
  for (std::size_t k = 0; k < bins; ++k) {
    const double next = k + 1 == bins ? 1.0 : lognormal_cdf(lo + width * static_cast<double>(k + 1), m, s);
    r[k] = std::max(next - prev, 1e-300);
    prev = next;
  }
  return kl_divergence(p, r);
}

double fit_quality(const Codebook& cb, const NoiseSpec& noise, std::size_t nr, std::size_t mc, std::uint64_t seed,
                   std::size_t bins, std::size_t max_pairs) {
  require(cb.spec.nt == 2 && cb.spec.l == 1, "fit_quality: needs a 1 x 2 space block code", Errc::unsupported);
  require(mc >= 2, "fit_quality: mc must be >= 2");
  const std::size_t m = cb.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t u = 0; u < m; ++u)
    for (std::size_t v = 0; v < m; ++v)
      if (u != v) pairs.emplace_back(u, v);
  if (max_pairs != 0 && pairs.size() > max_pairs) {
    // Deterministic even thinning.
    std::vector<std::pair<std::size_t, std::size_t>> thin;
    const double step = static_cast<double>(pairs.size()) / static_cast<double>(max_pairs);
    for (std::size_t k = 0; k < max_pairs; ++k) thin.push_back(pairs[static_cast<std::size_t>(k * step)]);
    pairs.swap(thin);
  }
  const auto batch = sample_channel_batch(2, nr, mc, seed, streams::make(streams::omega, 1000 + nr));
  std::vector<double> kl(pairs.size(), 0.0);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < static_cast<std::int64_t>(pairs.size()); ++k) {
    const auto [u, v] = pairs[static_cast<std::size_t>(k)];
    const auto d = difference(cb, u, v);
    std::vector<double> x(mc);
    for (std::size_t i = 0; i < mc; ++i)
      x[i] = std::max(tv_pair_metric(d, batch.matrices[i], noise), 1e-300);
    kl[static_cast<std::size_t>(k)] = lognormal_fit_divergence(x, bins);
  }
  double sum = 0.0;
  for (double v : kl) sum += v;
  return pairs.empty() ? 0.0 : sum / static_cast<double>(pairs.size());
}

}  // namespace mlpcm
