#include "mlpcm/information.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mlpcm/special.hpp"

namespace mlpcm {

namespace {

constexpr double kLn2 = std::numbers::ln2;

std::vector<std::uint32_t> identity_perm(std::size_t n) {
  std::vector<std::uint32_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<std::uint32_t>(i);
  return p;
}

// One "sampled-Y" draw shared by all MI estimators: pick a codebook entry
// uniformly, add noise, and return the per-sample total information
// B + log2 p(Y|S) - log2 sum p(Y|S'). If `levels` is non-empty it receives
// the chain-rule terms 1 + log2(block_b / block_{b-1}) of the sent label.
class SampleDrawer {
 public:
  SampleDrawer(const Codebook& cb, std::span<const std::uint32_t> perm)
      : metrics_(cb, perm), inv_(perm.size()), tv_(cb.spec.tv),
        m_(perm.size()), e_(perm.size()), phases_(cb.spec.nt) {
    for (std::size_t l = 0; l < perm.size(); ++l) inv_[perm[l]] = static_cast<std::uint32_t>(l);
  }

  void set_channel(const ComplexMatrix& h) {
    h_ = h;
    if (!tv_) metrics_.set_channel(h);
  }

  double draw(double n0, RandomStream& rng, std::span<double> levels) {
    if (tv_) {
      for (auto& p : phases_) p = 2.0 * std::numbers::pi * rng.uniform();
      metrics_.set_channel(rotate_channel(h_, phases_));
    }
    const std::size_t label = inv_[rng.below(inv_.size())];
    ComplexMatrix y = metrics_.received(label);
    add_noise(y, NoiseSpec(n0), rng);
    metrics_.evaluate(y, n0, m_);

    const auto top = static_cast<std::size_t>(std::max_element(m_.begin(), m_.end()) - m_.begin());
    const double mx = m_[top];
    double rest = 0.0;
    // Without level terms only the sum matters, and terms below e^-60 cannot
    // move it; skipping their exp is most of the work at high SNR.
    const double floor = levels.empty() ? -60.0 : -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m_.size(); ++k) {
      const double d = m_[k] - mx;
      e_[k] = d < floor ? 0.0 : std::exp(d);
      if (k != top) rest += e_[k];
    }
    const double lse_all = mx + std::log1p(rest);
    deficit_ = ((mx - m_[label]) + std::log1p(rest)) / kLn2;
    const double total = static_cast<double>(metrics_.bits()) - deficit_;
    if (!levels.empty()) {
      const std::size_t b = metrics_.bits();
      double prev = lse_all;
      for (std::size_t level = 1; level <= b; ++level) {
        const std::size_t shift = b - level;
        const std::size_t start = (label >> shift) << shift;
        const std::size_t len = std::size_t{1} << shift;
        double s = 0.0;
        for (std::size_t k = start; k < start + len; ++k) s += e_[k];
        const double lse = s > 0.0 ? mx + std::log(s) : log_sum_exp(std::span<const double>(m_).subspan(start, len));
        levels[level - 1] = 1.0 + (lse - prev) / kLn2;
        prev = lse;
      }
    }
    return total;
  }

  // B minus the last total, kept separately so that values within an ulp
  // of B still compare correctly against the rate.
  double deficit() const noexcept { return deficit_; }

 private:
  LabelMetrics metrics_;
  std::vector<std::uint32_t> inv_;
  bool tv_;
  ComplexMatrix h_;
  std::vector<double> m_, e_;
  std::vector<double> phases_;
  double deficit_ = 0.0;
};

}  // namespace

double log_likelihood(const ComplexMatrix& y, const ComplexMatrix& s, const ComplexMatrix& h, const NoiseSpec& noise) {
  require(s.cols() == h.rows() && y.rows() == s.rows() && y.cols() == h.cols(), "log_likelihood: dimension mismatch");
  const double residual = frobenius_sq(y - s * h);
  return -static_cast<double>(y.rows() * y.cols()) * std::log(std::numbers::pi * noise.n0) - residual / noise.n0;
}

double log_likelihood(const ComplexMatrix& y, const SpaceTimeSymbol& s, const ComplexMatrix& h, const NoiseSpec& noise) {
  return log_likelihood(y, s.matrix, h, noise);
}

LabelMetrics::LabelMetrics(const Codebook& cb, std::span<const std::uint32_t> perm)
    : cb_(&cb), perm_(perm.begin(), perm.end()), bits_(cb.bits()), l_(cb.spec.l) {
  if (perm_.empty()) perm_ = identity_perm(cb.size());
  require(perm_.size() == cb.size(), "LabelMetrics: map size does not match the codebook");
  symbols_.reserve(cb.size() * l_ * cb.spec.nt);
  for (auto idx : perm_) {
    const auto e = cb.symbols[idx].entries();
    symbols_.insert(symbols_.end(), e.begin(), e.end());
  }
}

void LabelMetrics::set_channel(const ComplexMatrix& h_eff) {
  const std::size_t nt = cb_->spec.nt;
  require(h_eff.rows() == nt, "LabelMetrics: channel rows must equal nt");
  nr_ = h_eff.cols();
  const std::size_t block = l_ * nr_;
  projected_.resize(perm_.size() * block);
  // Spelled out in reals over a flat copy: std::complex products go through
  // the NaN-recovery path, and this loop dominates the outage estimates.
  const auto h = h_eff.entries();
  const cplx* sym = symbols_.data();
  for (std::size_t label = 0; label < perm_.size(); ++label, sym += l_ * nt) {
    cplx* out = projected_.data() + label * block;
    for (std::size_t l = 0; l < l_; ++l)
      for (std::size_t r = 0; r < nr_; ++r) {
        double re = 0.0, im = 0.0;
        for (std::size_t t = 0; t < nt; ++t) {
          const cplx a = sym[l * nt + t], b = h[t * nr_ + r];
          re += a.real() * b.real() - a.imag() * b.imag();
          im += a.real() * b.imag() + a.imag() * b.real();
        }
        out[l * nr_ + r] = cplx(re, im);
      }
  }
}

ComplexMatrix LabelMetrics::received(std::size_t label) const {
  const std::size_t block = l_ * nr_;
  const cplx* p = projected_.data() + label * block;
  return ComplexMatrix(l_, nr_, std::vector<cplx>(p, p + block));
}

void LabelMetrics::evaluate(const ComplexMatrix& y, double n0, std::span<double> out) const {
  const std::size_t block = l_ * nr_;
  require(y.size() == block && out.size() == perm_.size(), "LabelMetrics::evaluate: size mismatch");
  const auto ye = y.entries();
  const double inv = 1.0 / n0;
  for (std::size_t label = 0; label < perm_.size(); ++label) {
    const cplx* p = projected_.data() + label * block;
    double s = 0.0;
    for (std::size_t e = 0; e < block; ++e) {
      const double dr = ye[e].real() - p[e].real();
      const double di = ye[e].imag() - p[e].imag();
      s += dr * dr + di * di;
    }
    out[label] = -s * inv;
  }
}

double level_llr_from_metrics(std::span<const double> metrics, std::size_t bits, std::size_t level,
                              std::uint32_t upper_bits) {
  require(level >= 1 && level <= bits, "level_llr: level out of range");
  const std::size_t shift = bits - level + 1;
  const std::size_t start = static_cast<std::size_t>(upper_bits) << shift;
  const std::size_t half = std::size_t{1} << (shift - 1);
  require(start + 2 * half <= metrics.size(), "level_llr: upper bits out of range");
  return log_sum_exp(metrics.subspan(start, half)) - log_sum_exp(metrics.subspan(start + half, half));
}

double level_llr(const ComplexMatrix& y, const ComplexMatrix& h, const SetPartitionMap& spm, const Codebook& cb,
                 std::size_t level, std::span<const std::uint8_t> upper_bits, const NoiseSpec& noise) {
  require(upper_bits.size() + 1 == level, "level_llr: need exactly level - 1 upper bits");
  LabelMetrics lm(cb, spm.perm);
  lm.set_channel(h);
  std::vector<double> m(lm.size());
  lm.evaluate(y, noise.n0, m);
  std::uint32_t prefix = 0;
  for (auto bit : upper_bits) prefix = (prefix << 1) | (bit & 1u);
  return level_llr_from_metrics(m, lm.bits(), level, prefix);
}

double mutual_information(const Codebook& cb, const ComplexMatrix& h, const NoiseSpec& noise, std::size_t mc,
                          std::uint64_t seed, std::uint64_t stream_id) {
  require(mc >= 1, "mutual_information: mc must be >= 1");
  const auto perm = identity_perm(cb.size());
  SampleDrawer drawer(cb, perm);
  drawer.set_channel(h);
  RandomStream rng(seed, stream_id);
  double sum = 0.0;
  for (std::size_t k = 0; k < mc; ++k) sum += drawer.draw(noise.n0, rng, {});
  return std::clamp(sum / static_cast<double>(mc), 0.0, static_cast<double>(cb.bits()));
}

std::vector<double> levelwise_mi(const SetPartitionMap& spm, const Codebook& cb, const ComplexMatrix& h,
                                 const NoiseSpec& noise, std::size_t mc, std::uint64_t seed, std::uint64_t stream_id) {
  require(mc >= 1, "levelwise_mi: mc must be >= 1");
  SampleDrawer drawer(cb, spm.perm);
  drawer.set_channel(h);
  RandomStream rng(seed, stream_id);
  const std::size_t b = cb.bits();
  std::vector<double> sum(b, 0.0), levels(b);
  for (std::size_t k = 0; k < mc; ++k) {
    drawer.draw(noise.n0, rng, levels);
    for (std::size_t i = 0; i < b; ++i) sum[i] += levels[i];
  }
  for (auto& v : sum) v = std::clamp(v / static_cast<double>(mc), 0.0, 1.0);
  return sum;
}

std::vector<double> MiSamples::level(std::size_t lvl) const {
  std::vector<double> out(realizations());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = at(k, lvl);
  return out;
}

MiSamples mi_samples(const SetPartitionMap& spm, const Codebook& cb, const NoiseSpec& noise, const ChannelBatch& batch,
                     std::size_t mc, std::uint64_t seed) {
  require(batch.count() >= 1, "mi_samples: empty channel batch");
  require(mc >= 1, "mi_samples: mc must be >= 1");
  const std::size_t b = cb.bits();
  MiSamples out;
  out.b = b;
  out.mc = mc;
  out.seed = seed;
  out.stream_id = streams::make(streams::mi, 1);
  out.values.assign(batch.count() * b, 0.0);
  out.total.assign(batch.count(), 0.0);
#pragma omp parallel
  {
    SampleDrawer drawer(cb, spm.perm);
    std::vector<double> levels(b), sum(b);
#pragma omp for schedule(dynamic, 4)
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(batch.count()); ++k) {
      const auto ku = static_cast<std::size_t>(k);
      RandomStream rng(seed, out.stream_id, static_cast<std::uint32_t>(ku));
      drawer.set_channel(batch.matrices[ku]);
      std::fill(sum.begin(), sum.end(), 0.0);
      double total = 0.0;
      for (std::size_t s = 0; s < mc; ++s) {
        total += drawer.draw(noise.n0, rng, levels);
        for (std::size_t i = 0; i < b; ++i) sum[i] += levels[i];
      }
      for (std::size_t i = 0; i < b; ++i) out.values[ku * b + i] = std::clamp(sum[i] / static_cast<double>(mc), 0.0, 1.0);
      out.total[ku] = std::clamp(total / static_cast<double>(mc), 0.0, static_cast<double>(b));
    }
  }
  return out;
}

OutageEstimate outage_estimate(const Codebook& cb, double rate_total, const NoiseSpec& noise,
                               const ChannelBatch& batch, const OutageOptions& opts, std::uint64_t seed) {
  require(batch.count() >= 1, "outage_probability: empty channel batch");
  require(opts.mc >= 1, "outage_probability: mc must be >= 1");
  require(rate_total >= 0.0 && rate_total <= static_cast<double>(cb.bits()),
          "outage_probability: rate must lie in [0, B]");
  OutageEstimate est;
  est.realizations = batch.count();
  if (rate_total <= 0.0) return est;

  const auto perm = identity_perm(cb.size());
  const std::uint64_t stream = streams::make(streams::mi, 2);
  const std::size_t check_every = 16;
  const double gap = static_cast<double>(cb.bits()) - rate_total;
  std::size_t outages = 0, drawn = 0;
#pragma omp parallel reduction(+ : outages, drawn)
  {
    SampleDrawer drawer(cb, perm);
#pragma omp for schedule(dynamic, 8)
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(batch.count()); ++k) {
      const auto ku = static_cast<std::size_t>(k);
      RandomStream rng(seed, stream, static_cast<std::uint32_t>(ku));
      drawer.set_channel(batch.matrices[ku]);
      // Work with the deficit B - I: I < R  <=>  B - I > B - R.
      double mean = 0.0, m2 = 0.0;
      std::size_t n = 0;
      while (n < opts.mc) {
        drawer.draw(noise.n0, rng, {});
        const double x = drawer.deficit();
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
        if (opts.early_stop && n >= opts.min_samples && n % check_every == 0) {
          const double se = std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
          if (std::abs(mean - gap) > opts.z * se) break;
        }
      }
      drawn += n;
      if (mean > gap) ++outages;
    }
  }
  est.outages = outages;
  est.probability = static_cast<double>(outages) / static_cast<double>(batch.count());
  est.mean_samples = static_cast<double>(drawn) / static_cast<double>(batch.count());
  return est;
}

double outage_probability(const Codebook& cb, double rate_total, const NoiseSpec& noise, const ChannelBatch& batch,
                          std::size_t mc, std::uint64_t seed) {
  OutageOptions opts;
  opts.mc = mc;
  return outage_estimate(cb, rate_total, noise, batch, opts, seed).probability;
}

double empirical_outage(std::span<const double> samples, double rate) {
  require(!samples.empty(), "empirical_outage: no samples");
  const auto below = std::count_if(samples.begin(), samples.end(), [rate](double v) { return v < rate; });
  return static_cast<double>(below) / static_cast<double>(samples.size());
}

double outage_capacity(std::span<const double> samples, double eps) {
  require(!samples.empty(), "outage_capacity: no samples");
  require(eps > 0.0 && eps < 1.0, "outage_capacity: eps must lie in (0, 1)");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = std::ceil(eps * static_cast<double>(sorted.size()) - 1e-9);
  const auto idx = static_cast<std::size_t>(std::clamp(pos, 1.0, static_cast<double>(sorted.size())));
  return sorted[idx - 1];
}

double cutoff_rate(const Codebook& cb, const ComplexMatrix& h, const NoiseSpec& noise) {
  LabelMetrics lm(cb, {});
  lm.set_channel(h);
  const std::size_t n = cb.size();
  std::vector<ComplexMatrix> rx(n);
  for (std::size_t i = 0; i < n; ++i) rx[i] = lm.received(i);
  std::vector<double> rows(n, 0.0);
  const double scale = 1.0 / (4.0 * noise.n0);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += std::exp(-frobenius_sq(rx[static_cast<std::size_t>(i)] - rx[j]) * scale);
    rows[static_cast<std::size_t>(i)] = s;
  }
  double total = 0.0;
  for (double v : rows) total += v;
  return std::max(0.0, 2.0 * static_cast<double>(cb.bits()) - std::log2(total));
}

}  // namespace mlpcm
