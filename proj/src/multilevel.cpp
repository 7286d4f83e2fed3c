#include "mlpcm/multilevel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <tuple>

#include "mlpcm/special.hpp"

namespace mlpcm {

namespace {

// Label metrics of one frame plus exp(m - max) per symbol, so every level's
// LLR is a ratio of two partial sums. Falls back to exact log-sum-exp when a
// partial sum underflows.
struct FrameMetrics {
  std::size_t n = 0;
  std::size_t labels = 0;
  std::vector<double> m, e, mx;

  void resize(std::size_t n_, std::size_t labels_) {
    n = n_;
    labels = labels_;
    m.resize(n * labels);
    e.resize(n * labels);
    mx.resize(n);
  }

  void finish() {
    for (std::size_t s = 0; s < n; ++s) {
      const double* row = m.data() + s * labels;
      double* out = e.data() + s * labels;
      const double top = *std::max_element(row, row + labels);
      mx[s] = top;
      for (std::size_t k = 0; k < labels; ++k) out[k] = std::exp(row[k] - top);
    }
  }

  double llr(std::size_t s, std::size_t bits, std::size_t level, std::uint32_t prefix) const {
    const std::size_t shift = bits - level + 1;
    const std::size_t start = static_cast<std::size_t>(prefix) << shift;
    const std::size_t half = std::size_t{1} << (shift - 1);
    const double* row = e.data() + s * labels;
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t k = start; k < start + half; ++k) s0 += row[k];
    for (std::size_t k = start + half; k < start + 2 * half; ++k) s1 += row[k];
    if (s0 > 0.0 && s1 > 0.0) return std::log(s0) - std::log(s1);
    return level_llr_from_metrics(std::span<const double>(m).subspan(s * labels, labels), bits, level, prefix);
  }
};

Bits decode_frame(const MlpcmCode& code, const FrameMetrics& fm, ScDecoder& dec, const std::vector<Bits>* genie_x,
                  std::vector<Bits>* level_u) {
  const std::size_t n = code.n, b = code.b;
  std::vector<std::uint32_t> prefix(n, 0);
  std::vector<double> llr(n);
  Bits u(n), x(n), zeros(n, 0);
  Bits data;
  data.reserve(code.k());
  for (std::size_t level = 1; level <= b; ++level) {
    for (std::size_t s = 0; s < n; ++s) llr[s] = fm.llr(s, b, level, prefix[s]);
    const Bits frozen = code.frozen_mask(level);
    dec.decode(llr, frozen, zeros, u, x);
    for (auto idx : code.info_sets[level - 1]) data.push_back(u[idx]);
    if (level_u != nullptr) (*level_u)[level - 1] = u;
    const Bits& fed = genie_x != nullptr ? (*genie_x)[level - 1] : x;
    for (std::size_t s = 0; s < n; ++s) prefix[s] = (prefix[s] << 1) | fed[s];
  }
  return data;
}

std::vector<Bits> level_codewords(const MlpcmCode& code, std::span<const std::uint8_t> data,
                                  std::vector<Bits>* level_u = nullptr) {
  require(data.size() == code.k(), "mlpcm_encode: data length must equal K");
  std::vector<Bits> x(code.b, Bits(code.n, 0));
  std::size_t pos = 0;
  for (std::size_t level = 0; level < code.b; ++level) {
    for (auto idx : code.info_sets[level]) x[level][idx] = data[pos++] & 1u;
    if (level_u != nullptr) (*level_u)[level] = x[level];
    polar_transform_inplace(x[level]);
  }
  return x;
}

std::vector<std::uint32_t> pack_labels(const std::vector<Bits>& x, std::size_t n) {
  std::vector<std::uint32_t> labels(n, 0);
  for (const auto& level : x)
    for (std::size_t s = 0; s < n; ++s) labels[s] = (labels[s] << 1) | level[s];
  return labels;
}

}  // namespace

std::size_t MlpcmCode::k() const {
  std::size_t k = 0;
  for (const auto& s : info_sets) k += s.size();
  return k;
}

Bits MlpcmCode::frozen_mask(std::size_t level) const {
  require(level >= 1 && level <= b, "frozen_mask: level out of range");
  Bits mask(n, 1);
  for (auto idx : info_sets[level - 1]) mask[idx] = 0;
  return mask;
}

MlpcmCode make_code(std::size_t n, std::vector<std::vector<std::uint32_t>> info_sets, double design_snr) {
  require(n >= 1 && std::has_single_bit(n), "MlpcmCode: block length must be a power of two");
  require(!info_sets.empty(), "MlpcmCode: need at least one level");
  MlpcmCode code;
  code.n = n;
  code.b = info_sets.size();
  code.design_snr = design_snr;
  for (auto& set : info_sets) {
    std::sort(set.begin(), set.end());
    require(std::adjacent_find(set.begin(), set.end()) == set.end(), "MlpcmCode: duplicate bit-channel index");
    require(set.empty() || set.back() < n, "MlpcmCode: bit-channel index out of range");
    code.rates.push_back(static_cast<double>(set.size()) / static_cast<double>(n));
  }
  code.info_sets = std::move(info_sets);
  code.r_tot = static_cast<double>(code.k()) / static_cast<double>(n * code.b);
  return code;
}

BitChannelRanking rank_bit_channels(const SetPartitionMap& spm, const Codebook& cb, std::size_t n, double snr_db,
                                    std::size_t trials, std::uint64_t seed, const RankingOptions& opts) {
  require(trials >= 1, "rank_bit_channels: trials must be >= 1");
  require(n >= 1 && std::has_single_bit(n), "rank_bit_channels: block length must be a power of two");
  require(spm.perm.size() == cb.size(), "rank_bit_channels: map and codebook sizes differ");
  const std::size_t b = cb.bits();
  const NoiseSpec noise = noise_from_snr_db(snr_db, cb.spec.l);
  BitChannelRanking out;
  out.n = n;
  out.b = b;
  out.trials = trials;
  out.snr = snr_db;
  out.seed = seed;
  out.error_counts.assign(b * n, 0);

#pragma omp parallel
  {
    std::vector<std::uint64_t> local(b * n, 0);
    LabelMetrics lm(cb, spm.perm);
    FrameMetrics fm;
    fm.resize(n, cb.size());
    ScDecoder dec(n);
    std::vector<Bits> u(b, Bits(n)), x(b);
    Bits errors(n);
    std::vector<double> llr(n);
#pragma omp for schedule(dynamic, 4)
    for (std::int64_t t = 0; t < static_cast<std::int64_t>(trials); ++t) {
      const auto tu = static_cast<std::uint32_t>(t);
      RandomStream data_rng(seed, streams::make(streams::ranking, 0), tu);
      RandomStream chan_rng(seed, streams::make(streams::ranking, 1), tu);
      RandomStream noise_rng(seed, streams::make(streams::ranking, 2), tu);
      for (std::size_t level = 0; level < b; ++level) {
        for (auto& bit : u[level]) bit = opts.random_codewords ? data_rng.bit() : 0;
        x[level] = polar_transform(u[level]);
      }
      const auto labels = pack_labels(x, n);
      const ComplexMatrix h = sample_channel(cb.spec.nt, opts.nr, chan_rng);
      const std::uint64_t tv_seed = frame_tv_seed(seed ^ 0x52414e4bULL, static_cast<std::uint64_t>(t));
      if (!cb.spec.tv) lm.set_channel(h);
      for (std::size_t s = 0; s < n; ++s) {
        if (cb.spec.tv) lm.set_channel(rotate_channel(h, sample_tv_phases(cb.spec.nt, tv_seed, s).phases));
        ComplexMatrix y = lm.received(labels[s]);
        add_noise(y, noise, noise_rng);
        lm.evaluate(y, noise.n0, std::span<double>(fm.m).subspan(s * cb.size(), cb.size()));
      }
      fm.finish();
      std::vector<std::uint32_t> prefix(n, 0);
      for (std::size_t level = 1; level <= b; ++level) {
        for (std::size_t s = 0; s < n; ++s) llr[s] = fm.llr(s, b, level, prefix[s]);
        const std::size_t first = dec.decode_genie(llr, u[level - 1], errors);
        auto* row = local.data() + (level - 1) * n;
        if (opts.count_all) {
          for (std::size_t i = 0; i < n; ++i) row[i] += errors[i];
        } else if (first < n) {
          ++row[first];
        }
        for (std::size_t s = 0; s < n; ++s) prefix[s] = (prefix[s] << 1) | x[level - 1][s];
      }
    }
#pragma omp critical
    for (std::size_t i = 0; i < local.size(); ++i) out.error_counts[i] += local[i];
  }
  return out;
}

MlpcmCode select_information_sets(const BitChannelRanking& rank, std::size_t k) {
  require(k <= rank.n * rank.b, "select_information_sets: k exceeds N * B");
  std::vector<std::tuple<std::uint64_t, std::size_t, std::size_t>> order;
  order.reserve(rank.n * rank.b);
  for (std::size_t level = 1; level <= rank.b; ++level)
    for (std::size_t i = 0; i < rank.n; ++i) order.emplace_back(rank.count(level, i), level, i);
  std::sort(order.begin(), order.end());
  std::vector<std::vector<std::uint32_t>> sets(rank.b);
  for (std::size_t j = 0; j < k; ++j) {
    const auto& [count, level, idx] = order[j];
    sets[level - 1].push_back(static_cast<std::uint32_t>(idx));
  }
  auto code = make_code(rank.n, std::move(sets), rank.snr);
  code.ranking_seed = rank.seed;
  code.ranking_trials = rank.trials;
  return code;
}

MlpcmCode select_information_sets_per_level(const BitChannelRanking& rank, std::span<const std::size_t> sizes) {
  require(sizes.size() == rank.b, "select_information_sets_per_level: need one size per level");
  std::vector<std::vector<std::uint32_t>> sets(rank.b);
  for (std::size_t level = 1; level <= rank.b; ++level) {
    require(sizes[level - 1] <= rank.n, "select_information_sets_per_level: size exceeds N");
    std::vector<std::pair<std::uint64_t, std::size_t>> order;
    for (std::size_t i = 0; i < rank.n; ++i) order.emplace_back(rank.count(level, i), i);
    std::sort(order.begin(), order.end());
    for (std::size_t j = 0; j < sizes[level - 1]; ++j) sets[level - 1].push_back(static_cast<std::uint32_t>(order[j].second));
  }
  auto code = make_code(rank.n, std::move(sets), rank.snr);
  code.ranking_seed = rank.seed;
  code.ranking_trials = rank.trials;
  return code;
}

std::vector<std::size_t> rates_to_sizes(std::span<const double> rates, std::size_t n, std::size_t k) {
  const std::size_t b = rates.size();
  require(b >= 1, "rates_to_sizes: no levels");
  require(k <= n * b, "rates_to_sizes: k exceeds N * B");
  double sum = 0.0;
  for (double r : rates) {
    require(r >= 0.0 && std::isfinite(r), "rates_to_sizes: rates must be non-negative");
    sum += r;
  }
  std::vector<double> target(b);
  for (std::size_t i = 0; i < b; ++i)
    target[i] = sum > 0.0 ? rates[i] * static_cast<double>(k) / sum : static_cast<double>(k) / static_cast<double>(b);

  // Redistribute mass above the per-level cap.
  for (int pass = 0; pass < static_cast<int>(b); ++pass) {
    double excess = 0.0, free_mass = 0.0;
    for (auto& t : target)
      if (t > static_cast<double>(n)) {
        excess += t - static_cast<double>(n);
        t = static_cast<double>(n);
      }
    if (excess <= 0.0) break;
    for (auto t : target)
      if (t < static_cast<double>(n)) free_mass += t > 0.0 ? t : 1.0;
    for (auto& t : target)
      if (t < static_cast<double>(n)) t += excess * (t > 0.0 ? t : 1.0) / free_mass;
  }

  std::vector<std::size_t> sizes(b);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < b; ++i) {
    sizes[i] = std::min(n, static_cast<std::size_t>(std::floor(target[i] + 1e-9)));
    assigned += sizes[i];
  }
  std::vector<std::size_t> order(b);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
    return target[a] - std::floor(target[a] + 1e-9) > target[c] - std::floor(target[c] + 1e-9);
  });
  while (assigned < k) {
    bool moved = false;
    for (auto i : order) {
      if (assigned == k) break;
      if (sizes[i] < n) {
        ++sizes[i];
        ++assigned;
        moved = true;
      }
    }
    require(moved, "rates_to_sizes: cannot place all bits");
  }
  while (assigned > k) {
    for (auto it = order.rbegin(); it != order.rend() && assigned > k; ++it)
      if (sizes[*it] > 0) {
        --sizes[*it];
        --assigned;
      }
  }
  return sizes;
}

OutageRuleResult outage_rule(const MiSamples& samples, double r_tot, double m) {
  require(r_tot > 0.0 && r_tot < 1.0, "outage_rule_rates: r_tot must lie in (0, 1)");
  require(m > 1.0, "outage_rule_rates: growth factor must exceed 1");
  require(samples.realizations() >= 1, "outage_rule_rates: no samples");
  const double target = r_tot * static_cast<double>(samples.b);
  const double floor_eps = 1.0 / static_cast<double>(samples.realizations());
  OutageRuleResult out;
  out.eps_hat = std::max(empirical_outage(samples.total, target), floor_eps);
  std::vector<std::vector<double>> levels(samples.b);
  for (std::size_t level = 1; level <= samples.b; ++level) levels[level - 1] = samples.level(level);
  out.rates.resize(samples.b);
  while (out.eps_hat < 1.0) {
    ++out.iterations;
    double sum = 0.0;
    for (std::size_t i = 0; i < samples.b; ++i) sum += out.rates[i] = outage_capacity(levels[i], out.eps_hat);
    if (sum >= target) return out;
    out.eps_hat *= m;
  }
  fail(Errc::no_feasible_rates, "outage_rule_rates: per-level capacities never reach the target rate");
}

std::vector<double> outage_rule_rates(const SetPartitionMap& spm, const Codebook& cb, double r_tot,
                                      const ChannelBatch& batch, const NoiseSpec& noise, double m, std::size_t mc,
                                      std::uint64_t seed) {
  return outage_rule(mi_samples(spm, cb, noise, batch, mc, seed), r_tot, m).rates;
}

double outage_coupling(const MiSamples& samples, std::span<const double> rates) {
  require(rates.size() == samples.b, "outage_coupling: need one rate per level");
  std::size_t any = 0, all = 0;
  for (std::size_t k = 0; k < samples.realizations(); ++k) {
    std::size_t in = 0;
    for (std::size_t level = 1; level <= samples.b; ++level) in += samples.at(k, level) < rates[level - 1] ? 1 : 0;
    any += in > 0 ? 1 : 0;
    all += in == samples.b ? 1 : 0;
  }
  return any == 0 ? 1.0 : static_cast<double>(all) / static_cast<double>(any);
}

std::vector<std::uint32_t> mlpcm_encode(const MlpcmCode& code, std::span<const std::uint8_t> data) {
  return pack_labels(level_codewords(code, data), code.n);
}

Bits msd_decode_from_metrics(const MlpcmCode& code, std::span<const double> metrics, ScDecoder& decoder,
                             const std::vector<Bits>* genie_x) {
  const std::size_t labels = std::size_t{1} << code.b;
  require(metrics.size() == code.n * labels, "msd_decode: metrics must hold N rows of 2^B");
  require(decoder.size() == code.n, "msd_decode: decoder length mismatch");
  FrameMetrics fm;
  fm.resize(code.n, labels);
  std::copy(metrics.begin(), metrics.end(), fm.m.begin());
  fm.finish();
  return decode_frame(code, fm, decoder, genie_x, nullptr);
}

Bits msd_decode(const MlpcmCode& code, const SetPartitionMap& spm, const Codebook& cb,
                std::span<const ComplexMatrix> y_seq, const ComplexMatrix& h, const NoiseSpec& noise,
                std::optional<std::uint64_t> tv_seed) {
  require(y_seq.size() == code.n, "msd_decode: need one received block per channel use");
  require(cb.bits() == code.b && spm.perm.size() == cb.size(), "msd_decode: code, map and codebook disagree");
  require(tv_seed.has_value() == cb.spec.tv, "msd_decode: TV seed must be given iff the code is time-varying");
  LabelMetrics lm(cb, spm.perm);
  if (!cb.spec.tv) lm.set_channel(h);
  FrameMetrics fm;
  fm.resize(code.n, cb.size());
  for (std::size_t s = 0; s < code.n; ++s) {
    if (cb.spec.tv) lm.set_channel(rotate_channel(h, sample_tv_phases(cb.spec.nt, *tv_seed, s).phases));
    lm.evaluate(y_seq[s], noise.n0, std::span<double>(fm.m).subspan(s * cb.size(), cb.size()));
  }
  fm.finish();
  ScDecoder dec(code.n);
  return decode_frame(code, fm, dec, nullptr, nullptr);
}

std::uint64_t frame_tv_seed(std::uint64_t seed, std::uint64_t frame) { return mix64(seed ^ mix64(frame + 1)); }

FerResult simulate_frames(const MlpcmCode& code, const SetPartitionMap& spm, const Codebook& cb,
                          const NoiseSpec& noise, const FerOptions& opts, std::uint64_t seed) {
  require(cb.bits() == code.b && spm.perm.size() == cb.size(), "simulate_frames: code, map and codebook disagree");
  require(opts.max_frames >= 1 && opts.block >= 1, "simulate_frames: budgets must be positive");
  const std::size_t n = code.n, b = code.b, k = code.k();
  FerResult result;
  result.level_errors.assign(b, 0);

  while (result.frames < opts.max_frames && result.frame_errors < opts.min_errors) {
    const std::size_t begin = result.frames;
    const std::size_t end = std::min(opts.max_frames, begin + opts.block);
    std::size_t frame_errors = 0, bit_errors = 0;
    std::vector<std::size_t> level_errors(b, 0);
#pragma omp parallel reduction(+ : frame_errors, bit_errors)
    {
      LabelMetrics lm(cb, spm.perm);
      FrameMetrics fm;
      fm.resize(n, cb.size());
      ScDecoder dec(n);
      std::vector<Bits> level_u(b), dec_u(b);
      std::vector<std::size_t> local_levels(b, 0);
      Bits data(k);
#pragma omp for schedule(dynamic, 2)
      for (std::int64_t f = static_cast<std::int64_t>(begin); f < static_cast<std::int64_t>(end); ++f) {
        const auto fu = static_cast<std::uint32_t>(f);
        RandomStream data_rng(seed, streams::make(streams::frame, 0), fu);
        RandomStream chan_rng(seed, streams::make(streams::frame, 1), fu);
        RandomStream noise_rng(seed, streams::make(streams::frame, 2), fu);
        for (auto& bit : data) bit = data_rng.bit();
        const auto x = level_codewords(code, data, &level_u);
        const auto labels = pack_labels(x, n);
        const ComplexMatrix h = sample_channel(cb.spec.nt, opts.nr, chan_rng);
        const std::uint64_t tv_seed = frame_tv_seed(seed, static_cast<std::uint64_t>(f));
        if (!cb.spec.tv) lm.set_channel(h);
        for (std::size_t s = 0; s < n; ++s) {
          if (cb.spec.tv) lm.set_channel(rotate_channel(h, sample_tv_phases(cb.spec.nt, tv_seed, s).phases));
          ComplexMatrix y = lm.received(labels[s]);
          add_noise(y, noise, noise_rng);
          lm.evaluate(y, noise.n0, std::span<double>(fm.m).subspan(s * cb.size(), cb.size()));
        }
        fm.finish();
        const Bits decoded = decode_frame(code, fm, dec, opts.genie ? &x : nullptr, &dec_u);
        std::size_t errs = 0;
        for (std::size_t i = 0; i < k; ++i) errs += decoded[i] != data[i] ? 1 : 0;
        bit_errors += errs;
        frame_errors += errs > 0 ? 1 : 0;
        for (std::size_t level = 0; level < b; ++level)
          for (auto idx : code.info_sets[level])
            if (dec_u[level][idx] != level_u[level][idx]) {
              ++local_levels[level];
              break;
            }
      }
#pragma omp critical
      for (std::size_t level = 0; level < b; ++level) level_errors[level] += local_levels[level];
    }
    result.frames = end;
    result.frame_errors += frame_errors;
    result.bit_errors += bit_errors;
    for (std::size_t level = 0; level < b; ++level) result.level_errors[level] += level_errors[level];
  }
  return result;
}

}  // namespace mlpcm
