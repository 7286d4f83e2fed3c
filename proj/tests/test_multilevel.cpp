#include <doctest.h>

#include <numeric>

#include "mlpcm/multilevel.hpp"

using namespace mlpcm;

namespace {

struct Setup {
  Codebook cb;
  SetPartitionMap spm;
};

Setup make_setup(Family family, ConstellationKind kind, bool tv = false, std::vector<cplx> coeffs = {}) {
  Setup s;
  s.cb = enumerate_codebook(build_stbc(family, std::move(coeffs), make_constellation(kind), tv));
  s.spm = set_merge_labeling(s.cb, Measure::frobenius, {}, 0.0);
  return s;
}

Bits data_bits(std::size_t k, RandomStream& rng) {
  Bits d(k);
  for (auto& v : d) v = rng.bit() ? 1 : 0;
  return d;
}

// Noiseless transmission of a frame and MSD decoding.
Bits round_trip(const MlpcmCode& code, const Setup& s, const Bits& data, const ComplexMatrix& h,
                std::optional<std::uint64_t> tv_seed) {
  const auto labels = mlpcm_encode(code, data);
  std::vector<ComplexMatrix> y;
  for (std::size_t n = 0; n < code.n; ++n) {
    ComplexMatrix heff = h;
    if (tv_seed) heff = rotate_channel(h, sample_tv_phases(s.cb.spec.nt, *tv_seed, n).phases);
    y.push_back(s.cb.symbols[s.spm.perm[labels[n]]] * heff);
  }
  return msd_decode(code, s.spm, s.cb, y, h, NoiseSpec(1e-30), tv_seed);
}

}  // namespace

TEST_CASE("make_code bookkeeping") {
  const auto code = make_code(8, {{0, 7}, {3, 1, 2}, {}});
  CHECK(code.k() == 5);
  CHECK(code.info_sets[1] == std::vector<std::uint32_t>{1, 2, 3});
  CHECK(code.rates[0] * 8 + code.rates[1] * 8 + code.rates[2] * 8 == doctest::Approx(5.0));
  CHECK(code.r_tot == doctest::Approx(5.0 / 24.0));
  CHECK(code.frozen_mask(1) == Bits{0, 1, 1, 1, 1, 1, 1, 0});
  CHECK_THROWS_AS(make_code(8, {{8}}), Error);
  CHECK_THROWS_AS(make_code(6, {{0}}), Error);
  CHECK_THROWS_AS(make_code(8, {{1, 1}}), Error);
}

TEST_CASE("rates_to_sizes") {
  const std::vector<double> rates{0.1, 0.5, 0.9, 1.0};
  for (std::size_t k : {0u, 1u, 37u, 64u, 100u, 128u}) {
    const auto sizes = rates_to_sizes(rates, 32, k);
    CHECK(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}) == k);
    for (auto s : sizes) CHECK(s <= 32);
  }
  // 0.25 * 16 / 1 = 4 exactly; fractional leftovers go to the largest parts.
  CHECK(rates_to_sizes(std::vector<double>{0.25, 0.75}, 16, 16) == std::vector<std::size_t>{4, 12});
  CHECK(rates_to_sizes(std::vector<double>{0.2, 0.8}, 10, 5) == std::vector<std::size_t>{1, 4});
  CHECK(rates_to_sizes(std::vector<double>{0.1, 0.3}, 10, 5) == std::vector<std::size_t>{1, 4});
  CHECK(rates_to_sizes(std::vector<double>{1.0, 1.0, 1.0}, 8, 10) == std::vector<std::size_t>{4, 3, 3});
}

TEST_CASE("bit-channel ranking") {
  const auto s = make_setup(Family::alamouti, ConstellationKind::qpsk);
  CHECK_THROWS_AS(rank_bit_channels(s.spm, s.cb, 16, 10.0, 0, 1), Error);

  const auto quiet = rank_bit_channels(s.spm, s.cb, 16, 300.0, 200, 1);
  for (auto c : quiet.error_counts) CHECK(c == 0);

  const auto a = rank_bit_channels(s.spm, s.cb, 16, 6.0, 400, 5);
  const auto b = rank_bit_channels(s.spm, s.cb, 16, 6.0, 400, 5);
  CHECK(a.error_counts == b.error_counts);
  const auto total = std::accumulate(a.error_counts.begin(), a.error_counts.end(), std::uint64_t{0});
  CHECK(total <= 400 * 4);
  CHECK(total > 0);

  RankingOptions all;
  all.count_all = true;
  const auto c = rank_bit_channels(s.spm, s.cb, 16, 6.0, 400, 5, all);
  for (std::size_t i = 0; i < c.error_counts.size(); ++i) CHECK(c.error_counts[i] >= 0);
  CHECK(std::accumulate(c.error_counts.begin(), c.error_counts.end(), std::uint64_t{0}) >= total);
}

TEST_CASE("information set selection") {
  BitChannelRanking r;
  r.n = 8;
  r.b = 2;
  r.trials = 100;
  r.error_counts.assign(16, 0);
  for (std::size_t i = 0; i < 8; ++i) {
    r.error_counts[i] = 50 + i;     // level 1 uniformly worse
    r.error_counts[8 + i] = 10 + i;  // level 2
  }
  const auto all = select_information_sets(r, 16);
  CHECK(all.rates == std::vector<double>{1.0, 1.0});
  const auto none = select_information_sets(r, 0);
  CHECK(none.k() == 0);
  const auto mid = select_information_sets(r, 10);
  CHECK(mid.rates[0] <= mid.rates[1]);
  CHECK(mid.info_sets[1].size() == 8);
  CHECK(mid.info_sets[0] == std::vector<std::uint32_t>{0, 1});

  const std::vector<std::size_t> sizes{3, 5};
  const auto per = select_information_sets_per_level(r, sizes);
  CHECK(per.info_sets[0] == std::vector<std::uint32_t>{0, 1, 2});
  CHECK(per.info_sets[1].size() == 5);
}

TEST_CASE("outage rule") {
  SUBCASE("single level returns the target") {
    MiSamples m;
    m.b = 1;
    RandomStream rng(1, 0);
    for (int k = 0; k < 1000; ++k) {
      const double v = rng.uniform();
      m.values.push_back(v);
      m.total.push_back(v);
    }
    const auto r = outage_rule(m, 0.5, 1.01);
    CHECK(r.rates[0] >= 0.5);
    CHECK(r.rates[0] < 0.5 + 0.02);
  }
  SUBCASE("loop invariant and level ordering") {
    const auto s = make_setup(Family::alamouti, ConstellationKind::qam16);
    const auto batch = sample_channel_batch(2, 2, 10000, 3, streams::make(streams::channel, 100));
    const auto samples = mi_samples(s.spm, s.cb, noise_from_snr_db(12.0, 2), batch, 32, 4);
    const auto res = outage_rule(samples, 0.5, 1.05);
    double sum = 0.0;
    for (double v : res.rates) sum += v;
    CHECK(sum >= 4.0);
    if (res.iterations > 1) {
      double before = 0.0;
      for (std::size_t level = 1; level <= 8; ++level) before += outage_capacity(samples.level(level), res.eps_hat / 1.05);
      CHECK(before < 4.0);
    }
    // Rates rise from one distance tier to the next. Levels that share an
    // intra-subset distance are the matching bits of the two symbols and
    // only differ by tail-quantile noise.
    const auto intra = intra_subset_min_distance(s.cb, s.spm, Measure::frobenius, {});
    for (std::size_t i = 0; i < res.rates.size(); ++i)
      for (std::size_t j = i + 1; j < res.rates.size(); ++j) {
        if (intra[j] > intra[i] * (1.0 + 1e-9))
          CHECK(res.rates[j] >= res.rates[i]);
        else
          CHECK(std::abs(res.rates[j] - res.rates[i]) < 0.15);
      }
  }
  SUBCASE("infeasible target") {
    MiSamples m;
    m.b = 2;
    m.values = {0.1, 0.1, 0.1, 0.1};
    m.total = {0.2, 0.2};
    try {
      outage_rule(m, 0.9, 1.05);
      FAIL("expected no_feasible_rates");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::no_feasible_rates);
    }
  }
}

TEST_CASE("encoding") {
  const auto s = make_setup(Family::alamouti, ConstellationKind::qpsk);
  const auto none = make_code(16, {{}, {}, {}, {}});
  const auto labels = mlpcm_encode(none, {});
  CHECK(labels.size() == 16);
  for (auto l : labels) CHECK(l == 0u);
  const auto code = make_code(16, {{15}, {7, 11, 13, 14, 15}, {3, 5, 6, 7, 9, 10, 11, 12, 13, 14, 15}, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15}});
  RandomStream rng(2, 0);
  const auto data = data_bits(code.k(), rng);
  CHECK(mlpcm_encode(code, data).size() == 16);
  CHECK_THROWS_AS(mlpcm_encode(code, Bits(3)), Error);
}

TEST_CASE("noiseless round trip for every family") {
  RandomStream rng(7, 0);
  const double r = 1.0 / std::sqrt(2.0);
  const cplx a2 = std::polar(r, 114.29 * 3.14159265358979 / 180.0);
  const std::vector<Setup> setups{
      make_setup(Family::alamouti, ConstellationKind::qam16),
      make_setup(Family::matrix_a, ConstellationKind::qpsk),
      make_setup(Family::matrix_b, ConstellationKind::qpsk, false, {r, a2, r, cplx(0, -1) * a2}),
      make_setup(Family::matrix_c, ConstellationKind::qam16, true),
      make_setup(Family::matrix_d, ConstellationKind::qam16, true,
                 shaped_coefficients(Family::matrix_d, std::vector<double>{0.5, 0.5, 180.0})),
      make_setup(Family::matrix_e, ConstellationKind::qpsk, false,
                 shaped_coefficients(Family::matrix_e, std::vector<double>{0.5, 0.5, 45.0}))};
  for (const auto& s : setups) {
    const std::size_t b = s.cb.bits();
    const auto rank = rank_bit_channels(s.spm, s.cb, 16, 10.0, 50, 3);
    const auto code = select_information_sets(rank, 8 * b);
    for (int f = 0; f < 20; ++f) {
      const auto data = data_bits(code.k(), rng);
      const auto h = sample_channel(s.cb.spec.nt, 2, rng);
      std::optional<std::uint64_t> tv;
      if (s.cb.spec.tv) tv = rng.next_u64();
      CHECK(round_trip(code, s, data, h, tv) == data);
    }
  }
}

TEST_CASE("msd decoding is deterministic and matches simulate_frames") {
  const auto s = make_setup(Family::alamouti, ConstellationKind::qpsk);
  const auto code = select_information_sets(rank_bit_channels(s.spm, s.cb, 32, 8.0, 300, 1), 64);
  RandomStream rng(1, 1);
  const auto data = data_bits(code.k(), rng);
  const auto labels = mlpcm_encode(code, data);
  const auto h = sample_channel(2, 2, rng);
  const NoiseSpec noise(0.2);
  std::vector<ComplexMatrix> y;
  for (auto l : labels) {
    ComplexMatrix v = s.cb.symbols[s.spm.perm[l]] * h;
    add_noise(v, noise, rng);
    y.push_back(v);
  }
  CHECK(msd_decode(code, s.spm, s.cb, y, h, noise) == msd_decode(code, s.spm, s.cb, y, h, noise));
  CHECK_THROWS_AS(msd_decode(code, s.spm, s.cb, std::span<const ComplexMatrix>(y).first(3), h, noise), Error);
}

TEST_CASE("frame simulation") {
  const auto s = make_setup(Family::alamouti, ConstellationKind::qam16);
  const auto code = select_information_sets(rank_bit_channels(s.spm, s.cb, 32, 14.0, 500, 1), 128);
  FerOptions o;
  o.max_frames = 1024;
  o.min_errors = 1u << 30;
  const auto plain = simulate_frames(code, s.spm, s.cb, noise_from_snr_db(12.0, 2), o, 9);
  o.genie = true;
  const auto genie = simulate_frames(code, s.spm, s.cb, noise_from_snr_db(12.0, 2), o, 9);
  REQUIRE(plain.frames == genie.frames);
  CHECK(genie.level_errors[0] == plain.level_errors[0]);
  for (std::size_t l = 0; l < 8; ++l) CHECK(genie.level_errors[l] <= plain.level_errors[l]);

  o.genie = false;
  o.max_frames = 10000;
  o.min_errors = 20;
  const auto early = simulate_frames(code, s.spm, s.cb, noise_from_snr_db(8.0, 2), o, 9);
  CHECK(early.frame_errors >= 20);
  CHECK(early.frames % 128 == 0);

  const auto again = simulate_frames(code, s.spm, s.cb, noise_from_snr_db(8.0, 2), o, 9);
  CHECK(again.frame_errors == early.frame_errors);
  CHECK(again.bit_errors == early.bit_errors);

  const auto clean = simulate_frames(code, s.spm, s.cb, NoiseSpec(1e-30), o, 9);
  CHECK(clean.frame_errors == 0);
}
