#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mlpcm/information.hpp"
#include "mlpcm/reference.hpp"

using namespace mlpcm;

namespace {

Codebook bpsk_scalar() {
  Codebook cb;
  cb.spec = build_stbc(Family::matrix_c, {}, make_constellation(ConstellationKind::bpsk), false, 1);
  cb = enumerate_codebook(cb.spec);
  return cb;
}

Codebook alamouti(ConstellationKind k) { return enumerate_codebook(build_stbc(Family::alamouti, {}, make_constellation(k), false)); }

}  // namespace

TEST_CASE("log_likelihood") {
  RandomStream rng(1, 0);
  const auto h = sample_channel(2, 2, rng);
  const auto cb = alamouti(ConstellationKind::qpsk);
  const NoiseSpec noise(0.3);
  const auto y = cb.symbols[3] * h;
  const double peak = -4.0 * std::log(std::numbers::pi * noise.n0);
  CHECK(log_likelihood(y, cb.symbols[3], h, noise) == doctest::Approx(peak));

  ComplexMatrix shifted = y;
  shifted(0, 0) += std::sqrt(4.0 * noise.n0 * std::log(2.0));
  CHECK(log_likelihood(shifted, cb.symbols[3], h, noise) == doctest::Approx(peak - 4.0 * std::log(2.0)));

  // exp(log-likelihood) integrates to one over a 1 x 1 observation.
  const ComplexMatrix s{{cplx(0.6, -0.2)}}, h1{{cplx(0.9, 0.4)}};
  const double step = 0.01;
  double mass = 0.0;
  for (double a = -5.0; a < 5.0; a += step)
    for (double b = -5.0; b < 5.0; b += step)
      mass += std::exp(log_likelihood(ComplexMatrix{{cplx(a + step / 2, b + step / 2)}}, s, h1, NoiseSpec(0.4))) * step * step;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("level_llr") {
  const auto cb = bpsk_scalar();
  const auto spm = identity_map(1);
  const ComplexMatrix h{{1.0}};
  const NoiseSpec noise(0.7);
  const ComplexMatrix y{{cplx(0.35, -0.8)}};
  CHECK(level_llr(y, h, spm, cb, 1, {}, noise) == doctest::Approx(4.0 * 0.35 / 0.7));

  // QPSK with set-partitioned labels: labels 0/1 are antipodal pairs.
  Codebook q = enumerate_codebook(build_stbc(Family::matrix_c, {}, make_constellation(ConstellationKind::qpsk), false, 1));
  const auto spm_q = set_merge_labeling(q, Measure::frobenius, {}, 0.0);
  const std::vector<std::uint8_t> upper{0};
  CHECK(std::abs(level_llr(ComplexMatrix{{0.0}}, h, spm_q, q, 2, upper, noise)) < 1e-12);
  CHECK(std::abs(level_llr(y, h, spm_q, q, 1, {}, NoiseSpec(1e6))) < 1e-5);

  // Agreement with the direct formula.
  const auto cb16 = alamouti(ConstellationKind::qam16);
  const auto spm16 = set_merge_labeling(cb16, Measure::frobenius, {}, 0.0);
  RandomStream rng(3, 3);
  const auto hh = sample_channel(2, 2, rng);
  ComplexMatrix yy = cb16.symbols[77] * hh;
  add_noise(yy, NoiseSpec(0.1), rng);
  const std::vector<std::uint8_t> bits{1, 0, 1};
  CHECK(level_llr(yy, hh, spm16, cb16, 4, bits, NoiseSpec(0.1)) ==
        doctest::Approx(reference::level_llr(yy, hh, spm16, cb16, 4, bits, NoiseSpec(0.1))).epsilon(1e-10));
}

TEST_CASE("mutual information limits and oracle") {
  const auto cb = alamouti(ConstellationKind::qpsk);
  RandomStream rng(2, 0);
  const auto h = sample_channel(2, 2, rng);
  CHECK(mutual_information(cb, h, NoiseSpec(1e8), 20000, 1) < 0.02);
  CHECK(mutual_information(cb, h, NoiseSpec(1e-8), 20000, 1) > 4.0 - 0.02);

  // Binary-input AWGN capacity (mpmath quadrature). With complex noise of
  // variance N0 the real part has N0/2, so N0 = 1 is 0 dB Es/N0 here and
  // N0 = 2 is unit real-noise variance.
  const auto b = bpsk_scalar();
  const ComplexMatrix one{{1.0}};
  CHECK(std::abs(mutual_information(b, one, NoiseSpec(1.0), 100000, 3) - 0.721451590790388) < 0.01);
  CHECK(std::abs(mutual_information(b, one, NoiseSpec(2.0), 100000, 3) - 0.485944154132935) < 0.01);
}

TEST_CASE("levelwise MI telescopes to the total") {
  const auto cb = alamouti(ConstellationKind::qam16);
  const auto spm = set_merge_labeling(cb, Measure::frobenius, {}, 0.0);
  RandomStream rng(4, 0);
  const auto h = sample_channel(2, 2, rng);
  for (double n0 : {0.5, 0.1, 0.02}) {
    const auto levels = levelwise_mi(spm, cb, h, NoiseSpec(n0), 5000, 9);
    double sum = 0.0;
    for (double v : levels) sum += v;
    CHECK(std::abs(sum - mutual_information(cb, h, NoiseSpec(n0), 5000, 9)) < 0.02);
  }
  for (double v : levelwise_mi(spm, cb, h, NoiseSpec(1e-9), 500, 9)) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));

  const auto b = bpsk_scalar();
  const ComplexMatrix one{{0.8}};
  CHECK(levelwise_mi(identity_map(1), b, one, NoiseSpec(0.5), 3000, 4)[0] ==
        doctest::Approx(mutual_information(b, one, NoiseSpec(0.5), 3000, 4)).epsilon(1e-12));
}

TEST_CASE("fast estimators agree with the reference") {
  const auto cb = alamouti(ConstellationKind::qam16);
  const auto spm = set_merge_labeling(cb, Measure::frobenius, {}, 0.0);
  const auto batch = sample_channel_batch(2, 2, 20, 5, 0);
  const NoiseSpec noise(0.08);
  const auto fast = mi_samples(spm, cb, noise, batch, 40, 2);
  const auto ref = reference::mi_samples(spm, cb, noise, batch, 40, 2);
  for (std::size_t i = 0; i < fast.values.size(); ++i) CHECK(std::abs(fast.values[i] - ref.values[i]) < 1e-10);
  for (std::size_t i = 0; i < fast.total.size(); ++i) CHECK(std::abs(fast.total[i] - ref.total[i]) < 1e-10);

  RandomStream rng(1, 9);
  const auto h = sample_channel(2, 2, rng);
  CHECK(mutual_information(cb, h, noise, 300, 8) == doctest::Approx(reference::mutual_information(cb, h, noise, 300, 8)).epsilon(1e-12));
  CHECK(cutoff_rate(cb, h, noise) == doctest::Approx(reference::cutoff_rate(cb, h, noise)).epsilon(1e-10));

  OutageOptions fixed;
  fixed.mc = 60;
  fixed.early_stop = false;
  CHECK(outage_estimate(cb, 4.0, noise, batch, fixed, 3).probability ==
        reference::outage_probability(cb, 4.0, noise, batch, 60, 3));

  const auto tv = enumerate_codebook(build_stbc(Family::matrix_c, {}, make_constellation(ConstellationKind::qpsk), true));
  const auto tv_batch = sample_channel_batch(2, 2, 10, 5, 0);
  const auto f2 = mi_samples(identity_map(4), tv, noise, tv_batch, 30, 2);
  const auto r2 = reference::mi_samples(identity_map(4), tv, noise, tv_batch, 30, 2);
  for (std::size_t i = 0; i < f2.values.size(); ++i) CHECK(std::abs(f2.values[i] - r2.values[i]) < 1e-10);
}

TEST_CASE("mi_samples does not depend on the thread count") {
  const auto cb = alamouti(ConstellationKind::qpsk);
  const auto batch = sample_channel_batch(2, 2, 64, 5, 0);
  const auto a = mi_samples(identity_map(4), cb, NoiseSpec(0.2), batch, 50, 1);
  const auto b = mi_samples(identity_map(4), cb, NoiseSpec(0.2), batch, 50, 1);
  CHECK(a.values == b.values);
  CHECK(a.total == b.total);
}

TEST_CASE("outage probability") {
  const auto cb = alamouti(ConstellationKind::qpsk);
  const auto batch = sample_channel_batch(2, 2, 10000, 7, 0);
  const NoiseSpec noise = noise_from_snr_db(10.0, 2);
  CHECK(outage_probability(cb, 0.0, noise, batch, 200, 1) == 0.0);
  CHECK(outage_probability(cb, 4.0, noise, batch, 200, 1) >= 0.99);

  const auto small = sample_channel_batch(2, 2, 2000, 7, 0);
  const double at = outage_probability(cb, 2.0, noise_from_snr_db(2.0, 2), small, 400, 1);
  const double half = outage_probability(cb, 2.0, NoiseSpec(noise_from_snr_db(2.0, 2).n0 / 2.0), small, 400, 1);
  CHECK(half <= at);

  // Early stopping changes the estimate only marginally.
  OutageOptions o;
  o.mc = 400;
  o.early_stop = false;
  const double full = outage_estimate(cb, 2.0, noise_from_snr_db(2.0, 2), small, o, 1).probability;
  CHECK(std::abs(full - at) < 0.01);
}

TEST_CASE("outage capacity") {
  const std::vector<double> same(50, 1.7);
  CHECK(outage_capacity(same, 0.01) == 1.7);
  CHECK(outage_capacity(same, 0.9) == 1.7);
  std::vector<double> seq(100);
  for (int i = 0; i < 100; ++i) seq[i] = i + 1;
  CHECK(outage_capacity(seq, 0.1) == 10.0);
  RandomStream rng(3, 0);
  std::vector<double> r(997);
  for (auto& v : r) v = rng.uniform() * 4.0;
  for (double eps : {0.001, 0.01, 0.05, 0.3, 0.77}) CHECK(empirical_outage(r, outage_capacity(r, eps)) <= eps);
}

TEST_CASE("cutoff rate") {
  const auto cb = alamouti(ConstellationKind::qpsk);
  RandomStream rng(5, 0);
  const auto h = sample_channel(2, 2, rng);
  CHECK(cutoff_rate(cb, h, NoiseSpec(1e-9)) == doctest::Approx(4.0));
  CHECK(cutoff_rate(cb, h, NoiseSpec(1e9)) < 1e-6);
  for (double n0 : {1.0, 0.3, 0.1})
    CHECK(cutoff_rate(cb, h, NoiseSpec(n0)) <= mutual_information(cb, h, NoiseSpec(n0), 100000, 2) + 0.03);
}
