#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mlpcm/bounds.hpp"
#include "mlpcm/special.hpp"

using namespace mlpcm;

// Reference values from mpmath (30 digits).
TEST_CASE("regularized incomplete gamma") {
  struct Row {
    double a, x, p;
  };
  const Row rows[] = {{1, 0.5, 0.393469340287366576},  {2, 1.0, 0.264241117657115357},
                      {3, 2.5, 0.456186884116670482},  {5, 0.1, 7.66780168618931102e-8},
                      {2.5, 10.0, 0.998750269436968625}, {10, 12.0, 0.757607838329487651},
                      {0.5, 0.2, 0.472910743134461926}};
  for (const auto& r : rows) {
    CHECK(regularized_gamma_p(r.a, r.x) == doctest::Approx(r.p).epsilon(1e-12));
    CHECK(regularized_gamma_q(r.a, r.x) == doctest::Approx(1.0 - r.p).epsilon(1e-12));
  }
  CHECK(regularized_gamma_p(3.0, 0.0) == 0.0);
}

TEST_CASE("gaussian helpers") {
  CHECK(gaussian_tail(1.0) == doctest::Approx(0.158655253931457051).epsilon(1e-13));
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(gaussian_tail(-2.0) == doctest::Approx(normal_cdf(2.0)));
}

TEST_CASE("ln I0") {
  const std::pair<double, double> rows[] = {{0.0, 0.0},
                                            {0.5, 0.0615497191854813039},
                                            {1.0, 0.235914358507178649},
                                            {5.0, 3.30468177582253343},
                                            {29.0, 26.4018010371502302},
                                            {31.0, 28.3681674623664135},
                                            {100.0, 96.7797326899425837},
                                            {700.0, 695.805699998443449}};
  for (const auto& [x, v] : rows) CHECK(ln_bessel_i0(x) == doctest::Approx(v).epsilon(1e-13));
}

TEST_CASE("log_sum_exp") {
  const std::vector<double> v{-1000.0, -1000.0};
  CHECK(log_sum_exp(v) == doctest::Approx(-1000.0 + std::log(2.0)));
  const std::vector<double> w{1.0, 2.0, 3.0};
  CHECK(log_sum_exp(w) == doctest::Approx(std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0))));
}

TEST_CASE("bhattacharyya") {
  const ComplexMatrix h{{cplx(0.7, -0.2)}};
  const NoiseSpec noise(0.5);
  CHECK(bhattacharyya(ComplexMatrix(1, 1), h, noise) == 1.0);
  // 2-D quadrature of sqrt(p(y|s_i) p(y|s_j)) over y (mpmath).
  const ComplexMatrix d{{cplx(1.0, 0.0) - cplx(-0.3, 0.4)}};
  CHECK(bhattacharyya(d, h, noise) == doctest::Approx(0.612473256728849536).epsilon(1e-12));
  ComplexMatrix d2{{1.0}};
  d2 *= std::sqrt(4.0 * noise.n0 * std::log(2.0) / std::norm(h(0, 0)));
  CHECK(bhattacharyya(d2, h, noise) == doctest::Approx(0.5));
}

TEST_CASE("time-varying Bhattacharyya average") {
  const NoiseSpec noise(0.3);
  RandomStream rng(6, 0);
  const auto h = sample_channel(2, 2, rng);
  const ComplexMatrix d{{cplx(0.8, -0.3), cplx(-0.4, 0.9)}};
  SUBCASE("one zero column reduces to the plain coefficient") {
    const ComplexMatrix dz{{cplx(0.8, -0.3), 0.0}};
    CHECK(bhattacharyya_tv_avg(dz, h, noise) == doctest::Approx(bhattacharyya(dz, h, noise)).epsilon(1e-12));
  }
  SUBCASE("lies within the range over the phase") {
    for (int t = 0; t < 50; ++t) {
      const auto hh = sample_channel(2, 2, rng);
      double lo = 1.0, hi = 0.0;
      for (int k = 0; k < 720; ++k) {
        const ComplexMatrix dr{{d(0, 0), d(0, 1) * std::polar(1.0, k * std::numbers::pi / 360.0)}};
        const double v = bhattacharyya(dr, hh, noise);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      const double avg = bhattacharyya_tv_avg(d, hh, noise);
      CHECK(avg >= lo * (1.0 - 1e-9));
      CHECK(avg <= hi * (1.0 + 1e-9));
    }
  }
  SUBCASE("matches a Monte-Carlo phase average") {
    double sum = 0.0;
    const int n = 100000;
    for (int k = 0; k < n; ++k) {
      const double theta = 2.0 * std::numbers::pi * rng.uniform();
      const ComplexMatrix dr{{d(0, 0), d(0, 1) * std::polar(1.0, theta)}};
      sum += bhattacharyya(dr, h, noise);
    }
    CHECK(sum / n == doctest::Approx(bhattacharyya_tv_avg(d, h, noise)).epsilon(0.01));
  }
  CHECK_THROWS_AS(bhattacharyya_tv_avg(ComplexMatrix(2, 2), h, noise), Error);
}

TEST_CASE("q_from_rate") {
  CHECK(q_from_rate(1.0) == 0.0);
  CHECK(q_from_rate(0.0) == 1.0);
  CHECK(q_from_rate(0.5) == doctest::Approx(0.41421356237));
}

TEST_CASE("ubpop_sbc") {
  const NoiseSpec noise(0.25);
  ComplexMatrix d{{1.0, 0.0}};
  d *= std::sqrt(4.0 * noise.n0);
  CHECK(ubpop_sbc(d, noise, 0.5, 1) == doctest::Approx(0.5));
  CHECK(ubpop_sbc(d, noise, 1.0 - 1e-12, 1) < 1e-9);

  // Monte-Carlo Pr(q < rho) over Rayleigh channels.
  const ComplexMatrix dd{{cplx(0.6, 0.2), cplx(-0.1, 0.5)}};
  for (std::size_t nr : {1u, 2u}) {
    const auto batch = sample_channel_batch(2, nr, 100000, 12, 0);
    int hits = 0;
    for (const auto& h : batch.matrices) hits += bhattacharyya(dd, h, noise) > 0.3 ? 1 : 0;
    CHECK(std::abs(ubpop_sbc(dd, noise, 0.3, nr) - hits / 100000.0) < 0.01);
  }
}

TEST_CASE("ubpop_stbc") {
  const NoiseSpec noise(0.2);
  SUBCASE("single-row reduction") {
    const ComplexMatrix d{{cplx(0.6, 0.2), cplx(-0.1, 0.5)}, {0.0, 0.0}};
    const ComplexMatrix row{{cplx(0.6, 0.2), cplx(-0.1, 0.5)}};
    for (std::size_t nr : {1u, 2u, 3u})
      CHECK(std::abs(ubpop_stbc(d, noise, 0.4, nr) - ubpop_sbc(row, noise, 0.4, nr)) < 1e-9);
  }
  SUBCASE("moments and Monte Carlo on an orthogonal difference") {
    const ComplexMatrix d{{cplx(0.5, 0.1), cplx(0.2, -0.3)}, {-std::conj(cplx(0.2, -0.3)), std::conj(cplx(0.5, 0.1))}};
    const auto m = stbc_moments(d, 2);
    const auto batch = sample_channel_batch(2, 2, 100000, 13, 0);
    double s1 = 0.0, s2 = 0.0;
    int hits = 0;
    const double limit = -4.0 * noise.n0 * std::log(0.4);
    for (const auto& h : batch.matrices) {
      const double v = product_frobenius_sq(d, h);
      s1 += v;
      s2 += v * v;
      hits += v < limit ? 1 : 0;
    }
    const double mean = s1 / 1e5, var = s2 / 1e5 - mean * mean;
    CHECK(m.mu1 == doctest::Approx(mean).epsilon(0.01));
    CHECK(m.mu2 == doctest::Approx(var).epsilon(0.05));
    CHECK(std::abs(ubpop_stbc(d, noise, 0.4, 2) - hits / 1e5) < 0.02);
  }
}

TEST_CASE("omega moments") {
  const auto m1 = omega_moments(1, 200000, 3);
  CHECK(m1.e_omega == doctest::Approx(std::numbers::pi / 4.0).epsilon(0.01));
  const auto again = omega_moments(1, 200000, 3);
  CHECK(again.e_omega == m1.e_omega);
  CHECK(omega_moments(2, 200000, 3).e_omega > m1.e_omega);
}

TEST_CASE("piecewise ln I0") {
  CHECK(ln_i0_piecewise(0.0) == 0.0);
  CHECK(ln_i0_piecewise(1.0) == doctest::Approx(0.23));
  CHECK(ln_i0_piecewise(3.0) == doctest::Approx(1.59));
}

TEST_CASE("ubpop_tvsbc") {
  const auto omega = omega_moments(2, 100000, 1);
  const ComplexMatrix d{{cplx(0.7, 0.1), cplx(-0.2, 0.6)}};
  CHECK(ubpop_tvsbc(d, NoiseSpec(0.1), 1.0 - 1e-12, omega) < 1e-6);
  double prev = 0.0;
  for (double n0 : {0.02, 0.05, 0.1, 0.2, 0.4}) {
    const double v = ubpop_tvsbc(d, NoiseSpec(n0), 0.414, omega);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("kl divergence") {
  const std::vector<double> p{0.2, 0.3, 0.5};
  CHECK(kl_divergence(p, p) == 0.0);
  const std::vector<double> a{1.0, 0.0}, b{0.5, 0.5};
  CHECK(kl_divergence(a, b) == doctest::Approx(1.0));
  RandomStream rng(2, 0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x(5), y(5);
    double sx = 0.0, sy = 0.0;
    for (int i = 0; i < 5; ++i) {
      sx += x[i] = rng.uniform();
      sy += y[i] = rng.uniform();
    }
    for (int i = 0; i < 5; ++i) {
      x[i] /= sx;
      y[i] /= sy;
    }
    CHECK(kl_divergence(x, y) >= 0.0);
  }
}

TEST_CASE("log-normal fit divergence") {
  RandomStream rng(8, 0);
  std::vector<double> samples(100000);
  for (auto& v : samples) v = std::exp(0.3 + 0.5 * rng.normal());
  CHECK(lognormal_fit_divergence(samples, 50) < 0.05);
  CHECK(lognormal_fit_divergence(samples, 2) < 0.01);
}

TEST_CASE("fit_quality on a TV space block code") {
  const auto cb = enumerate_codebook(build_stbc(Family::matrix_c, {}, make_constellation(ConstellationKind::qpsk), true));
  const NoiseSpec noise = noise_from_snr_db(10.0, 1);
  const double coarse = fit_quality(cb, noise, 2, 2000, 5, 50, 24);
  const double fine = fit_quality(cb, noise, 2, 20000, 5, 50, 24);
  CHECK(std::isfinite(coarse));
  CHECK(fine < 1.0);
  CHECK(fine < coarse);
}
