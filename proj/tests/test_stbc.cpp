#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mlpcm/stbc.hpp"

using namespace mlpcm;

namespace {

constexpr cplx J{0.0, 1.0};
const double kDeg = std::numbers::pi / 180.0;

std::vector<cplx> matrix_b_rd(double phi_deg) {
  const double r = 1.0 / std::sqrt(2.0);
  const cplx a2 = std::polar(r, phi_deg * kDeg);
  return {r, a2, r, -J * a2};
}

double mean_energy(const Codebook& cb) {
  double e = 0.0;
  for (const auto& s : cb.symbols) e += frobenius_sq(s);
  return e / static_cast<double>(cb.size());
}

}  // namespace

TEST_CASE("constellations") {
  const auto bpsk = make_constellation(ConstellationKind::bpsk);
  REQUIRE(bpsk.size() == 2);
  CHECK(bpsk.points[0] == cplx(1, 0));
  CHECK(bpsk.points[1] == cplx(-1, 0));
  const auto qpsk = make_constellation(ConstellationKind::qpsk);
  REQUIRE(qpsk.size() == 4);
  for (const auto& p : qpsk.points) CHECK(std::norm(p) == doctest::Approx(1.0));
  const auto qam = make_constellation(ConstellationKind::qam16);
  REQUIRE(qam.size() == 16);
  double e = 0.0;
  for (const auto& p : qam.points) e += std::norm(p);
  CHECK(e / 16.0 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(qam.bits() == 4);
}

TEST_CASE("build_stbc validation") {
  const auto qpsk = make_constellation(ConstellationKind::qpsk);
  CHECK_NOTHROW(build_stbc(Family::matrix_b, matrix_b_rd(114.29), qpsk, false));
  CHECK_NOTHROW(build_stbc(Family::matrix_b, {0.314, cplx(0.067, 0.381), 0.314, cplx(-0.070, 0.384)}, qpsk, false));
  try {
    build_stbc(Family::matrix_d, {0.5, 0.5, 0.5, 0.5}, make_constellation(ConstellationKind::qam16), false);
    FAIL("expected rank deficiency");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::rank_deficient);
  }
  CHECK_THROWS_AS(build_stbc(Family::matrix_b, {1.0, 2.0}, qpsk, false), Error);
  CHECK_THROWS_AS(build_stbc(Family::matrix_e, {0.9, 0.1, 0.1, 0.1}, qpsk, false), Error);
}

TEST_CASE("codebooks are power-normalized") {
  const auto qpsk = make_constellation(ConstellationKind::qpsk);
  const auto qam = make_constellation(ConstellationKind::qam16);
  for (const auto& cb : {enumerate_codebook(build_stbc(Family::alamouti, {}, qam, false)),
                         enumerate_codebook(build_stbc(Family::matrix_a, {}, qpsk, false)),
                         enumerate_codebook(build_stbc(Family::matrix_b, matrix_b_rd(114.29), qpsk, false)),
                         enumerate_codebook(build_stbc(Family::matrix_c, {}, qam, false)),
                         enumerate_codebook(build_stbc(Family::matrix_d, shaped_coefficients(Family::matrix_d, std::vector<double>{0.5, 0.5, 330.0}), qam, true)),
                         enumerate_codebook(build_stbc(Family::matrix_e, shaped_coefficients(Family::matrix_e, std::vector<double>{0.5, 0.5, 45.0}), qpsk, false))})
    CHECK(mean_energy(cb) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("encode_symbol") {
  SUBCASE("MatrixA with all symbols 1") {
    const auto spec = build_stbc(Family::matrix_a, {}, make_constellation(ConstellationKind::bpsk), false);
    const std::vector<std::size_t> idx{0, 0, 0, 0};
    const auto s = encode_symbol(spec, idx).matrix;
    const double theta = (1.0 + std::sqrt(5.0)) / 2.0, theta_bar = 1.0 - theta;
    const cplx alpha = 1.0 + J * (1.0 - theta), alpha_bar = 1.0 + J * (1.0 - theta_bar);
    const double k = spec.norm / std::sqrt(5.0);
    CHECK(std::abs(s(0, 0) - k * alpha * (1.0 + theta)) < 1e-12);
    CHECK(std::abs(s(0, 1) - k * alpha * (1.0 + theta)) < 1e-12);
    CHECK(std::abs(s(1, 0) - k * J * alpha_bar * (1.0 + theta_bar)) < 1e-12);
    CHECK(std::abs(s(1, 1) - k * alpha_bar * (1.0 + theta_bar)) < 1e-12);
  }
  SUBCASE("MatrixC is direct placement") {
    const auto spec = build_stbc(Family::matrix_c, {}, make_constellation(ConstellationKind::qam16), false);
    const std::vector<std::size_t> idx{0, 0};
    const auto s = encode_symbol(spec, idx).matrix;
    REQUIRE(s.rows() == 1);
    REQUIRE(s.cols() == 2);
    CHECK(s(0, 0) == s(0, 1));
    CHECK(std::abs(s(0, 0) - spec.norm * spec.constellation.points[0]) < 1e-15);
  }
  SUBCASE("zero TV phases leave the symbol unchanged") {
    const auto qpsk = make_constellation(ConstellationKind::qpsk);
    const auto plain = build_stbc(Family::matrix_c, {}, qpsk, false);
    const auto tv = build_stbc(Family::matrix_c, {}, qpsk, true);
    TvPhases zero;
    zero.phases = {0.0, 0.0};
    const std::vector<std::size_t> idx{1, 3};
    CHECK(encode_symbol(plain, idx).matrix == encode_symbol(tv, idx, &zero).matrix);
    CHECK_THROWS_AS(encode_symbol(tv, idx), Error);
  }
  SUBCASE("label packs the first symbol in the most significant bits") {
    const auto spec = build_stbc(Family::alamouti, {}, make_constellation(ConstellationKind::qpsk), false);
    const std::vector<std::size_t> idx{2, 1};
    const auto sym = encode_symbol(spec, idx);
    CHECK(sym.label == 9u);
    CHECK(sym.matrix == enumerate_codebook(spec).symbols[9]);
  }
}

TEST_CASE("enumerate_codebook sizes") {
  const auto qpsk = make_constellation(ConstellationKind::qpsk);
  const auto ala = enumerate_codebook(build_stbc(Family::alamouti, {}, qpsk, false));
  CHECK(ala.size() == 16);
  CHECK(ala.symbols[0].rows() == 2);
  CHECK(ala.symbols[0].cols() == 2);
  const auto a = enumerate_codebook(build_stbc(Family::matrix_a, {}, qpsk, false));
  CHECK(a.size() == 256);
  const auto f = enumerate_codebook(
      build_stbc(Family::matrix_f, shaped_coefficients(Family::matrix_f, std::vector<double>{0.5, 0.0, 90.0, 180.0}), qpsk, false));
  CHECK(f.size() == 4096);
  CHECK(f.symbols[0].rows() == 1);
  CHECK(f.symbols[0].cols() == 3);
}

TEST_CASE("difference matrices") {
  const auto cb = enumerate_codebook(build_stbc(Family::alamouti, {}, make_constellation(ConstellationKind::qpsk), false));
  CHECK(frobenius_sq(difference(cb, 5, 5)) == 0.0);
  CHECK(difference(cb, 3, 7) == difference(cb, 7, 3) * cplx(-1.0));
  // Labels 1 and 2 differ only in the second QPSK symbol.
  const auto d = difference(cb, 1, 2);
  const auto g = d * d.hermitian();
  CHECK(std::abs(g(0, 1)) < 1e-12);
  CHECK(g(0, 0).real() == doctest::Approx(g(1, 1).real()));
}

TEST_CASE("min-det coding gain") {
  const auto qpsk = make_constellation(ConstellationKind::qpsk);
  auto cb = enumerate_codebook(build_stbc(Family::alamouti, {}, qpsk, false));
  CHECK(min_det_coding_gain(cb) > 0.0);
  cb.symbols[1] = cb.symbols[0];
  CHECK(min_det_coding_gain(cb) == 0.0);

  const auto rd = enumerate_codebook(build_stbc(Family::matrix_b, matrix_b_rd(114.29), qpsk, false));
  const auto flat = enumerate_codebook(build_stbc(Family::matrix_b, matrix_b_rd(0.0), qpsk, false));
  CHECK(min_det_coding_gain(rd) > min_det_coding_gain(flat));
}

TEST_CASE("pep upper bound") {
  const ComplexMatrix h{{cplx(0.3, 0.1)}, {cplx(-0.2, 0.5)}};
  const NoiseSpec noise(0.2);
  CHECK(pep_upper_bound(ComplexMatrix(2, 2), h, noise) == doctest::Approx(0.5));

  // Scale a difference so that ||Delta H||^2 = 4 N0 ln 2.
  ComplexMatrix d{{1.0, 0.5}, {0.0, cplx(0, 1)}};
  const double target = 4.0 * noise.n0 * std::log(2.0);
  d *= std::sqrt(target / product_frobenius_sq(d, h));
  CHECK(pep_upper_bound(d, h, noise) == doctest::Approx(0.25));

  // ML detection between two symbols never does worse than the bound.
  const auto cb = enumerate_codebook(build_stbc(Family::alamouti, {}, make_constellation(ConstellationKind::qpsk), false));
  RandomStream rng(4, 0);
  const auto hh = sample_channel(2, 2, rng);
  const NoiseSpec nn(0.5);
  const auto& si = cb.symbols[0];
  const auto& sj = cb.symbols[5];
  int errors = 0;
  const int draws = 10000;
  for (int t = 0; t < draws; ++t) {
    ComplexMatrix y = si * hh;
    add_noise(y, nn, rng);
    errors += frobenius_sq(y - sj * hh) < frobenius_sq(y - si * hh) ? 1 : 0;
  }
  CHECK(static_cast<double>(errors) / draws <= pep_upper_bound(si - sj, hh, nn));
}

TEST_CASE("TV phases") {
  const auto a = sample_tv_phases(2, 17, 5), b = sample_tv_phases(2, 17, 5);
  CHECK(a.phases == b.phases);
  CHECK(sample_tv_phases(2, 17, 6).phases != a.phases);

  const int n = 100000;
  std::vector<double> u;
  for (int k = 0; k < n; ++k) {
    const auto p = sample_tv_phases(2, 3, static_cast<std::uint64_t>(k));
    for (double th : p.phases) {
      CHECK(std::abs(std::abs(std::polar(1.0, th)) - 1.0) < 1e-15);
      if (u.size() < static_cast<std::size_t>(n)) u.push_back(th / (2.0 * std::numbers::pi));
    }
  }
  std::sort(u.begin(), u.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    ks = std::max({ks, std::abs(u[i] - static_cast<double>(i) / n), std::abs(u[i] - static_cast<double>(i + 1) / n)});
  CHECK(ks < 0.01);
}

TEST_CASE("rotate_channel matches rotating the symbol") {
  const auto spec = build_stbc(Family::matrix_c, {}, make_constellation(ConstellationKind::qam16), true);
  const auto tv = sample_tv_phases(2, 9, 1);
  RandomStream rng(1, 1);
  const auto h = sample_channel(2, 2, rng);
  const std::vector<std::size_t> idx{3, 12};
  const auto rotated = encode_symbol(spec, idx, &tv).matrix * h;
  const auto via_channel = enumerate_codebook(spec).symbols[3 * 16 + 12] * rotate_channel(h, tv.phases);
  CHECK(frobenius_sq(rotated - via_channel) < 1e-24);
}

TEST_CASE("family names") {
  CHECK(family_from_string("golden") == Family::matrix_a);
  CHECK(family_from_string("matrix_b") == Family::matrix_b);
  CHECK(family_from_string("C") == Family::matrix_c);
  CHECK_THROWS_AS(family_from_string("nope"), Error);
}
