#include "mlpcm/stbc.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>

namespace mlpcm {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr cplx kJ{0.0, 1.0};

struct Dimensions {
  std::size_t l, nt, n_syms;
};

Dimensions dimensions(Family family, std::size_t vector_antennas) {
  switch (family) {
    case Family::alamouti: return {2, 2, 2};
    case Family::matrix_a: return {2, 2, 4};
    case Family::matrix_b: return {2, 2, 4};
    case Family::matrix_c: return {1, vector_antennas, vector_antennas};
    case Family::matrix_d: return {1, 2, 2};
    case Family::matrix_e: return {1, 2, 4};
    case Family::matrix_f: return {1, 3, 6};
  }
  fail(Errc::unsupported, "unknown family");
}

// Un-normalized family formula.
ComplexMatrix encode_raw(const StbcSpec& spec, std::span<const cplx> s) {
  const auto& c = spec.coeffs;
  ComplexMatrix g(spec.l, spec.nt);
  switch (spec.family) {
    case Family::alamouti:
      g(0, 0) = s[0];
      g(0, 1) = s[1];
      g(1, 0) = -std::conj(s[1]);
      g(1, 1) = std::conj(s[0]);
      break;
    case Family::matrix_a: {
      const double theta = (1.0 + std::sqrt(5.0)) / 2.0;
      const double theta_bar = 1.0 - theta;
      const cplx alpha = 1.0 + kJ * (1.0 - theta);
      const cplx alpha_bar = 1.0 + kJ * (1.0 - theta_bar);
      const double scale = 1.0 / std::sqrt(5.0);
      g(0, 0) = scale * alpha * (s[0] + s[1] * theta);
      g(0, 1) = scale * alpha * (s[2] + s[3] * theta);
      g(1, 0) = scale * kJ * alpha_bar * (s[2] + s[3] * theta_bar);
      g(1, 1) = scale * alpha_bar * (s[0] + s[1] * theta_bar);
      break;
    }
    case Family::matrix_b: {
      const cplx a1 = c[0], a2 = c[1], b1 = c[2], b2 = c[3];
      g(0, 0) = a1 * s[0] + a2 * s[2];
      g(0, 1) = a1 * s[1] + a2 * s[3];
      g(1, 0) = -b1 * std::conj(s[1]) - b2 * std::conj(s[3]);
      g(1, 1) = b1 * std::conj(s[0]) + b2 * std::conj(s[2]);
      break;
    }
    case Family::matrix_c:
      for (std::size_t t = 0; t < spec.nt; ++t) g(0, t) = s[t];
      break;
    case Family::matrix_d:
      g(0, 0) = c[0] * s[0] + c[2] * s[1];
      g(0, 1) = c[1] * s[0] + c[3] * s[1];
      break;
    case Family::matrix_e:
      g(0, 0) = c[0] * s[0] + c[2] * s[1];
      g(0, 1) = c[1] * s[2] + c[3] * s[3];
      break;
    case Family::matrix_f:
      g(0, 0) = c[0] * s[0] + c[3] * s[1];
      g(0, 1) = c[1] * s[2] + c[4] * s[3];
      g(0, 2) = c[2] * s[4] + c[5] * s[5];
      break;
  }
  return g;
}

void symbol_indices(std::size_t label, std::size_t n_syms, std::size_t bits_per,
                    std::span<std::size_t> out) {
  const std::size_t mask = (std::size_t{1} << bits_per) - 1;
  for (std::size_t k = 0; k < n_syms; ++k) out[k] = (label >> (bits_per * (n_syms - 1 - k))) & mask;
}

void validate(const StbcSpec& spec) {
  const auto& c = spec.coeffs;
  auto balanced = [](double p, double q) { return std::abs(p - q) <= 1e-9 * std::max({1.0, p, q}); };
  switch (spec.family) {
    case Family::matrix_d: {
      const cplx det = c[0] * c[3] - c[1] * c[2];
      const double scale = std::max({std::abs(c[0] * c[3]), std::abs(c[1] * c[2]), 1e-300});
      require(std::abs(det) > 1e-12 * scale, "MatrixD: alpha1*beta2 == alpha2*beta1 (mixing matrix is singular)",
              Errc::rank_deficient);
      require(balanced(std::norm(c[0]) + std::norm(c[2]), std::norm(c[1]) + std::norm(c[3])),
              "MatrixD: |alpha1|^2+|beta1|^2 must equal |alpha2|^2+|beta2|^2", Errc::constraint_violation);
      break;
    }
    case Family::matrix_e:
      for (const auto& v : c) require(std::abs(v) > 1e-12, "MatrixE: all coefficients must be non-zero", Errc::rank_deficient);
      require(balanced(std::norm(c[0]) + std::norm(c[2]), std::norm(c[1]) + std::norm(c[3])),
              "MatrixE: |alpha1|^2+|beta1|^2 must equal |alpha2|^2+|beta2|^2", Errc::constraint_violation);
      break;
    case Family::matrix_f: {
      const double p1 = std::norm(c[0]) + std::norm(c[3]);
      const double p2 = std::norm(c[1]) + std::norm(c[4]);
      const double p3 = std::norm(c[2]) + std::norm(c[5]);
      require(p1 > 0.0, "MatrixF: antenna branches must be non-zero", Errc::rank_deficient);
      require(balanced(p1, p2) && balanced(p1, p3), "MatrixF: per-antenna powers must be equal",
              Errc::constraint_violation);
      break;
    }
    default:
      break;
  }
}

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::alamouti: return "alamouti";
    case Family::matrix_a: return "matrix_a";
    case Family::matrix_b: return "matrix_b";
    case Family::matrix_c: return "matrix_c";
    case Family::matrix_d: return "matrix_d";
    case Family::matrix_e: return "matrix_e";
    case Family::matrix_f: return "matrix_f";
  }
  return "unknown";
}

Family family_from_string(const std::string& name) {
  for (auto f : {Family::alamouti, Family::matrix_a, Family::matrix_b, Family::matrix_c, Family::matrix_d,
                 Family::matrix_e, Family::matrix_f})
    if (to_string(f) == name) return f;
  if (name == "golden" || name == "A") return Family::matrix_a;
  if (name.size() == 1 && name[0] >= 'B' && name[0] <= 'F')
    return static_cast<Family>(static_cast<int>(Family::matrix_b) + (name[0] - 'B'));
  fail(Errc::invalid_argument, "unknown STBC family '" + name + "'");
}

std::size_t raw_arity(Family family) {
  switch (family) {
    case Family::matrix_b:
    case Family::matrix_d:
    case Family::matrix_e: return 4;
    case Family::matrix_f: return 6;
    default: return 0;
  }
}

std::size_t shape_arity(Family family) {
  switch (family) {
    case Family::matrix_b:
    case Family::matrix_d:
    case Family::matrix_e: return 3;
    case Family::matrix_f: return 4;
    default: return 0;
  }
}

std::vector<cplx> shaped_coefficients(Family family, std::span<const double> shape) {
  require(shape.size() == shape_arity(family),
          "shaped_coefficients: " + to_string(family) + " expects " + std::to_string(shape_arity(family)) +
              " shape parameters");
  switch (family) {
    case Family::matrix_b: {
      const cplx a1 = shape[0];
      const cplx a2 = std::polar(shape[1], shape[2] * kDeg);
      return {a1, a2, a1, -kJ * a2};
    }
    case Family::matrix_d:
    case Family::matrix_e: {
      const cplx a1 = shape[0];
      const cplx b1 = std::polar(shape[1], shape[2] * kDeg);
      return {a1, a1, b1, kJ * b1};
    }
    case Family::matrix_f: {
      require(shape[0] >= 0.0 && shape[0] < 1.0, "MatrixF: |beta| must lie in [0, 1)");
      const cplx a = std::sqrt(1.0 - shape[0] * shape[0]);
      return {a, a, a, std::polar(shape[0], shape[1] * kDeg), std::polar(shape[0], shape[2] * kDeg),
              std::polar(shape[0], shape[3] * kDeg)};
    }
    default:
      return {};
  }
}

StbcSpec build_stbc(Family family, std::vector<cplx> coeffs, Constellation constellation, bool tv,
                    std::size_t vector_antennas) {
  require(coeffs.size() == raw_arity(family),
          "build_stbc: " + to_string(family) + " expects " + std::to_string(raw_arity(family)) + " coefficients, got " +
              std::to_string(coeffs.size()));
  require(vector_antennas >= 1, "build_stbc: MatrixC needs at least one antenna");
  require(!constellation.points.empty(), "build_stbc: empty constellation");
  for (const auto& c : coeffs) require(std::isfinite(c.real()) && std::isfinite(c.imag()), "build_stbc: non-finite coefficient");

  const auto dims = dimensions(family, vector_antennas);
  StbcSpec spec;
  spec.family = family;
  spec.coeffs = std::move(coeffs);
  spec.l = dims.l;
  spec.nt = dims.nt;
  spec.n_syms = dims.n_syms;
  spec.constellation = std::move(constellation);
  spec.tv = tv;
  spec.norm = 1.0;
  validate(spec);
  require(spec.bits() <= kMaxCodebookBits, "build_stbc: codebook of 2^" + std::to_string(spec.bits()) + " symbols is too large",
          Errc::too_large);

  // Mean energy over the enumerated codebook; TV rotations do not change it.
  const std::size_t count = std::size_t{1} << spec.bits();
  const std::size_t bits_per = spec.constellation.bits();
  std::vector<std::size_t> idx(spec.n_syms);
  std::vector<cplx> syms(spec.n_syms);
  double energy = 0.0;
  for (std::size_t label = 0; label < count; ++label) {
    symbol_indices(label, spec.n_syms, bits_per, idx);
    for (std::size_t k = 0; k < spec.n_syms; ++k) syms[k] = spec.constellation.points[idx[k]];
    energy += frobenius_sq(encode_raw(spec, syms));
  }
  energy /= static_cast<double>(count);
  require(energy > 0.0, "build_stbc: code has zero energy", Errc::rank_deficient);
  spec.norm = 1.0 / std::sqrt(energy);
  return spec;
}

TvPhases sample_tv_phases(std::size_t nt, std::uint64_t seed, std::uint64_t n) {
  require(nt >= 1, "sample_tv_phases: nt must be >= 1");
  RandomStream rng(seed, streams::make(streams::tv_phase, n >> 32), static_cast<std::uint32_t>(n));
  TvPhases tv;
  tv.seed = seed;
  tv.index = n;
  tv.phases.resize(nt);
  for (auto& p : tv.phases) p = 2.0 * std::numbers::pi * rng.uniform();
  return tv;
}

ComplexMatrix rotate_channel(const ComplexMatrix& h, std::span<const double> phases) {
  require(phases.size() == h.rows(), "rotate_channel: phase count must equal nt");
  ComplexMatrix out = h;
  for (std::size_t t = 0; t < h.rows(); ++t) {
    const cplx rot = std::polar(1.0, phases[t]);
    for (std::size_t r = 0; r < h.cols(); ++r) out(t, r) *= rot;
  }
  return out;
}

SpaceTimeSymbol encode_symbol(const StbcSpec& spec, std::span<const std::size_t> sym_indices, const TvPhases* tv) {
  require(sym_indices.size() == spec.n_syms, "encode_symbol: wrong number of symbol indices");
  require((tv != nullptr) == spec.tv, "encode_symbol: TV phases must be given iff the code is time-varying");
  std::vector<cplx> syms(spec.n_syms);
  std::uint32_t label = 0;
  const std::size_t bits_per = spec.constellation.bits();
  for (std::size_t k = 0; k < spec.n_syms; ++k) {
    require(sym_indices[k] < spec.constellation.size(), "encode_symbol: constellation index out of range");
    syms[k] = spec.constellation.points[sym_indices[k]];
    label = static_cast<std::uint32_t>((label << bits_per) | sym_indices[k]);
  }
  SpaceTimeSymbol out{encode_raw(spec, syms) * spec.norm, label};
  if (tv != nullptr) {
    require(tv->phases.size() == spec.nt, "encode_symbol: TV phase count must equal nt");
    for (std::size_t l = 0; l < spec.l; ++l)
      for (std::size_t t = 0; t < spec.nt; ++t) out.matrix(l, t) *= std::polar(1.0, tv->phases[t]);
  }
  return out;
}

Codebook enumerate_codebook(const StbcSpec& spec) {
  require(spec.bits() <= kMaxCodebookBits, "enumerate_codebook: B exceeds the tractability guard", Errc::too_large);
  Codebook cb;
  cb.spec = spec;
  const std::size_t count = std::size_t{1} << spec.bits();
  const std::size_t bits_per = spec.constellation.bits();
  cb.symbols.resize(count);
  std::vector<std::size_t> idx(spec.n_syms);
  std::vector<cplx> syms(spec.n_syms);
  for (std::size_t label = 0; label < count; ++label) {
    symbol_indices(label, spec.n_syms, bits_per, idx);
    for (std::size_t k = 0; k < spec.n_syms; ++k) syms[k] = spec.constellation.points[idx[k]];
    cb.symbols[label] = encode_raw(spec, syms) * spec.norm;
  }
  return cb;
}

DifferenceMatrix difference(const Codebook& cb, std::size_t i, std::size_t j) {
  require(i < cb.size() && j < cb.size(), "difference: label out of range");
  return cb.symbols[i] - cb.symbols[j];
}

double gram_determinant(const ComplexMatrix& d) {
  const std::size_t l = d.rows();
  if (l == 1) return frobenius_sq(d);
  const ComplexMatrix gram = d * d.hermitian();
  if (l == 2) {
    const double det = gram(0, 0).real() * gram(1, 1).real() - std::norm(gram(0, 1));
    return std::max(det, 0.0);
  }
  Eigen::MatrixXcd g(l, l);
  for (std::size_t r = 0; r < l; ++r)
    for (std::size_t c = 0; c < l; ++c) g(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = gram(r, c);
  return std::max(g.determinant().real(), 0.0);
}

double min_det_coding_gain(const Codebook& cb) {
  require(cb.size() >= 1, "min_det_coding_gain: empty codebook");
  const auto n = static_cast<std::int64_t>(cb.size());
  double best = std::numeric_limits<double>::infinity();
#pragma omp parallel for schedule(dynamic, 16) reduction(min : best)
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = i + 1; j < n; ++j)
      best = std::min(best, gram_determinant(cb.symbols[static_cast<std::size_t>(i)] - cb.symbols[static_cast<std::size_t>(j)]));
  return best;
}

double pep_upper_bound(const DifferenceMatrix& d, const ComplexMatrix& h, const NoiseSpec& noise) {
  return 0.5 * std::exp(-product_frobenius_sq(d, h) / (4.0 * noise.n0));
}

}  // namespace mlpcm
