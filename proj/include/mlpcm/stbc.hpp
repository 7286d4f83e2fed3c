#pragma once

// Parameterized space-time block code families, codebook enumeration and
// the classical rank/determinant design measures.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mlpcm/channel.hpp"
#include "mlpcm/constellation.hpp"

namespace mlpcm {

enum class Family { alamouti, matrix_a, matrix_b, matrix_c, matrix_d, matrix_e, matrix_f };

std::string to_string(Family family);
Family family_from_string(const std::string& name);

/// A validated, power-normalized code. `coeffs` always holds the raw
/// coefficient layout of the family:
///   Alamouti, MatrixA, MatrixC : none
///   MatrixB, MatrixD, MatrixE  : (alpha1, alpha2, beta1, beta2)
///   MatrixF                    : (alpha1, alpha2, alpha3, beta1, beta2, beta3)
struct StbcSpec {
  Family family = Family::alamouti;
  std::vector<cplx> coeffs;
  std::size_t l = 0;
  std::size_t nt = 0;
  std::size_t n_syms = 0;
  Constellation constellation;
  bool tv = false;
  double norm = 1.0;

  /// Label width B = n_syms * bits per constellation symbol.
  std::size_t bits() const { return n_syms * constellation.bits(); }
};

std::size_t raw_arity(Family family);

/// Number of real shape parameters of the reduced search layout:
///   MatrixB        : (alpha1, |alpha2|, phi)   alpha1 = beta1 real, alpha2 = |alpha2| e^{j phi}, beta2 = -j alpha2
///   MatrixD/E      : (alpha1, |beta1|, phi)    alpha2 = alpha1 real, beta1 = |beta1| e^{j phi}, beta2 = j beta1
///   MatrixF        : (|beta|, phi1, phi2, phi3) alpha1 = alpha2 = alpha3 = sqrt(1 - |beta|^2)
/// Angles are in degrees.
std::size_t shape_arity(Family family);
std::vector<cplx> shaped_coefficients(Family family, std::span<const double> shape);

/// Builds and validates a spec; `vector_antennas` is only used by MatrixC.
/// Throws rank_deficient when the MatrixD mixing matrix is singular (or a
/// MatrixE branch vanishes) and constraint_violation on per-antenna power
/// imbalance.
StbcSpec build_stbc(Family family, std::vector<cplx> coeffs, Constellation constellation,
                    bool tv, std::size_t vector_antennas = 2);

struct SpaceTimeSymbol {
  ComplexMatrix matrix;
  std::uint32_t label = 0;
};

/// Per-antenna phases of the time-varying diagonal matrix A_n.
struct TvPhases {
  std::vector<double> phases;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
};

TvPhases sample_tv_phases(std::size_t nt, std::uint64_t seed, std::uint64_t n);

/// A_n H, i.e. row t of the channel rotated by e^{j theta_t}. Transmitting
/// S A_n through H is the same as transmitting S through A_n H.
ComplexMatrix rotate_channel(const ComplexMatrix& h, std::span<const double> phases);

/// Encodes one space-time symbol. `tv` must be given iff spec.tv.
SpaceTimeSymbol encode_symbol(const StbcSpec& spec, std::span<const std::size_t> sym_indices,
                              const TvPhases* tv = nullptr);

inline constexpr std::size_t kMaxCodebookBits = 20;

/// All 2^B symbols, indexed by the natural label (constellation index of s1
/// in the most significant bits). TV codebooks store the un-rotated symbols;
/// the rotation is applied to the channel per channel use.
struct Codebook {
  StbcSpec spec;
  std::vector<ComplexMatrix> symbols;

  std::size_t bits() const { return spec.bits(); }
  std::size_t size() const noexcept { return symbols.size(); }
};

Codebook enumerate_codebook(const StbcSpec& spec);

using DifferenceMatrix = ComplexMatrix;

DifferenceMatrix difference(const Codebook& cb, std::size_t i, std::size_t j);

/// det(D D^H).
double gram_determinant(const ComplexMatrix& d);

/// min over i != j of det(Delta Delta^H); 0 signals rank deficiency.
double min_det_coding_gain(const Codebook& cb);

/// (1/2) exp(-||Delta H||_F^2 / (4 N0)).
double pep_upper_bound(const DifferenceMatrix& d, const ComplexMatrix& h, const NoiseSpec& noise);

}  // namespace mlpcm
