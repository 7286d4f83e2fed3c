#pragma once

// Pairwise Bhattacharyya coefficients and the closed-form / moment-matched
// bounds on the pairwise outage Pr(q < rho) used as labelling measures.

#include <cstdint>
#include <span>

#include "mlpcm/stbc.hpp"

namespace mlpcm {

/// exp(-||Delta H||_F^2 / (4 N0)).
double bhattacharyya(const DifferenceMatrix& d, const ComplexMatrix& h, const NoiseSpec& noise);

/// Bhattacharyya coefficient of a 1 x 2 difference averaged over a common
/// uniform phase offset between the two transmit antennas:
///   exp(-sum |delta_t h_{t,r}|^2 / 4N0) * I0(|sum_r delta_1 h_{1,r} conj(delta_2 h_{2,r})| / 2N0)
double bhattacharyya_tv_avg(const DifferenceMatrix& d, const ComplexMatrix& h, const NoiseSpec& noise);
/// -4 N0 ln bhattacharyya_tv_avg, evaluated without under/overflow.
double tv_pair_metric(const DifferenceMatrix& d, const ComplexMatrix& h, const NoiseSpec& noise);

/// q = 2^(1 - r) - 1 for a total rate r in [0, 1].
double q_from_rate(double r_tot);

/// Exact pairwise outage bound for space block codes (L = 1):
/// P(Nr, -4 N0 ln q / ||Delta||^2).
double ubpop_sbc(const DifferenceMatrix& d, const NoiseSpec& noise, double q, std::size_t nr);

/// Gamma-matched approximation for L >= 2.
struct GammaMoments {
  double mu1 = 0.0;
  double mu2 = 0.0;
};
GammaMoments stbc_moments(const DifferenceMatrix& d, std::size_t nr);
double ubpop_stbc(const DifferenceMatrix& d, const NoiseSpec& noise, double q, std::size_t nr);

struct OmegaMoments {
  std::size_t nr = 0;
  double e_omega = 0.0;
  double e_h2omega = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// Monte-Carlo E[Omega] and E[|h_1|^2 Omega] with Omega = |sum_r h_{1,r} conj(h_{2,r})|.
/// Results are cached per (nr, mc, seed).
OmegaMoments omega_moments(std::size_t nr, std::size_t mc, std::uint64_t seed);

struct TvsbcMoments {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double x = 0.0;  // nominal Bessel argument that picked the segment
};
TvsbcMoments tvsbc_moments(const DifferenceMatrix& d, const NoiseSpec& noise, const OmegaMoments& moments);

/// Log-normal approximation for 1 x 2 time-varying SBCs.
double ubpop_tvsbc(const DifferenceMatrix& d, const NoiseSpec& noise, double q, const OmegaMoments& moments);

/// Piecewise-linear ln I0(x) = a1 x + a2.
struct LinearSegment {
  double a1 = 0.0;
  double a2 = 0.0;
};
LinearSegment ln_i0_segment(double x);
double ln_i0_piecewise(double x);

/// Sum p_i log2(p_i / r_i), in bits.
double kl_divergence(std::span<const double> p, std::span<const double> r);

/// KL divergence (bits) between the histogram of positive samples and the
/// moment-matched log-normal binned on the same equal-width grid; the two
/// tails of the log-normal are folded into the outer bins.
double lognormal_fit_divergence(std::span<const double> samples, std::size_t bins);

/// Average over ordered pairs u != v of lognormal_fit_divergence applied to
/// -4 N0 ln(bhattacharyya_tv_avg) under i.i.d. Rayleigh channels.
double fit_quality(const Codebook& cb, const NoiseSpec& noise, std::size_t nr, std::size_t mc, std::uint64_t seed,
                   std::size_t bins = 50, std::size_t max_pairs = 0);

}  // namespace mlpcm
