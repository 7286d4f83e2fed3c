#pragma once

#include <string>
#include <vector>

#include "mlpcm/channel.hpp"

namespace mlpcm {

enum class ConstellationKind { bpsk, qpsk, qam16 };

/// Unit-average-energy point set of size 2^bits.
struct Constellation {
  ConstellationKind kind = ConstellationKind::qpsk;
  std::vector<cplx> points;

  std::size_t bits() const;
  std::size_t size() const noexcept { return points.size(); }
};

/// BPSK {+1,-1}; QPSK (+-1+-j)/sqrt2; 16-QAM on {+-1,+-3}^2 / sqrt10.
/// Index bits of 16-QAM: upper two select the in-phase level, lower two the
/// quadrature level (levels ordered -3,-1,1,3).
Constellation make_constellation(ConstellationKind kind);

std::string to_string(ConstellationKind kind);
ConstellationKind constellation_kind_from_string(const std::string& name);

}  // namespace mlpcm
