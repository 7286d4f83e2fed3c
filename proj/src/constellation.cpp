#include "mlpcm/constellation.hpp"

#include <bit>
#include <cmath>

namespace mlpcm {

std::size_t Constellation::bits() const { return static_cast<std::size_t>(std::countr_zero(points.size())); }

Constellation make_constellation(ConstellationKind kind) {
  Constellation c;
  c.kind = kind;
  switch (kind) {
    case ConstellationKind::bpsk:
      c.points = {1.0, -1.0};
      break;
    case ConstellationKind::qpsk: {
      const double a = 1.0 / std::sqrt(2.0);
      c.points = {{a, a}, {a, -a}, {-a, a}, {-a, -a}};
      break;
    }
    case ConstellationKind::qam16: {
      const double levels[4] = {-3.0, -1.0, 1.0, 3.0};
      const double scale = 1.0 / std::sqrt(10.0);
      for (int i = 0; i < 4; ++i)
        for (int q = 0; q < 4; ++q) c.points.emplace_back(levels[i] * scale, levels[q] * scale);
      break;
    }
    default:
      fail(Errc::unsupported, "make_constellation: unsupported kind");
  }
  return c;
}

std::string to_string(ConstellationKind kind) {
  switch (kind) {
    case ConstellationKind::bpsk: return "bpsk";
    case ConstellationKind::qpsk: return "qpsk";
    case ConstellationKind::qam16: return "qam16";
  }
  return "unknown";
}

ConstellationKind constellation_kind_from_string(const std::string& name) {
  if (name == "bpsk") return ConstellationKind::bpsk;
  if (name == "qpsk") return ConstellationKind::qpsk;
  if (name == "qam16" || name == "16qam") return ConstellationKind::qam16;
  fail(Errc::unsupported, "unknown constellation '" + name + "'");
}

}  // namespace mlpcm
