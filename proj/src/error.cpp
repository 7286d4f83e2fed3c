#include "mlpcm/error.hpp"

namespace mlpcm {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::rank_deficient: return "rank-deficient";
    case Errc::constraint_violation: return "constraint-violation";
    case Errc::too_large: return "too-large";
    case Errc::missing_context: return "missing-context";
    case Errc::unsupported: return "unsupported";
    case Errc::degenerate_moments: return "degenerate-moments";
    case Errc::no_feasible_rates: return "no-feasible-rates";
    case Errc::not_found: return "not-found";
    case Errc::evaluation_error: return "evaluation-error";
    case Errc::config_error: return "config-error";
  }
  return "unknown";
}

}  // namespace mlpcm
