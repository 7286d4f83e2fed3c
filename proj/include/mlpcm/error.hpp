#pragma once

#include <stdexcept>
#include <string>

namespace mlpcm {

enum class Errc {
  invalid_argument,
  rank_deficient,
  constraint_violation,
  too_large,
  missing_context,
  unsupported,
  degenerate_moments,
  no_feasible_rates,
  not_found,
  evaluation_error,
  config_error,
};

const char* to_string(Errc code);

/// Library-wide exception. The code lets callers (and the CLI exit status)
/// distinguish argument problems from numerical failures.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

  /// True for failures caused by the numbers rather than by the caller.
  bool numerical() const noexcept {
    return code_ == Errc::degenerate_moments || code_ == Errc::no_feasible_rates ||
           code_ == Errc::not_found || code_ == Errc::evaluation_error;
  }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, const std::string& what, Errc code = Errc::invalid_argument) {
  if (!ok) fail(code, what);
}

}  // namespace mlpcm
