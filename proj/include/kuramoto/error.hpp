#pragma once

#include <stdexcept>
#include <string>

namespace kuramoto {

enum class Errc {
  DimensionMismatch,
  NonFinite,
  InvalidParameter,
  WrongVariant,
  StepFailure,
  InsufficientMargin,
  ConfigError,
  IoError,
};

const char* to_string(Errc code) noexcept;

// Every failure raised by the library carries one of the codes above so
// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::DimensionMismatch: return "dimension mismatch";
    case Errc::NonFinite: return "non-finite value";
    case Errc::InvalidParameter: return "invalid parameter";
    case Errc::WrongVariant: return "wrong model variant";
    case Errc::StepFailure: return "integration step failed";
    case Errc::InsufficientMargin: return "insufficient margin";
    case Errc::ConfigError: return "config error";
    case Errc::IoError: return "i/o error";
  }
  return "unknown";
}

}  // namespace kuramoto
