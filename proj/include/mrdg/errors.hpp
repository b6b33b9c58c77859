#pragma once

#include <stdexcept>
#include <string>

namespace mrdg {

// Invalid user configuration (bad flags, malformed config file, ...).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A physically inadmissible state was produced (e.g. negative density or
// pressure for Euler). Carries a human-readable cell diagnostic.
struct AdmissibilityError : std::runtime_error {
  explicit AdmissibilityError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem / output failure.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mrdg
