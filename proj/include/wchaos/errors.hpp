#pragma once

#include <stdexcept>
#include <string>

namespace wchaos {

// Error taxonomy mirrored by the CLI exit codes:
//   0 success, 2 invalid configuration, 3 numerical failure, 4 I/O failure.
inline constexpr int kExitSuccess = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace wchaos
