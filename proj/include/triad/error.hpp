#pragma once

#include <stdexcept>
#include <string>

namespace triad {

/// Root of the library's error hierarchy. Precondition violations inside
/// individual operations are reported with std::invalid_argument instead.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad JSON, unknown key, value out of range.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// File-system failures while writing results or reading a config.
class IoError : public Error {
public:
  using Error::Error;
};

/// Failure inside a simulated trial; the message carries trial context.
class SimulationError : public Error {
public:
  using Error::Error;
};

/// Rate demand whose spectral efficiency exceeds what the allocator can
/// represent without overflow.
class InfeasibleDemand : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

} // namespace triad
