#pragma once

#include <stdexcept>
#include <string>

namespace seisbt {

// Base for every error the toolkit raises.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration value; message names the field.
struct ConfigError : Error {
  using Error::Error;
};

// Malformed on-disk data (bad magic, truncated payload, schema mismatch).
struct FormatError : Error {
  using Error::Error;
};

// API misuse (bad shapes, empty inputs, unknown labels).
struct UsageError : Error {
  using Error::Error;
};

// NaN/Inf encountered where finite values are required.
struct NumericError : Error {
  using Error::Error;
};

struct DspError : Error {
  using Error::Error;
};

struct AnalysisError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace seisbt
