#pragma once

#include <stdexcept>
#include <string>

namespace hfcoint {

// Data-dependent failures (bad input files, degenerate series, coverage gaps).
// The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
  public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Configuration failures (invalid parameters, impossible windows, missing
// critical values). The CLI maps these to exit code 3.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hfcoint
