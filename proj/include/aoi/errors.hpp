#pragma once

#include <stdexcept>
#include <string>

namespace aoi {

// Malformed files, configs, or argument combinations. The CLI maps this to exit code 2.
class input_error : public std::runtime_error {
 public:
  explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// Numeric failures: domain violations, non-convergence, unreachable thresholds.
// The CLI maps this to exit code 1.
class computation_error : public std::runtime_error {
 public:
  explicit computation_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace aoi
