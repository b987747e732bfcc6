#pragma once

#include <stdexcept>
#include <string>

namespace compactseg {

/// Two grids that must share a shape do not.
class DimensionMismatch : public std::invalid_argument {
 public:
  explicit DimensionMismatch(const std::string& what)
      : std::invalid_argument("dimension mismatch: " + what) {}
};

/// A foreground region with zero area where a positive one is required.
class EmptyRegion : public std::runtime_error {
 public:
  explicit EmptyRegion(const std::string& what)
      : std::runtime_error("empty region: " + what) {}
};

/// Invalid solver or kernel parameters.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what)
      : std::invalid_argument("bad configuration: " + what) {}
};

}  // namespace compactseg
