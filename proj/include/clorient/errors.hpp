#pragma once

#include <stdexcept>
#include <string>

namespace clorient {

/// Viewing directions too close to parallel to admit a common line.
struct DegenerateGeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A projected block lost rank during rounding; carries the image index.
struct DegenerateRoundingError : std::runtime_error {
  DegenerateRoundingError(int image, const std::string& what)
      : std::runtime_error(what), image_index(image) {}
  int image_index;
};

/// ADMM iterates blew past the divergence guard.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Filesystem failure, message includes the offending path.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace clorient
