#pragma once

#include <stdexcept>
#include <string>

#include "vxshape/grid.hpp"

namespace vxs {

struct PgmIoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PgmFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PgmShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reads a P2 or P5 PGM with square dimensions; values are rescaled to [0,1].
/// Throws PgmIoError (unreadable file), PgmFormatError (malformed header or
/// truncated data), PgmShapeError (non-square image).
GridFunction load_pgm(const std::string& path,
                      BoundaryCondition bc = BoundaryCondition::natural);

/// Writes binary P5 with maxval 255; values are clamped to [0,1] first.
/// Row 0 of the file is the top of the image (y = 1 side of the domain).
void save_pgm(const GridFunction& u, const std::string& path);

}  // namespace vxs
