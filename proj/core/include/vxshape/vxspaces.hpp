#pragma once

#include "vxshape/grid.hpp"
#include "vxshape/partition.hpp"

namespace vxs {

/// Modular of the variable-exponent Lebesgue space: integral of |u|^p(x).
double modular(const GridFunction& u, const ExponentField& p);

/// Sobolev modular: integral of |u|^p(x) + |grad u|^p(x), with the
/// forward-difference gradient under u's bc tag.
double sobolev_modular(const GridFunction& u, const ExponentField& p);

/// Modular restricted to the cells of one region (the piecewise-constant
/// decomposition makes the full modular the exact sum over regions).
double modular_on_region(const GridFunction& u, const ExponentField& p,
                         int side);

/// Luxemburg norm: the unique lambda >= 0 with modular(u/lambda) = 1,
/// bracketed by the modular sandwich and solved by bisection to 1e-12
/// relative; 0 for the zero field.
double luxemburg_norm(const GridFunction& u, const ExponentField& p);

/// Pointwise conjugate exponent p/(p-1) on the same partition.
ExponentField conjugate_exponent(const ExponentField& p);

}  // namespace vxs
