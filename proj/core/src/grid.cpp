#include "vxshape/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vxs {

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (a != b)
    throw std::invalid_argument(std::string(what) + ": grid mismatch (" +
                                std::to_string(a.n) + " vs " +
                                std::to_string(b.n) + ")");
}

VectorGridFunction gradient(const GridFunction& u) {
  const Grid& g = u.grid();
  const int n = g.n;
  const double inv_h = 1.0 / g.h;
  VectorGridFunction w(g);
  const bool dirichlet = u.bc() == BoundaryCondition::dirichlet_zero;

  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n - 1; ++i)
      w.x(i, j) = (u(i + 1, j) - u(i, j)) * inv_h;
    w.x(n - 1, j) = dirichlet ? -u(n - 1, j) * inv_h
                              : (u(n - 1, j) - u(n - 2, j)) * inv_h;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n - 1; ++j)
      w.y(i, j) = (u(i, j + 1) - u(i, j)) * inv_h;
    w.y(i, n - 1) = dirichlet ? -u(i, n - 1) * inv_h
                              : (u(i, n - 1) - u(i, n - 2)) * inv_h;
  }
  return w;
}

GridFunction divergence(const VectorGridFunction& w) {
  const Grid& g = w.grid();
  const int n = g.n;
  const double inv_h = 1.0 / g.h;
  GridFunction d(g, BoundaryCondition::natural);

  for (int j = 0; j < n; ++j) {
    d(0, j) = w.x(0, j) * inv_h;
    for (int i = 1; i < n; ++i)
      d(i, j) = (w.x(i, j) - w.x(i - 1, j)) * inv_h;
  }
  for (int i = 0; i < n; ++i) {
    d(i, 0) += w.y(i, 0) * inv_h;
    for (int j = 1; j < n; ++j)
      d(i, j) += (w.y(i, j) - w.y(i, j - 1)) * inv_h;
  }
  return d;
}

GridFunction gradient_adjoint(const VectorGridFunction& w,
                              BoundaryCondition bc) {
  const Grid& g = w.grid();
  const int n = g.n;
  const double inv_h = 1.0 / g.h;
  GridFunction out(g, bc);

  if (bc == BoundaryCondition::dirichlet_zero) {
    // gradient^T = -divergence for the dirichlet pair
    for (int j = 0; j < n; ++j) {
      out(0, j) = -w.x(0, j) * inv_h;
      for (int i = 1; i < n; ++i)
        out(i, j) = -(w.x(i, j) - w.x(i - 1, j)) * inv_h;
    }
    for (int i = 0; i < n; ++i) {
      out(i, 0) += -w.y(i, 0) * inv_h;
      for (int j = 1; j < n; ++j)
        out(i, j) += -(w.y(i, j) - w.y(i, j - 1)) * inv_h;
    }
    return out;
  }

  // natural: the last sample is the copied face (u(n-1)-u(n-2))/h, so its
  // transpose folds into the last two cells.
  for (int j = 0; j < n; ++j) {
    out(0, j) += -w.x(0, j) * inv_h;
    for (int i = 1; i <= n - 3; ++i)
      out(i, j) += (w.x(i - 1, j) - w.x(i, j)) * inv_h;
    if (n >= 3)
      out(n - 2, j) += (w.x(n - 3, j) - w.x(n - 2, j) - w.x(n - 1, j)) * inv_h;
    out(n - 1, j) += (w.x(n - 2, j) + w.x(n - 1, j)) * inv_h;
  }
  for (int i = 0; i < n; ++i) {
    out(i, 0) += -w.y(i, 0) * inv_h;
    for (int j = 1; j <= n - 3; ++j)
      out(i, j) += (w.y(i, j - 1) - w.y(i, j)) * inv_h;
    if (n >= 3)
      out(i, n - 2) += (w.y(i, n - 3) - w.y(i, n - 2) - w.y(i, n - 1)) * inv_h;
    out(i, n - 1) += (w.y(i, n - 2) + w.y(i, n - 1)) * inv_h;
  }
  return out;
}

double integrate(const GridFunction& u) {
  const double cell = u.grid().h * u.grid().h;
  double s = 0.0;
  for (double v : u.values()) s += v;
  return s * cell;
}

double dot_l2(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a.grid(), b.grid(), "dot_l2");
  const double cell = a.grid().h * a.grid().h;
  double s = 0.0;
  const int m = a.size();
  for (int k = 0; k < m; ++k) s += a[k] * b[k];
  return s * cell;
}

double norm_l2(const GridFunction& a) { return std::sqrt(dot_l2(a, a)); }

double interpolate(const GridFunction& u, const Vec2& p) {
  const Grid& g = u.grid();
  const int n = g.n;
  const double sx = p.x / g.h - 0.5;
  const double sy = p.y / g.h - 0.5;
  int i0 = static_cast<int>(std::floor(sx));
  int j0 = static_cast<int>(std::floor(sy));
  double fx = sx - i0;
  double fy = sy - j0;
  // edge replication outside the cell-center lattice
  if (i0 < 0) { i0 = 0; fx = 0.0; }
  if (j0 < 0) { j0 = 0; fy = 0.0; }
  if (i0 > n - 2) { i0 = n - 2; fx = 1.0; }
  if (j0 > n - 2) { j0 = n - 2; fy = 1.0; }
  const double v00 = u(i0, j0), v10 = u(i0 + 1, j0);
  const double v01 = u(i0, j0 + 1), v11 = u(i0 + 1, j0 + 1);
  return (1 - fx) * (1 - fy) * v00 + fx * (1 - fy) * v10 +
         (1 - fx) * fy * v01 + fx * fy * v11;
}

bool all_finite(const GridFunction& u) {
  for (double v : u.values())
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace vxs
