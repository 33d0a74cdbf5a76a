#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "vxshape/geometry.hpp"

namespace vxs {

/// Uniform cell-centered grid on the unit square (0,1)^2.
/// Cell (i,j) has its center at ((i+1/2)h, (j+1/2)h) with h = 1/n.
struct Grid {
  int n = 0;
  double h = 0.0;

  Grid() = default;
  explicit Grid(int n_) : n(n_), h(1.0 / n_) {
    if (n_ < 8) throw std::invalid_argument("Grid: need n >= 8");
  }

  int size() const { return n * n; }
  int index(int i, int j) const { return j * n + i; }
  Vec2 center(int i, int j) const { return {(i + 0.5) * h, (j + 0.5) * h}; }

  bool operator==(const Grid& o) const { return n == o.n; }
  bool operator!=(const Grid& o) const { return n != o.n; }
};

enum class BoundaryCondition { dirichlet_zero, natural };

/// Scalar field sampled at cell centers.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(const Grid& grid, BoundaryCondition bc,
               double fill = 0.0)
      : grid_(grid), bc_(bc), values_(grid.size(), fill) {}

  static GridFunction from_function(
      const Grid& grid, BoundaryCondition bc,
      const std::function<double(Vec2)>& f) {
    GridFunction u(grid, bc);
    for (int j = 0; j < grid.n; ++j)
      for (int i = 0; i < grid.n; ++i)
        u.values_[grid.index(i, j)] = f(grid.center(i, j));
    return u;
  }

  const Grid& grid() const { return grid_; }
  BoundaryCondition bc() const { return bc_; }
  void set_bc(BoundaryCondition bc) { bc_ = bc; }

  double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
  double operator[](int k) const { return values_[k]; }
  double& operator[](int k) { return values_[k]; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  int size() const { return static_cast<int>(values_.size()); }

 private:
  Grid grid_;
  BoundaryCondition bc_ = BoundaryCondition::natural;
  std::vector<double> values_;
};

/// Two-component field on the same cell layout as GridFunction.
class VectorGridFunction {
 public:
  VectorGridFunction() = default;
  explicit VectorGridFunction(const Grid& grid)
      : grid_(grid), xs_(grid.size(), 0.0), ys_(grid.size(), 0.0) {}

  const Grid& grid() const { return grid_; }

  double x(int i, int j) const { return xs_[grid_.index(i, j)]; }
  double y(int i, int j) const { return ys_[grid_.index(i, j)]; }
  double& x(int i, int j) { return xs_[grid_.index(i, j)]; }
  double& y(int i, int j) { return ys_[grid_.index(i, j)]; }

  Vec2 at(int i, int j) const { return {x(i, j), y(i, j)}; }

  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }
  std::vector<double>& xs() { return xs_; }
  std::vector<double>& ys() { return ys_; }

 private:
  Grid grid_;
  std::vector<double> xs_, ys_;
};

/// Forward-difference gradient.  The right/top column uses the bc tag:
/// dirichlet_zero reads a zero ghost value, natural copies the one-sided
/// difference from the previous face so linear fields stay exact.
VectorGridFunction gradient(const GridFunction& u);

/// Backward-difference divergence with zero ghost at left/bottom; the exact
/// negative adjoint of `gradient` under dirichlet_zero.
GridFunction divergence(const VectorGridFunction& w);

/// Exact transpose of `gradient` as a linear map, per bc tag.  Satisfies
/// sum_c gradient(u).w = sum_c u .gradient_adjoint(w) in exact arithmetic;
/// the solver uses it to assemble energy gradients.
GridFunction gradient_adjoint(const VectorGridFunction& w,
                              BoundaryCondition bc);

/// Midpoint quadrature: sum of values times h^2.
double integrate(const GridFunction& u);

double dot_l2(const GridFunction& a, const GridFunction& b);
double norm_l2(const GridFunction& a);

/// Bilinear interpolation of cell-centered data with edge replication.
double interpolate(const GridFunction& u, const Vec2& p);

void require_same_grid(const Grid& a, const Grid& b, const char* what);

bool all_finite(const GridFunction& u);

}  // namespace vxs
