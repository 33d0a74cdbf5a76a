#pragma once

#include <functional>
#include <optional>
#include <string>

#include "vxshape/grid.hpp"

namespace vxs {

/// Forcing data f for the energies.  Always carries cell samples; when a
/// closed form is known it also evaluates f and grad f off-grid exactly,
/// which the deformed energies and derivative formulas prefer over
/// interpolation.
class Forcing {
 public:
  Forcing() = default;

  static Forcing from_grid(GridFunction samples);
  static Forcing analytic(const Grid& grid, BoundaryCondition bc,
                          std::function<double(Vec2)> eval,
                          std::function<Vec2(Vec2)> grad, std::string name);

  static Forcing zero(const Grid& grid, BoundaryCondition bc);
  static Forcing constant(const Grid& grid, BoundaryCondition bc, double c);
  /// sin(pi x) sin(pi y)
  static Forcing sine_product(const Grid& grid, BoundaryCondition bc);

  const GridFunction& samples() const { return samples_; }
  const Grid& grid() const { return samples_.grid(); }
  bool has_analytic() const { return static_cast<bool>(eval_); }
  const std::string& name() const { return name_; }

  /// f at an arbitrary point: closed form when available, else bilinear.
  double eval(const Vec2& x) const {
    return eval_ ? eval_(x) : interpolate(samples_, x);
  }

  /// grad f: closed form when available, else interpolated centered
  /// differences of the samples.
  Vec2 grad(const Vec2& x) const {
    if (grad_) return grad_(x);
    return {interpolate(dx_, x), interpolate(dy_, x)};
  }

  /// Centered-difference gradient at a cell (one-sided on the rim).
  Vec2 grad_at_cell(int i, int j) const {
    if (grad_) return grad_(grid().center(i, j));
    return {dx_(i, j), dy_(i, j)};
  }

 private:
  void build_difference_gradients();

  GridFunction samples_;
  GridFunction dx_, dy_;
  std::function<double(Vec2)> eval_;
  std::function<Vec2(Vec2)> grad_;
  std::string name_ = "grid";
};

}  // namespace vxs
