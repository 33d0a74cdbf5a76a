#include "vxshape/forcing.hpp"

#include <cmath>
#include <utility>

namespace vxs {

void Forcing::build_difference_gradients() {
  const Grid& g = samples_.grid();
  const int n = g.n;
  dx_ = GridFunction(g, BoundaryCondition::natural);
  dy_ = GridFunction(g, BoundaryCondition::natural);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int il = std::max(i - 1, 0), ir = std::min(i + 1, n - 1);
      const int jl = std::max(j - 1, 0), jr = std::min(j + 1, n - 1);
      dx_(i, j) = (samples_(ir, j) - samples_(il, j)) / ((ir - il) * g.h);
      dy_(i, j) = (samples_(i, jr) - samples_(i, jl)) / ((jr - jl) * g.h);
    }
}

Forcing Forcing::from_grid(GridFunction samples) {
  Forcing f;
  f.samples_ = std::move(samples);
  f.name_ = "grid";
  f.build_difference_gradients();
  return f;
}

Forcing Forcing::analytic(const Grid& grid, BoundaryCondition bc,
                          std::function<double(Vec2)> eval,
                          std::function<Vec2(Vec2)> grad, std::string name) {
  Forcing f;
  f.samples_ = GridFunction::from_function(grid, bc, eval);
  f.eval_ = std::move(eval);
  f.grad_ = std::move(grad);
  f.name_ = std::move(name);
  return f;
}

Forcing Forcing::zero(const Grid& grid, BoundaryCondition bc) {
  return analytic(
      grid, bc, [](Vec2) { return 0.0; }, [](Vec2) { return Vec2{0.0, 0.0}; },
      "zero");
}

Forcing Forcing::constant(const Grid& grid, BoundaryCondition bc, double c) {
  return analytic(
      grid, bc, [c](Vec2) { return c; }, [](Vec2) { return Vec2{0.0, 0.0}; },
      "const");
}

Forcing Forcing::sine_product(const Grid& grid, BoundaryCondition bc) {
  const double pi = 3.14159265358979323846;
  return analytic(
      grid, bc,
      [pi](Vec2 x) { return std::sin(pi * x.x) * std::sin(pi * x.y); },
      [pi](Vec2 x) {
        return Vec2{pi * std::cos(pi * x.x) * std::sin(pi * x.y),
                    pi * std::sin(pi * x.x) * std::cos(pi * x.y)};
      },
      "sinpi");
}

}  // namespace vxs
