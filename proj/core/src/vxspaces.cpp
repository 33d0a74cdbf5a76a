#include "vxshape/vxspaces.hpp"

#include <cmath>
#include <stdexcept>

namespace vxs {

namespace {

double modular_scaled(const GridFunction& u, const ExponentField& p,
                      double inv_lambda) {
  const Grid& g = u.grid();
  const double cell = g.h * g.h;
  double s = 0.0;
  for (int k = 0; k < g.size(); ++k) {
    const double v = std::fabs(u[k] * inv_lambda);
    if (v != 0.0) s += std::pow(v, p.at_index(k));
  }
  return s * cell;
}

}  // namespace

double modular(const GridFunction& u, const ExponentField& p) {
  require_same_grid(u.grid(), p.grid(), "modular");
  return modular_scaled(u, p, 1.0);
}

double modular_on_region(const GridFunction& u, const ExponentField& p,
                         int side) {
  require_same_grid(u.grid(), p.grid(), "modular_on_region");
  const Grid& g = u.grid();
  const double cell = g.h * g.h;
  const double q = side == 1 ? p.p1() : p.p2();
  double s = 0.0;
  for (int k = 0; k < g.size(); ++k) {
    if (p.partition().labels()[k] != side) continue;
    const double v = std::fabs(u[k]);
    if (v != 0.0) s += std::pow(v, q);
  }
  return s * cell;
}

double sobolev_modular(const GridFunction& u, const ExponentField& p) {
  require_same_grid(u.grid(), p.grid(), "sobolev_modular");
  const Grid& g = u.grid();
  const double cell = g.h * g.h;
  const VectorGridFunction w = gradient(u);
  double s = 0.0;
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const double q = p.at(i, j);
      const double v = std::fabs(u(i, j));
      const double m = w.at(i, j).norm();
      if (v != 0.0) s += std::pow(v, q);
      if (m != 0.0) s += std::pow(m, q);
    }
  return s * cell;
}

double luxemburg_norm(const GridFunction& u, const ExponentField& p) {
  require_same_grid(u.grid(), p.grid(), "luxemburg_norm");
  const double rho = modular(u, p);
  if (rho == 0.0) return 0.0;

  // Remark 2.2 sandwich gives a guaranteed enclosure of the root.
  const double lo0 = std::pow(rho, 1.0 / p.p_minus());
  const double hi0 = std::pow(rho, 1.0 / p.p_plus());
  double lo = std::min(lo0, hi0) * (1.0 - 1e-12);
  double hi = std::max(lo0, hi0) * (1.0 + 1e-12);

  // modular(u/lambda) is strictly decreasing in lambda
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (modular_scaled(u, p, 1.0 / mid) > 1.0)
      lo = mid;
    else
      hi = mid;
    if ((hi - lo) <= 1e-12 * hi) break;
  }
  return 0.5 * (lo + hi);
}

ExponentField conjugate_exponent(const ExponentField& p) {
  if (p.p_minus() <= 1.0 + 1e-12)
    throw std::invalid_argument(
        "conjugate_exponent: requires p_minus > 1 + 1e-12");
  return ExponentField(p.partition(), p.p1() / (p.p1() - 1.0),
                       p.p2() / (p.p2() - 1.0));
}

}  // namespace vxs
