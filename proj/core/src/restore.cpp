#include "vxshape/restore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>

namespace vxs {

namespace {

std::uint64_t labels_hash(const RegionPartition& p) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (auto l : p.labels()) {
    h ^= l;
    h *= 1099511628211ull;
  }
  return h;
}

std::string print_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string RestoreTrace::serialize() const {
  std::ostringstream os;
  os << "initial_j=" << print_double(initial_j) << "\n";
  for (const auto& it : iterations) {
    os << "iter=" << it.index << " j=" << print_double(it.j_value)
       << " deriv=" << print_double(it.derivative)
       << " dt=" << print_double(it.dt) << " coeffs=[";
    for (size_t k = 0; k < it.coefficients.size(); ++k) {
      if (k) os << ",";
      os << print_double(it.coefficients[k]);
    }
    os << "] field=" << it.field_descriptor
       << " snapshot=" << it.partition_snapshot << "\n";
  }
  os << "snapshots=[";
  for (size_t k = 0; k < partitions.size(); ++k) {
    if (k) os << ",";
    os << labels_hash(partitions[k]);
  }
  os << "]\n";
  os << "stop=" << stop_reason << "\n";
  return os.str();
}

EnergyWeights restore_weights(const RestoreConfig& config) {
  EnergyWeights w;
  w.grad1 = config.p1 / (2.0 * config.beta);
  w.grad2 = config.p2 / (2.0 * config.beta);
  w.fidelity = config.beta;
  return w;
}

double restore_functional(const GridFunction& u, const ExponentField& p,
                          const GridFunction& image,
                          const RestoreConfig& config) {
  const double e =
      energy(u, p, image, config.solver.eps_reg, restore_weights(config));
  GridFunction i2 = image;
  for (auto& v : i2.values()) v *= v;
  return e + 0.5 * config.beta * integrate(i2);
}

std::vector<FieldPtr> interface_bump_basis(const RegionPartition& partition,
                                           int count, double radius) {
  const Grid& g = partition.grid();
  const int n = g.n;
  if (count < 1) throw std::invalid_argument("interface_bump_basis: count");

  // interface edges of the raw partition, with outward (from D1) normals
  struct Edge {
    Vec2 pos;
    Vec2 normal;
  };
  std::vector<Edge> edges;
  GridFunction chi(g, BoundaryCondition::natural);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      chi(i, j) = partition.label(i, j) == 1 ? 1.0 : 0.0;

  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (partition.label(i, j) != 1) continue;
      if (i + 1 < n && partition.label(i + 1, j) == 2)
        edges.push_back({{(i + 1) * g.h, (j + 0.5) * g.h}, {1.0, 0.0}});
      if (i - 1 >= 0 && partition.label(i - 1, j) == 2)
        edges.push_back({{i * g.h, (j + 0.5) * g.h}, {-1.0, 0.0}});
      if (j + 1 < n && partition.label(i, j + 1) == 2)
        edges.push_back({{(i + 0.5) * g.h, (j + 1) * g.h}, {0.0, 1.0}});
      if (j - 1 >= 0 && partition.label(i, j - 1) == 2)
        edges.push_back({{(i + 0.5) * g.h, j * g.h}, {0.0, -1.0}});
    }
  if (edges.empty()) return {};

  // smoothed-indicator normals give better directions than edge normals
  const GridFunction chi_s = gaussian_smooth(chi, std::sqrt(2.0) * g.h);
  const auto smooth_normal = [&](const Vec2& x) -> Vec2 {
    const double d = g.h;
    const double gx =
        (interpolate(chi_s, {std::min(x.x + d, 1.0), x.y}) -
         interpolate(chi_s, {std::max(x.x - d, 0.0), x.y})) /
        (2.0 * d);
    const double gy =
        (interpolate(chi_s, {x.x, std::min(x.y + d, 1.0)}) -
         interpolate(chi_s, {x.x, std::max(x.y - d, 0.0)})) /
        (2.0 * d);
    Vec2 v{-gx, -gy};
    const double norm = v.norm();
    return norm > 0.0 ? v * (1.0 / norm) : Vec2{0.0, 0.0};
  };

  // spread picks along the interface: order edges by angle about their
  // centroid (good for closed curves, harmless otherwise)
  Vec2 centroid{0.0, 0.0};
  for (const auto& e : edges) centroid += e.pos * (1.0 / edges.size());
  std::stable_sort(edges.begin(), edges.end(),
                   [&](const Edge& a, const Edge& b) {
                     return std::atan2(a.pos.y - centroid.y,
                                       a.pos.x - centroid.x) <
                            std::atan2(b.pos.y - centroid.y,
                                       b.pos.x - centroid.x);
                   });

  std::vector<FieldPtr> basis;
  const int m = std::min<int>(count, static_cast<int>(edges.size()));
  for (int k = 0; k < m; ++k) {
    const Edge& e = edges[(k * edges.size()) / m];
    const double wall = std::min(std::min(e.pos.x, 1.0 - e.pos.x),
                                 std::min(e.pos.y, 1.0 - e.pos.y));
    const double r = std::min(radius, wall - 2.0 * g.h);
    if (r < 4.0 * g.h) continue;  // too close to the boundary to be useful
    Vec2 dir = smooth_normal(e.pos);
    if (dir.norm() == 0.0) dir = e.normal;
    basis.push_back(make_translation_field(e.pos, r, dir, 1.0, 0.5));
  }
  return basis;
}

DescentField descent_field(const GridFunction& u, const ExponentField& p,
                           const Forcing& f,
                           const std::vector<FieldPtr>& basis, double eps_reg,
                           const EnergyWeights& w) {
  DescentField out;
  out.coefficients.reserve(basis.size());
  bool all_zero = true;
  for (const auto& V : basis) {
    const double d = volume_derivative(u, p, f, *V, eps_reg, w);
    out.coefficients.push_back(d);
    if (d != 0.0) all_zero = false;
  }
  if (basis.empty() || all_zero) {
    out.field = make_zero_field();
    return out;
  }

  std::vector<double> neg(out.coefficients.size());
  for (size_t k = 0; k < neg.size(); ++k) neg[k] = -out.coefficients[k];
  FieldPtr comb = make_linear_combination(basis, neg);

  // normalize to unit sup norm, sampled at cell centers
  const Grid& g = u.grid();
  double vmax = 0.0;
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i)
      vmax = std::max(vmax, comb->value(g.center(i, j)).norm());
  out.field = vmax > 0.0 ? make_scaled_field(comb, 1.0 / vmax) : comb;
  return out;
}

RestoreResult restore(const GridFunction& image, const RestoreConfig& config) {
  if (!(config.beta > 0.0) || !(config.sigma > 0.0))
    throw std::invalid_argument("restore: beta and sigma must be positive");
  if (!(config.descent.dt > 0.0) || config.descent.basis_count < 1)
    throw std::invalid_argument("restore: bad descent config");
  for (double v : image.values())
    if (v < -1e-9 || v > 1.0 + 1e-9)
      throw std::invalid_argument("restore: image values must lie in [0,1]");

  const EnergyWeights w = restore_weights(config);
  RegionPartition partition =
      build_partition(image, config.sigma, config.beta);
  ExponentField p = exponent_field(partition, config.p1, config.p2);

  SolverResult sol = minimize(p, image, config.solver, w);
  double j_value = restore_functional(sol.u, p, image, config);

  RestoreResult res;
  res.trace.partitions.push_back(partition);
  res.trace.initial_j = j_value;

  const Forcing forcing = Forcing::from_grid(image);
  double dt = config.descent.dt;
  for (int outer = 1; outer <= config.descent.max_outer; ++outer) {
    if (partition.count(1) == 0 || partition.count(2) == 0) {
      res.trace.stop_reason = "partition degenerated to a single region";
      break;
    }
    const std::vector<FieldPtr> basis = interface_bump_basis(
        partition, config.descent.basis_count, config.descent.basis_radius);
    if (basis.empty()) {
      res.trace.stop_reason = "no usable interface";
      break;
    }
    const DescentField df =
        descent_field(sol.u, p, forcing, basis, config.solver.eps_reg, w);
    if (df.field->is_zero()) {
      res.trace.stop_reason = "zero descent field";
      break;
    }
    const double deriv = volume_derivative(sol.u, p, forcing, *df.field,
                                           config.solver.eps_reg, w);
    if (std::fabs(deriv) <= config.descent.stop_threshold) {
      res.trace.stop_reason = "derivative below stop threshold";
      break;
    }

    bool accepted = false;
    while (dt >= config.descent.dt_min) {
      const RegionPartition moved = transport_partition(partition, *df.field, dt);
      if (moved == partition) {
        res.trace.stop_reason = "transport below grid resolution";
        break;
      }
      if (moved.count(1) == 0 || moved.count(2) == 0) {
        dt *= 0.5;
        continue;
      }
      const ExponentField p_new = exponent_field(moved, config.p1, config.p2);
      const SolverResult trial =
          minimize(p_new, image, config.solver, w, &sol.u);
      const double j_new = restore_functional(trial.u, p_new, image, config);
      if (j_new < j_value) {
        partition = moved;
        p = p_new;
        sol = trial;
        j_value = j_new;
        accepted = true;
        break;
      }
      dt *= 0.5;
    }
    if (!accepted) {
      if (res.trace.stop_reason.empty())
        res.trace.stop_reason = "step size underflow";
      break;
    }

    RestoreIteration rec;
    rec.index = outer;
    rec.j_value = j_value;
    rec.derivative = deriv;
    rec.dt = dt;
    rec.coefficients = df.coefficients;
    rec.field_descriptor = df.field->describe();
    res.trace.partitions.push_back(partition);
    rec.partition_snapshot = static_cast<int>(res.trace.partitions.size()) - 1;
    res.trace.iterations.push_back(rec);
  }
  if (res.trace.stop_reason.empty())
    res.trace.stop_reason = "max outer iterations";

  res.u = sol.u;
  res.partition = partition;
  res.converged = sol.converged;
  return res;
}

}  // namespace vxs
