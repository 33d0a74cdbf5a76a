#include "vxshape/partition.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "vxshape/pgm.hpp"

namespace vxs {

RegionPartition RegionPartition::from_indicator(
    const Grid& grid, const std::function<bool(Vec2)>& in_region1) {
  RegionPartition p(grid);
  for (int j = 0; j < grid.n; ++j)
    for (int i = 0; i < grid.n; ++i)
      p.label(i, j) = in_region1(grid.center(i, j)) ? 1 : 2;
  return p;
}

RegionPartition RegionPartition::disk(const Grid& grid, Vec2 center,
                                      double radius) {
  const double r2 = radius * radius;
  return from_indicator(
      grid, [&](Vec2 x) { return (x - center).norm2() < r2; });
}

RegionPartition RegionPartition::half_plane_x(const Grid& grid, double split) {
  return from_indicator(grid, [&](Vec2 x) { return x.x < split; });
}

int RegionPartition::count(std::uint8_t lab) const {
  int c = 0;
  for (auto l : labels_)
    if (l == lab) ++c;
  return c;
}

ExponentField::ExponentField(const RegionPartition& partition, double p1,
                             double p2)
    : partition_(partition), p1_(p1), p2_(p2) {
  if (!(p1 > 1.0) || !(p2 > 1.0) || !std::isfinite(p1) || !std::isfinite(p2))
    throw std::invalid_argument("ExponentField: exponents must lie in (1,inf)");
}

ExponentField exponent_field(const RegionPartition& partition, double p1,
                             double p2) {
  return ExponentField(partition, p1, p2);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Felzenszwalb-Huttenlocher 1D lower envelope of parabolas.
void edt_1d(const std::vector<double>& f, std::vector<double>& d,
            std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (f[v[0]] == kInf) {
      v[0] = q;
      continue;
    }
    double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]));
    while (k > 0 && s <= z[k]) {
      --k;
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]));
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    if (f[v[0]] == kInf) {
      d[q] = kInf;
      continue;
    }
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

std::vector<double> squared_distance_to_label(const RegionPartition& partition,
                                              std::uint8_t lab) {
  const Grid& g = partition.grid();
  const int n = g.n;
  std::vector<double> dist(g.size());
  for (int k = 0; k < g.size(); ++k)
    dist[k] = partition.labels()[k] == lab ? 0.0 : kInf;

  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  // columns
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) f[j] = dist[g.index(i, j)];
    edt_1d(f, d, v, z);
    for (int j = 0; j < n; ++j) dist[g.index(i, j)] = d[j];
  }
  // rows
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) f[i] = dist[g.index(i, j)];
    edt_1d(f, d, v, z);
    for (int i = 0; i < n; ++i) dist[g.index(i, j)] = d[i];
  }
  const double h2 = g.h * g.h;
  for (auto& x : dist) x *= h2;
  return dist;
}

ErodedPartition::ErodedPartition(const RegionPartition& parent, double delta,
                                 std::vector<std::uint8_t> mask)
    : parent_(parent), delta_(delta), mask_(std::move(mask)) {}

int ErodedPartition::count(int side) const {
  int c = 0;
  for (auto m : mask_)
    if (m == side) ++c;
  return c;
}

ErodedPartition erode(const RegionPartition& partition, double delta) {
  const Grid& g = partition.grid();
  if (!(delta >= g.h))
    throw std::invalid_argument(
        "erode: delta below grid resolution (need delta >= h)");
  const auto d1 = squared_distance_to_label(partition, 1);
  const auto d2 = squared_distance_to_label(partition, 2);
  const double thr = delta * delta;
  std::vector<std::uint8_t> mask(g.size(), 0);
  for (int k = 0; k < g.size(); ++k) {
    if (partition.labels()[k] == 1) {
      if (d2[k] > thr) mask[k] = 1;
    } else {
      if (d1[k] > thr) mask[k] = 2;
    }
  }
  return ErodedPartition(partition, delta, std::move(mask));
}

GridFunction gaussian_smooth(const GridFunction& image, double sigma) {
  if (!(sigma > 0.0))
    throw std::invalid_argument("gaussian_smooth: sigma must be positive");
  const Grid& g = image.grid();
  const int n = g.n;
  const double radius_len = 4.0 * sigma * std::sqrt(2.0);
  const int radius = static_cast<int>(std::floor(radius_len / g.h));
  if (radius == 0) return image;  // kernel support below grid resolution

  std::vector<double> kernel(2 * radius + 1);
  double mass = 0.0;
  for (int d = -radius; d <= radius; ++d) {
    const double x = d * g.h;
    kernel[d + radius] = std::exp(-x * x / (4.0 * sigma * sigma));
    mass += kernel[d + radius];
  }
  for (auto& k : kernel) k /= mass;

  GridFunction tmp(g, image.bc());
  GridFunction out(g, image.bc());
  const auto clampi = [n](int i) { return std::clamp(i, 0, n - 1); };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int d = -radius; d <= radius; ++d)
        s += kernel[d + radius] * image(clampi(i + d), j);
      tmp(i, j) = s;
    }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int d = -radius; d <= radius; ++d)
        s += kernel[d + radius] * tmp(i, clampi(j + d));
      out(i, j) = s;
    }
  return out;
}

RegionPartition build_partition(const GridFunction& image, double sigma,
                                double beta) {
  if (!(beta > 0.0))
    throw std::invalid_argument("build_partition: beta must be positive");
  const GridFunction smooth = gaussian_smooth(image, sigma);
  const VectorGridFunction grad = gradient(smooth);
  const Grid& g = image.grid();
  RegionPartition p(g);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const double mag = grad.at(i, j).norm();
      p.label(i, j) = mag > beta ? 1 : 2;
    }
  return p;
}

InterfaceSet extract_interface(const ErodedPartition& eroded, int side) {
  if (side != 1 && side != 2)
    throw std::invalid_argument("extract_interface: side must be 1 or 2");
  const Grid& g = eroded.grid();
  const int n = g.n;
  const double h = g.h;

  // smoothed indicator of the eroded region, used only for normal estimates
  GridFunction chi(g, BoundaryCondition::natural);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      chi(i, j) = eroded.in_region(side, i, j) ? 1.0 : 0.0;
  const GridFunction chi_s = gaussian_smooth(chi, std::sqrt(2.0) * h);

  const auto centered_grad = [&](int i, int j) -> Vec2 {
    const int il = std::max(i - 1, 0), ir = std::min(i + 1, n - 1);
    const int jl = std::max(j - 1, 0), jr = std::min(j + 1, n - 1);
    return {(chi_s(ir, j) - chi_s(il, j)) / ((ir - il) * h),
            (chi_s(i, jr) - chi_s(i, jl)) / ((jr - jl) * h)};
  };

  InterfaceSet set;
  const auto add_edge = [&](int ii, int ji, int io, int jo, Vec2 nu,
                            Vec2 pos) {
    const Vec2 gc = (centered_grad(ii, ji) + centered_grad(io, jo)) * 0.5;
    double w = h;
    const double gn = gc.norm();
    if (gn > 0.0) w = h * std::fabs(gc.dot(nu)) / gn;
    InterfaceSample s;
    s.position = pos;
    s.normal = nu;
    s.weight = w;
    s.inside_i = ii;
    s.inside_j = ji;
    s.side = side;
    set.samples.push_back(s);
  };

  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (!eroded.in_region(side, i, j)) continue;
      // vertical edges (normal +-x); skip edges on the domain boundary
      if (i + 1 < n && !eroded.in_region(side, i + 1, j))
        add_edge(i, j, i + 1, j, {1.0, 0.0}, {(i + 1) * h, (j + 0.5) * h});
      if (i - 1 >= 0 && !eroded.in_region(side, i - 1, j))
        add_edge(i, j, i - 1, j, {-1.0, 0.0}, {i * h, (j + 0.5) * h});
      // horizontal edges (normal +-y)
      if (j + 1 < n && !eroded.in_region(side, i, j + 1))
        add_edge(i, j, i, j + 1, {0.0, 1.0}, {(i + 0.5) * h, (j + 1) * h});
      if (j - 1 >= 0 && !eroded.in_region(side, i, j - 1))
        add_edge(i, j, i, j - 1, {0.0, -1.0}, {(i + 0.5) * h, j * h});
    }
  return set;
}

void save_partition_pgm(const RegionPartition& partition,
                        const std::string& path) {
  GridFunction mask(partition.grid(), BoundaryCondition::natural);
  for (int j = 0; j < partition.grid().n; ++j)
    for (int i = 0; i < partition.grid().n; ++i)
      mask(i, j) = partition.label(i, j) == 1 ? 1.0 : 0.0;
  save_pgm(mask, path);
}

}  // namespace vxs
