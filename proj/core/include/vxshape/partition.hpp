#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vxshape/grid.hpp"

namespace vxs {

/// Two-region labeling of the cell set.  Label 1 marks D1 (edge regions,
/// low exponent), label 2 marks D2 (smooth regions).
class RegionPartition {
 public:
  RegionPartition() = default;
  RegionPartition(const Grid& grid, std::uint8_t fill = 2)
      : grid_(grid), labels_(grid.size(), fill) {}

  static RegionPartition from_indicator(
      const Grid& grid, const std::function<bool(Vec2)>& in_region1);
  static RegionPartition disk(const Grid& grid, Vec2 center, double radius);
  static RegionPartition half_plane_x(const Grid& grid, double split);

  const Grid& grid() const { return grid_; }
  std::uint8_t label(int i, int j) const { return labels_[grid_.index(i, j)]; }
  std::uint8_t& label(int i, int j) { return labels_[grid_.index(i, j)]; }
  const std::vector<std::uint8_t>& labels() const { return labels_; }
  std::vector<std::uint8_t>& labels() { return labels_; }

  int count(std::uint8_t lab) const;
  bool operator==(const RegionPartition& o) const {
    return grid_ == o.grid_ && labels_ == o.labels_;
  }

 private:
  Grid grid_;
  std::vector<std::uint8_t> labels_;
};

/// Piecewise-constant exponent p(x) = p1 on D1, p2 on D2.
class ExponentField {
 public:
  ExponentField() = default;
  ExponentField(const RegionPartition& partition, double p1, double p2);

  const RegionPartition& partition() const { return partition_; }
  const Grid& grid() const { return partition_.grid(); }
  double p1() const { return p1_; }
  double p2() const { return p2_; }
  double p_minus() const { return std::min(p1_, p2_); }
  double p_plus() const { return std::max(p1_, p2_); }
  double at(int i, int j) const {
    return partition_.label(i, j) == 1 ? p1_ : p2_;
  }
  double at_index(int k) const {
    return partition_.labels()[k] == 1 ? p1_ : p2_;
  }

 private:
  RegionPartition partition_;
  double p1_ = 2.0, p2_ = 2.0;
};

ExponentField exponent_field(const RegionPartition& partition, double p1,
                             double p2);

/// delta-erosion of both regions: cell of D_i stays in D_i^delta iff its
/// center is farther than delta from every cell center of the other label.
/// The leftover cells form the band A_delta.
class ErodedPartition {
 public:
  ErodedPartition() = default;
  ErodedPartition(const RegionPartition& parent, double delta,
                  std::vector<std::uint8_t> mask);

  const RegionPartition& parent() const { return parent_; }
  const Grid& grid() const { return parent_.grid(); }
  double delta() const { return delta_; }

  bool in_region(int side, int i, int j) const {
    return mask_[grid().index(i, j)] == side;
  }
  bool in_band(int i, int j) const { return mask_[grid().index(i, j)] == 0; }
  // 1, 2 for the eroded regions, 0 for the band
  std::uint8_t mask(int i, int j) const { return mask_[grid().index(i, j)]; }
  const std::vector<std::uint8_t>& masks() const { return mask_; }

  int count(int side) const;

 private:
  RegionPartition parent_;
  double delta_ = 0.0;
  std::vector<std::uint8_t> mask_;
};

ErodedPartition erode(const RegionPartition& partition, double delta);

/// One interface sample: a cell edge separating D_i^delta from its
/// complement.  `normal` is the exterior axis unit normal of the edge,
/// `weight` is h scaled by the staircase correction |nu_cont . normal|,
/// `inside` indexes the adjacent cell inside the region.
struct InterfaceSample {
  Vec2 position;
  Vec2 normal;
  double weight = 0.0;
  int inside_i = 0, inside_j = 0;
  int side = 1;
};

struct InterfaceSet {
  std::vector<InterfaceSample> samples;
  double total_weight() const {
    double s = 0.0;
    for (const auto& e : samples) s += e.weight;
    return s;
  }
  bool empty() const { return samples.empty(); }
};

/// Interior cell edges bounding D_side^delta; edges lying on the domain
/// boundary are skipped.  Weights carry the smoothed-indicator normal
/// projection so that staircase sums approximate true arc length.
InterfaceSet extract_interface(const ErodedPartition& eroded, int side);

/// Convolution with the Gaussian kernel exp(-|x|^2/(4 sigma^2)), truncated
/// at radius 4*sigma*sqrt(2), renormalized to unit mass; the image is
/// extended by edge replication.
GridFunction gaussian_smooth(const GridFunction& image, double sigma);

/// D1 = cells where |grad(G_sigma * I)| > beta, D2 the rest (ties to D2).
RegionPartition build_partition(const GridFunction& image, double sigma,
                                double beta);

/// Squared distance from each cell center to the nearest cell center with
/// the given label (exact Euclidean distance transform).
std::vector<double> squared_distance_to_label(const RegionPartition& partition,
                                              std::uint8_t lab);

/// Writes label 1 -> 255, label 2 -> 0 as a binary PGM mask.
void save_partition_pgm(const RegionPartition& partition,
                        const std::string& path);

}  // namespace vxs
