#pragma once

#include <memory>
#include <string>
#include <vector>

#include "vxshape/geometry.hpp"
#include "vxshape/grid.hpp"
#include "vxshape/partition.hpp"

namespace vxs {

/// Lipschitz deformation field with compact support inside the unit square.
/// Analytic families expose exact Jacobians (DV)_ij = dV_i/dx_j.
class DeformationField {
 public:
  virtual ~DeformationField() = default;
  virtual Vec2 value(const Vec2& x) const = 0;
  virtual Mat2 jacobian(const Vec2& x) const = 0;
  /// V vanishes within this distance of the domain boundary.
  virtual double support_margin() const = 0;
  virtual std::string describe() const = 0;

  double div(const Vec2& x) const { return jacobian(x).trace(); }
  bool is_zero() const { return zero_; }

 protected:
  bool zero_ = false;
};

using FieldPtr = std::shared_ptr<const DeformationField>;

/// Radial C^2 bump: 1 on |x-c| <= plateau*radius, quintic-smoothstep decay
/// to 0 at |x-c| = radius.
struct RadialBump {
  Vec2 center;
  double radius = 0.25;
  double plateau = 0.5;

  double value(const Vec2& x) const;
  Vec2 grad(const Vec2& x) const;
};

FieldPtr make_zero_field();
/// V = amplitude * dir * bump(x)
FieldPtr make_translation_field(Vec2 center, double radius, Vec2 dir,
                                double amplitude, double plateau = 0.5);
/// V = amplitude * perp(x - c) * bump(x)
FieldPtr make_rotation_field(Vec2 center, double radius, double amplitude,
                             double plateau = 0.5);
/// V = amplitude * (x - c) * bump(x); negative amplitude contracts
FieldPtr make_radial_field(Vec2 center, double radius, double amplitude,
                           double plateau = 0.5);
/// sum_k coeff_k * field_k
FieldPtr make_linear_combination(std::vector<FieldPtr> fields,
                                 std::vector<double> coeffs);
/// Scaled copy: s * field
FieldPtr make_scaled_field(FieldPtr field, double s);
/// Bilinear interpolation of sampled components; Jacobian from centered
/// differences of the samples.
FieldPtr make_sampled_field(const VectorGridFunction& samples,
                            double support_margin);

/// Names of the built-in analytic families, for the CLI.
const std::vector<std::string>& builtin_field_families();

/// Fixed RK4 step count for the flow ODE at time t.
int flow_step_count(double t);

/// Integrates dPhi/dt = V(Phi), Phi_0 = x with classical RK4.
/// t = 0 returns x exactly (no integration step).
Vec2 advect(const DeformationField& V, const Vec2& x, double t);

struct FlowJacobian {
  Vec2 position;  // Phi_t(x)
  Mat2 dphi;      // DPhi_t(x)
  double jac;     // det DPhi_t(x)
};

/// Integrates the variational equation dM/dt = DV(Phi) M alongside the flow.
/// Throws if the determinant is not positive.
FlowJacobian flow_jacobian(const DeformationField& V, const Vec2& x, double t);

/// Pullback transport of labels: cell at x receives the label of the cell
/// containing Phi_{-t}(x).
RegionPartition transport_partition(const RegionPartition& partition,
                                    const DeformationField& V, double t);

/// u composed with Phi_{-t}, by bilinear interpolation; keeps the bc tag.
GridFunction pullback(const GridFunction& u, const DeformationField& V,
                      double t);

}  // namespace vxs
