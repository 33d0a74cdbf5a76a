#pragma once

#include <string>
#include <vector>

#include "vxshape/flow.hpp"
#include "vxshape/partition.hpp"
#include "vxshape/shape_derivative.hpp"
#include "vxshape/solver.hpp"

namespace vxs {

struct DescentConfig {
  double dt = 0.06;            // initial region transport step
  int basis_count = 8;         // bump fields seeded along the interface
  double basis_radius = 0.15;  // bump radius before boundary clipping
  int max_outer = 30;
  double stop_threshold = 1e-7;  // on |derivative along V*|
  double dt_min = 1e-4;
};

struct RestoreConfig {
  double beta = 8.0;    // threshold and fidelity weight
  double sigma = 0.02;  // Gaussian filter width
  double k = 0.0;       // accepted for provenance; unused by the
                        // piecewise-constant exponent model
  double p1 = 1.2;
  double p2 = 2.0;
  DescentConfig descent;
  SolverConfig solver{1e-3, 1e-8, 50000, BoundaryCondition::natural};
};

struct RestoreIteration {
  int index = 0;
  double j_value = 0.0;          // the weighted restoration functional
  double derivative = 0.0;       // volume derivative along the chosen field
  double dt = 0.0;               // accepted step
  std::vector<double> coefficients;
  std::string field_descriptor;
  int partition_snapshot = 0;    // index into RestoreTrace::partitions
};

struct RestoreTrace {
  std::vector<RestoreIteration> iterations;  // accepted steps only
  std::vector<RegionPartition> partitions;   // snapshot 0 = initial
  double initial_j = 0.0;
  std::string stop_reason;

  std::string serialize() const;  // stable text form, used for bit-exact
                                  // reproducibility checks
};

struct RestoreResult {
  GridFunction u;
  RegionPartition partition;
  RestoreTrace trace;
  bool converged = true;  // final inner solve reached its tolerance
};

/// The restoration pipeline: build the partition from the image, minimize
/// the weighted functional   1/(2 beta) int |grad v|^p(x) + beta/2 (v-I)^2,
/// then steepest-descent region updates along the shape derivative.
RestoreResult restore(const GridFunction& image, const RestoreConfig& config);

/// Weights that express the restoration functional through the solver:
/// per-region gradient weight p_i/(2 beta), fidelity weight beta.
EnergyWeights restore_weights(const RestoreConfig& config);

/// The restoration functional J(v) itself (includes the beta/2 int I^2
/// constant so J is the literal weighted misfit).
double restore_functional(const GridFunction& u, const ExponentField& p,
                          const GridFunction& image,
                          const RestoreConfig& config);

struct DescentField {
  FieldPtr field;                 // normalized to unit sup norm; zero field
                                  // when every coefficient vanishes
  std::vector<double> coefficients;
};

/// Projects the negative shape gradient onto a finite bump basis:
/// d_j = volume_derivative(u, ..., V_j), V* = -sum d_j V_j, normalized.
DescentField descent_field(const GridFunction& u, const ExponentField& p,
                           const Forcing& f,
                           const std::vector<FieldPtr>& basis, double eps_reg,
                           const EnergyWeights& w = {});

/// Bump translation fields centered on interface edges, directed along the
/// local interface normal; radius is clipped to keep the support inside
/// the domain.  Returns fewer than `count` fields when the interface is
/// short or too close to the boundary.
std::vector<FieldPtr> interface_bump_basis(const RegionPartition& partition,
                                           int count, double radius);

}  // namespace vxs
