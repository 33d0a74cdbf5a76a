#pragma once

#include <optional>

#include "vxshape/flow.hpp"
#include "vxshape/forcing.hpp"
#include "vxshape/grid.hpp"
#include "vxshape/partition.hpp"

namespace vxs {

struct SolverConfig {
  double eps_reg = 1e-3;  // gradient regularization epsilon
  double tol = 1e-8;      // relative first-order optimality tolerance
  int max_iter = 50000;
  BoundaryCondition bc = BoundaryCondition::dirichlet_zero;
};

/// Per-region gradient weights and fidelity weight.  The defaults give the
/// plain functional  int |grad u|^p/p + u^2/2 - u f;  the restoration
/// pipeline passes grad_i = p_i/(2 beta), fidelity = beta to reproduce the
/// weighted model.
struct EnergyWeights {
  double grad1 = 1.0;
  double grad2 = 1.0;
  double fidelity = 1.0;

  double grad_of(int label) const { return label == 1 ? grad1 : grad2; }
};

struct SolverResult {
  GridFunction u;
  double energy = 0.0;
  double grad_norm = 0.0;  // L2 norm of the discrete first variation
  int iterations = 0;
  bool converged = false;
};

/// Discrete energy of u.  Dirichlet fields use the finite-volume wall
/// completion (reflection ghosts, half-weight wall faces) so that the
/// p = 2 solve is second-order accurate; natural fields use the plain
/// cell quadrature with the forward-difference gradient.
double energy(const GridFunction& u, const ExponentField& p,
              const GridFunction& f, double eps_reg,
              const EnergyWeights& w = {});

/// Pulled-back energy at deformation parameter t, on the fixed grid and
/// fixed exponent field: per cell B = (DPhi_t)^{-1}, J = det DPhi_t,
/// integrand ((|grad u . B|^2 + eps^2)^{p/2}/p + u^2/2 - u f(Phi_t)) J.
double energy_t(const GridFunction& u, const ExponentField& p,
                const Forcing& f, const DeformationField& V, double t,
                double eps_reg, const EnergyWeights& w = {});

/// Minimizes `energy` over grid functions with config.bc by preconditioned
/// nonlinear conjugate gradients with an Armijo line search; energy is
/// strictly nonincreasing along iterates.
SolverResult minimize(const ExponentField& p, const GridFunction& f,
                      const SolverConfig& config, const EnergyWeights& w = {},
                      const GridFunction* initial_guess = nullptr);

/// Minimizes `energy_t`; this defines s(t) for the finite-difference
/// derivative oracle.
SolverResult minimize_t(const ExponentField& p, const Forcing& f,
                        const DeformationField& V, double t,
                        const SolverConfig& config, const EnergyWeights& w = {},
                        const GridFunction* initial_guess = nullptr);

/// Single-exponent solve on the eroded region D_side^delta: cells adjacent
/// to the interface (both sides of it) are pinned to boundary_data, region
/// cells on the domain boundary are pinned to zero, and the regularized
/// energy is minimized over the remaining region cells.
SolverResult solve_region(const ErodedPartition& eroded, int side,
                          const GridFunction& boundary_data,
                          const GridFunction& f, double p_region,
                          const SolverConfig& config);

/// L2 norm of the discrete first variation of `energy` at u; the measure
/// `minimize` drives below tol*(1+|energy|).
double optimality_residual(const GridFunction& u, const ExponentField& p,
                           const GridFunction& f, double eps_reg,
                           const EnergyWeights& w = {});

}  // namespace vxs
