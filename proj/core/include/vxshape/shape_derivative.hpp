#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vxshape/flow.hpp"
#include "vxshape/forcing.hpp"
#include "vxshape/partition.hpp"
#include "vxshape/solver.hpp"

namespace vxs {

/// R(u): integral of  wg(x) [ (|grad u|^2+eps^2)^{p/2}/p div V
///                            - (|grad u|^2+eps^2)^{p/2-1} grad u.DV grad u ]
///        + w_fid div V u^2/2,
/// with DV evaluated analytically for analytic fields.
double r_functional(const GridFunction& u, const ExponentField& p,
                    const DeformationField& V, double eps_reg,
                    const EnergyWeights& w = {});

/// Volume form of the shape derivative at the minimizer u:
/// R(u) - w_fid [ int u f div V + int u grad f . V ].
double volume_derivative(const GridFunction& u, const ExponentField& p,
                         const Forcing& f, const DeformationField& V,
                         double eps_reg, const EnergyWeights& w = {});
double volume_derivative(const GridFunction& u, const ExponentField& p,
                         const GridFunction& f, const DeformationField& V,
                         double eps_reg, const EnergyWeights& w = {});

/// The same integrand restricted to the cells of D_side^delta with the
/// single exponent of that region.
double regional_derivative(const GridFunction& u, const ErodedPartition& eroded,
                           int side, const ExponentField& p, const Forcing& f,
                           const DeformationField& V, double eps_reg,
                           const EnergyWeights& w = {});

/// The volume integrand over the band A_delta (piecewise exponent).
double band_derivative(const GridFunction& u, const ExponentField& p,
                       const ErodedPartition& eroded, const Forcing& f,
                       const DeformationField& V, double eps_reg,
                       const EnergyWeights& w = {});

struct InterfaceDerivativeResult {
  double value = 0.0;               // extrapolated to delta -> 0
  std::vector<double> deltas;
  std::vector<double> a_values;     // A(delta) jump sums
  std::vector<double> omitted;      // residual of the u^2/2 and u f terms
};

/// Interface (jump) form: for each delta, the sum over both eroded
/// interfaces with their own exterior normals of
///   wg_i [ (|grad u|^2+eps^2)^{p_i/2}/p_i (V.nu)
///          - (|grad u|^2+eps^2)^{p_i/2-1} (grad u.nu)(grad u.V) ] weight,
/// with one-sided gradient traces from each region's interior, then a
/// linear-in-delta extrapolation to delta = 0 over the last three entries.
InterfaceDerivativeResult interface_derivative(
    const GridFunction& u, const ExponentField& p, const DeformationField& V,
    const std::vector<double>& delta_list, double eps_reg,
    const EnergyWeights& w = {}, const Forcing* f = nullptr);

struct FdEstimate {
  double t = 0.0;
  double value = 0.0;
  bool converged = false;
};

struct FdDerivativeResult {
  std::vector<FdEstimate> estimates;  // central differences (s(t)-s(-t))/2t
  double limit = 0.0;                 // Richardson extrapolation
  bool all_converged = true;
};

/// Finite-difference derivative of s(t) via minimize_t at +-t for each t.
FdDerivativeResult fd_derivative(const ExponentField& p, const Forcing& f,
                                 const DeformationField& V,
                                 const std::vector<double>& t_list,
                                 const SolverConfig& config,
                                 const EnergyWeights& w = {},
                                 const GridFunction* warm_start = nullptr);

struct ShapeDerivativeReport {
  double volume_value = 0.0;
  double interface_value = 0.0;
  std::pair<double, double> regional_values{0.0, 0.0};
  double band_value = 0.0;
  std::vector<FdEstimate> fd_estimates;
  double fd_limit = 0.0;

  // parameters of the run
  double h = 0.0;
  double eps_reg = 0.0;
  std::vector<double> delta_list;
  std::vector<double> t_list;
  std::string field_descriptor;

  // diagnostics
  std::vector<double> interface_a_values;
  std::vector<double> interface_omitted;
  double base_energy = 0.0;
  double solver_residual = 0.0;
  bool residual_warning = false;
  bool all_converged = true;
};

/// Runs minimize once, then the volume, interface, regional and
/// finite-difference evaluations, and records all parameters.
ShapeDerivativeReport build_report(const ExponentField& p, const Forcing& f,
                                   const DeformationField& V,
                                   const SolverConfig& config,
                                   const std::vector<double>& delta_list,
                                   const std::vector<double>& t_list,
                                   const EnergyWeights& w = {});

void write_report_csv(const ShapeDerivativeReport& report,
                      const std::string& path);
std::string report_summary(const ShapeDerivativeReport& report);

/// Least-squares linear fit y = a + b x; returns {a, b}.
std::pair<double, double> linear_fit(const std::vector<double>& x,
                                     const std::vector<double>& y);

}  // namespace vxs
