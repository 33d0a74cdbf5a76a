#include "vxshape/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace vxs {

namespace {

// Discrete energy model shared by minimize / minimize_t / solve_region.
// Gradient term: interior forward-difference faces; under dirichlet_zero the
// four walls contribute reflection faces (gradient 2u/h) at half cell weight,
// which keeps the p=2 solve second-order accurate.  All data is per cell.
struct Model {
  Grid grid;
  BoundaryCondition bc = BoundaryCondition::dirichlet_zero;
  double eps = 0.0;
  double w_fid = 1.0;
  double wg_min = 1.0;
  double p_plus = 2.0;
  std::vector<double> p, wg, jac, f;
  std::vector<Mat2> B;                // empty = identity
  std::vector<std::uint8_t> quad;     // empty = all cells in the quadrature
  std::vector<std::uint8_t> free_dof; // empty = all dofs free

  bool has_B() const { return !B.empty(); }
  bool walls() const { return bc == BoundaryCondition::dirichlet_zero; }
  bool in_quad(int k) const { return quad.empty() || quad[k] != 0; }
  bool is_free(int k) const { return free_dof.empty() || free_dof[k] != 0; }
};

struct Workspace {
  std::vector<double> qx, qy;   // flux at interior faces (cell-collocated)
  std::vector<double> coef;     // wg*J*a per cell, for the quadratic model
  std::vector<double> wallc;    // wall stiffness 2*wg*J*a_w*walls per cell
  std::vector<double> grad;     // first variation, L2 scaling
  std::vector<double> pinv_g;   // preconditioned gradient
  std::vector<double> dir;      // search direction
  std::vector<double> precond;
  std::vector<double> trial;

  void resize(int m) {
    qx.assign(m, 0.0);
    qy.assign(m, 0.0);
    coef.assign(m, 0.0);
    wallc.assign(m, 0.0);
    grad.assign(m, 0.0);
    pinv_g.assign(m, 0.0);
    dir.assign(m, 0.0);
    precond.assign(m, 0.0);
    trial.assign(m, 0.0);
  }
};

inline double pow_half(double s, double half_p) {
  return s > 0.0 ? std::pow(s, half_p) : 0.0;
}

struct EvalOut {
  double energy = 0.0;
  double sum_grad_modular = 0.0;  // sum J*(m+eps^2)^{p/2} h^2 incl. walls
  double sum_u2 = 0.0;            // sum J u^2 h^2
  double sum_f2 = 0.0;            // sum J f^2 h^2
};

// Energy (and optionally first variation + line-search coefficients).
EvalOut evaluate(const Model& M, const std::vector<double>& u, bool want_grad,
                 Workspace& ws) {
  const int n = M.grid.n;
  const double h = M.grid.h;
  const double cell = h * h;
  const double inv_h = 1.0 / h;
  const double eps2 = M.eps * M.eps;

  EvalOut out;
  double e_grad = 0.0, e_fid = 0.0;

  if (want_grad) {
    std::fill(ws.qx.begin(), ws.qx.end(), 0.0);
    std::fill(ws.qy.begin(), ws.qy.end(), 0.0);
    std::fill(ws.coef.begin(), ws.coef.end(), 0.0);
    std::fill(ws.wallc.begin(), ws.wallc.end(), 0.0);
    std::fill(ws.grad.begin(), ws.grad.end(), 0.0);
  }

  const bool dirichlet = M.bc == BoundaryCondition::dirichlet_zero;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int k = M.grid.index(i, j);
      if (!M.in_quad(k)) continue;

      double gx, gy;
      if (dirichlet) {
        gx = i < n - 1 ? (u[k + 1] - u[k]) * inv_h : 0.0;
        gy = j < n - 1 ? (u[k + n] - u[k]) * inv_h : 0.0;
      } else {
        gx = i < n - 1 ? (u[k + 1] - u[k]) * inv_h
                       : (u[k] - u[k - 1]) * inv_h;
        gy = j < n - 1 ? (u[k + n] - u[k]) * inv_h
                       : (u[k] - u[k - n]) * inv_h;
      }

      Vec2 gb{gx, gy};
      if (M.has_B()) gb = row_times({gx, gy}, M.B[k]);

      const double m = gb.norm2();
      const double s = m + eps2;
      const double half_p = 0.5 * M.p[k];
      const double t1 = pow_half(s, half_p);
      const double a = s > 0.0 ? t1 / s : 0.0;
      const double wgj = M.wg[k] * M.jac[k];

      e_grad += wgj * t1 / M.p[k];
      out.sum_grad_modular += M.jac[k] * t1;

      const double uv = u[k];
      const double fv = M.f[k];
      e_fid += M.jac[k] * (0.5 * uv * uv - uv * fv);
      out.sum_u2 += M.jac[k] * uv * uv;
      out.sum_f2 += M.jac[k] * fv * fv;

      double wall_t1 = 0.0, wall_a = 0.0;
      int nwalls = 0;
      if (dirichlet) {
        nwalls = (i == 0) + (i == n - 1) + (j == 0) + (j == n - 1);
        if (nwalls > 0) {
          const double mw = 4.0 * uv * uv * inv_h * inv_h;
          const double sw = mw + eps2;
          wall_t1 = pow_half(sw, half_p);
          wall_a = sw > 0.0 ? wall_t1 / sw : 0.0;
          e_grad += nwalls * 0.5 * wgj * wall_t1 / M.p[k];
          out.sum_grad_modular += nwalls * 0.5 * M.jac[k] * wall_t1;
        }
      }

      if (want_grad) {
        const double coef = wgj * a;
        ws.coef[k] = coef;
        if (M.has_B()) {
          const Mat2& B = M.B[k];
          ws.qx[k] = coef * (B.a11 * gb.x + B.a12 * gb.y);
          ws.qy[k] = coef * (B.a21 * gb.x + B.a22 * gb.y);
        } else {
          ws.qx[k] = coef * gb.x;
          ws.qy[k] = coef * gb.y;
        }
        double gk = M.w_fid * M.jac[k] * (uv - fv);
        if (nwalls > 0) {
          const double wc = 2.0 * nwalls * wgj * wall_a;
          ws.wallc[k] = wc * inv_h * inv_h;
          gk += wc * uv * inv_h * inv_h;
        }
        ws.grad[k] += gk;
      }
    }
  }

  out.energy = (e_grad + M.w_fid * e_fid) * cell;
  out.sum_grad_modular *= cell;
  out.sum_u2 *= cell;
  out.sum_f2 *= cell;

  if (!want_grad) return out;

  // transpose of the face-gradient operator applied to the flux
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int k = M.grid.index(i, j);
      double acc = 0.0;
      if (dirichlet) {
        if (i < n - 1) acc -= ws.qx[k];
        if (i > 0) acc += ws.qx[k - 1];
        if (j < n - 1) acc -= ws.qy[k];
        if (j > 0) acc += ws.qy[k - n];
      } else {
        // natural: sample n-1 is the copied backward face
        if (i <= n - 3) {
          acc -= ws.qx[k];
          if (i > 0) acc += ws.qx[k - 1];
        } else if (i == n - 2) {
          acc += ws.qx[k - 1] - ws.qx[k] - ws.qx[k + 1];
        } else {
          acc += ws.qx[k - 1] + ws.qx[k];
        }
        if (j <= n - 3) {
          acc -= ws.qy[k];
          if (j > 0) acc += ws.qy[k - n];
        } else if (j == n - 2) {
          acc += ws.qy[k - n] - ws.qy[k] - ws.qy[k + n];
        } else {
          acc += ws.qy[k - n] + ws.qy[k];
        }
      }
      ws.grad[k] += acc * inv_h;
    }
  }

  for (int k = 0; k < n * n; ++k)
    if (!M.is_free(k)) ws.grad[k] = 0.0;

  return out;
}

// Quadratic form of the frozen-coefficient model; exact line-search
// denominator for the tangent quadratic.
double quadratic_form(const Model& M, const Workspace& ws,
                      const std::vector<double>& d) {
  const int n = M.grid.n;
  const double h = M.grid.h;
  const double cell = h * h;
  const double inv_h = 1.0 / h;
  const bool dirichlet = M.bc == BoundaryCondition::dirichlet_zero;
  double q = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int k = M.grid.index(i, j);
      if (!M.in_quad(k)) continue;
      double gx, gy;
      if (dirichlet) {
        gx = i < n - 1 ? (d[k + 1] - d[k]) * inv_h : 0.0;
        gy = j < n - 1 ? (d[k + n] - d[k]) * inv_h : 0.0;
      } else {
        gx = i < n - 1 ? (d[k + 1] - d[k]) * inv_h
                       : (d[k] - d[k - 1]) * inv_h;
        gy = j < n - 1 ? (d[k + n] - d[k]) * inv_h
                       : (d[k] - d[k - n]) * inv_h;
      }
      Vec2 gb{gx, gy};
      if (M.has_B()) gb = row_times({gx, gy}, M.B[k]);
      q += ws.coef[k] * gb.norm2();
      q += ws.wallc[k] * d[k] * d[k];
      q += M.w_fid * M.jac[k] * d[k] * d[k];
    }
  }
  return q * cell;
}

void build_preconditioner(const Model& M, Workspace& ws) {
  const int n = M.grid.n;
  const double inv_h2 = 1.0 / (M.grid.h * M.grid.h);
  std::fill(ws.precond.begin(), ws.precond.end(), 0.0);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int k = M.grid.index(i, j);
      const double c = ws.coef[k] * inv_h2;
      if (i < n - 1) {
        ws.precond[k] += c;
        ws.precond[k + 1] += c;
      }
      if (j < n - 1) {
        ws.precond[k] += c;
        ws.precond[k + n] += c;
      }
      ws.precond[k] += ws.wallc[k] + M.w_fid * M.jac[k];
    }
  }
  for (auto& v : ws.precond) v = v > 1e-300 ? 1.0 / v : 1.0;
}

void check_coercivity(const Model& M, const EvalOut& ev) {
  // discrete counterpart of the equi-coercivity bound: energy dominates
  // c * grad modular + (w_fid/8) ||u||^2 - 8 w_fid ||f||^2
  const double lb = (M.wg_min / M.p_plus) * ev.sum_grad_modular +
                    M.w_fid * (ev.sum_u2 / 8.0 - 8.0 * ev.sum_f2);
  const double slack =
      1e-9 * (1.0 + std::fabs(ev.energy) + std::fabs(lb)) + 1e-12;
  if (ev.energy + slack < lb) {
    std::ostringstream os;
    os << "coercivity guard violated: energy " << ev.energy
       << " below lower bound " << lb << " (this indicates a solver bug)";
    throw std::runtime_error(os.str());
  }
}

double dot_cells(const std::vector<double>& a, const std::vector<double>& b,
                 double cell) {
  double s = 0.0;
  for (size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s * cell;
}

SolverResult run_ncg(const Model& M, const SolverConfig& config,
                     std::vector<double> u0) {
  const int m = M.grid.size();
  const double cell = M.grid.h * M.grid.h;
  Workspace ws;
  ws.resize(m);

  std::vector<double> u = std::move(u0);
  EvalOut ev = evaluate(M, u, true, ws);
  check_coercivity(M, ev);
  if (!std::isfinite(ev.energy))
    throw std::runtime_error("minimize: non-finite energy (divergence bug)");

  double grad_norm = std::sqrt(dot_cells(ws.grad, ws.grad, cell));
  build_preconditioner(M, ws);
  for (int k = 0; k < m; ++k) ws.pinv_g[k] = ws.precond[k] * ws.grad[k];
  for (int k = 0; k < m; ++k) ws.dir[k] = -ws.pinv_g[k];
  double g_dot_pg = dot_cells(ws.grad, ws.pinv_g, cell);

  std::vector<double> grad_prev(m, 0.0);
  int it = 0;
  bool converged = grad_norm <= config.tol * (1.0 + std::fabs(ev.energy));

  while (!converged && it < config.max_iter) {
    double g_dot_d = dot_cells(ws.grad, ws.dir, cell);
    if (!(g_dot_d < 0.0)) {
      for (int k = 0; k < m; ++k) ws.dir[k] = -ws.pinv_g[k];
      g_dot_d = -g_dot_pg;
      if (!(g_dot_d < 0.0)) break;  // numerically stationary
    }

    const double qd = quadratic_form(M, ws, ws.dir);
    double alpha = qd > 0.0 ? -g_dot_d / qd : 1.0;

    // Armijo backtracking; for p <= 2 the tangent quadratic majorizes the
    // gradient term and the first alpha is accepted.
    bool accepted = false;
    double e_trial = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      for (int k = 0; k < m; ++k) ws.trial[k] = u[k] + alpha * ws.dir[k];
      EvalOut evt = evaluate(M, ws.trial, false, ws);
      e_trial = evt.energy;
      if (std::isfinite(e_trial) &&
          e_trial <= ev.energy + 1e-4 * alpha * g_dot_d) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // stalled at numerical optimum

    std::swap(u, ws.trial);
    std::swap(grad_prev, ws.grad);
    ev = evaluate(M, u, true, ws);
    check_coercivity(M, ev);
    if (!std::isfinite(ev.energy))
      throw std::runtime_error("minimize: non-finite energy (divergence bug)");
    ++it;

    grad_norm = std::sqrt(dot_cells(ws.grad, ws.grad, cell));
    if (grad_norm <= config.tol * (1.0 + std::fabs(ev.energy))) {
      converged = true;
      break;
    }

    build_preconditioner(M, ws);
    const double g_dot_pg_old = g_dot_pg;
    for (int k = 0; k < m; ++k) ws.pinv_g[k] = ws.precond[k] * ws.grad[k];
    g_dot_pg = dot_cells(ws.grad, ws.pinv_g, cell);

    // Polak-Ribiere+ with periodic restart
    double beta = 0.0;
    if (it % 100 != 0 && g_dot_pg_old > 0.0) {
      double num = 0.0;
      for (int k = 0; k < m; ++k)
        num += (ws.grad[k] - grad_prev[k]) * ws.pinv_g[k];
      beta = std::max(0.0, num * cell / g_dot_pg_old);
    }
    for (int k = 0; k < m; ++k) ws.dir[k] = -ws.pinv_g[k] + beta * ws.dir[k];
  }

  SolverResult res;
  res.u = GridFunction(M.grid, M.bc);
  res.u.values() = u;
  res.energy = ev.energy;
  res.grad_norm = grad_norm;
  res.iterations = it;
  res.converged = grad_norm <= config.tol * (1.0 + std::fabs(ev.energy));
  if (!all_finite(res.u))
    throw std::runtime_error("minimize: non-finite iterate (divergence bug)");
  return res;
}

Model base_model(const ExponentField& p, const GridFunction& f,
                 double eps_reg, const EnergyWeights& w,
                 BoundaryCondition bc) {
  require_same_grid(p.grid(), f.grid(), "energy");
  if (eps_reg < 0.0)
    throw std::invalid_argument("energy: eps_reg must be >= 0");
  Model M;
  M.grid = p.grid();
  M.bc = bc;
  M.eps = eps_reg;
  M.w_fid = w.fidelity;
  M.wg_min = std::min(w.grad1, w.grad2);
  M.p_plus = p.p_plus();
  const int m = M.grid.size();
  M.p.resize(m);
  M.wg.resize(m);
  M.jac.assign(m, 1.0);
  M.f = f.values();
  for (int k = 0; k < m; ++k) {
    const int lab = p.partition().labels()[k];
    M.p[k] = lab == 1 ? p.p1() : p.p2();
    M.wg[k] = w.grad_of(lab);
  }
  return M;
}

void add_flow_data(Model& M, const Forcing& f, const DeformationField& V,
                   double t) {
  if (t == 0.0 || V.is_zero()) return;
  const Grid& g = M.grid;
  const int m = g.size();
  M.B.resize(m);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const int k = g.index(i, j);
      const FlowJacobian fj = flow_jacobian(V, g.center(i, j), t);
      M.B[k] = fj.dphi.inverse();
      M.jac[k] = fj.jac;
      M.f[k] = f.eval(fj.position);
    }
}

}  // namespace

double energy(const GridFunction& u, const ExponentField& p,
              const GridFunction& f, double eps_reg, const EnergyWeights& w) {
  require_same_grid(u.grid(), p.grid(), "energy");
  Model M = base_model(p, f, eps_reg, w, u.bc());
  Workspace ws;
  ws.resize(M.grid.size());
  return evaluate(M, u.values(), false, ws).energy;
}

double energy_t(const GridFunction& u, const ExponentField& p,
                const Forcing& f, const DeformationField& V, double t,
                double eps_reg, const EnergyWeights& w) {
  require_same_grid(u.grid(), p.grid(), "energy_t");
  Model M = base_model(p, f.samples(), eps_reg, w, u.bc());
  add_flow_data(M, f, V, t);
  Workspace ws;
  ws.resize(M.grid.size());
  return evaluate(M, u.values(), false, ws).energy;
}

double optimality_residual(const GridFunction& u, const ExponentField& p,
                           const GridFunction& f, double eps_reg,
                           const EnergyWeights& w) {
  require_same_grid(u.grid(), p.grid(), "optimality_residual");
  Model M = base_model(p, f, eps_reg, w, u.bc());
  Workspace ws;
  ws.resize(M.grid.size());
  evaluate(M, u.values(), true, ws);
  return std::sqrt(
      dot_cells(ws.grad, ws.grad, M.grid.h * M.grid.h));
}

SolverResult minimize(const ExponentField& p, const GridFunction& f,
                      const SolverConfig& config, const EnergyWeights& w,
                      const GridFunction* initial_guess) {
  if (!(p.p_minus() > 1.0))
    throw std::invalid_argument("minimize: requires p_minus > 1");
  if (!(config.tol > 0.0) || config.max_iter < 1)
    throw std::invalid_argument("minimize: bad solver config");
  Model M = base_model(p, f, config.eps_reg, w, config.bc);
  std::vector<double> u0 =
      initial_guess ? initial_guess->values() : f.values();
  return run_ncg(M, config, std::move(u0));
}

SolverResult minimize_t(const ExponentField& p, const Forcing& f,
                        const DeformationField& V, double t,
                        const SolverConfig& config, const EnergyWeights& w,
                        const GridFunction* initial_guess) {
  if (!(p.p_minus() > 1.0))
    throw std::invalid_argument("minimize_t: requires p_minus > 1");
  Model M = base_model(p, f.samples(), config.eps_reg, w, config.bc);
  add_flow_data(M, f, V, t);
  std::vector<double> u0 =
      initial_guess ? initial_guess->values() : f.samples().values();
  return run_ncg(M, config, std::move(u0));
}

SolverResult solve_region(const ErodedPartition& eroded, int side,
                          const GridFunction& boundary_data,
                          const GridFunction& f, double p_region,
                          const SolverConfig& config) {
  if (side != 1 && side != 2)
    throw std::invalid_argument("solve_region: side must be 1 or 2");
  if (!(p_region > 1.0))
    throw std::invalid_argument("solve_region: exponent must exceed 1");
  if (!(config.eps_reg > 0.0))
    throw std::invalid_argument("solve_region: requires eps_reg > 0");
  const Grid& g = eroded.grid();
  require_same_grid(g, f.grid(), "solve_region");
  require_same_grid(g, boundary_data.grid(), "solve_region");
  if (eroded.count(side) == 0)
    throw std::invalid_argument("solve_region: empty region");

  const int n = g.n;
  Model M;
  M.grid = g;
  M.bc = config.bc;
  M.eps = config.eps_reg;
  M.w_fid = 1.0;
  M.wg_min = 1.0;
  M.p_plus = p_region;
  const int m = g.size();
  M.p.assign(m, p_region);
  M.wg.assign(m, 1.0);
  M.jac.assign(m, 1.0);
  M.f = f.values();
  M.quad.assign(m, 0);
  M.free_dof.assign(m, 0);

  std::vector<double> u0(m, 0.0);
  const auto in_region = [&](int i, int j) {
    return eroded.in_region(side, i, j);
  };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int k = g.index(i, j);
      if (in_region(i, j)) {
        M.quad[k] = 1;
        const bool rim = i == 0 || i == n - 1 || j == 0 || j == n - 1;
        const bool gamma_adjacent =
            (i + 1 < n && !in_region(i + 1, j)) ||
            (i - 1 >= 0 && !in_region(i - 1, j)) ||
            (j + 1 < n && !in_region(i, j + 1)) ||
            (j - 1 >= 0 && !in_region(i, j - 1));
        if (rim) {
          u0[k] = 0.0;  // domain boundary condition
        } else if (gamma_adjacent) {
          u0[k] = boundary_data(i, j);
        } else {
          M.free_dof[k] = 1;
          u0[k] = f(i, j);
        }
      } else {
        // halo cells referenced by region stencils carry the boundary data
        const bool halo = (i + 1 < n && in_region(i + 1, j)) ||
                          (i - 1 >= 0 && in_region(i - 1, j)) ||
                          (j + 1 < n && in_region(i, j + 1)) ||
                          (j - 1 >= 0 && in_region(i, j - 1));
        if (halo) u0[k] = boundary_data(i, j);
      }
    }

  return run_ncg(M, config, std::move(u0));
}

}  // namespace vxs
