#include "vxshape/shape_derivative.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vxs {

namespace {

inline double pow_half(double s, double half_p) {
  return s > 0.0 ? std::pow(s, half_p) : 0.0;
}

// Shared volume integrand: 0 = all cells (piecewise p), 1/2 = eroded region
// of that side (constant exponent), 3 = band (piecewise p).
enum class CellSelect { all, region, band };

double volume_integrand_sum(const GridFunction& u, const ExponentField& p,
                            const Forcing* f, const DeformationField& V,
                            double eps_reg, const EnergyWeights& w,
                            CellSelect select, int side,
                            const ErodedPartition* eroded) {
  const Grid& g = u.grid();
  const double cell = g.h * g.h;
  const double eps2 = eps_reg * eps_reg;
  if (V.is_zero()) return 0.0;

  const VectorGridFunction gu = gradient(u);
  double acc = 0.0;
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      if (select == CellSelect::region && !eroded->in_region(side, i, j))
        continue;
      if (select == CellSelect::band && !eroded->in_band(i, j)) continue;
      const Vec2 x = g.center(i, j);
      const Mat2 dv = V.jacobian(x);
      const double divv = dv.trace();
      const Vec2 vv = V.value(x);
      if (divv == 0.0 && dv.max_abs() == 0.0 && vv.x == 0.0 && vv.y == 0.0)
        continue;

      const int lab = p.partition().label(i, j);
      const double pc =
          select == CellSelect::region ? (side == 1 ? p.p1() : p.p2())
                                       : (lab == 1 ? p.p1() : p.p2());
      const double wg =
          select == CellSelect::region ? w.grad_of(side) : w.grad_of(lab);

      const Vec2 gv = gu.at(i, j);
      const double m = gv.norm2();
      const double s = m + eps2;
      const double t1 = pow_half(s, 0.5 * pc);
      const double a = s > 0.0 ? t1 / s : 0.0;
      const double quad_form = gv.dot(dv * gv);  // grad u . DV grad u
      const double uv = u(i, j);

      double term = wg * (t1 / pc * divv - a * quad_form) +
                    w.fidelity * divv * 0.5 * uv * uv;
      if (f) {
        const double fv = f->samples()(i, j);
        const Vec2 gf = f->grad_at_cell(i, j);
        term -= w.fidelity * (uv * fv * divv + uv * gf.dot(vv));
      }
      acc += term;
    }
  return acc * cell;
}

}  // namespace

double r_functional(const GridFunction& u, const ExponentField& p,
                    const DeformationField& V, double eps_reg,
                    const EnergyWeights& w) {
  require_same_grid(u.grid(), p.grid(), "r_functional");
  return volume_integrand_sum(u, p, nullptr, V, eps_reg, w, CellSelect::all, 0,
                              nullptr);
}

double volume_derivative(const GridFunction& u, const ExponentField& p,
                         const Forcing& f, const DeformationField& V,
                         double eps_reg, const EnergyWeights& w) {
  require_same_grid(u.grid(), p.grid(), "volume_derivative");
  require_same_grid(u.grid(), f.grid(), "volume_derivative");
  return volume_integrand_sum(u, p, &f, V, eps_reg, w, CellSelect::all, 0,
                              nullptr);
}

double volume_derivative(const GridFunction& u, const ExponentField& p,
                         const GridFunction& f, const DeformationField& V,
                         double eps_reg, const EnergyWeights& w) {
  return volume_derivative(u, p, Forcing::from_grid(f), V, eps_reg, w);
}

double regional_derivative(const GridFunction& u, const ErodedPartition& eroded,
                           int side, const ExponentField& p, const Forcing& f,
                           const DeformationField& V, double eps_reg,
                           const EnergyWeights& w) {
  if (side != 1 && side != 2)
    throw std::invalid_argument("regional_derivative: side must be 1 or 2");
  if (eroded.count(side) == 0)
    throw std::invalid_argument("regional_derivative: empty region");
  require_same_grid(u.grid(), eroded.grid(), "regional_derivative");
  return volume_integrand_sum(u, p, &f, V, eps_reg, w, CellSelect::region,
                              side, &eroded);
}

double band_derivative(const GridFunction& u, const ExponentField& p,
                       const ErodedPartition& eroded, const Forcing& f,
                       const DeformationField& V, double eps_reg,
                       const EnergyWeights& w) {
  require_same_grid(u.grid(), eroded.grid(), "band_derivative");
  return volume_integrand_sum(u, p, &f, V, eps_reg, w, CellSelect::band, 0,
                              &eroded);
}

namespace {

// One-sided gradient trace at an interface sample, using only cells from
// the sample's region.  Second order into the region when the stencil fits.
Vec2 one_sided_trace(const GridFunction& u, const ErodedPartition& eroded,
                     const InterfaceSample& s) {
  const Grid& g = u.grid();
  const int n = g.n;
  const double h = g.h;
  const int i = s.inside_i, j = s.inside_j;
  const int side = s.side;
  const auto inside = [&](int ii, int jj) {
    return ii >= 0 && jj >= 0 && ii < n && jj < n &&
           eroded.in_region(side, ii, jj);
  };

  const int nx = static_cast<int>(std::lround(s.normal.x));
  const int ny = static_cast<int>(std::lround(s.normal.y));

  // derivative along the normal axis: one-sided stencil going inward
  double dn = 0.0;
  {
    const int di = nx != 0 ? -nx : 0;
    const int dj = ny != 0 ? -ny : 0;
    const double sign = nx != 0 ? static_cast<double>(nx)
                                : static_cast<double>(ny);
    const double u0 = u(i, j);
    if (inside(i + 2 * di, j + 2 * dj) && inside(i + di, j + dj)) {
      const double u1 = u(i + di, j + dj);
      const double u2 = u(i + 2 * di, j + 2 * dj);
      dn = sign * (3.0 * u0 - 4.0 * u1 + u2) / (2.0 * h);
    } else if (inside(i + di, j + dj)) {
      dn = sign * (u0 - u(i + di, j + dj)) / h;
    } else {
      dn = 0.0;
    }
  }

  // tangential derivative: centered when both neighbors are in the region
  double dt = 0.0;
  {
    const int ti = nx != 0 ? 0 : 1;
    const int tj = nx != 0 ? 1 : 0;
    const bool plus = inside(i + ti, j + tj);
    const bool minus = inside(i - ti, j - tj);
    if (plus && minus)
      dt = (u(i + ti, j + tj) - u(i - ti, j - tj)) / (2.0 * h);
    else if (plus)
      dt = (u(i + ti, j + tj) - u(i, j)) / h;
    else if (minus)
      dt = (u(i, j) - u(i - ti, j - tj)) / h;
  }

  return nx != 0 ? Vec2{dn, dt} : Vec2{dt, dn};
}

}  // namespace

InterfaceDerivativeResult interface_derivative(
    const GridFunction& u, const ExponentField& p, const DeformationField& V,
    const std::vector<double>& delta_list, double eps_reg,
    const EnergyWeights& w, const Forcing* f) {
  require_same_grid(u.grid(), p.grid(), "interface_derivative");
  const Grid& g = u.grid();
  if (delta_list.empty())
    throw std::invalid_argument("interface_derivative: empty delta list");
  for (size_t k = 0; k < delta_list.size(); ++k) {
    if (delta_list[k] < 2.0 * g.h)
      throw std::invalid_argument(
          "interface_derivative: delta below 2h is not resolvable");
    if (k > 0 && !(delta_list[k] < delta_list[k - 1]))
      throw std::invalid_argument(
          "interface_derivative: delta list must be strictly decreasing");
  }

  InterfaceDerivativeResult res;
  res.deltas = delta_list;
  const double eps2 = eps_reg * eps_reg;

  for (const double delta : delta_list) {
    if (V.is_zero()) {
      res.a_values.push_back(0.0);
      res.omitted.push_back(0.0);
      continue;
    }
    const ErodedPartition eroded = erode(p.partition(), delta);
    double a_sum = 0.0, omit = 0.0;
    bool any = false;
    for (int side = 1; side <= 2; ++side) {
      const InterfaceSet gamma = extract_interface(eroded, side);
      const double pc = side == 1 ? p.p1() : p.p2();
      const double wg = w.grad_of(side);
      for (const auto& s : gamma.samples) {
        any = true;
        const Vec2 vv = V.value(s.position);
        const double vnu = vv.dot(s.normal);
        if (vv.x == 0.0 && vv.y == 0.0) continue;
        const Vec2 tr = one_sided_trace(u, eroded, s);
        const double m = tr.norm2();
        const double sm = m + eps2;
        const double t1 = pow_half(sm, 0.5 * pc);
        const double a = sm > 0.0 ? t1 / sm : 0.0;
        a_sum += s.weight *
                 (wg * (t1 / pc * vnu - a * tr.dot(s.normal) * tr.dot(vv)));
        const double uv = u(s.inside_i, s.inside_j);
        const double fv = f != nullptr ? f->samples()(s.inside_i, s.inside_j)
                                       : 0.0;
        omit += s.weight * w.fidelity * (0.5 * uv * uv - uv * fv) * vnu;
      }
    }
    if (!any)
      throw std::invalid_argument("interface_derivative: empty interface");
    res.a_values.push_back(a_sum);
    res.omitted.push_back(omit);
  }

  // linear-in-delta extrapolation over the last (up to) three entries
  const size_t nfit = std::min<size_t>(3, res.a_values.size());
  std::vector<double> xs(res.deltas.end() - nfit, res.deltas.end());
  std::vector<double> ys(res.a_values.end() - nfit, res.a_values.end());
  if (nfit == 1) {
    res.value = ys[0];
  } else {
    res.value = linear_fit(xs, ys).first;
  }
  return res;
}

FdDerivativeResult fd_derivative(const ExponentField& p, const Forcing& f,
                                 const DeformationField& V,
                                 const std::vector<double>& t_list,
                                 const SolverConfig& config,
                                 const EnergyWeights& w,
                                 const GridFunction* warm_start) {
  if (t_list.empty())
    throw std::invalid_argument("fd_derivative: empty t list");
  for (size_t k = 0; k < t_list.size(); ++k) {
    if (!(t_list[k] > 0.0))
      throw std::invalid_argument("fd_derivative: steps must be positive");
    if (k > 0 && !(t_list[k] < t_list[k - 1]))
      throw std::invalid_argument(
          "fd_derivative: steps must be strictly decreasing");
  }

  FdDerivativeResult res;
  if (V.is_zero()) {
    for (const double t : t_list) res.estimates.push_back({t, 0.0, true});
    res.limit = 0.0;
    return res;
  }

  GridFunction base;
  const GridFunction* warm = warm_start;
  if (warm == nullptr) {
    SolverResult base_res = minimize(p, f.samples(), config, w);
    base = base_res.u;
    warm = &base;
  }

  for (const double t : t_list) {
    const SolverResult plus = minimize_t(p, f, V, t, config, w, warm);
    const SolverResult minus = minimize_t(p, f, V, -t, config, w, warm);
    const double est = (plus.energy - minus.energy) / (2.0 * t);
    const bool ok = plus.converged && minus.converged;
    res.estimates.push_back({t, est, ok});
    res.all_converged = res.all_converged && ok;
  }

  if (res.estimates.size() >= 2) {
    const auto& e1 = res.estimates[res.estimates.size() - 2];
    const auto& e2 = res.estimates.back();
    const double t12 = e1.t * e1.t, t22 = e2.t * e2.t;
    res.limit = (t12 * e2.value - t22 * e1.value) / (t12 - t22);
  } else {
    res.limit = res.estimates.back().value;
  }
  return res;
}

ShapeDerivativeReport build_report(const ExponentField& p, const Forcing& f,
                                   const DeformationField& V,
                                   const SolverConfig& config,
                                   const std::vector<double>& delta_list,
                                   const std::vector<double>& t_list,
                                   const EnergyWeights& w) {
  ShapeDerivativeReport rep;
  rep.h = p.grid().h;
  rep.eps_reg = config.eps_reg;
  rep.delta_list = delta_list;
  rep.t_list = t_list;
  rep.field_descriptor = V.describe();

  const SolverResult base = minimize(p, f.samples(), config, w);
  rep.base_energy = base.energy;
  rep.solver_residual = base.grad_norm;
  rep.residual_warning = !base.converged;
  rep.all_converged = base.converged;

  rep.volume_value = volume_derivative(base.u, p, f, V, config.eps_reg, w);

  const InterfaceDerivativeResult iface =
      interface_derivative(base.u, p, V, delta_list, config.eps_reg, w, &f);
  rep.interface_value = iface.value;
  rep.interface_a_values = iface.a_values;
  rep.interface_omitted = iface.omitted;

  const FdDerivativeResult fd =
      fd_derivative(p, f, V, t_list, config, w, &base.u);
  rep.fd_estimates = fd.estimates;
  rep.fd_limit = fd.limit;
  rep.all_converged = rep.all_converged && fd.all_converged;

  if (!V.is_zero() && !delta_list.empty()) {
    const double delta_fine = delta_list.back();
    const ErodedPartition eroded = erode(p.partition(), delta_fine);
    for (int side = 1; side <= 2; ++side) {
      double value = 0.0;
      if (eroded.count(side) > 0) {
        SolverConfig rc = config;
        const SolverResult ur = solve_region(
            eroded, side, base.u, f.samples(),
            side == 1 ? p.p1() : p.p2(), rc);
        rep.all_converged = rep.all_converged && ur.converged;
        value = regional_derivative(ur.u, eroded, side, p, f, V,
                                    config.eps_reg, w);
      }
      if (side == 1)
        rep.regional_values.first = value;
      else
        rep.regional_values.second = value;
    }
    rep.band_value =
        band_derivative(base.u, p, eroded, f, V, config.eps_reg, w);
  }

  for (const auto& e : rep.fd_estimates)
    if (!std::isfinite(e.value))
      throw std::runtime_error("build_report: non-finite fd estimate");
  if (!std::isfinite(rep.volume_value) || !std::isfinite(rep.interface_value))
    throw std::runtime_error("build_report: non-finite derivative value");
  return rep;
}

std::pair<double, double> linear_fit(const std::vector<double>& x,
                                     const std::vector<double>& y) {
  const size_t n = x.size();
  if (n == 0 || y.size() != n)
    throw std::invalid_argument("linear_fit: bad input");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t k = 0; k < n; ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return {sy / n, 0.0};
  const double slope = (n * sxy - sx * sy) / den;
  const double intercept = (sy - slope * sx) / n;
  return {intercept, slope};
}

namespace {
std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}
}  // namespace

void write_report_csv(const ShapeDerivativeReport& rep,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("write_report_csv: cannot open '" + path + "'");
  out << "kind,param,value\n";
  out << "param,h," << num(rep.h) << "\n";
  out << "param,eps_reg," << num(rep.eps_reg) << "\n";
  out << "param,field,\"" << rep.field_descriptor << "\"\n";
  out << "param,base_energy," << num(rep.base_energy) << "\n";
  out << "param,solver_residual," << num(rep.solver_residual) << "\n";
  for (const auto& e : rep.fd_estimates)
    out << "fd," << num(e.t) << "," << num(e.value) << "\n";
  for (size_t k = 0; k < rep.delta_list.size(); ++k) {
    out << "interface_A," << num(rep.delta_list[k]) << ","
        << num(rep.interface_a_values[k]) << "\n";
    out << "interface_omitted," << num(rep.delta_list[k]) << ","
        << num(rep.interface_omitted[k]) << "\n";
  }
  out << "summary,volume," << num(rep.volume_value) << "\n";
  out << "summary,interface," << num(rep.interface_value) << "\n";
  out << "summary,fd_limit," << num(rep.fd_limit) << "\n";
  out << "summary,regional_1," << num(rep.regional_values.first) << "\n";
  out << "summary,regional_2," << num(rep.regional_values.second) << "\n";
  out << "summary,band," << num(rep.band_value) << "\n";
  out << "summary,all_converged," << (rep.all_converged ? 1 : 0) << "\n";
}

std::string report_summary(const ShapeDerivativeReport& rep) {
  std::ostringstream os;
  os.precision(10);
  os << "shape derivative report\n";
  os << "  h = " << rep.h << ", eps_reg = " << rep.eps_reg << "\n";
  os << "  field: " << rep.field_descriptor << "\n";
  os << "  base energy s(0) = " << rep.base_energy
     << " (residual " << rep.solver_residual
     << (rep.residual_warning ? ", WARNING: not converged" : "") << ")\n";
  os << "  volume form      = " << rep.volume_value << "\n";
  os << "  interface form   = " << rep.interface_value << "\n";
  for (size_t k = 0; k < rep.delta_list.size(); ++k)
    os << "    A(delta=" << rep.delta_list[k]
       << ") = " << rep.interface_a_values[k]
       << "  omitted-terms residual = " << rep.interface_omitted[k] << "\n";
  os << "  fd limit         = " << rep.fd_limit << "\n";
  for (const auto& e : rep.fd_estimates)
    os << "    fd(t=" << e.t << ") = " << e.value
       << (e.converged ? "" : "  (NOT CONVERGED)") << "\n";
  os << "  regional (D1, D2) = (" << rep.regional_values.first << ", "
     << rep.regional_values.second << ")\n";
  os << "  band              = " << rep.band_value << "\n";
  if (std::fabs(rep.fd_limit) > 0.0) {
    os << "  |volume - fd|/|fd|      = "
       << std::fabs(rep.volume_value - rep.fd_limit) / std::fabs(rep.fd_limit)
       << "\n";
  }
  if (std::fabs(rep.volume_value) > 0.0) {
    os << "  |interface - volume|/|volume| = "
       << std::fabs(rep.interface_value - rep.volume_value) /
              std::fabs(rep.volume_value)
       << "\n";
  }
  return os.str();
}

}  // namespace vxs
