#include "vxshape/flow.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace vxs {

double RadialBump::value(const Vec2& x) const {
  const double rho = (x - center).norm();
  const double r0 = plateau * radius;
  if (rho <= r0) return 1.0;
  if (rho >= radius) return 0.0;
  const double w = (rho - r0) / (radius - r0);
  return 1.0 - w * w * w * (10.0 + w * (-15.0 + 6.0 * w));
}

Vec2 RadialBump::grad(const Vec2& x) const {
  const Vec2 d = x - center;
  const double rho = d.norm();
  const double r0 = plateau * radius;
  if (rho <= r0 || rho >= radius || rho == 0.0) return {0.0, 0.0};
  const double w = (rho - r0) / (radius - r0);
  const double dsdw = 30.0 * w * w * (1.0 - w) * (1.0 - w);
  const double db_drho = -dsdw / (radius - r0);
  return d * (db_drho / rho);
}

namespace {

double ball_margin(const Vec2& c, double r) {
  return std::min(std::min(c.x - r, 1.0 - c.x - r),
                  std::min(c.y - r, 1.0 - c.y - r));
}

void require_interior_ball(const Vec2& c, double r, const char* what) {
  if (!(r > 0.0))
    throw std::invalid_argument(std::string(what) + ": radius must be > 0");
  if (!(ball_margin(c, r) > 0.0))
    throw std::invalid_argument(
        std::string(what) +
        ": support ball must lie strictly inside the unit square");
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

class ZeroField final : public DeformationField {
 public:
  ZeroField() { zero_ = true; }
  Vec2 value(const Vec2&) const override { return {0.0, 0.0}; }
  Mat2 jacobian(const Vec2&) const override { return Mat2::zero(); }
  double support_margin() const override { return 1.0; }
  std::string describe() const override { return "zero"; }
};

class TranslationField final : public DeformationField {
 public:
  TranslationField(Vec2 c, double r, Vec2 dir, double amp, double plateau)
      : bump_{c, r, plateau}, dir_(dir), amp_(amp) {
    require_interior_ball(c, r, "translation field");
  }
  Vec2 value(const Vec2& x) const override {
    return dir_ * (amp_ * bump_.value(x));
  }
  Mat2 jacobian(const Vec2& x) const override {
    const Vec2 gb = bump_.grad(x) * amp_;
    return {dir_.x * gb.x, dir_.x * gb.y, dir_.y * gb.x, dir_.y * gb.y};
  }
  double support_margin() const override {
    return ball_margin(bump_.center, bump_.radius);
  }
  std::string describe() const override {
    return "translation(center=(" + fmt(bump_.center.x) + "," +
           fmt(bump_.center.y) + "),radius=" + fmt(bump_.radius) + ",dir=(" +
           fmt(dir_.x) + "," + fmt(dir_.y) + "),amplitude=" + fmt(amp_) +
           ",plateau=" + fmt(bump_.plateau) + ")";
  }

 private:
  RadialBump bump_;
  Vec2 dir_;
  double amp_;
};

class RotationField final : public DeformationField {
 public:
  RotationField(Vec2 c, double r, double amp, double plateau)
      : bump_{c, r, plateau}, amp_(amp) {
    require_interior_ball(c, r, "rotation field");
  }
  Vec2 value(const Vec2& x) const override {
    const Vec2 d = x - bump_.center;
    return Vec2{-d.y, d.x} * (amp_ * bump_.value(x));
  }
  Mat2 jacobian(const Vec2& x) const override {
    const Vec2 d = x - bump_.center;
    const double b = bump_.value(x);
    const Vec2 gb = bump_.grad(x);
    const Vec2 perp{-d.y, d.x};
    return Mat2{perp.x * gb.x, perp.x * gb.y + (-1.0) * b,
                perp.y * gb.x + b, perp.y * gb.y} *
           amp_;
  }
  double support_margin() const override {
    return ball_margin(bump_.center, bump_.radius);
  }
  std::string describe() const override {
    return "rotation(center=(" + fmt(bump_.center.x) + "," +
           fmt(bump_.center.y) + "),radius=" + fmt(bump_.radius) +
           ",amplitude=" + fmt(amp_) + ",plateau=" + fmt(bump_.plateau) + ")";
  }

 private:
  RadialBump bump_;
  double amp_;
};

class RadialField final : public DeformationField {
 public:
  RadialField(Vec2 c, double r, double amp, double plateau)
      : bump_{c, r, plateau}, amp_(amp) {
    require_interior_ball(c, r, "radial field");
  }
  Vec2 value(const Vec2& x) const override {
    return (x - bump_.center) * (amp_ * bump_.value(x));
  }
  Mat2 jacobian(const Vec2& x) const override {
    const Vec2 d = x - bump_.center;
    const double b = bump_.value(x);
    const Vec2 gb = bump_.grad(x);
    return Mat2{d.x * gb.x + b, d.x * gb.y, d.y * gb.x, d.y * gb.y + b} * amp_;
  }
  double support_margin() const override {
    return ball_margin(bump_.center, bump_.radius);
  }
  std::string describe() const override {
    return "squeeze(center=(" + fmt(bump_.center.x) + "," +
           fmt(bump_.center.y) + "),radius=" + fmt(bump_.radius) +
           ",amplitude=" + fmt(amp_) + ",plateau=" + fmt(bump_.plateau) + ")";
  }

 private:
  RadialBump bump_;
  double amp_;
};

class CombinationField final : public DeformationField {
 public:
  CombinationField(std::vector<FieldPtr> fields, std::vector<double> coeffs)
      : fields_(std::move(fields)), coeffs_(std::move(coeffs)) {
    if (fields_.size() != coeffs_.size() || fields_.empty())
      throw std::invalid_argument(
          "linear combination: need matching, nonempty fields/coeffs");
    bool z = true;
    for (size_t k = 0; k < fields_.size(); ++k)
      if (coeffs_[k] != 0.0 && !fields_[k]->is_zero()) z = false;
    zero_ = z;
  }
  Vec2 value(const Vec2& x) const override {
    Vec2 v{0.0, 0.0};
    for (size_t k = 0; k < fields_.size(); ++k)
      v += fields_[k]->value(x) * coeffs_[k];
    return v;
  }
  Mat2 jacobian(const Vec2& x) const override {
    Mat2 m = Mat2::zero();
    for (size_t k = 0; k < fields_.size(); ++k)
      m = m + fields_[k]->jacobian(x) * coeffs_[k];
    return m;
  }
  double support_margin() const override {
    double m = 1.0;
    for (const auto& f : fields_) m = std::min(m, f->support_margin());
    return m;
  }
  std::string describe() const override {
    std::string s = "combination(";
    for (size_t k = 0; k < fields_.size(); ++k) {
      if (k) s += " + ";
      s += fmt(coeffs_[k]) + "*" + fields_[k]->describe();
    }
    return s + ")";
  }

 private:
  std::vector<FieldPtr> fields_;
  std::vector<double> coeffs_;
};

class SampledField final : public DeformationField {
 public:
  SampledField(const VectorGridFunction& samples, double margin)
      : grid_(samples.grid()), margin_(margin) {
    vx_ = GridFunction(grid_, BoundaryCondition::natural);
    vy_ = GridFunction(grid_, BoundaryCondition::natural);
    for (int j = 0; j < grid_.n; ++j)
      for (int i = 0; i < grid_.n; ++i) {
        vx_(i, j) = samples.x(i, j);
        vy_(i, j) = samples.y(i, j);
      }
    dxx_ = centered_x(vx_);
    dxy_ = centered_y(vx_);
    dyx_ = centered_x(vy_);
    dyy_ = centered_y(vy_);
  }
  Vec2 value(const Vec2& x) const override {
    return {interpolate(vx_, x), interpolate(vy_, x)};
  }
  Mat2 jacobian(const Vec2& x) const override {
    return {interpolate(dxx_, x), interpolate(dxy_, x), interpolate(dyx_, x),
            interpolate(dyy_, x)};
  }
  double support_margin() const override { return margin_; }
  std::string describe() const override {
    return "sampled(n=" + std::to_string(grid_.n) + ")";
  }

 private:
  GridFunction centered_x(const GridFunction& u) const {
    GridFunction d(grid_, BoundaryCondition::natural);
    const int n = grid_.n;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int il = std::max(i - 1, 0), ir = std::min(i + 1, n - 1);
        d(i, j) = (u(ir, j) - u(il, j)) / ((ir - il) * grid_.h);
      }
    return d;
  }
  GridFunction centered_y(const GridFunction& u) const {
    GridFunction d(grid_, BoundaryCondition::natural);
    const int n = grid_.n;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int jl = std::max(j - 1, 0), jr = std::min(j + 1, n - 1);
        d(i, j) = (u(i, jr) - u(i, jl)) / ((jr - jl) * grid_.h);
      }
    return d;
  }

  Grid grid_;
  double margin_;
  GridFunction vx_, vy_, dxx_, dxy_, dyx_, dyy_;
};

}  // namespace

FieldPtr make_zero_field() { return std::make_shared<ZeroField>(); }

FieldPtr make_translation_field(Vec2 center, double radius, Vec2 dir,
                                double amplitude, double plateau) {
  return std::make_shared<TranslationField>(center, radius, dir, amplitude,
                                            plateau);
}

FieldPtr make_rotation_field(Vec2 center, double radius, double amplitude,
                             double plateau) {
  return std::make_shared<RotationField>(center, radius, amplitude, plateau);
}

FieldPtr make_radial_field(Vec2 center, double radius, double amplitude,
                           double plateau) {
  return std::make_shared<RadialField>(center, radius, amplitude, plateau);
}

FieldPtr make_linear_combination(std::vector<FieldPtr> fields,
                                 std::vector<double> coeffs) {
  return std::make_shared<CombinationField>(std::move(fields),
                                            std::move(coeffs));
}

FieldPtr make_scaled_field(FieldPtr field, double s) {
  return make_linear_combination({std::move(field)}, {s});
}

FieldPtr make_sampled_field(const VectorGridFunction& samples,
                            double support_margin) {
  return std::make_shared<SampledField>(samples, support_margin);
}

const std::vector<std::string>& builtin_field_families() {
  static const std::vector<std::string> families = {
      "translation: V = amplitude*dir*bump(|x-c|; radius, plateau)",
      "rotation:    V = amplitude*perp(x-c)*bump(|x-c|; radius, plateau)",
      "squeeze:     V = amplitude*(x-c)*bump(|x-c|; radius, plateau)"};
  return families;
}

int flow_step_count(double t) {
  return std::max(8, static_cast<int>(std::ceil(std::fabs(t) / 0.01)));
}

Vec2 advect(const DeformationField& V, const Vec2& x, double t) {
  if (t == 0.0) return x;
  const int steps = flow_step_count(t);
  const double dt = t / steps;
  Vec2 p = x;
  for (int s = 0; s < steps; ++s) {
    const Vec2 k1 = V.value(p);
    const Vec2 k2 = V.value(p + k1 * (0.5 * dt));
    const Vec2 k3 = V.value(p + k2 * (0.5 * dt));
    const Vec2 k4 = V.value(p + k3 * dt);
    p += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
  }
  if (!std::isfinite(p.x) || !std::isfinite(p.y))
    throw std::runtime_error("advect: non-finite trajectory");
  return p;
}

FlowJacobian flow_jacobian(const DeformationField& V, const Vec2& x,
                           double t) {
  if (t == 0.0) return {x, Mat2::identity(), 1.0};
  const int steps = flow_step_count(t);
  const double dt = t / steps;
  Vec2 p = x;
  Mat2 M = Mat2::identity();
  for (int s = 0; s < steps; ++s) {
    // combined RK4 on (p, M): p' = V(p), M' = DV(p) M
    const Vec2 pk1 = V.value(p);
    const Mat2 mk1 = V.jacobian(p) * M;

    const Vec2 p2 = p + pk1 * (0.5 * dt);
    const Mat2 M2 = M + mk1 * (0.5 * dt);
    const Vec2 pk2 = V.value(p2);
    const Mat2 mk2 = V.jacobian(p2) * M2;

    const Vec2 p3 = p + pk2 * (0.5 * dt);
    const Mat2 M3 = M + mk2 * (0.5 * dt);
    const Vec2 pk3 = V.value(p3);
    const Mat2 mk3 = V.jacobian(p3) * M3;

    const Vec2 p4 = p + pk3 * dt;
    const Mat2 M4 = M + mk3 * dt;
    const Vec2 pk4 = V.value(p4);
    const Mat2 mk4 = V.jacobian(p4) * M4;

    p += (pk1 + pk2 * 2.0 + pk3 * 2.0 + pk4) * (dt / 6.0);
    M = M + (mk1 + mk2 * 2.0 + mk3 * 2.0 + mk4) * (dt / 6.0);
  }
  const double jac = M.det();
  if (!std::isfinite(jac) || !std::isfinite(p.x) || !std::isfinite(p.y))
    throw std::runtime_error("flow_jacobian: non-finite result");
  if (jac <= 0.0)
    throw std::runtime_error(
        "flow_jacobian: nonpositive Jacobian determinant (flow step too "
        "large or field unresolved)");
  return {p, M, jac};
}

RegionPartition transport_partition(const RegionPartition& partition,
                                    const DeformationField& V, double t) {
  const Grid& g = partition.grid();
  if (t == 0.0 || V.is_zero()) return partition;
  RegionPartition out(g);
  const int n = g.n;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec2 y = advect(V, g.center(i, j), -t);
      const int si = std::clamp(static_cast<int>(std::floor(y.x / g.h)), 0,
                                n - 1);
      const int sj = std::clamp(static_cast<int>(std::floor(y.y / g.h)), 0,
                                n - 1);
      out.label(i, j) = partition.label(si, sj);
    }
  return out;
}

GridFunction pullback(const GridFunction& u, const DeformationField& V,
                      double t) {
  if (t == 0.0 || V.is_zero()) return u;
  const Grid& g = u.grid();
  GridFunction out(g, u.bc());
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i)
      out(i, j) = interpolate(u, advect(V, g.center(i, j), -t));
  return out;
}

}  // namespace vxs
