#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "vxshape/grid.hpp"
#include "vxshape/pgm.hpp"

using namespace vxs;

namespace {
constexpr double kPi = 3.14159265358979323846;

GridFunction random_field(const Grid& g, BoundaryCondition bc, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  GridFunction u(g, bc);
  for (auto& v : u.values()) v = dist(rng);
  return u;
}
}  // namespace

TEST_CASE("gradient of a constant vanishes") {
  Grid g(16);
  GridFunction u(g, BoundaryCondition::natural, 3.0);
  const VectorGridFunction w = gradient(u);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      CHECK(w.x(i, j) == 0.0);
      CHECK(w.y(i, j) == 0.0);
    }
}

TEST_CASE("gradient of a linear field is exact under natural bc") {
  Grid g(32);
  GridFunction u = GridFunction::from_function(
      g, BoundaryCondition::natural, [](Vec2 p) { return p.x; });
  const VectorGridFunction w = gradient(u);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      CHECK(w.x(i, j) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(w.y(i, j) == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("gradient approximates the analytic derivative of sin(pi x)") {
  Grid g(64);
  GridFunction u = GridFunction::from_function(
      g, BoundaryCondition::natural,
      [](Vec2 p) { return std::sin(kPi * p.x); });
  const VectorGridFunction w = gradient(u);
  double max_err = 0.0;
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const double exact = kPi * std::cos(kPi * g.center(i, j).x);
      max_err = std::max(max_err, std::fabs(w.x(i, j) - exact));
    }
  CHECK(max_err <= kPi * kPi * g.h / 2.0 * 1.10);
}

TEST_CASE("divergence of a constant field vanishes in the interior") {
  Grid g(16);
  VectorGridFunction w(g);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      w.x(i, j) = 0.7;
      w.y(i, j) = -1.3;
    }
  const GridFunction d = divergence(w);
  for (int j = 1; j < g.n; ++j)
    for (int i = 1; i < g.n; ++i)
      CHECK(d(i, j) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("divergence of (x, y) is 2 in the interior") {
  Grid g(32);
  VectorGridFunction w(g);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const Vec2 c = g.center(i, j);
      w.x(i, j) = c.x;
      w.y(i, j) = c.y;
    }
  const GridFunction d = divergence(w);
  for (int j = 1; j < g.n; ++j)
    for (int i = 1; i < g.n; ++i)
      CHECK(d(i, j) == doctest::Approx(2.0).epsilon(1e-11));
}

TEST_CASE("gradient/divergence adjointness under dirichlet_zero") {
  Grid g(24);
  for (unsigned seed : {1u, 2u, 3u}) {
    GridFunction u = random_field(g, BoundaryCondition::dirichlet_zero, seed);
    VectorGridFunction w(g);
    std::mt19937 rng(seed + 100);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int k = 0; k < g.size(); ++k) {
      w.xs()[k] = dist(rng);
      w.ys()[k] = dist(rng);
    }
    const VectorGridFunction gu = gradient(u);
    const GridFunction dw = divergence(w);
    double ip1 = 0.0, ip2 = 0.0, scale = 0.0;
    for (int k = 0; k < g.size(); ++k) {
      ip1 += gu.xs()[k] * w.xs()[k] + gu.ys()[k] * w.ys()[k];
      ip2 += u[k] * dw[k];
      scale += std::fabs(gu.xs()[k] * w.xs()[k]) + std::fabs(u[k] * dw[k]);
    }
    CHECK(std::fabs(ip1 + ip2) <= 1e-10 * (1.0 + scale));
  }
}

TEST_CASE("gradient_adjoint is the exact transpose for both bc tags") {
  Grid g(16);
  for (auto bc :
       {BoundaryCondition::dirichlet_zero, BoundaryCondition::natural}) {
    GridFunction u = random_field(g, bc, 7);
    VectorGridFunction w(g);
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int k = 0; k < g.size(); ++k) {
      w.xs()[k] = dist(rng);
      w.ys()[k] = dist(rng);
    }
    const VectorGridFunction gu = gradient(u);
    const GridFunction gtw = gradient_adjoint(w, bc);
    double ip1 = 0.0, ip2 = 0.0;
    for (int k = 0; k < g.size(); ++k) {
      ip1 += gu.xs()[k] * w.xs()[k] + gu.ys()[k] * w.ys()[k];
      ip2 += u[k] * gtw[k];
    }
    CHECK(ip1 == doctest::Approx(ip2).epsilon(1e-12));
  }
}

TEST_CASE("integrate: constants and the sine product") {
  Grid g(64);
  GridFunction one(g, BoundaryCondition::natural, 1.0);
  CHECK(integrate(one) == doctest::Approx(1.0).epsilon(1e-14));
  GridFunction c(g, BoundaryCondition::natural, -2.5);
  CHECK(integrate(c) == doctest::Approx(-2.5).epsilon(1e-14));

  GridFunction s = GridFunction::from_function(
      g, BoundaryCondition::natural,
      [](Vec2 p) { return std::sin(kPi * p.x) * std::sin(kPi * p.y); });
  // analytic integral: 4/pi^2
  CHECK(integrate(s) == doctest::Approx(0.4052847345693511).epsilon(1e-3));
}

TEST_CASE("quadrature linearity") {
  Grid g(20);
  GridFunction u = random_field(g, BoundaryCondition::natural, 5);
  GridFunction v = random_field(g, BoundaryCondition::natural, 6);
  const double a = 1.7, b = -0.3;
  GridFunction lin(g, BoundaryCondition::natural);
  for (int k = 0; k < g.size(); ++k) lin[k] = a * u[k] + b * v[k];
  CHECK(integrate(lin) ==
        doctest::Approx(a * integrate(u) + b * integrate(v)).epsilon(1e-12));
}

TEST_CASE("bilinear interpolation reproduces constants and linears") {
  Grid g(16);
  GridFunction c(g, BoundaryCondition::natural, 4.2);
  CHECK(interpolate(c, {0.37, 0.91}) == doctest::Approx(4.2).epsilon(1e-14));
  GridFunction lin = GridFunction::from_function(
      g, BoundaryCondition::natural,
      [](Vec2 p) { return 2.0 * p.x - 0.5 * p.y; });
  // interior points away from the replicated edges
  CHECK(interpolate(lin, {0.4, 0.6}) ==
        doctest::Approx(2.0 * 0.4 - 0.5 * 0.6).epsilon(1e-12));
}

TEST_CASE("pgm round trip and trivial images") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "vxshape_pgm_test";
  fs::create_directories(dir);

  Grid g(16);
  GridFunction white(g, BoundaryCondition::natural, 1.0);
  save_pgm(white, (dir / "white.pgm").string());
  const GridFunction w = load_pgm((dir / "white.pgm").string());
  for (double v : w.values()) CHECK(v == doctest::Approx(1.0));

  GridFunction black(g, BoundaryCondition::natural, 0.0);
  save_pgm(black, (dir / "black.pgm").string());
  const GridFunction b = load_pgm((dir / "black.pgm").string());
  for (double v : b.values()) CHECK(v == doctest::Approx(0.0));

  GridFunction r = random_field(g, BoundaryCondition::natural, 11);
  for (auto& v : r.values()) v = 0.5 * (v + 1.0);  // into [0,1]
  save_pgm(r, (dir / "rand.pgm").string());
  const GridFunction rr = load_pgm((dir / "rand.pgm").string());
  double max_diff = 0.0;
  for (int k = 0; k < g.size(); ++k)
    max_diff = std::max(max_diff, std::fabs(r[k] - rr[k]));
  CHECK(max_diff <= 1.0 / 255.0 + 1e-12);
}

TEST_CASE("pgm ascii (P2) and orientation") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "vxshape_pgm_test";
  fs::create_directories(dir);
  // 8x8 P2, top row white, rest black
  std::ofstream out(dir / "p2.pgm");
  out << "P2\n# comment\n8 8\n255\n";
  for (int row = 0; row < 8; ++row)
    for (int col = 0; col < 8; ++col)
      out << (row == 0 ? 255 : 0) << (col == 7 ? "\n" : " ");
  out.close();
  const GridFunction u = load_pgm((dir / "p2.pgm").string());
  // top image row is the y = 1 side
  CHECK(u(3, 7) == doctest::Approx(1.0));
  CHECK(u(3, 0) == doctest::Approx(0.0));
}

TEST_CASE("pgm errors are reported distinctly") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "vxshape_pgm_test";
  fs::create_directories(dir);

  CHECK_THROWS_AS(load_pgm((dir / "missing_file.pgm").string()), PgmIoError);

  std::ofstream bad(dir / "bad.pgm");
  bad << "P7\n8 8\n255\n";
  bad.close();
  CHECK_THROWS_AS(load_pgm((dir / "bad.pgm").string()), PgmFormatError);

  std::ofstream rect(dir / "rect.pgm");
  rect << "P2\n8 9\n255\n";
  for (int k = 0; k < 72; ++k) rect << "0 ";
  rect.close();
  CHECK_THROWS_AS(load_pgm((dir / "rect.pgm").string()), PgmShapeError);

  std::ofstream trunc(dir / "trunc.pgm", std::ios::binary);
  trunc << "P5\n8 8\n255\n";
  trunc << "only a few bytes";
  trunc.close();
  CHECK_THROWS_AS(load_pgm((dir / "trunc.pgm").string()), PgmFormatError);
}
