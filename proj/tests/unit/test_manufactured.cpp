#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "test_util.hpp"
#include "thermoporo/manufactured.hpp"

using namespace thermoporo;
using thermoporo::testing::unit_mesh;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(Manufactured, ExactValues) {
  const ManufacturedCase mc(preset("PA1"));
  const Point c{0.5, 0.5};
  EXPECT_NEAR(mc.u(0.0, c).x, 1.0, 1e-15);
  EXPECT_NEAR(mc.u(1.0, c).y, std::exp(-1.0), 1e-15);
  EXPECT_NEAR(mc.p(0.3, c), 0.3, 1e-15);
  EXPECT_NEAR(mc.T(2.0, c), std::exp(-2.0), 1e-15);
  const Point q{0.25, 0.5};
  EXPECT_NEAR(mc.p(1.0, q), std::sin(kPi / 4.0), 1e-15);
  // d/dx sin(pi x) sin(pi y) at (1/4, 1/2) = pi cos(pi/4)
  EXPECT_NEAR(mc.grad_p(1.0, q).x, kPi * std::cos(kPi / 4.0), 1e-14);
  EXPECT_NEAR(mc.grad_p(1.0, q).y, 0.0, 1e-14);
  EXPECT_NEAR(mc.grad_u(0.0, q).yx, kPi * std::cos(kPi / 4.0), 1e-14);
}

TEST(Manufactured, VanishesOnBoundary) {
  const ManufacturedCase mc(preset("PA3"));
  for (double s : {0.0, 0.13, 0.5, 0.77, 1.0}) {
    for (Point x : {Point{0.0, s}, Point{1.0, s}, Point{s, 0.0}, Point{s, 1.0}}) {
      const ExactValues v = mc.exact(0.7, x);
      EXPECT_NEAR(norm(v.u), 0.0, 1e-15);
      EXPECT_NEAR(v.p, 0.0, 1e-15);
      EXPECT_NEAR(v.T, 0.0, 1e-15);
    }
  }
}

TEST(Manufactured, SourcesSatisfyEquations) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(0.05, 0.95);
  for (const char* name : {"PA1", "PA2", "PA5"}) {
    const ManufacturedCase mc(preset(name));
    for (int i = 0; i < 100; ++i) {
      const Point x{d(rng), d(rng)};
      const double t = 0.1 + d(rng);
      const PdeResidual r = finite_difference_residual(mc, t, x);
      EXPECT_LE(std::abs(r.momentum.x), 1e-5) << name;
      EXPECT_LE(std::abs(r.momentum.y), 1e-5) << name;
      EXPECT_LE(std::abs(r.mass), 1e-5) << name;
      EXPECT_LE(std::abs(r.energy), 1e-5) << name;
    }
  }
}

TEST(Manufactured, NoConvectionAtInitialTime) {
  // p = 0 at t = 0, so the nonlinear heat transport vanishes.
  const ManufacturedCase mc(preset("PA1"));
  for (Point x : {Point{0.2, 0.3}, Point{0.5, 0.5}, Point{0.9, 0.1}}) {
    EXPECT_EQ(norm(mc.grad_p(0.0, x)), 0.0);
  }
}

TEST(Manufactured, MassSourceAtCentre) {
  // Independent oracle: d/dt (c0 p - b0 T + alpha div u) - div(K grad p)
  // with every derivative by central differences.
  const MaterialParams p = preset("PA4");
  const ManufacturedCase mc(p);
  const Point c{0.5, 0.5};
  const double t = 0.4, h = 1e-4;
  auto content = [&](double s) {
    const Mat2 g = mc.grad_u(s, c);
    return p.c0 * mc.p(s, c) - p.b0 * mc.T(s, c) + p.alpha * (g.xx + g.yy);
  };
  const double dt = (content(t + h) - content(t - h)) / (2.0 * h);
  auto pv = [&](double x, double y) { return mc.p(t, {x, y}); };
  const double lap = (pv(0.5 + h, 0.5) + pv(0.5 - h, 0.5) + pv(0.5, 0.5 + h) + pv(0.5, 0.5 - h) - 4.0 * pv(0.5, 0.5)) / (h * h);
  EXPECT_NEAR(mc.g(t, c), dt - lap, 1e-5);
}

TEST(Manufactured, PressureNormAtTimeOne) {
  const ManufacturedCase mc(preset("PA1"));
  auto s = make_space(unit_mesh(8), 1, 1);
  // l2_error of the zero field is the L2 norm of the exact function.
  EXPECT_NEAR(l2_error(FieldVec(s), [&](Point x) { return mc.p(1.0, x); }), 0.5, 1e-12);
}

TEST(Norms, ErrorOfRepresentableField) {
  auto s = make_space(unit_mesh(4), 2, 1);
  auto f = [](Point x) { return x.x * x.x - 3.0 * x.x * x.y + 1.0; };
  EXPECT_LE(l2_error(interpolate(s, ScalarFn(f)), f), 1e-10);

  auto sv = make_space(unit_mesh(4), 1, 2);
  const VectorField lin{[](Point x) { return Vec2{x.x + x.y, 2.0 - x.y}; },
                        [](Point) { return Mat2{1.0, 1.0, 0.0, -1.0}; }};
  const FieldVec iu = interpolate(sv, lin.value);
  EXPECT_LE(l2_error(iu, lin.value), 1e-10);
  EXPECT_LE(energy_error(iu, lin), 1e-10);
}

TEST(Norms, EnergyNormOfConstant) {
  // Only the boundary jump term survives: sum over 4n edges of n * |c|^2 / n.
  const Vec2 c{0.6, -0.8};
  for (int n : {1, 3, 6}) {
    auto s = make_space(unit_mesh(n), 1, 2);
    const FieldVec v = interpolate(s, VectorFn([c](Point) { return c; }));
    const double e = energy_norm(v);
    EXPECT_NEAR(e * e, dot(c, c) * 4.0 * n, 1e-12 * n);
  }
}

TEST(Norms, L2NormOfConstant) {
  auto s = make_space(unit_mesh(3), 1, 1);
  EXPECT_NEAR(l2_norm(interpolate(s, ScalarFn([](Point) { return -2.0; }))), 2.0, 1e-13);
}

TEST(Norms, ErrorNormsBundle) {
  const ManufacturedCase mc(preset("PA1"));
  auto mesh = unit_mesh(4);
  auto su = make_space(mesh, 1, 2);
  auto sq = make_space(mesh, 1, 1);
  const ErrorNorms e = error_norms(FieldVec(su), FieldVec(sq), FieldVec(sq), mc, 1.0);
  EXPECT_NEAR(e.p_l2, 0.5, 1e-12);
  EXPECT_NEAR(e.T_l2, 0.5 * std::exp(-1.0), 1e-12);
  EXPECT_NEAR(e.u_l2, std::sqrt(2.0) * 0.5 * std::exp(-1.0), 1e-12);
  EXPECT_NEAR(e.u_energy, energy_error(FieldVec(su), mc.displacement(1.0)), 1e-15);
}
