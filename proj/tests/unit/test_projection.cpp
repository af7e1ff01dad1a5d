#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "thermoporo/manufactured.hpp"
#include "thermoporo/projection.hpp"

using namespace thermoporo;
using thermoporo::testing::random_field;
using thermoporo::testing::unit_mesh;

namespace {

double MaxDiff(const FieldVec& a, const FieldVec& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.coeffs().size(); ++i) d = std::max(d, std::abs(a.coeffs()[i] - b.coeffs()[i]));
  return d;
}

// Piecewise polynomial inputs are discontinuous, so the reproduction checks
// use globally polynomial fields, which the projections must return exactly.
const VectorField kLinearU{[](Point x) { return Vec2{1.0 + x.x - 2.0 * x.y, 0.5 * x.x + x.y}; },
                           [](Point) { return Mat2{1.0, -2.0, 0.5, 1.0}; }};
const ScalarField kQuadratic{[](Point x) { return x.x * x.y - x.y * x.y + 0.3; },
                             [](Point x) { return Vec2{x.y, x.x - 2.0 * x.y}; }};

}  // namespace

TEST(Projection, ReproducesSpaceFunctionsSmallPenalty) {
  MaterialParams p = preset("PA1");
  p.sigma1 = p.sigma2 = 1e2;
  auto mesh = unit_mesh(4);
  auto su = make_space(mesh, 1, 2);
  auto sq = make_space(mesh, 2, 1);
  LinearSolveReport report;
  const FieldVec ru = project_displacement(kLinearU, su, p, &report);
  EXPECT_LE(l2_error(ru, kLinearU.value), 1e-12);
  EXPECT_LE(l2_error(project_pressure(kQuadratic, sq, p), kQuadratic.value), 1e-12);
  const auto grad_p = [](Point x) { return Vec2{0.2 * x.y, -0.1}; };
  EXPECT_LE(l2_error(project_temperature(kQuadratic, grad_p, sq, p), kQuadratic.value), 1e-12);
}

TEST(Projection, ReproductionAtProductionPenaltyLimitedByRounding) {
  // With sigma = 1e6 the assembled penalty entries carry relative rounding
  // of eps, which shows up as an O(eps * sigma) error in the reproduction.
  const MaterialParams p = preset("PA1");
  auto mesh = unit_mesh(4);
  auto su = make_space(mesh, 1, 2);
  auto sq = make_space(mesh, 2, 1);
  EXPECT_LE(l2_error(project_displacement(kLinearU, su, p), kLinearU.value), 1e-9);
  EXPECT_LE(l2_error(project_pressure(kQuadratic, sq, p), kQuadratic.value), 1e-9);
}

TEST(Projection, ZeroGivesZero) {
  const MaterialParams p = preset("PA2");
  auto mesh = unit_mesh(3);
  auto su = make_space(mesh, 1, 2);
  auto sq = make_space(mesh, 1, 1);
  const VectorField zu{[](Point) { return Vec2{}; }, [](Point) { return Mat2{}; }};
  const ScalarField zs{[](Point) { return 0.0; }, [](Point) { return Vec2{}; }};
  const FieldVec none(su);
  EXPECT_EQ(MaxDiff(project_displacement(zu, su, p), none), 0.0);
  EXPECT_EQ(MaxDiff(project_pressure(zs, sq, p), FieldVec(sq)), 0.0);
  EXPECT_EQ(MaxDiff(project_temperature(zs, [](Point) { return Vec2{}; }, sq, p), FieldVec(sq)), 0.0);
}

TEST(Projection, TemperatureWithoutTransportIsDiffusionProjection) {
  // p = 0 at t = 0, so the convective part of the temperature projection drops.
  const MaterialParams p = preset("PA1");
  const ManufacturedCase mc(p);
  auto sq = make_space(unit_mesh(4), 1, 1);
  const FieldVec rt = project_temperature(mc.temperature(0.0), [&](Point x) { return mc.grad_p(0.0, x); }, sq, p);
  const SparseMatrix c = assemble_diffusion(*sq, p.Theta, p.sigma2);
  const std::vector<double> rhs = apply_diffusion(*sq, p.Theta, p.sigma2, mc.temperature(0.0));
  LinearSolver solver(SolverOptions{SolverKind::kCholesky});
  solver.factorize(c);
  const FieldVec direct(sq, solver.solve(rhs));
  EXPECT_LE(MaxDiff(rt, direct), 1e-10);
}

TEST(Projection, ConvergenceRates) {
  const MaterialParams p = preset("PA1");
  const ManufacturedCase mc(p);
  const double t = 0.5;
  std::vector<double> eu, ep, et;
  for (int n : {4, 8, 16}) {
    auto mesh = unit_mesh(n);
    auto su = make_space(mesh, 1, 2);
    auto sq = make_space(mesh, 1, 1);
    const FieldVec ru = project_displacement(mc.displacement(t), su, p);
    const FieldVec rp = project_pressure(mc.pressure(t), sq, p);
    const FieldVec rt = project_temperature(mc.temperature(t), [&](Point x) { return mc.grad_p(t, x); }, sq, p);
    eu.push_back(energy_error(ru, mc.displacement(t)));
    ep.push_back(l2_error(rp, [&](Point x) { return mc.p(t, x); }));
    et.push_back(l2_error(rt, [&](Point x) { return mc.T(t, x); }));
  }
  for (std::size_t i = 1; i < eu.size(); ++i) {
    EXPECT_NEAR(std::log2(eu[i - 1] / eu[i]), 1.0, 0.1);
    EXPECT_NEAR(std::log2(ep[i - 1] / ep[i]), 2.0, 0.15);
    EXPECT_NEAR(std::log2(et[i - 1] / et[i]), 2.0, 0.15);
  }
}

TEST(Projection, SolveReportFilled) {
  const MaterialParams p = preset("PA1");
  LinearSolveReport report;
  const ManufacturedCase mc(p);
  project_pressure(mc.pressure(1.0), make_space(unit_mesh(4), 1, 1), p, &report);
  EXPECT_TRUE(report.converged(1e-10));
  EXPECT_EQ(report.dim, 96u);  // 32 elements, 3 DOFs each
}
