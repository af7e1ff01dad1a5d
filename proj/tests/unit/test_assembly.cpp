#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "test_util.hpp"
#include "thermoporo/assembly.hpp"
#include "thermoporo/quadrature.hpp"

using namespace thermoporo;
using thermoporo::testing::bilinear;
using thermoporo::testing::dense;
using thermoporo::testing::random_field;
using thermoporo::testing::unit_mesh;

namespace {

constexpr int kOracleDegree = 9;  // above the assembly rules on purpose

// Entries scale with the penalty (~1e6 to 1e7), so symmetry is judged in
// units of the largest entry: a few roundings at most.
bool NearlySymmetric(const SparseMatrix& m) {
  return m.max_abs_asymmetry() <= 4.0 * std::numeric_limits<double>::epsilon() * m.max_abs();
}

Mat2 Grad(const PointValues& pv, std::size_t q) {
  const Vec2 g0 = pv.grad(0, q);
  const Vec2 g1 = pv.grad(1, q);
  return {g0.x, g0.y, g1.x, g1.y};
}

Mat2 Stress(const Mat2& g, const MaterialParams& p) {
  const double div = g.xx + g.yy;
  const double off = p.mu * (g.xy + g.yx);
  return {2.0 * p.mu * g.xx + p.lambda * div, off, off, 2.0 * p.mu * g.yy + p.lambda * div};
}

Mat2 Strain(const Mat2& g) {
  const double off = 0.5 * (g.xy + g.yx);
  return {g.xx, off, off, g.yy};
}

Vec2 Value(const PointValues& pv, std::size_t q) { return {pv.at(0, q), pv.at(1, q)}; }

// Term-by-term evaluation of a(v, w) from field values, traces and
// gradients; no assembled matrices involved.
double ElasticityOracle(const FieldVec& v, const FieldVec& w, const MaterialParams& p,
                        bool interior_faces = true) {
  const DGSpace& s = v.space();
  const TriangleRule tr = triangle_quadrature(kOracleDegree);
  const EdgeRule er = edge_quadrature(kOracleDegree);
  double sum = 0.0;
  for (std::size_t e = 0; e < s.num_elements(); ++e) {
    const PointValues a = eval_on_element(v, e, tr.points);
    const PointValues b = eval_on_element(w, e, tr.points);
    const double jac = std::abs(s.element_map(e).det);
    for (std::size_t q = 0; q < tr.size(); ++q) {
      sum += tr.weights[q] * jac * contract(Stress(Grad(a, q), p), Strain(Grad(b, q)));
    }
  }
  for (std::size_t e = 0; e < s.mesh().num_edges(); ++e) {
    const Edge& edge = s.mesh().edge(e);
    if (!interior_faces && !edge.is_boundary()) continue;
    const EdgePoints pts = edge_points(s.mesh(), e, er);
    const TraceValues tv = eval_traces(v, e, er.points);
    const TraceValues tw = eval_traces(w, e, er.points);
    for (std::size_t q = 0; q < er.size(); ++q) {
      const Vec2 sv = Stress(Grad(tv.average, q), p) * edge.normal;
      const Vec2 sw = Stress(Grad(tw.average, q), p) * edge.normal;
      const Vec2 jv = Value(tv.jump, q);
      const Vec2 jw = Value(tw.jump, q);
      sum += pts.weights[q] *
             (-dot(sv, jw) - dot(sw, jv) + p.sigma1 / edge.length * dot(jv, jw));
    }
  }
  return sum;
}

double DiffusionOracle(const FieldVec& u, const FieldVec& w, const Mat2& phi, double sigma) {
  const DGSpace& s = u.space();
  const TriangleRule tr = triangle_quadrature(kOracleDegree);
  const EdgeRule er = edge_quadrature(kOracleDegree);
  double sum = 0.0;
  for (std::size_t e = 0; e < s.num_elements(); ++e) {
    const PointValues a = eval_on_element(u, e, tr.points);
    const PointValues b = eval_on_element(w, e, tr.points);
    const double jac = std::abs(s.element_map(e).det);
    for (std::size_t q = 0; q < tr.size(); ++q) sum += tr.weights[q] * jac * dot(phi * a.grad(0, q), b.grad(0, q));
  }
  for (std::size_t e = 0; e < s.mesh().num_edges(); ++e) {
    const Edge& edge = s.mesh().edge(e);
    const EdgePoints pts = edge_points(s.mesh(), e, er);
    const TraceValues ta = eval_traces(u, e, er.points);
    const TraceValues tb = eval_traces(w, e, er.points);
    for (std::size_t q = 0; q < er.size(); ++q) {
      const double fa = dot(phi * ta.average.grad(0, q), edge.normal);
      const double fb = dot(phi * tb.average.grad(0, q), edge.normal);
      const double ja = ta.jump.at(0, q);
      const double jb = tb.jump.at(0, q);
      sum += pts.weights[q] * (-fa * jb - fb * ja + sigma / edge.length * ja * jb);
    }
  }
  return sum;
}

struct CouplingOracle {
  double gradient_form = 0.0;
  double divergence_form = 0.0;
  double boundary_flux = 0.0;  // int_{dOmega} q v.n
};

CouplingOracle EvaluateCoupling(const FieldVec& v, const FieldVec& q) {
  const DGSpace& s = v.space();
  const TriangleRule tr = triangle_quadrature(kOracleDegree);
  const EdgeRule er = edge_quadrature(kOracleDegree);
  CouplingOracle out;
  for (std::size_t e = 0; e < s.num_elements(); ++e) {
    const PointValues a = eval_on_element(v, e, tr.points);
    const PointValues b = eval_on_element(q, e, tr.points);
    const double jac = std::abs(s.element_map(e).det);
    for (std::size_t k = 0; k < tr.size(); ++k) {
      const double w = tr.weights[k] * jac;
      out.gradient_form -= w * dot(b.grad(0, k), Value(a, k));
      out.divergence_form += w * b.at(0, k) * (a.grad(0, k).x + a.grad(1, k).y);
    }
  }
  for (std::size_t e = 0; e < s.mesh().num_edges(); ++e) {
    const Edge& edge = s.mesh().edge(e);
    const EdgePoints pts = edge_points(s.mesh(), e, er);
    const TraceValues tv = eval_traces(v, e, er.points);
    const TraceValues tq = eval_traces(q, e, er.points);
    for (std::size_t k = 0; k < er.size(); ++k) {
      if (edge.is_boundary()) {
        out.boundary_flux += pts.weights[k] * tq.average.at(0, k) * dot(Value(tv.average, k), edge.normal);
        continue;
      }
      out.gradient_form += pts.weights[k] * dot(Value(tv.average, k), edge.normal) * tq.jump.at(0, k);
      out.divergence_form -= pts.weights[k] * tq.average.at(0, k) * dot(Value(tv.jump, k), edge.normal);
    }
  }
  return out;
}

double BoundaryPenaltySum(const FieldVec& v, double sigma) {
  const DGSpace& s = v.space();
  const EdgeRule er = edge_quadrature(kOracleDegree);
  double sum = 0.0;
  for (std::size_t e = 0; e < s.mesh().num_edges(); ++e) {
    const Edge& edge = s.mesh().edge(e);
    if (!edge.is_boundary()) continue;
    const EdgePoints pts = edge_points(s.mesh(), e, er);
    const TraceValues tv = eval_traces(v, e, er.points);
    for (std::size_t q = 0; q < er.size(); ++q) {
      double j2 = 0.0;
      for (int c = 0; c < s.components(); ++c) j2 += tv.jump.at(c, q) * tv.jump.at(c, q);
      sum += pts.weights[q] * sigma / edge.length * j2;
    }
  }
  return sum;
}

FieldVec Constant(std::shared_ptr<const DGSpace> s, double value) {
  FieldVec f(s);
  for (double& c : f.coeffs()) c = value;
  return f;
}

}  // namespace

// --- elasticity -------------------------------------------------------------

TEST(Elasticity, ConstantVectorOnlyBoundaryPenalty) {
  const MaterialParams p = preset("PA1");
  for (int n : {1, 2, 4}) {
    auto s = make_space(unit_mesh(n), 1, 2);
    const SparseMatrix a = assemble_elasticity(*s, p);
    const Vec2 c{0.3, -1.2};
    const FieldVec v = interpolate(s, VectorFn([c](Point) { return c; }));
    const double expect = 4.0 * n * p.sigma1 * dot(c, c);
    EXPECT_NEAR(bilinear(a, v, v), expect, 1e-12 * expect) << "n=" << n;
  }
}

TEST(Elasticity, RigidRotationOnlyBoundaryPenalty) {
  const MaterialParams p = preset("PA1");
  auto s = make_space(unit_mesh(3), 1, 2);
  const SparseMatrix a = assemble_elasticity(*s, p);
  const FieldVec v = interpolate(s, VectorFn([](Point x) { return Vec2{-x.y, x.x}; }));
  const double value = bilinear(a, v, v);
  EXPECT_GT(value, 0.0);
  const double boundary = BoundaryPenaltySum(v, p.sigma1);
  EXPECT_NEAR(value, boundary, 1e-10 * boundary);
}

TEST(Elasticity, MatchesTermByTermOracle) {
  std::mt19937_64 rng(21);
  MaterialParams p = preset("PA1");
  p.lambda = 2.0;
  p.mu = 0.7;
  for (double sigma : {1.0, 1e6}) {
    p.sigma1 = sigma;
    for (int k : {1, 2}) {
      auto s = make_space(unit_mesh(2), k, 2);
      const SparseMatrix a = assemble_elasticity(*s, p);
      for (int trial = 0; trial < 5; ++trial) {
        const FieldVec v = random_field(s, rng);
        const FieldVec w = random_field(s, rng);
        const double oracle = ElasticityOracle(v, w, p);
        const double tol = 1e-12 * std::max(1.0, std::abs(oracle));
        EXPECT_NEAR(bilinear(a, w, v), oracle, tol) << "sigma=" << sigma << " k=" << k;
        EXPECT_NEAR(bilinear(a, w, v), bilinear(a, v, w), tol);
      }
    }
  }
}

TEST(Elasticity, SymmetricAndCoercive) {
  std::mt19937_64 rng(1);
  const MaterialParams p = preset("PA1");
  auto s = make_space(unit_mesh(2), 1, 2);
  const SparseMatrix a = assemble_elasticity(*s, p);
  EXPECT_TRUE(NearlySymmetric(a));
  for (int i = 0; i < 100; ++i) {
    const FieldVec v = random_field(s, rng);
    EXPECT_GT(bilinear(a, v, v), 0.0);
  }
}

TEST(Elasticity, ZeroJumpReduction) {
  // Continuous arguments: interior faces contribute nothing.
  const MaterialParams p = preset("PA1");
  auto s = make_space(unit_mesh(3), 2, 2);
  const SparseMatrix a = assemble_elasticity(*s, p);
  const FieldVec v = interpolate(s, VectorFn([](Point x) { return Vec2{x.x * x.y, 1.0 - x.y * x.y}; }));
  const FieldVec w = interpolate(s, VectorFn([](Point x) { return Vec2{x.x - 0.5, x.x * x.x}; }));
  const double cg = ElasticityOracle(v, w, p, /*interior_faces=*/false);
  EXPECT_NEAR(bilinear(a, w, v), cg, 1e-10 * std::abs(cg));
}

TEST(Elasticity, ApplyMatchesMatrixOnSpaceFunctions) {
  const MaterialParams p = preset("PA1");
  auto s = make_space(unit_mesh(4), 2, 2);
  const SparseMatrix a = assemble_elasticity(*s, p);
  const VectorField u{[](Point x) { return Vec2{x.x * x.x - x.y, 2.0 * x.x * x.y}; },
                      [](Point x) { return Mat2{2.0 * x.x, -1.0, 2.0 * x.y, 2.0 * x.x}; }};
  const std::vector<double> applied = apply_elasticity(*s, p, u);
  const std::vector<double> product = a.multiply(interpolate(s, u.value).coeffs());
  double scale = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < applied.size(); ++i) {
    scale = std::max(scale, std::abs(applied[i]));
    diff = std::max(diff, std::abs(applied[i] - product[i]));
  }
  EXPECT_LE(diff, 1e-10 * scale);
}

TEST(Elasticity, RejectsBadInput) {
  MaterialParams p = preset("PA1");
  EXPECT_THROW(assemble_elasticity(*make_space(unit_mesh(1), 1, 1), p), std::invalid_argument);
  p.sigma1 = 0.0;
  EXPECT_THROW(assemble_elasticity(*make_space(unit_mesh(1), 1, 2), p), std::invalid_argument);
}

// --- coupling ---------------------------------------------------------------

TEST(Coupling, ZeroVector) {
  std::mt19937_64 rng(2);
  auto mesh = unit_mesh(2);
  auto su = make_space(mesh, 1, 2);
  auto sq = make_space(mesh, 1, 1);
  for (CouplingForm form : {CouplingForm::kGradient, CouplingForm::kDivergence}) {
    const SparseMatrix b = assemble_coupling(*su, *sq, form);
    EXPECT_EQ(bilinear(b, random_field(sq, rng), FieldVec(su)), 0.0);
  }
}

TEST(Coupling, LinearFieldAgainstConstant) {
  auto mesh = unit_mesh(3);
  auto su = make_space(mesh, 1, 2);
  auto sq = make_space(mesh, 1, 1);
  const FieldVec v = interpolate(su, VectorFn([](Point x) { return x; }));
  const FieldVec one = Constant(sq, 1.0);
  // The divergence expression is int div v = 2. The gradient expression
  // drops the boundary flux int q v.n = 2 since both face sums are interior.
  const double b_div = bilinear(assemble_coupling(*su, *sq, CouplingForm::kDivergence), one, v);
  const double b_grad = bilinear(assemble_coupling(*su, *sq, CouplingForm::kGradient), one, v);
  EXPECT_NEAR(b_div, 2.0, 1e-12);
  EXPECT_NEAR(b_grad, 0.0, 1e-12);
  EXPECT_NEAR(EvaluateCoupling(v, one).boundary_flux, 2.0, 1e-12);
}

TEST(Coupling, ExpressionsMatchOracleAndDifferByBoundaryFlux) {
  std::mt19937_64 rng(50);
  auto mesh = unit_mesh(2);
  for (int k : {1, 2}) {
    auto su = make_space(mesh, k, 2);
    auto sq = make_space(mesh, k, 1);
    const SparseMatrix bg = assemble_coupling(*su, *sq, CouplingForm::kGradient);
    const SparseMatrix bd = assemble_coupling(*su, *sq, CouplingForm::kDivergence);
    for (int trial = 0; trial < 20; ++trial) {
      const FieldVec v = random_field(su, rng);
      const FieldVec q = random_field(sq, rng);
      const CouplingOracle o = EvaluateCoupling(v, q);
      const double g = bilinear(bg, q, v);
      const double d = bilinear(bd, q, v);
      EXPECT_NEAR(g, o.gradient_form, 1e-12);
      EXPECT_NEAR(d, o.divergence_form, 1e-12);
      EXPECT_NEAR(d - g, o.boundary_flux, 1e-12);
    }
  }
}

TEST(Coupling, ExpressionsAgreeWhenBoundaryTracesVanish) {
  // With v = 0 on the boundary the two expressions coincide exactly.
  std::mt19937_64 rng(6);
  auto mesh = unit_mesh(4);
  auto su = make_space(mesh, 2, 2);
  auto sq = make_space(mesh, 1, 1);
  const FieldVec v = interpolate(su, VectorFn([](Point x) {
    const double bubble = x.x * (1.0 - x.x) * x.y * (1.0 - x.y);
    return Vec2{bubble, -bubble};
  }));
  const FieldVec q = random_field(sq, rng);
  const double g = bilinear(assemble_coupling(*su, *sq, CouplingForm::kGradient), q, v);
  const double d = bilinear(assemble_coupling(*su, *sq, CouplingForm::kDivergence), q, v);
  EXPECT_NEAR(g, d, 1e-3);  // interpolant of a quartic bubble: small boundary trace
  const CouplingOracle o = EvaluateCoupling(v, q);
  EXPECT_NEAR(d - g, o.boundary_flux, 1e-12);
}

TEST(Coupling, RejectsMismatchedSpaces) {
  auto su = make_space(unit_mesh(2), 1, 2);
  auto sq = make_space(unit_mesh(2), 1, 1);  // different mesh object
  EXPECT_THROW(assemble_coupling(*su, *sq), std::invalid_argument);
  EXPECT_THROW(assemble_coupling(*sq, *su), std::invalid_argument);
}

// --- diffusion --------------------------------------------------------------

TEST(Diffusion, ConstantOnlyBoundaryPenalty) {
  const double sigma = 1e6;
  for (int n : {1, 2, 5}) {
    auto s = make_space(unit_mesh(n), 1, 1);
    const SparseMatrix c = assemble_diffusion(*s, Mat2::identity(), sigma);
    const FieldVec one = Constant(s, 1.0);
    EXPECT_NEAR(bilinear(c, one, one), 4.0 * n * sigma, 1e-12 * 4.0 * n * sigma);
  }
}

TEST(Diffusion, MatchesOracleAndIsSymmetric) {
  std::mt19937_64 rng(31);
  const Mat2 phi{2.0, 0.3, 0.3, 1.0};
  for (double sigma : {3.0, 1e6}) {
    for (int k : {1, 2}) {
      auto s = make_space(unit_mesh(2), k, 1);
      const SparseMatrix c = assemble_diffusion(*s, phi, sigma);
      EXPECT_TRUE(NearlySymmetric(c));
      for (int trial = 0; trial < 5; ++trial) {
        const FieldVec a = random_field(s, rng);
        const FieldVec b = random_field(s, rng);
        const double oracle = DiffusionOracle(a, b, phi, sigma);
        const double tol = 1e-12 * std::max(1.0, std::abs(oracle));
        EXPECT_NEAR(bilinear(c, b, a), oracle, tol);
        EXPECT_NEAR(bilinear(c, b, a), bilinear(c, a, b), tol);
      }
    }
  }
}

TEST(Diffusion, SmallestEigenvaluePositive) {
  auto s = make_space(unit_mesh(2), 1, 1);
  const Eigen::MatrixXd c = dense(assemble_diffusion(*s, Mat2::identity(), 1e6));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
  EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
}

TEST(Diffusion, Coercive) {
  std::mt19937_64 rng(12);
  const MaterialParams p = preset("PA1");
  auto s = make_space(unit_mesh(2), 1, 1);
  const SparseMatrix ck = assemble_diffusion(*s, p.K, p.sigma2);
  const SparseMatrix ct = assemble_diffusion(*s, p.Theta, p.sigma2);
  for (int i = 0; i < 100; ++i) {
    const FieldVec q = random_field(s, rng);
    EXPECT_GT(bilinear(ck, q, q), 0.0);
    EXPECT_GT(bilinear(ct, q, q), 0.0);
  }
}

TEST(Diffusion, ApplyMatchesMatrix) {
  auto s = make_space(unit_mesh(4), 2, 1);
  const Mat2 phi{1.5, 0.2, 0.2, 0.8};
  const SparseMatrix c = assemble_diffusion(*s, phi, 1e6);
  const ScalarField f{[](Point x) { return x.x * x.y + 0.5 * x.y * x.y - 1.0; },
                      [](Point x) { return Vec2{x.y, x.x + x.y}; }};
  const std::vector<double> applied = apply_diffusion(*s, phi, 1e6, f);
  const std::vector<double> product = c.multiply(interpolate(s, f.value).coeffs());
  double scale = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < applied.size(); ++i) {
    scale = std::max(scale, std::abs(applied[i]));
    diff = std::max(diff, std::abs(applied[i] - product[i]));
  }
  EXPECT_LE(diff, 1e-10 * scale);
}

TEST(Diffusion, RejectsBadInput) {
  auto s = make_space(unit_mesh(1), 1, 1);
  EXPECT_THROW(assemble_diffusion(*s, Mat2{1.0, 2.0, 2.0, 1.0}, 1.0), std::invalid_argument);
  EXPECT_THROW(assemble_diffusion(*s, Mat2::identity(), 0.0), std::invalid_argument);
  EXPECT_THROW(assemble_diffusion(*make_space(unit_mesh(1), 1, 2), Mat2::identity(), 1.0),
               std::invalid_argument);
}

// --- cut-off and convection -------------------------------------------------

TEST(Cutoff, AnalyticCases) {
  const Vec2 inside = cutoff({50.0, 0.0}, 100.0);
  EXPECT_EQ(inside, (Vec2{50.0, 0.0}));
  const Vec2 clamped = cutoff({3.0, 4.0}, 1.0);
  EXPECT_NEAR(clamped.x, 0.6, 1e-15);
  EXPECT_NEAR(clamped.y, 0.8, 1e-15);
  EXPECT_EQ(cutoff({0.0, 0.0}, 1.0), (Vec2{0.0, 0.0}));
}

TEST(Cutoff, BoundAndLipschitz) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> d(-10.0, 10.0);
  const double m = 2.5;
  for (int i = 0; i < 1000; ++i) {
    const Vec2 z1{d(rng), d(rng)};
    const Vec2 z2{d(rng), d(rng)};
    EXPECT_LE(norm(cutoff(z1, m)), m * (1.0 + 1e-15));
    EXPECT_LE(norm(cutoff(z1, m) - cutoff(z2, m)), norm(z1 - z2) * (1.0 + 1e-14));
  }
}

TEST(Convection, ConstantPressureGivesZero) {
  auto mesh = unit_mesh(3);
  auto sp = make_space(mesh, 1, 1);
  auto st = make_space(mesh, 1, 1);
  const MaterialParams p = preset("PA1");
  CutoffStats stats;
  const SparseMatrix n = assemble_convection(*st, Constant(sp, 4.0), p, CutoffMode::kApply, &stats);
  EXPECT_LE(n.max_abs(), 1e-12);
  EXPECT_GT(stats.evaluated, 0u);
  EXPECT_EQ(stats.clamped, 0u);
}

TEST(Convection, LinearPressureIsDerivativeMatrix) {
  auto mesh = unit_mesh(3);
  auto sp = make_space(mesh, 1, 1);
  auto st = make_space(mesh, 2, 1);
  MaterialParams p = preset("PA1");
  p.M_cut = 1.0;
  const SparseMatrix dx = assemble_derivative(*st, 0);
  const FieldVec px = interpolate(sp, ScalarFn([](Point x) { return x.x; }));
  const SparseMatrix n = assemble_convection(*st, px, p);
  EXPECT_NEAR((dense(n) - dense(dx)).cwiseAbs().maxCoeff(), 0.0, 1e-12);

  // Steeper pressure: the transport (2 M, 0) is clamped to (M, 0).
  p.M_cut = 0.5;
  const FieldVec steep = interpolate(sp, ScalarFn([&](Point x) { return 2.0 * p.M_cut * x.x; }));
  CutoffStats stats;
  const SparseMatrix clamped = assemble_convection(*st, steep, p, CutoffMode::kApply, &stats);
  EXPECT_NEAR((dense(clamped) - p.M_cut * dense(dx)).cwiseAbs().maxCoeff(), 0.0, 1e-12);
  EXPECT_EQ(stats.clamped, stats.evaluated);
  const SparseMatrix raw = assemble_convection(*st, steep, p, CutoffMode::kNone);
  EXPECT_NEAR((dense(raw) - 2.0 * p.M_cut * dense(dx)).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Convection, AdvectionApplyMatchesMatrix) {
  auto s = make_space(unit_mesh(3), 2, 1);
  auto transport = [](Point x) { return Vec2{1.0 + x.y, -0.5 * x.x}; };
  const SparseMatrix n = assemble_advection(*s, transport);
  const ScalarField t{[](Point x) { return x.x * x.x + x.y; }, [](Point x) { return Vec2{2.0 * x.x, 1.0}; }};
  const std::vector<double> applied = apply_advection(*s, transport, t);
  const std::vector<double> product = n.multiply(interpolate(s, t.value).coeffs());
  for (std::size_t i = 0; i < applied.size(); ++i) EXPECT_NEAR(applied[i], product[i], 1e-13);
}

// --- mass and loads ---------------------------------------------------------

TEST(Mass, IntegratesOne) {
  auto s = make_space(unit_mesh(4), 2, 1);
  const FieldVec one = Constant(s, 1.0);
  EXPECT_NEAR(bilinear(assemble_mass(*s), one, one), 1.0, 1e-13);
}

TEST(Mass, SingleElementBlock) {
  auto s = make_space(unit_mesh(1), 1, 1);
  const Eigen::MatrixXd m = dense(assemble_mass(*s));
  const double area = 0.5;
  for (int e = 0; e < 2; ++e) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        EXPECT_NEAR(m(3 * e + i, 3 * e + j), area / 12.0 * (i == j ? 2.0 : 1.0), 1e-15);
      }
    }
  }
  EXPECT_EQ(m.block(0, 3, 3, 3).cwiseAbs().maxCoeff(), 0.0);  // block diagonal
}

TEST(Mass, SpdByFactorization) {
  auto s = make_space(unit_mesh(3), 2, 2);
  const SparseMatrix m = assemble_mass(*s);
  LinearSolver chol(SolverOptions{SolverKind::kCholesky});
  EXPECT_NO_THROW(chol.factorize(m));
  EXPECT_LE(m.max_abs_asymmetry(), 1e-16);
}

TEST(Mass, MixedDegrees) {
  auto mesh = unit_mesh(2);
  auto s1 = make_space(mesh, 1, 1);
  auto s2 = make_space(mesh, 2, 1);
  const SparseMatrix m = assemble_mass(*s1, *s2);
  EXPECT_EQ(m.rows(), s1->global_dim());
  EXPECT_EQ(m.cols(), s2->global_dim());
  EXPECT_NEAR(bilinear(m, Constant(s1, 1.0), Constant(s2, 1.0)), 1.0, 1e-13);
}

TEST(Load, Zero) {
  auto s = make_space(unit_mesh(2), 1, 1);
  for (double v : assemble_load(*s, [](Point) { return 0.0; })) EXPECT_EQ(v, 0.0);
}

TEST(Load, OneEqualsMassTimesOne) {
  auto s = make_space(unit_mesh(3), 2, 1);
  const std::vector<double> load = assemble_load(*s, [](Point) { return 1.0; });
  const std::vector<double> m1 = assemble_mass(*s).multiply(Constant(s, 1.0).coeffs());
  for (std::size_t i = 0; i < load.size(); ++i) EXPECT_NEAR(load[i], m1[i], 1e-12);
}

TEST(Load, SineIntegral) {
  auto s = make_space(unit_mesh(8), 1, 1);
  const std::vector<double> load = assemble_load(*s, [](Point x) {
    return std::sin(std::numbers::pi * x.x) * std::sin(std::numbers::pi * x.y);
  });
  double total = 0.0;
  for (double v : load) total += v;  // pairing with the constant-1 field
  EXPECT_NEAR(total, 4.0 / (std::numbers::pi * std::numbers::pi), 1e-10);
}

TEST(Load, VectorComponents) {
  auto s = make_space(unit_mesh(2), 1, 2);
  const std::vector<double> load = assemble_load(*s, [](Point) { return Vec2{1.0, -2.0}; });
  const FieldVec ex = interpolate(s, VectorFn([](Point) { return Vec2{1.0, 0.0}; }));
  const FieldVec ey = interpolate(s, VectorFn([](Point) { return Vec2{0.0, 1.0}; }));
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < load.size(); ++i) {
    sx += ex.coeffs()[i] * load[i];
    sy += ey.coeffs()[i] * load[i];
  }
  EXPECT_NEAR(sx, 1.0, 1e-13);
  EXPECT_NEAR(sy, -2.0, 1e-13);
}

TEST(Forms, ShapesAndSymmetry) {
  auto mesh = unit_mesh(2);
  auto su = make_space(mesh, 1, 2);
  auto sp = make_space(mesh, 1, 1);
  auto st = make_space(mesh, 2, 1);
  const FormMatrices f = assemble_forms(*su, *sp, *st, preset("PA2"));
  EXPECT_EQ(f.B_p.rows(), sp->global_dim());
  EXPECT_EQ(f.B_p.cols(), su->global_dim());
  EXPECT_EQ(f.B_T.rows(), st->global_dim());
  EXPECT_EQ(f.M_pT.rows(), sp->global_dim());
  EXPECT_EQ(f.M_pT.cols(), st->global_dim());
  EXPECT_NEAR((dense(f.M_pT) - dense(f.M_Tp).transpose()).cwiseAbs().maxCoeff(), 0.0, 1e-16);
  EXPECT_TRUE(NearlySymmetric(f.A_elast));
  EXPECT_TRUE(NearlySymmetric(f.C_pressure));
  EXPECT_TRUE(NearlySymmetric(f.C_temp));
}
