#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"
#include "thermoporo/assembly.hpp"
#include "thermoporo/params.hpp"
#include "thermoporo/sparse.hpp"

using namespace thermoporo;
using thermoporo::testing::dense;
using thermoporo::testing::vec;

namespace {

double RelativeResidual(const SparseMatrix& a, const std::vector<double>& x, const std::vector<double>& b) {
  return (dense(a) * vec(x) - vec(b)).norm() / vec(b).norm();
}

SparseMatrix RandomSpd(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    t.push_back({static_cast<int>(i), static_cast<int>(i), 4.0 + dist(rng)});
    for (int k = 0; k < 3; ++k) {
      const int j = static_cast<int>(rng() % n);
      if (j == static_cast<int>(i)) continue;
      const double v = 0.5 * dist(rng);
      t.push_back({static_cast<int>(i), j, v});
      t.push_back({j, static_cast<int>(i), v});
    }
  }
  // Diagonal dominance makes it SPD.
  SparseMatrix a = SparseMatrix::from_triplets(n, n, t);
  std::vector<Triplet> boost;
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    const auto rp = a.row_ptr();
    for (int p = rp[i]; p < rp[i + 1]; ++p) {
      if (a.col_indices()[static_cast<std::size_t>(p)] != static_cast<int>(i)) {
        off += std::abs(a.values()[static_cast<std::size_t>(p)]);
      }
    }
    boost.push_back({static_cast<int>(i), static_cast<int>(i), off});
  }
  const SparseMatrix d = SparseMatrix::from_triplets(n, n, boost);
  return linear_combination({{1.0, &a}, {1.0, &d}});
}

std::vector<double> RandomVector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

}  // namespace

TEST(Sparse, DuplicatesAreSummed) {
  const SparseMatrix a = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}});
  EXPECT_EQ(a.coeff(0, 0), 3.0);
  EXPECT_EQ(a.nnz(), 1u);
  EXPECT_EQ(a.coeff(1, 1), 0.0);
}

TEST(Sparse, EmptyTriplets) {
  const SparseMatrix a = SparseMatrix::from_triplets(3, 3, {});
  EXPECT_EQ(a.nnz(), 0u);
  const std::vector<double> y = a.multiply(std::vector<double>{1.0, 2.0, 3.0});
  for (double v : y) EXPECT_EQ(v, 0.0);
}

TEST(Sparse, OutOfRangeTriplet) {
  EXPECT_THROW(SparseMatrix::from_triplets(2, 2, {{2, 0, 1.0}}), std::out_of_range);
  EXPECT_THROW(SparseMatrix::from_triplets(2, 2, {{0, -1, 1.0}}), std::out_of_range);
}

TEST(Sparse, MatvecMatchesDenseOracle) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const std::size_t n = 50;
  Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(n, n);
  std::vector<Triplet> t;
  for (int k = 0; k < 600; ++k) {
    const int i = static_cast<int>(rng() % n);
    const int j = static_cast<int>(rng() % n);
    const double v = dist(rng);
    t.push_back({i, j, v});
    oracle(i, j) += v;
  }
  const SparseMatrix a = SparseMatrix::from_triplets(n, n, t);
  const std::vector<double> x = RandomVector(n, rng);
  const Eigen::VectorXd expect = oracle * vec(x);
  const Eigen::VectorXd expect_t = oracle.transpose() * vec(x);
  const std::vector<double> y = a.multiply(x);
  const std::vector<double> yt = a.multiply_transposed(x);
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_NEAR(y[i], expect(static_cast<Eigen::Index>(i)), 1e-13);
    EXPECT_NEAR(yt[i], expect_t(static_cast<Eigen::Index>(i)), 1e-13);
  }
  EXPECT_NEAR((dense(a.transposed()) - oracle.transpose()).norm(), 0.0, 1e-14);
}

TEST(Sparse, LinearCombinationAndBlocks) {
  const SparseMatrix a = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {1, 0, 2.0}});
  const SparseMatrix b = SparseMatrix::from_triplets(2, 2, {{0, 0, 3.0}, {1, 1, 4.0}});
  const SparseMatrix c = linear_combination({{2.0, &a}, {-1.0, &b}});
  EXPECT_EQ(c.coeff(0, 0), -1.0);
  EXPECT_EQ(c.coeff(1, 0), 4.0);
  EXPECT_EQ(c.coeff(1, 1), -4.0);

  const SparseMatrix e = SparseMatrix::from_triplets(1, 2, {{0, 1, 5.0}});
  const std::size_t rows[] = {2, 1};
  const std::size_t cols[] = {2};
  const Block blocks[] = {{0, 0, 1.0, &a}, {1, 0, 2.0, &e}};
  const SparseMatrix m = block_matrix(rows, cols, blocks);
  EXPECT_EQ(m.rows(), 3u);
  EXPECT_EQ(m.cols(), 2u);
  EXPECT_EQ(m.coeff(1, 0), 2.0);
  EXPECT_EQ(m.coeff(2, 1), 10.0);
  const SparseMatrix wrong = SparseMatrix::from_triplets(3, 3, {});
  EXPECT_THROW(linear_combination({{1.0, &a}, {1.0, &wrong}}), std::invalid_argument);
}

TEST(Sparse, SymmetryQueries) {
  const SparseMatrix a = SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 1.5}, {0, 0, -7.0}});
  EXPECT_EQ(a.max_abs(), 7.0);
  EXPECT_EQ(a.max_abs_asymmetry(), 0.5);
  EXPECT_TRUE(a.all_finite());
}

class SolverKinds : public ::testing::TestWithParam<SolverKind> {};

TEST_P(SolverKinds, Identity) {
  std::vector<Triplet> t;
  for (int i = 0; i < 5; ++i) t.push_back({i, i, 1.0});
  const SparseMatrix a = SparseMatrix::from_triplets(5, 5, t);
  const std::vector<double> b{1.0, -2.0, 3.5, 0.0, 4.0};
  const SolveResult r = solve(a, b, SolverOptions{GetParam()});
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_NEAR(r.x[i], b[i], 1e-14);
}

TEST_P(SolverKinds, TwoByTwo) {
  const SparseMatrix a =
      SparseMatrix::from_triplets(2, 2, {{0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 2.0}});
  const SolveResult r = solve(a, std::vector<double>{3.0, 3.0}, SolverOptions{GetParam()});
  EXPECT_NEAR(r.x[0], 1.0, 1e-12);
  EXPECT_NEAR(r.x[1], 1.0, 1e-12);
  EXPECT_LE(r.report.relative_residual, 1e-10);
  EXPECT_EQ(r.report.dim, 2u);
}

TEST_P(SolverKinds, RandomSpdLeftInverse) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const SparseMatrix a = RandomSpd(200, rng);
    const std::vector<double> b = RandomVector(200, rng);
    const SolveResult r = solve(a, b, SolverOptions{GetParam()});
    EXPECT_LE(RelativeResidual(a, r.x, b), 1e-10);
    EXPECT_LE(r.report.relative_residual, 1e-10);
  }
}

TEST_P(SolverKinds, DeterministicBitwise) {
  std::mt19937_64 rng(5);
  const SparseMatrix a = RandomSpd(300, rng);
  const std::vector<double> b = RandomVector(300, rng);
  const SolveResult r1 = solve(a, b, SolverOptions{GetParam()});
  const SolveResult r2 = solve(a, b, SolverOptions{GetParam()});
  EXPECT_EQ(r1.x, r2.x);
}

INSTANTIATE_TEST_SUITE_P(All, SolverKinds,
                         ::testing::Values(SolverKind::kCholesky, SolverKind::kLU, SolverKind::kIterative),
                         [](const auto& info) { return std::string(solver_kind_name(info.param)); });

TEST(Solver, NonSymmetricLuAndBicgstab) {
  std::mt19937_64 rng(8);
  SparseMatrix a = RandomSpd(150, rng);
  const SparseMatrix skew = SparseMatrix::from_triplets(150, 150, {{0, 5, 0.7}, {9, 2, -0.4}, {77, 140, 0.3}});
  a = linear_combination({{1.0, &a}, {1.0, &skew}});
  const std::vector<double> b = RandomVector(150, rng);
  for (SolverKind k : {SolverKind::kLU, SolverKind::kIterative}) {
    const SolveResult r = solve(a, b, SolverOptions{k});
    EXPECT_LE(RelativeResidual(a, r.x, b), 1e-10);
  }
}

TEST(Solver, SingularMatrixReported) {
  const SparseMatrix a =
      SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}});
  LinearSolver lu(SolverOptions{SolverKind::kLU});
  EXPECT_THROW(lu.factorize(a), SolverError);
  const SparseMatrix neg = SparseMatrix::from_triplets(2, 2, {{0, 0, -1.0}, {1, 1, 1.0}});
  LinearSolver chol(SolverOptions{SolverKind::kCholesky});
  try {
    chol.factorize(neg);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_NE(std::string(e.what()).find("positive definite"), std::string::npos);
  }
}

TEST(Solver, NonConvergenceReportsResidual) {
  std::mt19937_64 rng(2);
  const SparseMatrix a = RandomSpd(400, rng);
  const std::vector<double> b = RandomVector(400, rng);
  SolverOptions o{SolverKind::kIterative};
  o.max_iterations = 2;
  try {
    solve(a, b, o);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_GT(e.report().relative_residual, 1e-10);
    EXPECT_EQ(e.report().iterations, 2);
  }
}

TEST(Solver, SolveBeforeFactorize) {
  LinearSolver s;
  EXPECT_THROW(s.solve(std::vector<double>{1.0}), SolverError);
}

TEST(Solver, ReusesAnalysisForSamePattern) {
  std::mt19937_64 rng(4);
  const SparseMatrix a = RandomSpd(50, rng);
  const SparseMatrix a2 = linear_combination({{2.0, &a}});
  LinearSolver s(SolverOptions{SolverKind::kLU});
  s.factorize(a);
  s.factorize(a2);
  LinearSolveReport r;
  const std::vector<double> b = RandomVector(50, rng);
  const std::vector<double> x = s.solve(b, &r);
  EXPECT_TRUE(r.reused_analysis);
  EXPECT_LE(RelativeResidual(a2, x, b), 1e-10);
}

TEST(Solver, AssembledPressureSystem) {
  const MaterialParams p = preset("PA1");
  auto space = make_space(thermoporo::testing::unit_mesh(4), 1, 1);
  const double tau = 1.0 / 16.0;
  const SparseMatrix m = assemble_mass(*space);
  const SparseMatrix c = assemble_diffusion(*space, p.K, p.sigma2);
  const SparseMatrix s = linear_combination({{p.c0 / tau, &m}, {1.0, &c}});
  const std::vector<double> b = assemble_load(*space, [](Point x) { return std::sin(3.0 * x.x) + x.y; });
  for (SolverKind k : {SolverKind::kCholesky, SolverKind::kLU}) {
    const SolveResult r = solve(s, b, SolverOptions{k});
    EXPECT_LE(r.report.relative_residual, 1e-10) << solver_kind_name(k);
    EXPECT_LE(RelativeResidual(s, r.x, b), 1e-10) << solver_kind_name(k);
  }
}

TEST(Solver, RoundoffFloorIsReported) {
  // Penalty-dominated system: the floor is positive and the achieved residual
  // is never above max(tol, floor) on success.
  const MaterialParams p = preset("PA1");
  auto space = make_space(thermoporo::testing::unit_mesh(16), 1, 1);
  const SparseMatrix c = assemble_diffusion(*space, p.K, p.sigma2);
  const std::vector<double> b = assemble_load(*space, [](Point x) { return x.x * x.y; });
  const SolveResult r = solve(c, b, SolverOptions{SolverKind::kCholesky});
  EXPECT_GT(r.report.roundoff_floor, 0.0);
  EXPECT_TRUE(r.report.converged(1e-10));
}
