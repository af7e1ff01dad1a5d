#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace thermoporo {

struct Triplet {
  int row;
  int col;
  double value;
};

// Compressed sparse row matrix; duplicates are summed on construction.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols);

  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> triplets);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const int> row_ptr() const { return row_ptr_; }
  std::span<const int> col_indices() const { return cols_idx_; }
  std::span<const double> values() const { return values_; }

  double coeff(std::size_t r, std::size_t c) const;

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(std::span<const double> x) const;
  // y = A^T x
  std::vector<double> multiply_transposed(std::span<const double> x) const;

  SparseMatrix transposed() const;
  double max_abs() const;
  double max_abs_asymmetry() const;  // max |A - A^T|
  bool same_pattern(const SparseMatrix& other) const;
  bool all_finite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> cols_idx_;
  std::vector<double> values_;
};

struct ScaledMatrix {
  double scale;
  const SparseMatrix* matrix;
};

// sum_i scale_i * A_i; all terms must share one shape.
SparseMatrix linear_combination(std::span<const ScaledMatrix> terms);
SparseMatrix linear_combination(std::initializer_list<ScaledMatrix> terms);

struct Block {
  std::size_t block_row;
  std::size_t block_col;
  double scale;
  const SparseMatrix* matrix;
};

SparseMatrix block_matrix(std::span<const std::size_t> row_sizes,
                          std::span<const std::size_t> col_sizes, std::span<const Block> blocks);

enum class SolverKind { kCholesky, kLU, kIterative };

struct SolverOptions {
  SolverKind kind = SolverKind::kLU;
  double tol = 1e-10;
  int max_iterations = 20000;
  int refinement_steps = 3;  // iterative refinement after a direct solve
};

struct LinearSolveReport {
  SolverKind kind = SolverKind::kLU;
  std::size_t dim = 0;
  std::size_t nnz = 0;
  double relative_residual = 0.0;  // |Ax - b| / max(|b|, eps)
  int iterations = 0;              // 0 for direct solves
  int refinement_steps = 0;
  // kRoundoffFactor * eps * || |A||x| + |b| || / |b|: the residual that merely
  // rounding the exact solution to double can produce. Penalty-dominated
  // systems (sigma ~ 1e6) have this above 1e-10 on fine meshes.
  double roundoff_floor = 0.0;
  bool reused_analysis = false;
  double factor_seconds = 0.0;
  double solve_seconds = 0.0;

  bool converged(double tol) const {
    return relative_residual <= tol || relative_residual <= roundoff_floor;
  }
};

inline constexpr double kRoundoffFactor = 4.0;

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, LinearSolveReport report)
      : std::runtime_error(what), report_(report) {}
  const LinearSolveReport& report() const { return report_; }

 private:
  LinearSolveReport report_;
};

// Factorization (or preconditioner) of one matrix. Refactorizing a matrix
// with an identical sparsity pattern reuses the symbolic analysis.
class LinearSolver {
 public:
  explicit LinearSolver(SolverOptions options = {});
  ~LinearSolver();
  LinearSolver(LinearSolver&&) noexcept;
  LinearSolver& operator=(LinearSolver&&) noexcept;

  // Throws SolverError on a singular / non-SPD matrix.
  void factorize(const SparseMatrix& a);
  bool factorized() const;

  // Throws SolverError when the relative residual exceeds the tolerance.
  std::vector<double> solve(std::span<const double> b, LinearSolveReport* report = nullptr) const;

  const SolverOptions& options() const { return options_; }
  double last_factor_seconds() const;

 private:
  struct Impl;
  SolverOptions options_;
  std::unique_ptr<Impl> impl_;
};

struct SolveResult {
  std::vector<double> x;
  LinearSolveReport report;
};

SolveResult solve(const SparseMatrix& a, std::span<const double> b, SolverOptions options = {});

std::string_view solver_kind_name(SolverKind kind);

}  // namespace thermoporo
