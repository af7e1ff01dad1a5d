#include "thermoporo/sparse.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#ifdef THERMOPORO_HAVE_SUITESPARSE
#include <Eigen/CholmodSupport>
#include <Eigen/UmfPackSupport>
#endif
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "thermoporo/simd/kernels.hpp"

namespace thermoporo {

namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double Norm2(std::span<const double> v) {
  return std::sqrt(simd::kernels().dot(v.data(), v.data(), v.size()));
}

}  // namespace

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> triplets) {
  for (const Triplet& t : triplets) {
    if (t.row < 0 || t.col < 0 || static_cast<std::size_t>(t.row) >= rows ||
        static_cast<std::size_t>(t.col) >= cols) {
      std::ostringstream os;
      os << "triplet (" << t.row << ", " << t.col << ") outside " << rows << "x" << cols;
      throw std::out_of_range(os.str());
    }
  }
  SparseMatrix m(rows, cols);
  // Bucket by row, then sort each row by column and sum duplicates. The
  // result depends only on the multiset of triplets up to summation order,
  // which follows the input order and is therefore deterministic.
  std::vector<int> count(rows + 1, 0);
  for (const Triplet& t : triplets) ++count[static_cast<std::size_t>(t.row) + 1];
  for (std::size_t r = 0; r < rows; ++r) count[r + 1] += count[r];
  std::vector<std::pair<int, double>> bucket(triplets.size());
  std::vector<int> cursor(count.begin(), count.end() - 1);
  for (const Triplet& t : triplets) {
    bucket[static_cast<std::size_t>(cursor[static_cast<std::size_t>(t.row)]++)] = {t.col, t.value};
  }
  m.cols_idx_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  for (std::size_t r = 0; r < rows; ++r) {
    auto first = bucket.begin() + count[r];
    auto last = bucket.begin() + count[r + 1];
    std::stable_sort(first, last, [](const auto& a, const auto& b) { return a.first < b.first; });
    // Duplicates are summed in long double and rounded once; penalty entries
    // of adjacent faces otherwise pick up one rounding per contribution.
    for (auto it = first; it != last;) {
      const int col = it->first;
      long double sum = 0.0L;
      for (; it != last && it->first == col; ++it) sum += it->second;
      m.cols_idx_.push_back(col);
      m.values_.push_back(static_cast<double>(sum));
    }
    m.row_ptr_[r + 1] = static_cast<int>(m.cols_idx_.size());
  }
  return m;
}

double SparseMatrix::coeff(std::size_t r, std::size_t c) const {
  if (r >= rows_ || c >= cols_) throw std::out_of_range("SparseMatrix::coeff index out of range");
  const auto begin = cols_idx_.begin() + row_ptr_[r];
  const auto end = cols_idx_.begin() + row_ptr_[r + 1];
  const auto it = std::lower_bound(begin, end, static_cast<int>(c));
  if (it == end || *it != static_cast<int>(c)) return 0.0;
  return values_[static_cast<std::size_t>(it - cols_idx_.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != cols_ || y.size() != rows_) {
    throw std::invalid_argument("SparseMatrix::multiply dimension mismatch");
  }
  simd::kernels().csr_matvec(row_ptr_.data(), cols_idx_.data(), values_.data(), rows_, x.data(),
                             y.data());
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(rows_);
  multiply(x, y);
  return y;
}

std::vector<double> SparseMatrix::multiply_transposed(std::span<const double> x) const {
  if (x.size() != rows_) throw std::invalid_argument("multiply_transposed dimension mismatch");
  std::vector<double> y(cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    const double xr = x[r];
    for (int p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      y[static_cast<std::size_t>(cols_idx_[static_cast<std::size_t>(p)])] +=
          values_[static_cast<std::size_t>(p)] * xr;
    }
  }
  return y;
}

SparseMatrix SparseMatrix::transposed() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (int p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      t.push_back({cols_idx_[static_cast<std::size_t>(p)], static_cast<int>(r),
                   values_[static_cast<std::size_t>(p)]});
    }
  }
  return from_triplets(cols_, rows_, std::move(t));
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double SparseMatrix::max_abs_asymmetry() const {
  if (rows_ != cols_) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (std::size_t r = 0; r < rows_; ++r) {
    for (int p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      const auto c = static_cast<std::size_t>(cols_idx_[static_cast<std::size_t>(p)]);
      m = std::max(m, std::abs(values_[static_cast<std::size_t>(p)] - coeff(c, r)));
    }
  }
  return m;
}

bool SparseMatrix::same_pattern(const SparseMatrix& other) const {
  return rows_ == other.rows_ && cols_ == other.cols_ && row_ptr_ == other.row_ptr_ &&
         cols_idx_ == other.cols_idx_;
}

bool SparseMatrix::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

SparseMatrix linear_combination(std::span<const ScaledMatrix> terms) {
  if (terms.empty()) throw std::invalid_argument("linear_combination of no terms");
  const std::size_t rows = terms[0].matrix->rows();
  const std::size_t cols = terms[0].matrix->cols();
  std::size_t nnz_bound = 0;
  for (const auto& t : terms) {
    if (t.matrix->rows() != rows || t.matrix->cols() != cols) {
      throw std::invalid_argument("linear_combination shape mismatch");
    }
    nnz_bound += t.matrix->nnz();
  }
  std::vector<Triplet> trip;
  trip.reserve(nnz_bound);
  // Row-interleaved so that each entry is summed in term order.
  for (std::size_t r = 0; r < rows; ++r) {
    for (const auto& t : terms) {
      const auto rp = t.matrix->row_ptr();
      const auto ci = t.matrix->col_indices();
      const auto va = t.matrix->values();
      for (int p = rp[r]; p < rp[r + 1]; ++p) {
        trip.push_back({static_cast<int>(r), ci[static_cast<std::size_t>(p)],
                        t.scale * va[static_cast<std::size_t>(p)]});
      }
    }
  }
  return SparseMatrix::from_triplets(rows, cols, std::move(trip));
}

SparseMatrix linear_combination(std::initializer_list<ScaledMatrix> terms) {
  return linear_combination(std::span<const ScaledMatrix>(terms.begin(), terms.size()));
}

SparseMatrix block_matrix(std::span<const std::size_t> row_sizes,
                          std::span<const std::size_t> col_sizes, std::span<const Block> blocks) {
  std::vector<std::size_t> row_off(row_sizes.size() + 1, 0);
  std::vector<std::size_t> col_off(col_sizes.size() + 1, 0);
  for (std::size_t i = 0; i < row_sizes.size(); ++i) row_off[i + 1] = row_off[i] + row_sizes[i];
  for (std::size_t j = 0; j < col_sizes.size(); ++j) col_off[j + 1] = col_off[j] + col_sizes[j];
  std::size_t nnz = 0;
  for (const Block& b : blocks) {
    if (b.block_row >= row_sizes.size() || b.block_col >= col_sizes.size() ||
        b.matrix->rows() != row_sizes[b.block_row] || b.matrix->cols() != col_sizes[b.block_col]) {
      throw std::invalid_argument("block_matrix: block shape mismatch");
    }
    nnz += b.matrix->nnz();
  }
  std::vector<Triplet> trip;
  trip.reserve(nnz);
  for (const Block& b : blocks) {
    const auto rp = b.matrix->row_ptr();
    const auto ci = b.matrix->col_indices();
    const auto va = b.matrix->values();
    const auto ro = static_cast<int>(row_off[b.block_row]);
    const auto co = static_cast<int>(col_off[b.block_col]);
    for (std::size_t r = 0; r < b.matrix->rows(); ++r) {
      for (int p = rp[r]; p < rp[r + 1]; ++p) {
        trip.push_back({ro + static_cast<int>(r), co + ci[static_cast<std::size_t>(p)],
                        b.scale * va[static_cast<std::size_t>(p)]});
      }
    }
  }
  return SparseMatrix::from_triplets(row_off.back(), col_off.back(), std::move(trip));
}

std::string_view solver_kind_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::kCholesky:
      return "cholesky";
    case SolverKind::kLU:
      return "lu";
    case SolverKind::kIterative:
      return "iterative";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

namespace {

// b - A x with long double accumulation, rounded to double. Also returns
// the norm of |A||x| + |b|, which bounds what rounding x to double can leave.
std::vector<double> ExtendedResidual(const SparseMatrix& a, std::span<const double> x,
                                     std::span<const double> b, double* magnitude = nullptr) {
  const auto rp = a.row_ptr();
  const auto ci = a.col_indices();
  const auto va = a.values();
  std::vector<double> r(a.rows());
  long double mag2 = 0.0L;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    long double acc = b[i];
    long double mag = std::abs(b[i]);
    for (int p = rp[i]; p < rp[i + 1]; ++p) {
      const auto q = static_cast<std::size_t>(p);
      const long double term = static_cast<long double>(va[q]) * x[static_cast<std::size_t>(ci[q])];
      acc -= term;
      mag += std::abs(term);
    }
    r[i] = static_cast<double>(acc);
    mag2 += mag * mag;
  }
  if (magnitude) *magnitude = static_cast<double>(std::sqrt(mag2));
  return r;
}

}  // namespace

struct LinearSolver::Impl {
  using ColMajor = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

  SparseMatrix matrix;  // kept for residual checks and the iterative path
  bool have_matrix = false;
  bool reused_analysis = false;
  double factor_seconds = 0.0;

#ifdef THERMOPORO_HAVE_SUITESPARSE
  // Supernodal / multifrontal factorizations; several times faster than the
  // simplicial Eigen ones on the coupled block systems.
  Eigen::CholmodSupernodalLLT<ColMajor, Eigen::Lower> llt;
  Eigen::UmfPackLU<ColMajor> lu;
  static std::string LuMessage(const Eigen::UmfPackLU<ColMajor>&) { return "matrix is singular"; }
#else
  Eigen::SimplicialLLT<ColMajor, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
  Eigen::SparseLU<ColMajor, Eigen::COLAMDOrdering<int>> lu;
  static std::string LuMessage(const Eigen::SparseLU<ColMajor, Eigen::COLAMDOrdering<int>>& lu) {
    return lu.lastErrorMessage();
  }
#endif
  bool analyzed = false;

  // Iterative path: Jacobi preconditioner, CG for symmetric matrices and
  // BiCGSTAB otherwise.
  std::vector<double> inv_diag;
  bool symmetric = false;
  std::optional<Eigen::BiCGSTAB<ColMajor, Eigen::DiagonalPreconditioner<double>>> bicgstab;
  ColMajor eigen_matrix;

  static ColMajor ToEigen(const SparseMatrix& a) {
    Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor, int>> view(
        static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols()),
        static_cast<Eigen::Index>(a.nnz()), a.row_ptr().data(), a.col_indices().data(),
        a.values().data());
    ColMajor out = view;
    out.makeCompressed();
    return out;
  }
};

LinearSolver::LinearSolver(SolverOptions options)
    : options_(options), impl_(std::make_unique<Impl>()) {}
LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

bool LinearSolver::factorized() const { return impl_->have_matrix; }
double LinearSolver::last_factor_seconds() const { return impl_->factor_seconds; }

void LinearSolver::factorize(const SparseMatrix& a) {
  const auto start = Clock::now();
  if (a.rows() != a.cols()) throw std::invalid_argument("LinearSolver needs a square matrix");
  LinearSolveReport diag;
  diag.kind = options_.kind;
  diag.dim = a.rows();
  diag.nnz = a.nnz();
  if (!a.all_finite()) throw SolverError("matrix has non-finite entries", diag);

  Impl& s = *impl_;
  const bool same = s.have_matrix && s.matrix.same_pattern(a);
  s.have_matrix = false;
  s.matrix = a;
  s.reused_analysis = same && s.analyzed;

  switch (options_.kind) {
    case SolverKind::kCholesky: {
      // The solver may keep a pointer to its input, so it lives in Impl.
      s.eigen_matrix = Impl::ToEigen(a);
      const Impl::ColMajor& m = s.eigen_matrix;
      if (!s.reused_analysis) {
        s.llt.analyzePattern(m);
        s.analyzed = true;
      }
      s.llt.factorize(m);
      if (s.llt.info() != Eigen::Success) {
        throw SolverError("Cholesky factorization failed: matrix not symmetric positive definite "
                          "(non-positive pivot encountered)",
                          diag);
      }
      break;
    }
    case SolverKind::kLU: {
      // The solver may keep a pointer to its input, so it lives in Impl.
      s.eigen_matrix = Impl::ToEigen(a);
      const Impl::ColMajor& m = s.eigen_matrix;
      if (!s.reused_analysis) {
        s.lu.analyzePattern(m);
        s.analyzed = true;
      }
      s.lu.factorize(m);
      if (s.lu.info() != Eigen::Success) {
        throw SolverError("LU factorization failed: " + Impl::LuMessage(s.lu), diag);
      }
      break;
    }
    case SolverKind::kIterative: {
      s.symmetric = a.max_abs_asymmetry() <= 1e-12 * std::max(1.0, a.max_abs());
      s.inv_diag.assign(a.rows(), 0.0);
      for (std::size_t r = 0; r < a.rows(); ++r) {
        const double d = a.coeff(r, r);
        if (d == 0.0) {
          throw SolverError("zero diagonal at row " + std::to_string(r) +
                                " (Jacobi preconditioner breakdown)",
                            diag);
        }
        s.inv_diag[r] = 1.0 / d;
      }
      if (!s.symmetric) {
        s.eigen_matrix = Impl::ToEigen(a);
        s.bicgstab.emplace();
        s.bicgstab->setTolerance(options_.tol * 0.1);
        s.bicgstab->setMaxIterations(options_.max_iterations);
        s.bicgstab->compute(s.eigen_matrix);
      }
      break;
    }
  }
  s.have_matrix = true;
  s.factor_seconds = SecondsSince(start);
}

std::vector<double> LinearSolver::solve(std::span<const double> b,
                                        LinearSolveReport* report_out) const {
  const Impl& s = *impl_;
  LinearSolveReport report;
  report.kind = options_.kind;
  report.dim = s.matrix.rows();
  report.nnz = s.matrix.nnz();
  report.reused_analysis = s.reused_analysis;
  report.factor_seconds = s.factor_seconds;
  if (!s.have_matrix) throw SolverError("solve called before factorize", report);
  if (b.size() != s.matrix.rows()) throw std::invalid_argument("right-hand side length mismatch");

  const auto start = Clock::now();
  std::vector<double> x(b.size(), 0.0);
  const auto& k = simd::kernels();
  const double b_norm = Norm2(b);

  switch (options_.kind) {
    case SolverKind::kCholesky: {
      Eigen::Map<const Eigen::VectorXd> bv(b.data(), static_cast<Eigen::Index>(b.size()));
      Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())) = s.llt.solve(bv);
      break;
    }
    case SolverKind::kLU: {
      Eigen::Map<const Eigen::VectorXd> bv(b.data(), static_cast<Eigen::Index>(b.size()));
      Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())) = s.lu.solve(bv);
      break;
    }
    case SolverKind::kIterative: {
      if (!s.symmetric) {
        Eigen::Map<const Eigen::VectorXd> bv(b.data(), static_cast<Eigen::Index>(b.size()));
        Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())) =
            s.bicgstab->solve(bv);
        report.iterations = static_cast<int>(s.bicgstab->iterations());
        break;
      }
      // Jacobi-preconditioned conjugate gradients.
      const std::size_t n = b.size();
      std::vector<double> r(b.begin(), b.end());
      std::vector<double> z(n);
      std::vector<double> p(n);
      std::vector<double> ap(n);
      for (std::size_t i = 0; i < n; ++i) z[i] = s.inv_diag[i] * r[i];
      p = z;
      double rz = k.dot(r.data(), z.data(), n);
      const double target = options_.tol * 0.1 * std::max(b_norm, 1e-300);
      int it = 0;
      while (it < options_.max_iterations && Norm2(r) > target) {
        s.matrix.multiply(p, ap);
        const double pap = k.dot(p.data(), ap.data(), n);
        if (!(pap > 0.0)) {
          report.iterations = it;
          throw SolverError("conjugate gradient breakdown (p^T A p <= 0)", report);
        }
        const double step = rz / pap;
        for (std::size_t i = 0; i < n; ++i) {
          x[i] += step * p[i];
          r[i] -= step * ap[i];
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = s.inv_diag[i] * r[i];
        const double rz_next = k.dot(r.data(), z.data(), n);
        const double ratio = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + ratio * p[i];
        ++it;
      }
      report.iterations = it;
      break;
    }
  }

  // Residuals are accumulated in extended precision and direct solves get a
  // few steps of iterative refinement. With large penalties the residual of
  // the double-rounded x can still sit above tol; that floor is reported and
  // accepted (see LinearSolveReport::roundoff_floor).
  const double denom = b_norm > 0.0 ? b_norm : 1.0;
  double magnitude = 0.0;
  std::vector<double> residual = ExtendedResidual(s.matrix, x, b, &magnitude);
  report.relative_residual = Norm2(residual) / denom;
  if (options_.kind != SolverKind::kIterative) {
    std::vector<double> best = x;
    double best_res = report.relative_residual;
    for (int step = 0; step < options_.refinement_steps && best_res > 0.01 * options_.tol; ++step) {
      Eigen::Map<const Eigen::VectorXd> rv(residual.data(), static_cast<Eigen::Index>(residual.size()));
      Eigen::VectorXd d = options_.kind == SolverKind::kCholesky ? Eigen::VectorXd(s.llt.solve(rv))
                                                                 : Eigen::VectorXd(s.lu.solve(rv));
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += d[static_cast<Eigen::Index>(i)];
      residual = ExtendedResidual(s.matrix, x, b, &magnitude);
      const double res = Norm2(residual) / denom;
      report.refinement_steps = step + 1;
      if (res < best_res) {
        best = x;
        best_res = res;
      } else if (res > 0.5 * best_res) {
        break;  // stagnated
      }
    }
    x = std::move(best);
    report.relative_residual = best_res;
  }
  report.roundoff_floor = kRoundoffFactor * std::numeric_limits<double>::epsilon() * magnitude / denom;
  report.solve_seconds = SecondsSince(start);
  if (report_out) *report_out = report;
  if (!report.converged(options_.tol)) {
    std::ostringstream os;
    os << solver_kind_name(options_.kind) << " solve did not reach tolerance " << options_.tol
       << ": relative residual " << report.relative_residual << " (round-off floor "
       << report.roundoff_floor << ") after " << report.iterations << " iterations, "
       << report.refinement_steps << " refinement steps (dim " << report.dim << ")";
    throw SolverError(os.str(), report);
  }
  return x;
}

SolveResult solve(const SparseMatrix& a, std::span<const double> b, SolverOptions options) {
  LinearSolver solver(options);
  solver.factorize(a);
  SolveResult out;
  out.x = solver.solve(b, &out.report);
  return out;
}

}  // namespace thermoporo
