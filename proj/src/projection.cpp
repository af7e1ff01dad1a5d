#include "thermoporo/projection.hpp"

#include <stdexcept>
#include <utility>

namespace thermoporo {

namespace {

FieldVec Solve(std::shared_ptr<const DGSpace> space, const SparseMatrix& a,
               const std::vector<double>& rhs, SolverKind kind, LinearSolveReport* report) {
  SolverOptions options;
  options.kind = kind;
  SolveResult r = solve(a, rhs, options);
  if (report) *report = r.report;
  return FieldVec(std::move(space), std::move(r.x));
}

}  // namespace

FieldVec project_displacement(const VectorField& u, std::shared_ptr<const DGSpace> space_u,
                              const MaterialParams& params, LinearSolveReport* report) {
  const SparseMatrix a = assemble_elasticity(*space_u, params);
  const std::vector<double> rhs = apply_elasticity(*space_u, params, u);
  return Solve(std::move(space_u), a, rhs, SolverKind::kCholesky, report);
}

FieldVec project_pressure(const ScalarField& p, std::shared_ptr<const DGSpace> space_p,
                          const MaterialParams& params, LinearSolveReport* report) {
  const SparseMatrix c = assemble_diffusion(*space_p, params.K, params.sigma2);
  const std::vector<double> rhs = apply_diffusion(*space_p, params.K, params.sigma2, p);
  return Solve(std::move(space_p), c, rhs, SolverKind::kCholesky, report);
}

FieldVec project_temperature(const ScalarField& T, const std::function<Vec2(Point)>& grad_p,
                             std::shared_ptr<const DGSpace> space_T, const MaterialParams& params,
                             LinearSolveReport* report) {
  const Mat2 k = params.K;
  auto transport = [k, grad_p](Point x) { return k * grad_p(x); };
  const SparseMatrix c = assemble_diffusion(*space_T, params.Theta, params.sigma2);
  const SparseMatrix n = assemble_advection(*space_T, transport);
  const SparseMatrix a = linear_combination({{1.0, &c}, {-1.0, &n}});
  std::vector<double> rhs = apply_diffusion(*space_T, params.Theta, params.sigma2, T);
  const std::vector<double> conv = apply_advection(*space_T, transport, T);
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= conv[i];
  return Solve(std::move(space_T), a, rhs, SolverKind::kLU, report);
}

}  // namespace thermoporo
