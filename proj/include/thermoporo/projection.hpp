#pragma once

#include <functional>
#include <memory>

#include "thermoporo/assembly.hpp"
#include "thermoporo/dgspace.hpp"
#include "thermoporo/params.hpp"
#include "thermoporo/sparse.hpp"

namespace thermoporo {

// Elliptic projections. Right-hand sides apply the form to the continuous
// argument directly (values and gradients at quadrature points).

// a(R_u u, v_h) = a(u, v_h) for all v_h.
FieldVec project_displacement(const VectorField& u, std::shared_ptr<const DGSpace> space_u,
                              const MaterialParams& params, LinearSolveReport* report = nullptr);

// c(K; R_p p, q_h) = c(K; p, q_h) for all q_h.
FieldVec project_pressure(const ScalarField& p, std::shared_ptr<const DGSpace> space_p,
                          const MaterialParams& params, LinearSolveReport* report = nullptr);

// c(Theta; R_T T, s_h) - (K grad p . grad R_T T, s_h) = same with T, for the
// exact pressure gradient. No cut-off.
FieldVec project_temperature(const ScalarField& T, const std::function<Vec2(Point)>& grad_p,
                             std::shared_ptr<const DGSpace> space_T, const MaterialParams& params,
                             LinearSolveReport* report = nullptr);

}  // namespace thermoporo
