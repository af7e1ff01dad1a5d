#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "thermoporo/dgspace.hpp"
#include "thermoporo/geometry.hpp"
#include "thermoporo/params.hpp"
#include "thermoporo/sparse.hpp"

namespace thermoporo {

// Continuous fields with first derivatives, used where a form is applied to
// an exact (non-discrete) argument.
struct ScalarField {
  std::function<double(Point)> value;
  std::function<Vec2(Point)> grad;
};

// grad row r is the gradient of component r: {d1 u1, d2 u1, d1 u2, d2 u2}.
struct VectorField {
  std::function<Vec2(Point)> value;
  std::function<Mat2(Point)> grad;
};

// Degree used for bilinear forms: exact for polynomial integrands.
int form_quadrature_degree(const DGSpace& a, const DGSpace& b);
// Degree used for loads and forms with a non-polynomial argument.
int load_quadrature_degree(const DGSpace& space);

// SIPG elasticity form a(v, w): strain-stress volume term, both symmetric
// consistency terms and sigma1 / h_e penalty, summed over all edges.
// Rows are test functions, columns trial functions.
SparseMatrix assemble_elasticity(const DGSpace& space_u, const MaterialParams& params);

// Which of the two element-wise integration-by-parts expressions of b(v, p)
// to assemble. The face sums run over interior edges only.
enum class CouplingForm {
  kGradient,    // -(grad p, v) + <{v}.n, [p]>
  kDivergence,  // (p, div v) - <{p}, [v].n>
};

// Matrix B with B[i][j] = b(phi_j, psi_i): rows scalar test functions,
// columns vector trial functions. b(v_h, p) for a vector test v_h is B^T p.
SparseMatrix assemble_coupling(const DGSpace& space_u, const DGSpace& space_scalar,
                               CouplingForm form = CouplingForm::kGradient);

// SIPG diffusion form c(phi; p, q) with penalty sigma / h_e over all edges.
// Throws std::invalid_argument for a non-SPD phi or sigma <= 0.
SparseMatrix assemble_diffusion(const DGSpace& space, const Mat2& phi, double sigma);

// Radial clamp of z to magnitude m_cut.
Vec2 cutoff(Vec2 z, double m_cut);

struct CutoffStats {
  std::size_t evaluated = 0;
  std::size_t clamped = 0;
};

enum class CutoffMode { kApply, kNone };

// N[s][t] = sum_K ((transport . grad t), s)_K with transport = M(K grad p_h)
// (or K grad p_h when mode is kNone) at the volume quadrature points. No face
// terms.
SparseMatrix assemble_convection(const DGSpace& space_T, const FieldVec& pressure,
                                 const MaterialParams& params, CutoffMode mode = CutoffMode::kApply,
                                 CutoffStats* stats = nullptr);

// Same volume term for a prescribed transport field.
SparseMatrix assemble_advection(const DGSpace& space_T, const std::function<Vec2(Point)>& transport);

// L2 mass matrix (test space rows, trial space columns).
SparseMatrix assemble_mass(const DGSpace& test, const DGSpace& trial);
inline SparseMatrix assemble_mass(const DGSpace& space) { return assemble_mass(space, space); }

// Matrix of (d/dx t, s) or (d/dy t, s).
SparseMatrix assemble_derivative(const DGSpace& space, int direction);

// Load vectors (func, basis) per DOF; degree < 0 selects load_quadrature_degree.
std::vector<double> assemble_load(const DGSpace& space, const std::function<double(Point)>& func,
                                  int degree = -1);
std::vector<double> assemble_load(const DGSpace& space, const std::function<Vec2(Point)>& func,
                                  int degree = -1);

// a(u, phi_i) with u continuous (zero interior jumps, trace u on the boundary).
std::vector<double> apply_elasticity(const DGSpace& space_u, const MaterialParams& params,
                                     const VectorField& u, int degree = -1);

// c(phi; p, q_i) with p continuous.
std::vector<double> apply_diffusion(const DGSpace& space, const Mat2& phi, double sigma,
                                    const ScalarField& p, int degree = -1);

// (transport . grad T, s_i) for a continuous T.
std::vector<double> apply_advection(const DGSpace& space, const std::function<Vec2(Point)>& transport,
                                    const ScalarField& temperature, int degree = -1);

// All time-independent operators of the coupled system.
struct FormMatrices {
  SparseMatrix A_elast;    // V x V
  SparseMatrix B_p;        // Q x V
  SparseMatrix B_T;        // S x V
  SparseMatrix C_pressure; // Q x Q, c(K)
  SparseMatrix C_temp;     // S x S, c(Theta)
  SparseMatrix M_u;        // V x V
  SparseMatrix M_p;        // Q x Q
  SparseMatrix M_T;        // S x S
  SparseMatrix M_pT;       // Q x S, rows pressure tests
  SparseMatrix M_Tp;       // S x Q, rows temperature tests
};

FormMatrices assemble_forms(const DGSpace& space_u, const DGSpace& space_p, const DGSpace& space_T,
                            const MaterialParams& params);

}  // namespace thermoporo
