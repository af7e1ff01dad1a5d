#pragma once

#include <functional>

#include "thermoporo/assembly.hpp"
#include "thermoporo/dgspace.hpp"
#include "thermoporo/geometry.hpp"
#include "thermoporo/params.hpp"

namespace thermoporo {

// Data of one transient problem. Empty callables mean zero.
struct ProblemData {
  std::function<Vec2(double, Point)> f;    // body force
  std::function<double(double, Point)> g;  // mass source
  std::function<double(double, Point)> z;  // heat source
  VectorField u0;                          // initial fields with gradients
  ScalarField p0;
  ScalarField T0;
};

// Homogeneous data: all sources and initial fields zero.
ProblemData zero_problem();

struct ExactValues {
  Vec2 u;
  double p = 0.0;
  double T = 0.0;
};

struct SourceValues {
  Vec2 f;
  double g = 0.0;
  double z = 0.0;
};

// With s = sin(pi x) sin(pi y):
//   u = e^{-t} (s, s),  p = t s,  T = e^{-t} s
// and sources obtained by substituting these into the model equations.
class ManufacturedCase {
 public:
  explicit ManufacturedCase(MaterialParams params = {});

  const MaterialParams& params() const { return params_; }

  Vec2 u(double t, Point x) const;
  Mat2 grad_u(double t, Point x) const;
  double p(double t, Point x) const;
  Vec2 grad_p(double t, Point x) const;
  double T(double t, Point x) const;
  Vec2 grad_T(double t, Point x) const;
  ExactValues exact(double t, Point x) const;

  Vec2 f(double t, Point x) const;
  double g(double t, Point x) const;
  double z(double t, Point x) const;
  SourceValues sources(double t, Point x) const;

  VectorField displacement(double t) const;
  ScalarField pressure(double t) const;
  ScalarField temperature(double t) const;

  ProblemData problem() const;

 private:
  MaterialParams params_;
};

// Residuals of the three model equations for the case's exact fields,
// evaluated with central differences of step `step` in space and time.
// Each entry is (left-hand side) - (source).
struct PdeResidual {
  Vec2 momentum;
  double mass = 0.0;
  double energy = 0.0;
};
PdeResidual finite_difference_residual(const ManufacturedCase& mc, double t, Point x,
                                       double step = 1e-5);

// Quadrature degree used for error integrals.
int error_quadrature_degree(const DGSpace& space);

// ||exact - field||_{L2}.
double l2_error(const FieldVec& field, const std::function<double(Point)>& exact);
double l2_error(const FieldVec& field, const std::function<Vec2(Point)>& exact);

// |||exact - field|||_V with sum_K ||eps||^2 + sum_e h_e^{-1} int [.]^2; the
// exact field contributes no interior jumps and its trace on the boundary.
double energy_error(const FieldVec& field, const VectorField& exact);

// Discrete norms of a field (exact argument zero).
double l2_norm(const FieldVec& field);
double energy_norm(const FieldVec& field);

struct ErrorNorms {
  double u_energy = 0.0;
  double u_l2 = 0.0;
  double p_l2 = 0.0;
  double T_l2 = 0.0;
};

ErrorNorms error_norms(const FieldVec& u, const FieldVec& p, const FieldVec& T,
                       const ManufacturedCase& mc, double t);

}  // namespace thermoporo
