#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "thermoporo/assembly.hpp"
#include "thermoporo/dgspace.hpp"
#include "thermoporo/manufactured.hpp"
#include "thermoporo/mesh.hpp"
#include "thermoporo/params.hpp"
#include "thermoporo/projection.hpp"
#include "thermoporo/sparse.hpp"

namespace thermoporo {

// Mesh, spaces and time-independent operators of one run.
struct Discretization {
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const DGSpace> space_u;
  std::shared_ptr<const DGSpace> space_p;
  std::shared_ptr<const DGSpace> space_T;
  MaterialParams params;
  FormMatrices forms;
  SparseMatrix B_p_t;  // B_p^T, V x Q
  SparseMatrix B_T_t;  // B_T^T, V x S
};

Discretization make_discretization(int n_subdiv, int k1, int k2, int k3, const MaterialParams& params);

struct DiscreteState {
  FieldVec u;
  FieldVec p;
  FieldVec T;
  double t = 0.0;

  bool all_finite() const { return u.all_finite() && p.all_finite() && T.all_finite(); }
};

DiscreteState zero_state(const Discretization& d, double t = 0.0);

// Elliptic projections of the initial data at t = 0.
DiscreteState initial_state(const Discretization& d, const ProblemData& data);

// Source load vectors (f, v_h), (g, q_h), (z, s_h) at one time.
struct Loads {
  std::vector<double> f;
  std::vector<double> g;
  std::vector<double> z;
};
Loads assemble_loads(const Discretization& d, const ProblemData& data, double t);

struct StepReport {
  int step = 0;  // index of the level produced
  double t = 0.0;
  // Wall-clock seconds of each field's solve including operator updates.
  // A coupled solve reports its total under all three.
  double solve_p = 0.0;
  double solve_T = 0.0;
  double solve_u = 0.0;
  int picard_iterations = 0;
  std::vector<double> picard_history;  // relative increments
  CutoffStats cutoff;
  // Time level of the pressure that built the convection operator(s).
  double convection_pressure_time = 0.0;
  std::vector<LinearSolveReport> solves;
};

struct PicardOptions {
  double tol = 1e-10;
  int max_iterations = 100;
};

class PicardError : public std::runtime_error {
 public:
  PicardError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

class StepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Direct solves use Cholesky for the SPD systems and LU otherwise, unless
// the options ask for LU or an iterative method throughout.
SolverOptions spd_options(const SolverOptions& base);
SolverOptions general_options(const SolverOptions& base);

// Steps 1-3 of the sequential scheme with step size tau. The pressure and
// displacement matrices are factorized once; the temperature matrix is
// refactorized every step (its convection part follows p^n).
class SdgStepper {
 public:
  SdgStepper(const Discretization& d, double tau, SolverOptions options = {});

  DiscreteState step(const DiscreteState& level_n, const DiscreteState& level_nm1,
                     const Loads& loads, double t_next, StepReport* report = nullptr);

 private:
  const Discretization& d_;
  double tau_;
  SolverOptions options_;
  LinearSolver pressure_solver_;
  LinearSolver temperature_solver_;
  LinearSolver displacement_solver_;
  SparseMatrix temperature_fixed_;  // (a0 / tau) M_T + C_temp
};

// Monolithic backward-Euler step with implicit, uncut convection, solved by
// Picard iteration on the transport field K grad p.
class CoupledStepper {
 public:
  CoupledStepper(const Discretization& d, double tau, PicardOptions picard = {},
                 SolverOptions options = {});

  DiscreteState step(const DiscreteState& level_n, const Loads& loads, double t_next,
                     StepReport* report = nullptr);

 private:
  const Discretization& d_;
  double tau_;
  PicardOptions picard_;
  SolverOptions options_;
  LinearSolver solver_;
  SparseMatrix pressure_block_;     // (c0 / tau) M_p + C_pressure
  SparseMatrix temperature_fixed_;  // (a0 / tau) M_T + C_temp
};

// First level by the three decoupled initial steps (step size tau0).
DiscreteState init_option1(const Discretization& d, const DiscreteState& level0, const Loads& loads,
                           double tau0, SolverOptions options = {}, StepReport* report = nullptr);

// First level by the coupled implicit scheme (step size tau0).
DiscreteState init_option2(const Discretization& d, const DiscreteState& level0, const Loads& loads,
                           double tau0, PicardOptions picard = {}, SolverOptions options = {},
                           StepReport* report = nullptr);

DiscreteState implicit_step(const Discretization& d, const DiscreteState& level_n, const Loads& loads,
                            double tau, PicardOptions picard = {}, SolverOptions options = {},
                            StepReport* report = nullptr);

enum class Scheme { kSdgOption1, kSdgOption2, kImplicit };

std::string_view scheme_name(Scheme scheme);
// Accepts sdg_option1, sdg_option2, implicit.
Scheme parse_scheme(std::string_view name);

struct RunConfig {
  Scheme scheme = Scheme::kSdgOption2;
  double tau0 = 0.0;
  double tau = 0.0;
  double t_final = 1.0;
  PicardOptions picard;
  SolverOptions solver{SolverKind::kCholesky};
  bool keep_trajectory = false;
  std::ostream* log = nullptr;
  // Called with every level, t_0 first.
  std::function<void(int, const DiscreteState&)> observer;
};

struct RunResult {
  std::vector<DiscreteState> trajectory;  // t_0 .. t_N when kept
  DiscreteState final_state;
  std::vector<StepReport> steps;
  CutoffStats cutoff;
  double seconds = 0.0;
};

RunResult run_transient(const Discretization& d, const ProblemData& data, const RunConfig& config);

// The per-step log line.
std::string format_step_log(const StepReport& report);

}  // namespace thermoporo
