#include "thermoporo/timestepper.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <sstream>
#include <utility>

namespace thermoporo {

namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<double> Sub(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

// out += scale * A x
void AddProduct(std::vector<double>& out, double scale, const SparseMatrix& a,
                std::span<const double> x) {
  const std::vector<double> ax = a.multiply(x);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += scale * ax[i];
}

// Load vector, or zeros when the source is absent.
std::vector<double> Copy(const std::vector<double>& v, std::size_t n) {
  return v.empty() ? std::vector<double>(n, 0.0) : v;
}

bool Finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

std::vector<double> SolveChecked(const LinearSolver& solver, const std::vector<double>& rhs,
                                 const char* what, StepReport* report) {
  if (!Finite(rhs)) throw StepError(std::string("non-finite right-hand side in ") + what);
  LinearSolveReport lr;
  std::vector<double> x = solver.solve(rhs, &lr);
  if (report) report->solves.push_back(lr);
  if (!Finite(x)) throw StepError(std::string("non-finite solution in ") + what);
  return x;
}

double MassNormSquared(const SparseMatrix& m, std::span<const double> x) {
  const std::vector<double> mx = m.multiply(x);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * mx[i];
  return s;
}

}  // namespace

Discretization make_discretization(int n_subdiv, int k1, int k2, int k3, const MaterialParams& params) {
  Discretization d;
  d.mesh = std::make_shared<const Mesh>(Mesh::uniform(n_subdiv));
  d.space_u = make_space(d.mesh, k1, 2);
  d.space_p = make_space(d.mesh, k2, 1);
  d.space_T = make_space(d.mesh, k3, 1);
  d.params = params;
  d.forms = assemble_forms(*d.space_u, *d.space_p, *d.space_T, params);
  d.B_p_t = d.forms.B_p.transposed();
  d.B_T_t = d.forms.B_T.transposed();
  return d;
}

DiscreteState zero_state(const Discretization& d, double t) {
  return {FieldVec(d.space_u), FieldVec(d.space_p), FieldVec(d.space_T), t};
}

DiscreteState initial_state(const Discretization& d, const ProblemData& data) {
  DiscreteState s{project_displacement(data.u0, d.space_u, d.params),
                  project_pressure(data.p0, d.space_p, d.params),
                  project_temperature(data.T0, data.p0.grad, d.space_T, d.params), 0.0};
  return s;
}

Loads assemble_loads(const Discretization& d, const ProblemData& data, double t) {
  Loads l;
  if (data.f) {
    l.f = assemble_load(*d.space_u, std::function<Vec2(Point)>([&](Point x) { return data.f(t, x); }));
  } else {
    l.f.assign(d.space_u->global_dim(), 0.0);
  }
  if (data.g) {
    l.g = assemble_load(*d.space_p, std::function<double(Point)>([&](Point x) { return data.g(t, x); }));
  } else {
    l.g.assign(d.space_p->global_dim(), 0.0);
  }
  if (data.z) {
    l.z = assemble_load(*d.space_T, std::function<double(Point)>([&](Point x) { return data.z(t, x); }));
  } else {
    l.z.assign(d.space_T->global_dim(), 0.0);
  }
  return l;
}

SolverOptions spd_options(const SolverOptions& base) { return base; }

SolverOptions general_options(const SolverOptions& base) {
  SolverOptions o = base;
  if (o.kind == SolverKind::kCholesky) o.kind = SolverKind::kLU;
  return o;
}

// ---------------------------------------------------------------------------

SdgStepper::SdgStepper(const Discretization& d, double tau, SolverOptions options)
    : d_(d),
      tau_(tau),
      options_(options),
      pressure_solver_(spd_options(options)),
      temperature_solver_(general_options(options)),
      displacement_solver_(spd_options(options)) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  const FormMatrices& f = d.forms;
  const MaterialParams& m = d.params;
  pressure_solver_.factorize(linear_combination({{m.c0 / tau, &f.M_p}, {1.0, &f.C_pressure}}));
  displacement_solver_.factorize(linear_combination({{1.0, &f.A_elast}, {m.gamma / tau, &f.M_u}}));
  temperature_fixed_ = linear_combination({{m.a0 / tau, &f.M_T}, {1.0, &f.C_temp}});
}

DiscreteState SdgStepper::step(const DiscreteState& level_n, const DiscreteState& level_nm1,
                               const Loads& loads, double t_next, StepReport* report) {
  const FormMatrices& f = d_.forms;
  const MaterialParams& m = d_.params;
  const double tau = tau_;
  const std::vector<double> du = Sub(level_n.u.coeffs(), level_nm1.u.coeffs());

  // Step 1: pressure.
  auto start = Clock::now();
  std::vector<double> rhs = Copy(loads.g, d_.space_p->global_dim());
  AddProduct(rhs, m.c0 / tau, f.M_p, level_n.p.coeffs());
  AddProduct(rhs, m.b0 / tau, f.M_pT, Sub(level_n.T.coeffs(), level_nm1.T.coeffs()));
  AddProduct(rhs, -m.alpha / tau, f.B_p, du);
  FieldVec p_next(d_.space_p, SolveChecked(pressure_solver_, rhs, "pressure step", report));
  if (report) report->solve_p = SecondsSince(start);

  // Step 2: temperature, convection from the lagged pressure p^n.
  start = Clock::now();
  CutoffStats stats;
  const SparseMatrix conv =
      assemble_convection(*d_.space_T, level_n.p, m, CutoffMode::kApply, &stats);
  temperature_solver_.factorize(linear_combination({{1.0, &temperature_fixed_}, {-1.0, &conv}}));
  rhs = Copy(loads.z, d_.space_T->global_dim());
  AddProduct(rhs, m.a0 / tau, f.M_T, level_n.T.coeffs());
  AddProduct(rhs, m.b0 / tau, f.M_Tp, Sub(p_next.coeffs(), level_n.p.coeffs()));
  AddProduct(rhs, -m.beta / tau, f.B_T, du);
  FieldVec T_next(d_.space_T, SolveChecked(temperature_solver_, rhs, "temperature step", report));
  if (report) report->solve_T = SecondsSince(start);

  // Step 3: displacement with both new scalars.
  start = Clock::now();
  rhs = Copy(loads.f, d_.space_u->global_dim());
  AddProduct(rhs, m.alpha, d_.B_p_t, p_next.coeffs());
  AddProduct(rhs, m.beta, d_.B_T_t, T_next.coeffs());
  std::vector<double> u_stab(du.size());
  for (std::size_t i = 0; i < du.size(); ++i) u_stab[i] = level_n.u.coeffs()[i] + du[i];
  AddProduct(rhs, m.gamma / tau, f.M_u, u_stab);
  FieldVec u_next(d_.space_u, SolveChecked(displacement_solver_, rhs, "displacement step", report));
  if (report) {
    report->solve_u = SecondsSince(start);
    report->t = t_next;
    report->cutoff = stats;
    report->convection_pressure_time = level_n.t;
  }
  return {std::move(u_next), std::move(p_next), std::move(T_next), t_next};
}

// ---------------------------------------------------------------------------

CoupledStepper::CoupledStepper(const Discretization& d, double tau, PicardOptions picard,
                               SolverOptions options)
    : d_(d), tau_(tau), picard_(picard), options_(general_options(options)), solver_(options_) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  if (picard.max_iterations < 1) throw std::invalid_argument("picard_max must be >= 1");
  const FormMatrices& f = d.forms;
  const MaterialParams& m = d.params;
  pressure_block_ = linear_combination({{m.c0 / tau, &f.M_p}, {1.0, &f.C_pressure}});
  temperature_fixed_ = linear_combination({{m.a0 / tau, &f.M_T}, {1.0, &f.C_temp}});
}

DiscreteState CoupledStepper::step(const DiscreteState& level_n, const Loads& loads, double t_next,
                                   StepReport* report) {
  const auto start = Clock::now();
  const FormMatrices& f = d_.forms;
  const MaterialParams& m = d_.params;
  const double tau = tau_;
  const std::size_t nu = d_.space_u->global_dim();
  const std::size_t np = d_.space_p->global_dim();
  const std::size_t nT = d_.space_T->global_dim();

  // Right-hand side does not change across Picard iterations.
  std::vector<double> rhs_u = Copy(loads.f, nu);
  std::vector<double> rhs_p = Copy(loads.g, np);
  AddProduct(rhs_p, m.c0 / tau, f.M_p, level_n.p.coeffs());
  AddProduct(rhs_p, -m.b0 / tau, f.M_pT, level_n.T.coeffs());
  AddProduct(rhs_p, m.alpha / tau, f.B_p, level_n.u.coeffs());
  std::vector<double> rhs_T = Copy(loads.z, nT);
  AddProduct(rhs_T, m.a0 / tau, f.M_T, level_n.T.coeffs());
  AddProduct(rhs_T, -m.b0 / tau, f.M_Tp, level_n.p.coeffs());
  AddProduct(rhs_T, m.beta / tau, f.B_T, level_n.u.coeffs());
  std::vector<double> rhs;
  rhs.reserve(nu + np + nT);
  rhs.insert(rhs.end(), rhs_u.begin(), rhs_u.end());
  rhs.insert(rhs.end(), rhs_p.begin(), rhs_p.end());
  rhs.insert(rhs.end(), rhs_T.begin(), rhs_T.end());

  const std::size_t sizes[] = {nu, np, nT};
  std::vector<double> x;
  x.reserve(nu + np + nT);
  x.insert(x.end(), level_n.u.coeffs().begin(), level_n.u.coeffs().end());
  x.insert(x.end(), level_n.p.coeffs().begin(), level_n.p.coeffs().end());
  x.insert(x.end(), level_n.T.coeffs().begin(), level_n.T.coeffs().end());

  FieldVec transport_p = level_n.p;
  std::vector<double> history;
  bool converged = false;
  for (int it = 1; it <= picard_.max_iterations; ++it) {
    const SparseMatrix conv = assemble_convection(*d_.space_T, transport_p, m, CutoffMode::kNone);
    const Block blocks[] = {
        {0, 0, 1.0, &f.A_elast},           {0, 1, -m.alpha, &d_.B_p_t},
        {0, 2, -m.beta, &d_.B_T_t},        {1, 0, m.alpha / tau, &f.B_p},
        {1, 1, 1.0, &pressure_block_},     {1, 2, -m.b0 / tau, &f.M_pT},
        {2, 0, m.beta / tau, &f.B_T},      {2, 1, -m.b0 / tau, &f.M_Tp},
        {2, 2, 1.0, &temperature_fixed_},  {2, 2, -1.0, &conv},
    };
    solver_.factorize(block_matrix(sizes, sizes, blocks));
    std::vector<double> x_new = SolveChecked(solver_, rhs, "coupled step", report);

    const std::span<const double> xs(x_new);
    const std::vector<double> dx = Sub(x_new, x);
    const std::span<const double> ds(dx);
    const double inc = MassNormSquared(f.M_u, ds.subspan(0, nu)) +
                       MassNormSquared(f.M_p, ds.subspan(nu, np)) +
                       MassNormSquared(f.M_T, ds.subspan(nu + np, nT));
    const double size = MassNormSquared(f.M_u, xs.subspan(0, nu)) +
                        MassNormSquared(f.M_p, xs.subspan(nu, np)) +
                        MassNormSquared(f.M_T, xs.subspan(nu + np, nT));
    const double rel = size > 0.0 ? std::sqrt(inc / size) : std::sqrt(inc);
    history.push_back(rel);
    x = std::move(x_new);
    std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(nu), np, transport_p.coeffs().begin());
    if (rel <= picard_.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream os;
    os << "Picard iteration did not converge in " << picard_.max_iterations
       << " iterations (last relative increment " << history.back() << ")";
    throw PicardError(os.str(), history);
  }

  const auto begin = x.begin();
  DiscreteState out{FieldVec(d_.space_u, std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(nu))),
                    FieldVec(d_.space_p, std::vector<double>(begin + static_cast<std::ptrdiff_t>(nu),
                                                             begin + static_cast<std::ptrdiff_t>(nu + np))),
                    FieldVec(d_.space_T, std::vector<double>(begin + static_cast<std::ptrdiff_t>(nu + np), x.end())),
                    t_next};
  if (report) {
    const double seconds = SecondsSince(start);
    report->t = t_next;
    report->solve_p = report->solve_T = report->solve_u = seconds;
    report->picard_iterations = static_cast<int>(history.size());
    report->picard_history = std::move(history);
    // The converged transport field is the pressure of the new level.
    report->convection_pressure_time = t_next;
  }
  return out;
}

// ---------------------------------------------------------------------------

DiscreteState init_option1(const Discretization& d, const DiscreteState& level0, const Loads& loads,
                           double tau0, SolverOptions options, StepReport* report) {
  if (!(tau0 > 0.0)) throw std::invalid_argument("tau0 must be > 0");
  const FormMatrices& f = d.forms;
  const MaterialParams& m = d.params;
  const double t1 = level0.t + tau0;

  // Initial Step 1: no temperature increment, no divergence term.
  auto start = Clock::now();
  LinearSolver ps(spd_options(options));
  ps.factorize(linear_combination({{m.c0 / tau0, &f.M_p}, {1.0, &f.C_pressure}}));
  std::vector<double> rhs = Copy(loads.g, d.space_p->global_dim());
  AddProduct(rhs, m.c0 / tau0, f.M_p, level0.p.coeffs());
  FieldVec p1(d.space_p, SolveChecked(ps, rhs, "initial pressure step", report));
  if (report) report->solve_p = SecondsSince(start);

  // Initial Step 2: pressure increment and cut-off convection from p^0.
  start = Clock::now();
  CutoffStats stats;
  const SparseMatrix conv = assemble_convection(*d.space_T, level0.p, m, CutoffMode::kApply, &stats);
  LinearSolver ts(general_options(options));
  ts.factorize(linear_combination({{m.a0 / tau0, &f.M_T}, {1.0, &f.C_temp}, {-1.0, &conv}}));
  rhs = Copy(loads.z, d.space_T->global_dim());
  AddProduct(rhs, m.a0 / tau0, f.M_T, level0.T.coeffs());
  AddProduct(rhs, m.b0 / tau0, f.M_Tp, Sub(p1.coeffs(), level0.p.coeffs()));
  FieldVec T1(d.space_T, SolveChecked(ts, rhs, "initial temperature step", report));
  if (report) report->solve_T = SecondsSince(start);

  // Initial Step 3: elasticity without stabilization.
  start = Clock::now();
  LinearSolver us(spd_options(options));
  us.factorize(f.A_elast);
  rhs = Copy(loads.f, d.space_u->global_dim());
  AddProduct(rhs, m.alpha, d.B_p_t, p1.coeffs());
  AddProduct(rhs, m.beta, d.B_T_t, T1.coeffs());
  FieldVec u1(d.space_u, SolveChecked(us, rhs, "initial displacement step", report));
  if (report) {
    report->solve_u = SecondsSince(start);
    report->t = t1;
    report->cutoff = stats;
    report->convection_pressure_time = level0.t;
  }
  return {std::move(u1), std::move(p1), std::move(T1), t1};
}

DiscreteState init_option2(const Discretization& d, const DiscreteState& level0, const Loads& loads,
                           double tau0, PicardOptions picard, SolverOptions options,
                           StepReport* report) {
  CoupledStepper stepper(d, tau0, picard, options);
  return stepper.step(level0, loads, level0.t + tau0, report);
}

DiscreteState implicit_step(const Discretization& d, const DiscreteState& level_n, const Loads& loads,
                            double tau, PicardOptions picard, SolverOptions options,
                            StepReport* report) {
  CoupledStepper stepper(d, tau, picard, options);
  return stepper.step(level_n, loads, level_n.t + tau, report);
}

std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::kSdgOption1:
      return "sdg_option1";
    case Scheme::kSdgOption2:
      return "sdg_option2";
    case Scheme::kImplicit:
      return "implicit";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "sdg_option1") return Scheme::kSdgOption1;
  if (name == "sdg_option2") return Scheme::kSdgOption2;
  if (name == "implicit") return Scheme::kImplicit;
  throw std::invalid_argument("unknown scheme '" + std::string(name) +
                              "' (expected sdg_option1, sdg_option2 or implicit)");
}

std::string format_step_log(const StepReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "step=%d t=%.6g solve_p=%.6f solve_T=%.6f solve_u=%.6f picard_iters=%d",
                r.step, r.t, r.solve_p, r.solve_T, r.solve_u, r.picard_iterations);
  return buf;
}

RunResult run_transient(const Discretization& d, const ProblemData& data, const RunConfig& config) {
  const auto start = Clock::now();
  const TimeGrid grid(config.tau0, config.tau, config.t_final);
  RunResult result{{}, zero_state(d), {}, {}, 0.0};

  DiscreteState prev = initial_state(d, data);
  if (config.observer) config.observer(0, prev);
  if (config.keep_trajectory) result.trajectory.push_back(prev);

  auto record = [&](StepReport& rep, int n, const DiscreteState& s) {
    rep.step = n;
    if (config.log) *config.log << format_step_log(rep) << '\n';
    result.cutoff.evaluated += rep.cutoff.evaluated;
    result.cutoff.clamped += rep.cutoff.clamped;
    if (!s.all_finite()) throw StepError("non-finite state at step " + std::to_string(n));
    if (config.observer) config.observer(n, s);
    if (config.keep_trajectory) result.trajectory.push_back(s);
    result.steps.push_back(std::move(rep));
  };

  // First level.
  StepReport rep;
  const Loads loads1 = assemble_loads(d, data, grid.time(1));
  DiscreteState curr = [&] {
    switch (config.scheme) {
      case Scheme::kSdgOption1:
        return init_option1(d, prev, loads1, grid.tau0(), config.solver, &rep);
      case Scheme::kSdgOption2:
      case Scheme::kImplicit:
        break;
    }
    return init_option2(d, prev, loads1, grid.tau0(), config.picard, config.solver, &rep);
  }();
  curr.t = grid.time(1);
  record(rep, 1, curr);

  const int n_levels = grid.num_steps();
  if (config.scheme == Scheme::kImplicit) {
    CoupledStepper stepper(d, grid.tau(), config.picard, config.solver);
    for (int n = 2; n <= n_levels; ++n) {
      StepReport r;
      DiscreteState next = stepper.step(curr, assemble_loads(d, data, grid.time(n)), grid.time(n), &r);
      record(r, n, next);
      curr = std::move(next);
    }
  } else {
    SdgStepper stepper(d, grid.tau(), config.solver);
    for (int n = 2; n <= n_levels; ++n) {
      StepReport r;
      DiscreteState next =
          stepper.step(curr, prev, assemble_loads(d, data, grid.time(n)), grid.time(n), &r);
      record(r, n, next);
      prev = std::move(curr);
      curr = std::move(next);
    }
  }
  result.final_state = std::move(curr);
  result.seconds = SecondsSince(start);
  return result;
}

}  // namespace thermoporo
