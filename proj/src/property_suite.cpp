#include "thermoporo/property_suite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "thermoporo/assembly.hpp"
#include "thermoporo/manufactured.hpp"
#include "thermoporo/projection.hpp"
#include "thermoporo/timestepper.hpp"

namespace thermoporo {

namespace {

std::string Sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string Fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

template <typename Fn>
CheckResult Guard(std::string name, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return {std::move(name), false, std::string("exception: ") + e.what()};
  }
}

std::vector<double> RandomVector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// int over the boundary of q v.n, from traces on the single incident element.
double BoundaryFlux(const FieldVec& v, const FieldVec& q) {
  const Mesh& mesh = v.space().mesh();
  const EdgeRule rule = edge_quadrature(2 * std::max(v.space().degree(), q.space().degree()) + 2);
  double sum = 0.0;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edge(e);
    if (!edge.is_boundary()) continue;
    const EdgePoints pts = edge_points(mesh, e, rule);
    const auto k = static_cast<std::size_t>(edge.plus);
    const PointValues pv = eval_on_element(v, k, pts.ref_plus);
    const PointValues pq = eval_on_element(q, k, pts.ref_plus);
    for (std::size_t i = 0; i < rule.size(); ++i) {
      sum += pts.weights[i] * pq.at(0, i) *
             (pv.at(0, i) * edge.normal.x + pv.at(1, i) * edge.normal.y);
    }
  }
  return sum;
}

double MaxAbs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double Rate(double coarse, double fine, double ratio) { return std::log(coarse / fine) / std::log(ratio); }

}  // namespace

CouplingComparison compare_coupling_expressions(int n_subdiv, int degree, int samples,
                                                std::uint64_t seed) {
  auto mesh = std::make_shared<const Mesh>(Mesh::uniform(n_subdiv));
  auto su = make_space(mesh, degree, 2);
  auto sq = make_space(mesh, degree, 1);
  const SparseMatrix grad_form = assemble_coupling(*su, *sq, CouplingForm::kGradient);
  const SparseMatrix div_form = assemble_coupling(*su, *sq, CouplingForm::kDivergence);
  std::mt19937_64 rng(seed);
  CouplingComparison c;
  c.samples = samples;
  for (int s = 0; s < samples; ++s) {
    const FieldVec v(su, RandomVector(su->global_dim(), rng));
    const FieldVec q(sq, RandomVector(sq->global_dim(), rng));
    const double bg = Dot(q.coeffs(), grad_form.multiply(v.coeffs()));
    const double bd = Dot(q.coeffs(), div_form.multiply(v.coeffs()));
    c.max_expression_gap = std::max(c.max_expression_gap, std::abs(bg - bd));
    c.max_identity_gap = std::max(c.max_identity_gap, std::abs(bd - bg - BoundaryFlux(v, q)));
    c.max_magnitude = std::max(c.max_magnitude, std::abs(bg));
  }
  return c;
}

CheckResult check_form_symmetry() {
  const std::string name = "form symmetry (a, c) <= 1e-10";
  return Guard(name, [&] {
    double worst = 0.0;
    std::ostringstream detail;
    for (int n : {2, 4}) {
      const Discretization d = make_discretization(n, 1, 1, 1, preset("PA1"));
      const double a = d.forms.A_elast.max_abs_asymmetry();
      const double cp = d.forms.C_pressure.max_abs_asymmetry();
      const double ct = d.forms.C_temp.max_abs_asymmetry();
      worst = std::max({worst, a, cp, ct});
      detail << "n=" << n << ": a " << Sci(a) << ", c(K) " << Sci(cp) << ", c(Theta) " << Sci(ct)
             << "; ";
    }
    return CheckResult{name, worst <= 1e-10, detail.str()};
  });
}

CheckResult check_coupling_expressions(std::uint64_t seed) {
  const std::string name = "coupling: gradient and divergence expressions agree <= 1e-10 (50 random inputs)";
  return Guard(name, [&] {
    const CouplingComparison c = compare_coupling_expressions(4, 1, 50, seed);
    std::ostringstream detail;
    detail << "max |b_grad - b_div| = " << Sci(c.max_expression_gap)
           << "; the gap equals the boundary flux int q v.n to " << Sci(c.max_identity_gap)
           << " (interior-only face sums differ by that term for fields nonzero on the boundary)";
    return CheckResult{name, c.max_expression_gap <= 1e-10, detail.str()};
  });
}

CheckResult check_coupling_identity(std::uint64_t seed) {
  const std::string name = "coupling: b_div - b_grad = boundary flux <= 1e-10 (50 random inputs)";
  return Guard(name, [&] {
    const CouplingComparison c = compare_coupling_expressions(4, 1, 50, seed);
    return CheckResult{name, c.max_identity_gap <= 1e-10,
                       "max gap " + Sci(c.max_identity_gap) + ", max |b| " + Sci(c.max_magnitude)};
  });
}

CheckResult check_cutoff(std::uint64_t seed) {
  const std::string name = "cut-off: analytic cases and Lipschitz bound (1000 pairs)";
  return Guard(name, [&] {
    bool ok = true;
    std::ostringstream detail;
    const Vec2 inside = cutoff({500.0, 0.0}, 1000.0);
    ok = ok && inside == Vec2{500.0, 0.0};
    const Vec2 clamped = cutoff({3.0, 4.0}, 1.0);
    ok = ok && std::abs(clamped.x - 0.6) <= 1e-15 && std::abs(clamped.y - 0.8) <= 1e-15;
    const Vec2 zero = cutoff({0.0, 0.0}, 1.0);
    ok = ok && zero == Vec2{};
    detail << "analytic cases " << (ok ? "ok" : "FAILED");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    std::uniform_real_distribution<double> mdist(0.1, 2.0);
    double worst = -1e300;
    double worst_bound = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double m = mdist(rng);
      const Vec2 z1{dist(rng), dist(rng)};
      const Vec2 z2{dist(rng), dist(rng)};
      const Vec2 c1 = cutoff(z1, m);
      const Vec2 c2 = cutoff(z2, m);
      worst = std::max(worst, norm(c1 - c2) - norm(z1 - z2));
      worst_bound = std::max({worst_bound, norm(c1) - m, norm(c2) - m});
    }
    const bool lipschitz = worst <= 1e-15;
    const bool bounded = worst_bound <= 1e-12;
    detail << "; max (|M(z1)-M(z2)| - |z1-z2|) = " << Sci(worst)
           << "; max (|M(z)| - M) = " << Sci(worst_bound);
    return CheckResult{name, ok && lipschitz && bounded, detail.str()};
  });
}

CheckResult check_projection_reproduction() {
  const std::string name = "projections reproduce in-space fields (L2) <= 1e-10";
  return Guard(name, [&] {
    const MaterialParams params = preset("PA1");
    auto mesh = std::make_shared<const Mesh>(Mesh::uniform(4));
    auto su = make_space(mesh, 1, 2);
    auto ss = make_space(mesh, 1, 1);
    const VectorField u{[](Point x) { return Vec2{x.x + 0.5 * x.y, x.y - 0.25}; },
                        [](Point) { return Mat2{1.0, 0.5, 0.0, 1.0}; }};
    const ScalarField p{[](Point x) { return 1.0 + 2.0 * x.x - x.y; },
                        [](Point) { return Vec2{2.0, -1.0}; }};
    const FieldVec ru = project_displacement(u, su, params);
    const FieldVec rp = project_pressure(p, ss, params);
    const FieldVec rt = project_temperature(p, p.grad, ss, params);
    const FieldVec iu = interpolate(su, u.value);
    const FieldVec ip = interpolate(ss, p.value);
    double nodal = 0.0;
    for (std::size_t i = 0; i < iu.coeffs().size(); ++i) {
      nodal = std::max(nodal, std::abs(ru.coeffs()[i] - iu.coeffs()[i]));
    }
    for (std::size_t i = 0; i < ip.coeffs().size(); ++i) {
      nodal = std::max({nodal, std::abs(rp.coeffs()[i] - ip.coeffs()[i]),
                        std::abs(rt.coeffs()[i] - ip.coeffs()[i])});
    }
    const double worst = std::max({l2_error(ru, u.value), l2_error(rp, p.value), l2_error(rt, p.value)});
    return CheckResult{name, worst <= 1e-10,
                       "max L2 error " + Sci(worst) + ", max nodal error " + Sci(nodal)};
  });
}

CheckResult check_projection_rates() {
  const std::string name = "projection rates >= (0.9, 1.9, 1.9) over h = 1/8 -> 1/32";
  return Guard(name, [&] {
    const MaterialParams params = preset("PA1");
    const ManufacturedCase mc(params);
    const int sizes[] = {8, 16, 32};
    std::vector<double> eu;
    std::vector<double> eul2;
    std::vector<double> ep;
    std::vector<double> et;
    for (int n : sizes) {
      auto mesh = std::make_shared<const Mesh>(Mesh::uniform(n));
      auto su = make_space(mesh, 1, 2);
      auto ss = make_space(mesh, 1, 1);
      const FieldVec ru = project_displacement(mc.displacement(0.0), su, params);
      eu.push_back(energy_error(ru, mc.displacement(0.0)));
      eul2.push_back(l2_error(ru, std::function<Vec2(Point)>([&](Point x) { return mc.u(0.0, x); })));
      const FieldVec rp = project_pressure(mc.pressure(1.0), ss, params);
      ep.push_back(l2_error(rp, std::function<double(Point)>([&](Point x) { return mc.p(1.0, x); })));
      const FieldVec rt = project_temperature(mc.temperature(1.0),
                                              [&](Point x) { return mc.grad_p(1.0, x); }, ss, params);
      et.push_back(l2_error(rt, std::function<double(Point)>([&](Point x) { return mc.T(1.0, x); })));
    }
    double ru_min = 1e300, rul2_min = 1e300, rp_min = 1e300, rt_min = 1e300;
    for (std::size_t i = 1; i < eu.size(); ++i) {
      ru_min = std::min(ru_min, Rate(eu[i - 1], eu[i], 2.0));
      rul2_min = std::min(rul2_min, Rate(eul2[i - 1], eul2[i], 2.0));
      rp_min = std::min(rp_min, Rate(ep[i - 1], ep[i], 2.0));
      rt_min = std::min(rt_min, Rate(et[i - 1], et[i], 2.0));
    }
    const bool ok = ru_min >= 0.9 && rul2_min >= 1.9 && rp_min >= 1.9 && rt_min >= 1.9;
    std::ostringstream detail;
    detail << "min pair rates: u energy " << Fixed(ru_min) << ", u L2 " << Fixed(rul2_min)
           << ", p L2 " << Fixed(rp_min) << ", T L2 " << Fixed(rt_min);
    return CheckResult{name, ok, detail.str()};
  });
}

CheckResult check_zero_data() {
  const std::string name = "zero data gives a zero trajectory for every scheme <= 1e-12";
  return Guard(name, [&] {
    const Discretization d = make_discretization(4, 1, 1, 1, preset("PA1"));
    const ProblemData data = zero_problem();
    double worst = 0.0;
    std::ostringstream detail;
    for (Scheme s : {Scheme::kSdgOption1, Scheme::kSdgOption2, Scheme::kImplicit}) {
      RunConfig rc;
      rc.scheme = s;
      rc.tau = 0.125;
      rc.tau0 = s == Scheme::kSdgOption1 ? 1e-6 : rc.tau;
      rc.t_final = s == Scheme::kSdgOption1 ? 1.0 + 1e-6 : 1.0;
      double m = 0.0;
      rc.observer = [&](int, const DiscreteState& st) {
        m = std::max({m, MaxAbs(st.u.coeffs()), MaxAbs(st.p.coeffs()), MaxAbs(st.T.coeffs())});
      };
      const RunResult r = run_transient(d, data, rc);
      worst = std::max(worst, m);
      detail << scheme_name(s) << " max " << Sci(m) << " (" << r.steps.size() << " steps); ";
    }
    return CheckResult{name, worst <= 1e-12, detail.str()};
  });
}

CheckResult check_stability() {
  const std::string name =
      "stability: max-in-time and final state norms vary < 5% over tau = h^2, h^2/2, h^2/4 (h = 1/16)";
  return Guard(name, [&] {
    const MaterialParams params = preset("PA1");
    const ManufacturedCase mc(params);
    const Discretization d = make_discretization(16, 1, 1, 1, params);
    const ProblemData data = mc.problem();
    std::vector<double> maxima;
    std::vector<double> finals;
    std::ostringstream detail;
    for (int refine : {1, 2, 4}) {
      RunConfig rc;
      rc.scheme = Scheme::kSdgOption2;
      rc.tau = 1.0 / (256.0 * refine);
      rc.tau0 = rc.tau;
      rc.t_final = 1.0;
      double m = 0.0;
      double last = 0.0;
      rc.observer = [&](int, const DiscreteState& st) {
        last = l2_norm(st.p) + l2_norm(st.T) + energy_norm(st.u);
        m = std::max(m, last);
      };
      run_transient(d, data, rc);
      maxima.push_back(m);
      finals.push_back(last);
      detail << "tau=h^2/" << refine << ": max " << Sci(m) << ", final " << Sci(last) << "; ";
    }
    auto spread = [](const std::vector<double>& v) {
      const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
      return (*hi - *lo) / *hi;
    };
    const double vmax = spread(maxima);
    const double vfinal = spread(finals);
    detail << "relative variation max " << Sci(vmax) << ", final " << Sci(vfinal);
    return CheckResult{name, vmax < 0.05 && vfinal < 0.05, detail.str()};
  });
}

CheckResult check_source_residual(std::uint64_t seed) {
  const std::string name = "manufactured sources: finite-difference residual <= 1e-5 (100 points)";
  return Guard(name, [&] {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> inner(0.01, 0.99);
    double worst = 0.0;
    MaterialParams general = preset("PA3");
    general.K = {2.0, 0.3, 0.3, 1.0};
    general.Theta = {1.5, -0.2, -0.2, 0.7};
    general.lambda = 2.0;
    const ManufacturedCase cases[] = {ManufacturedCase(preset("PA1")), ManufacturedCase(general)};
    for (int i = 0; i < 100; ++i) {
      const double t = unit(rng);
      const Point x{inner(rng), inner(rng)};
      for (const ManufacturedCase& mc : cases) {
        const PdeResidual r = finite_difference_residual(mc, t, x);
        worst = std::max({worst, std::abs(r.momentum.x), std::abs(r.momentum.y), std::abs(r.mass),
                          std::abs(r.energy)});
      }
    }
    return CheckResult{name, worst <= 1e-5, "max residual " + Sci(worst)};
  });
}

CheckResult check_solvability() {
  const std::string name = "solvability: per-step factorizations succeed for every configured (h, tau)";
  return Guard(name, [&] {
    const MaterialParams params = preset("PA1");
    const ManufacturedCase mc(params);
    std::ostringstream detail;
    for (int n : {4, 8, 16, 32}) {
      const Discretization d = make_discretization(n, 1, 1, 1, params);
      const double tau = 1.0 / (static_cast<double>(n) * n);
      const FormMatrices& f = d.forms;
      LinearSolver chol(SolverOptions{SolverKind::kCholesky});
      chol.factorize(linear_combination({{params.c0 / tau, &f.M_p}, {1.0, &f.C_pressure}}));
      chol.factorize(linear_combination({{1.0, &f.A_elast}, {params.gamma / tau, &f.M_u}}));
      const FieldVec p1 = project_pressure(mc.pressure(1.0), d.space_p, params);
      const SparseMatrix conv = assemble_convection(*d.space_T, p1, params);
      LinearSolver lu(SolverOptions{SolverKind::kLU});
      lu.factorize(linear_combination({{params.a0 / tau, &f.M_T}, {1.0, &f.C_temp}, {-1.0, &conv}}));
      detail << "n=" << n << " ok; ";
    }
    return CheckResult{name, true, detail.str() + "S_p, S_u Cholesky and S_T LU factorized"};
  });
}

std::vector<NamedCheck> property_checks(std::uint64_t seed) {
  return {
      {"symmetry", [] { return check_form_symmetry(); }},
      {"coupling", [seed] { return check_coupling_expressions(seed); }},
      {"coupling_identity", [seed] { return check_coupling_identity(seed); }},
      {"cutoff", [seed] { return check_cutoff(seed); }},
      {"projection_reproduction", [] { return check_projection_reproduction(); }},
      {"projection_rates", [] { return check_projection_rates(); }},
      {"zero_data", [] { return check_zero_data(); }},
      {"stability", [] { return check_stability(); }},
      {"source_residual", [seed] { return check_source_residual(seed); }},
      {"solvability", [] { return check_solvability(); }},
  };
}

}  // namespace thermoporo
