#include "thermoporo/manufactured.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace thermoporo {

namespace {

constexpr double kPi = std::numbers::pi;

// s = sin(pi x) sin(pi y) with first and second derivatives.
struct Shape {
  double s, sx, sy, sxx, sxy, syy;
};

Shape EvalShape(Point x) {
  const double sa = std::sin(kPi * x.x);
  const double ca = std::cos(kPi * x.x);
  const double sb = std::sin(kPi * x.y);
  const double cb = std::cos(kPi * x.y);
  const double pi2 = kPi * kPi;
  return {sa * sb, kPi * ca * sb, kPi * sa * cb, -pi2 * sa * sb, pi2 * ca * cb, -pi2 * sa * sb};
}

double HessianContract(const Mat2& m, const Shape& s) {
  return m.xx * s.sxx + (m.xy + m.yx) * s.sxy + m.yy * s.syy;
}

}  // namespace

ProblemData zero_problem() {
  ProblemData d;
  d.u0 = {[](Point) { return Vec2{}; }, [](Point) { return Mat2{}; }};
  d.p0 = {[](Point) { return 0.0; }, [](Point) { return Vec2{}; }};
  d.T0 = d.p0;
  return d;
}

ManufacturedCase::ManufacturedCase(MaterialParams params) : params_(params) {}

Vec2 ManufacturedCase::u(double t, Point x) const {
  const double v = std::exp(-t) * EvalShape(x).s;
  return {v, v};
}

Mat2 ManufacturedCase::grad_u(double t, Point x) const {
  const Shape s = EvalShape(x);
  const double e = std::exp(-t);
  return {e * s.sx, e * s.sy, e * s.sx, e * s.sy};
}

double ManufacturedCase::p(double t, Point x) const { return t * EvalShape(x).s; }

Vec2 ManufacturedCase::grad_p(double t, Point x) const {
  const Shape s = EvalShape(x);
  return {t * s.sx, t * s.sy};
}

double ManufacturedCase::T(double t, Point x) const { return std::exp(-t) * EvalShape(x).s; }

Vec2 ManufacturedCase::grad_T(double t, Point x) const {
  const Shape s = EvalShape(x);
  const double e = std::exp(-t);
  return {e * s.sx, e * s.sy};
}

ExactValues ManufacturedCase::exact(double t, Point x) const { return {u(t, x), p(t, x), T(t, x)}; }

Vec2 ManufacturedCase::f(double t, Point x) const {
  const Shape s = EvalShape(x);
  const double e = std::exp(-t);
  const MaterialParams& m = params_;
  const double lap = e * (s.sxx + s.syy);
  const Vec2 grad_div{e * (s.sxx + s.sxy), e * (s.sxy + s.syy)};
  const Vec2 grad_s{s.sx, s.sy};
  return Vec2{-m.mu * lap, -m.mu * lap} + (-(m.lambda + m.mu)) * grad_div +
         (m.alpha * t + m.beta * e) * grad_s;
}

double ManufacturedCase::g(double t, Point x) const {
  const Shape s = EvalShape(x);
  const double e = std::exp(-t);
  const MaterialParams& m = params_;
  return m.c0 * s.s + m.b0 * e * s.s - m.alpha * e * (s.sx + s.sy) - t * HessianContract(m.K, s);
}

double ManufacturedCase::z(double t, Point x) const {
  const Shape s = EvalShape(x);
  const double e = std::exp(-t);
  const MaterialParams& m = params_;
  const Vec2 grad_s{s.sx, s.sy};
  const double convection = t * e * dot(m.K * grad_s, grad_s);
  return -m.a0 * e * s.s - m.b0 * s.s - m.beta * e * (s.sx + s.sy) - convection -
         e * HessianContract(m.Theta, s);
}

SourceValues ManufacturedCase::sources(double t, Point x) const { return {f(t, x), g(t, x), z(t, x)}; }

VectorField ManufacturedCase::displacement(double t) const {
  return {[self = *this, t](Point x) { return self.u(t, x); },
          [self = *this, t](Point x) { return self.grad_u(t, x); }};
}

ScalarField ManufacturedCase::pressure(double t) const {
  return {[self = *this, t](Point x) { return self.p(t, x); },
          [self = *this, t](Point x) { return self.grad_p(t, x); }};
}

ScalarField ManufacturedCase::temperature(double t) const {
  return {[self = *this, t](Point x) { return self.T(t, x); },
          [self = *this, t](Point x) { return self.grad_T(t, x); }};
}

ProblemData ManufacturedCase::problem() const {
  ProblemData d;
  d.f = [self = *this](double t, Point x) { return self.f(t, x); };
  d.g = [self = *this](double t, Point x) { return self.g(t, x); };
  d.z = [self = *this](double t, Point x) { return self.z(t, x); };
  d.u0 = displacement(0.0);
  d.p0 = pressure(0.0);
  d.T0 = temperature(0.0);
  return d;
}

PdeResidual finite_difference_residual(const ManufacturedCase& mc, double t, Point x, double step) {
  // First derivatives use `step`; nested (second) differences use a wider
  // spacing so round-off stays below the truncation error.
  const double h = step;
  const double hh = 10.0 * step;
  const MaterialParams& m = mc.params();
  const Vec2 ex{1.0, 0.0};
  const Vec2 ey{0.0, 1.0};

  auto d1 = [](auto&& fn, Point y, Vec2 dir, double d) {
    return (fn(y + d * dir) - fn(y - d * dir)) / (2.0 * d);
  };
  auto grad_fd = [&](auto&& fn, Point y, double d) {
    return Vec2{d1(fn, y, ex, d), d1(fn, y, ey, d)};
  };
  auto ux = [&](double tt) { return [&mc, tt](Point y) { return mc.u(tt, y).x; }; };
  auto uy = [&](double tt) { return [&mc, tt](Point y) { return mc.u(tt, y).y; }; };
  auto div_u = [&](double tt, Point y, double d) {
    return d1(ux(tt), y, ex, d) + d1(uy(tt), y, ey, d);
  };
  // Stress from finite-difference displacement gradients.
  auto stress = [&](Point y) {
    const Vec2 g1 = grad_fd(ux(t), y, hh);
    const Vec2 g2 = grad_fd(uy(t), y, hh);
    const double div = g1.x + g2.y;
    const double exy = 0.5 * (g1.y + g2.x);
    return Mat2{2.0 * m.mu * g1.x + m.lambda * div, 2.0 * m.mu * exy, 2.0 * m.mu * exy,
                2.0 * m.mu * g2.y + m.lambda * div};
  };
  const Mat2 sxp = stress(x + hh * ex);
  const Mat2 sxm = stress(x - hh * ex);
  const Mat2 syp = stress(x + hh * ey);
  const Mat2 sym = stress(x - hh * ey);
  const Vec2 div_sigma{(sxp.xx - sxm.xx) / (2.0 * hh) + (syp.xy - sym.xy) / (2.0 * hh),
                       (sxp.yx - sxm.yx) / (2.0 * hh) + (syp.yy - sym.yy) / (2.0 * hh)};
  auto p_at = [&](double tt) { return [&mc, tt](Point y) { return mc.p(tt, y); }; };
  auto T_at = [&](double tt) { return [&mc, tt](Point y) { return mc.T(tt, y); }; };
  const Vec2 gp = grad_fd(p_at(t), x, h);
  const Vec2 gT = grad_fd(T_at(t), x, h);

  const SourceValues src = mc.sources(t, x);
  PdeResidual r;
  r.momentum = Vec2{-div_sigma.x, -div_sigma.y} + m.alpha * gp + m.beta * gT - src.f;

  // div(phi grad q) from differences of the finite-difference flux.
  auto flux_div = [&](auto&& q, const Mat2& phi) {
    auto flux = [&](Point y) { return phi * grad_fd(q, y, hh); };
    return (flux(x + hh * ex).x - flux(x - hh * ex).x) / (2.0 * hh) +
           (flux(x + hh * ey).y - flux(x - hh * ey).y) / (2.0 * hh);
  };
  auto dt = [&](auto&& fn) { return (fn(t + h) - fn(t - h)) / (2.0 * h); };
  auto ddt_div = (div_u(t + hh, x, hh) - div_u(t - hh, x, hh)) / (2.0 * hh);

  const double dp = dt([&](double tt) { return mc.p(tt, x); });
  const double dT = dt([&](double tt) { return mc.T(tt, x); });
  r.mass = m.c0 * dp - m.b0 * dT + m.alpha * ddt_div - flux_div(p_at(t), m.K) - src.g;
  r.energy = m.a0 * dT - m.b0 * dp + m.beta * ddt_div - dot(m.K * gp, gT) -
             flux_div(T_at(t), m.Theta) - src.z;
  return r;
}

int error_quadrature_degree(const DGSpace& space) { return std::max(2 * space.degree() + 2, 8); }

namespace {

template <typename Exact>
double L2ErrorImpl(const FieldVec& field, const Exact& exact) {
  const DGSpace& space = field.space();
  const TriangleRule rule = triangle_quadrature(error_quadrature_degree(space));
  double sum = 0.0;
  for (std::size_t e = 0; e < space.num_elements(); ++e) {
    const ElementMap& map = space.element_map(e);
    const PointValues pv = eval_on_element(field, e, rule.points);
    const double scale = std::abs(map.det);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point x = map.to_physical(rule.points[q]);
      double d2 = 0.0;
      if constexpr (std::is_same_v<std::invoke_result_t<Exact, Point>, double>) {
        const double d = exact(x) - pv.at(0, q);
        d2 = d * d;
      } else {
        const Vec2 v = exact(x);
        const double dx = v.x - pv.at(0, q);
        const double dy = v.y - pv.at(1, q);
        d2 = dx * dx + dy * dy;
      }
      sum += rule.weights[q] * scale * d2;
    }
  }
  return std::sqrt(sum);
}

}  // namespace

double l2_error(const FieldVec& field, const std::function<double(Point)>& exact) {
  if (field.space().components() != 1) throw std::invalid_argument("scalar error on vector field");
  return L2ErrorImpl(field, exact);
}

double l2_error(const FieldVec& field, const std::function<Vec2(Point)>& exact) {
  if (field.space().components() != 2) throw std::invalid_argument("vector error on scalar field");
  return L2ErrorImpl(field, exact);
}

double energy_error(const FieldVec& field, const VectorField& exact) {
  const DGSpace& space = field.space();
  if (space.components() != 2) throw std::invalid_argument("energy norm needs a vector field");
  const Mesh& mesh = space.mesh();
  const int degree = error_quadrature_degree(space);
  const TriangleRule rule = triangle_quadrature(degree);
  const EdgeRule er = edge_quadrature(degree);
  double sum = 0.0;
  for (std::size_t e = 0; e < space.num_elements(); ++e) {
    const ElementMap& map = space.element_map(e);
    const PointValues pv = eval_on_element(field, e, rule.points);
    const double scale = std::abs(map.det);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Mat2 g = exact.grad(map.to_physical(rule.points[q]));
      const Vec2 g1 = pv.grad(0, q);
      const Vec2 g2 = pv.grad(1, q);
      const double exx = g.xx - g1.x;
      const double eyy = g.yy - g2.y;
      const double exy = 0.5 * ((g.xy - g1.y) + (g.yx - g2.x));
      sum += rule.weights[q] * scale * (exx * exx + 2.0 * exy * exy + eyy * eyy);
    }
  }
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edge(e);
    const EdgePoints pts = edge_points(mesh, e, er);
    const TraceValues tv = eval_traces(field, e, er.points);
    double edge_sum = 0.0;
    for (std::size_t q = 0; q < er.size(); ++q) {
      Vec2 jump{-tv.jump.at(0, q), -tv.jump.at(1, q)};
      if (edge.is_boundary()) jump = exact.value(pts.physical[q]) + jump;
      edge_sum += pts.weights[q] * dot(jump, jump);
    }
    sum += edge_sum / edge.length;
  }
  return std::sqrt(sum);
}

double l2_norm(const FieldVec& field) {
  if (field.space().components() == 1) return l2_error(field, [](Point) { return 0.0; });
  return l2_error(field, [](Point) { return Vec2{}; });
}

double energy_norm(const FieldVec& field) {
  return energy_error(field, {[](Point) { return Vec2{}; }, [](Point) { return Mat2{}; }});
}

ErrorNorms error_norms(const FieldVec& u, const FieldVec& p, const FieldVec& T,
                       const ManufacturedCase& mc, double t) {
  ErrorNorms n;
  n.u_energy = energy_error(u, mc.displacement(t));
  n.u_l2 = l2_error(u, std::function<Vec2(Point)>([&](Point x) { return mc.u(t, x); }));
  n.p_l2 = l2_error(p, std::function<double(Point)>([&](Point x) { return mc.p(t, x); }));
  n.T_l2 = l2_error(T, std::function<double(Point)>([&](Point x) { return mc.T(t, x); }));
  return n;
}

}  // namespace thermoporo
