#include "thermoporo/dgspace.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

#include "thermoporo/simd/kernels.hpp"

namespace thermoporo {

namespace {

double IntPow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

}  // namespace

ReferenceBasis::ReferenceBasis(int degree) : degree_(degree) {
  if (degree < 1) {
    throw std::invalid_argument("DG spaces need degree >= 1, got " + std::to_string(degree));
  }
  for (int j = 0; j <= degree; ++j) {
    for (int i = 0; i <= degree - j; ++i) {
      nodes_.push_back({static_cast<double>(i) / degree, static_cast<double>(j) / degree});
    }
  }
  for (int total = 0; total <= degree; ++total) {
    for (int b = 0; b <= total; ++b) exponents_.push_back({total - b, b});
  }
  const auto n = static_cast<Eigen::Index>(nodes_.size());
  Eigen::MatrixXd vandermonde(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Point p = nodes_[static_cast<std::size_t>(r)];
    for (Eigen::Index m = 0; m < n; ++m) {
      const auto& e = exponents_[static_cast<std::size_t>(m)];
      vandermonde(r, m) = IntPow(p.x, e[0]) * IntPow(p.y, e[1]);
    }
  }
  // phi_i(node_j) = delta_ij  =>  C V^T = I.
  const Eigen::MatrixXd c = vandermonde.transpose().fullPivLu().inverse();
  coeffs_.resize(static_cast<std::size_t>(n * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index m = 0; m < n; ++m) coeffs_[static_cast<std::size_t>(i * n + m)] = c(i, m);
  }
}

void ReferenceBasis::evaluate(Point ref, std::span<double> values) const {
  const std::size_t n = size();
  double mono[64];
  for (std::size_t m = 0; m < n; ++m) {
    mono[m] = IntPow(ref.x, exponents_[m][0]) * IntPow(ref.y, exponents_[m][1]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    for (std::size_t m = 0; m < n; ++m) v += coeffs_[i * n + m] * mono[m];
    values[i] = v;
  }
}

void ReferenceBasis::evaluate_gradients(Point ref, std::span<double> d_xi,
                                        std::span<double> d_eta) const {
  const std::size_t n = size();
  double mx[64];
  double my[64];
  for (std::size_t m = 0; m < n; ++m) {
    const int a = exponents_[m][0];
    const int b = exponents_[m][1];
    mx[m] = a == 0 ? 0.0 : a * IntPow(ref.x, a - 1) * IntPow(ref.y, b);
    my[m] = b == 0 ? 0.0 : b * IntPow(ref.x, a) * IntPow(ref.y, b - 1);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double gx = 0.0;
    double gy = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      gx += coeffs_[i * n + m] * mx[m];
      gy += coeffs_[i * n + m] * my[m];
    }
    d_xi[i] = gx;
    d_eta[i] = gy;
  }
}

ElementMap ElementMap::from_points(const std::array<Point, 3>& p) {
  ElementMap map;
  map.origin = p[0];
  const Vec2 a = p[1] - p[0];
  const Vec2 b = p[2] - p[0];
  map.jacobian = {a.x, b.x, a.y, b.y};
  map.det = map.jacobian.det();
  if (!(std::abs(map.det) > 0.0)) throw std::invalid_argument("degenerate element");
  const double inv = 1.0 / map.det;
  map.inverse = {b.y * inv, -b.x * inv, -a.y * inv, a.x * inv};
  return map;
}

DGSpace::DGSpace(std::shared_ptr<const Mesh> mesh, int degree, int components)
    : mesh_(std::move(mesh)), components_(components), basis_(degree) {
  if (!mesh_) throw std::invalid_argument("DGSpace needs a mesh");
  if (components != 1 && components != 2) {
    throw std::invalid_argument("DGSpace supports 1 or 2 components, got " +
                                std::to_string(components));
  }
  if (basis_.size() > 64) throw std::invalid_argument("polynomial degree too high");
  maps_.reserve(mesh_->num_triangles());
  for (std::size_t k = 0; k < mesh_->num_triangles(); ++k) {
    maps_.push_back(ElementMap::from_points(mesh_->triangle_points(k)));
  }
}

Tabulation DGSpace::tabulate(std::size_t element, std::span<const Point> ref_points) const {
  const ElementMap& map = element_map(element);
  const std::size_t nq = ref_points.size();
  const std::size_t nb = basis_size();
  Tabulation tab;
  tab.num_points = nq;
  tab.num_basis = nb;
  tab.values.resize(nb * nq);
  tab.dx.resize(nb * nq);
  tab.dy.resize(nb * nq);
  double vals[64];
  double dxi[64];
  double deta[64];
  for (std::size_t q = 0; q < nq; ++q) {
    basis_.evaluate(ref_points[q], std::span<double>(vals, nb));
    basis_.evaluate_gradients(ref_points[q], std::span<double>(dxi, nb), std::span<double>(deta, nb));
    for (std::size_t i = 0; i < nb; ++i) {
      const Vec2 g = map.physical_gradient(dxi[i], deta[i]);
      tab.values[i * nq + q] = vals[i];
      tab.dx[i * nq + q] = g.x;
      tab.dy[i * nq + q] = g.y;
    }
  }
  return tab;
}

FieldVec::FieldVec(std::shared_ptr<const DGSpace> space)
    : space_(std::move(space)), coeffs_(space_ ? space_->global_dim() : 0, 0.0) {
  if (!space_) throw std::invalid_argument("FieldVec needs a space");
}

FieldVec::FieldVec(std::shared_ptr<const DGSpace> space, std::vector<double> coeffs)
    : space_(std::move(space)), coeffs_(std::move(coeffs)) {
  if (!space_) throw std::invalid_argument("FieldVec needs a space");
  if (coeffs_.size() != space_->global_dim()) {
    throw std::invalid_argument("FieldVec length " + std::to_string(coeffs_.size()) +
                                " does not match space dimension " +
                                std::to_string(space_->global_dim()));
  }
}

bool FieldVec::all_finite() const {
  for (double c : coeffs_) {
    if (!std::isfinite(c)) return false;
  }
  return true;
}

PointValues eval_with_tabulation(const FieldVec& field, std::size_t element,
                                 const Tabulation& tab) {
  const DGSpace& space = field.space();
  const auto& k = simd::kernels();
  const std::size_t nb = space.basis_size();
  const std::size_t nq = tab.num_points;
  const auto coeffs = field.element_coeffs(element);
  PointValues out;
  out.components = space.components();
  out.num_points = nq;
  const std::size_t total = nq * static_cast<std::size_t>(space.components());
  out.value.resize(total);
  out.dx.resize(total);
  out.dy.resize(total);
  for (int c = 0; c < space.components(); ++c) {
    const double* cc = coeffs.data() + static_cast<std::size_t>(c) * nb;
    const std::size_t off = static_cast<std::size_t>(c) * nq;
    k.combine(cc, tab.values.data(), nb, nq, out.value.data() + off);
    k.combine(cc, tab.dx.data(), nb, nq, out.dx.data() + off);
    k.combine(cc, tab.dy.data(), nb, nq, out.dy.data() + off);
  }
  return out;
}

PointValues eval_on_element(const FieldVec& field, std::size_t element,
                            std::span<const Point> ref_points) {
  if (element >= field.space().num_elements()) {
    throw std::out_of_range("element index " + std::to_string(element) + " out of range");
  }
  return eval_with_tabulation(field, element, field.space().tabulate(element, ref_points));
}

EdgePoints edge_points(const Mesh& mesh, std::size_t edge, std::span<const double> edge_params,
                       std::span<const double> edge_weights) {
  const Edge& e = mesh.edge(edge);
  const Point a = mesh.vertices()[static_cast<std::size_t>(e.vertices[0])];
  const Point b = mesh.vertices()[static_cast<std::size_t>(e.vertices[1])];
  const ElementMap plus = ElementMap::from_points(mesh.triangle_points(static_cast<std::size_t>(e.plus)));
  EdgePoints pts;
  pts.physical.reserve(edge_params.size());
  for (std::size_t q = 0; q < edge_params.size(); ++q) {
    const double s = edge_params[q];
    pts.physical.push_back(a + s * (b - a));
    pts.ref_plus.push_back(plus.to_reference(pts.physical.back()));
    if (!edge_weights.empty()) pts.weights.push_back(edge_weights[q] * e.length);
  }
  if (!e.is_boundary()) {
    const ElementMap minus =
        ElementMap::from_points(mesh.triangle_points(static_cast<std::size_t>(e.minus)));
    for (const Point& x : pts.physical) pts.ref_minus.push_back(minus.to_reference(x));
  }
  return pts;
}

EdgePoints edge_points(const Mesh& mesh, std::size_t edge, const EdgeRule& rule) {
  return edge_points(mesh, edge, rule.points, rule.weights);
}

TraceValues eval_traces(const FieldVec& field, std::size_t edge,
                        std::span<const double> edge_params) {
  const Mesh& mesh = field.space().mesh();
  const Edge& e = mesh.edge(edge);
  const EdgePoints pts = edge_points(mesh, edge, edge_params);
  const PointValues plus = eval_on_element(field, static_cast<std::size_t>(e.plus), pts.ref_plus);
  TraceValues out{plus, plus};
  if (e.is_boundary()) return out;
  const PointValues minus = eval_on_element(field, static_cast<std::size_t>(e.minus), pts.ref_minus);
  for (std::size_t i = 0; i < plus.value.size(); ++i) {
    out.jump.value[i] = plus.value[i] - minus.value[i];
    out.jump.dx[i] = plus.dx[i] - minus.dx[i];
    out.jump.dy[i] = plus.dy[i] - minus.dy[i];
    out.average.value[i] = 0.5 * (plus.value[i] + minus.value[i]);
    out.average.dx[i] = 0.5 * (plus.dx[i] + minus.dx[i]);
    out.average.dy[i] = 0.5 * (plus.dy[i] + minus.dy[i]);
  }
  return out;
}

FieldVec interpolate(std::shared_ptr<const DGSpace> space, const ScalarFn& fn) {
  if (space->components() != 1) throw std::invalid_argument("scalar interpolation on vector space");
  FieldVec out(space);
  auto c = out.coeffs();
  const auto& nodes = space->basis().nodes();
  for (std::size_t k = 0; k < space->num_elements(); ++k) {
    const ElementMap& map = space->element_map(k);
    for (std::size_t i = 0; i < nodes.size(); ++i) c[space->dof(k, i)] = fn(map.to_physical(nodes[i]));
  }
  return out;
}

FieldVec interpolate(std::shared_ptr<const DGSpace> space, const VectorFn& fn) {
  if (space->components() != 2) throw std::invalid_argument("vector interpolation on scalar space");
  FieldVec out(space);
  auto c = out.coeffs();
  const auto& nodes = space->basis().nodes();
  const std::size_t nb = nodes.size();
  for (std::size_t k = 0; k < space->num_elements(); ++k) {
    const ElementMap& map = space->element_map(k);
    for (std::size_t i = 0; i < nb; ++i) {
      const Vec2 v = fn(map.to_physical(nodes[i]));
      c[space->dof(k, i)] = v.x;
      c[space->dof(k, nb + i)] = v.y;
    }
  }
  return out;
}

}  // namespace thermoporo
