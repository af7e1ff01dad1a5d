#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "thermoporo/geometry.hpp"
#include "thermoporo/mesh.hpp"
#include "thermoporo/quadrature.hpp"

namespace thermoporo {

// Nodal Lagrange basis of P_k on the reference triangle, nodes on the uniform
// lattice (i/k, j/k).
class ReferenceBasis {
 public:
  explicit ReferenceBasis(int degree);

  int degree() const { return degree_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<Point>& nodes() const { return nodes_; }

  void evaluate(Point ref, std::span<double> values) const;
  void evaluate_gradients(Point ref, std::span<double> d_xi, std::span<double> d_eta) const;

 private:
  int degree_;
  std::vector<Point> nodes_;
  std::vector<std::array<int, 2>> exponents_;
  // Row i holds the monomial coefficients of basis function i.
  std::vector<double> coeffs_;
};

// Affine map x = origin + J * ref from the reference triangle.
struct ElementMap {
  Point origin;
  Mat2 jacobian;
  Mat2 inverse;
  double det = 0.0;

  static ElementMap from_points(const std::array<Point, 3>& p);
  Point to_physical(Point ref) const { return origin + jacobian * ref; }
  Point to_reference(Point x) const { return inverse * (x - origin); }
  // Physical gradient from reference gradient: J^{-T} g.
  Vec2 physical_gradient(double d_xi, double d_eta) const {
    return {inverse.xx * d_xi + inverse.yx * d_eta, inverse.xy * d_xi + inverse.yy * d_eta};
  }
};

// Scalar basis values and physical gradients at a set of points, stored
// basis-major: values[i * num_points + q].
struct Tabulation {
  std::size_t num_points = 0;
  std::size_t num_basis = 0;
  std::vector<double> values;
  std::vector<double> dx;
  std::vector<double> dy;

  const double* value_row(std::size_t i) const { return values.data() + i * num_points; }
  const double* dx_row(std::size_t i) const { return dx.data() + i * num_points; }
  const double* dy_row(std::size_t i) const { return dy.data() + i * num_points; }
};

// Broken polynomial space of degree k with 1 or 2 components. Local DOFs are
// component-major: local = c * basis_size + i; global = element * local_dim + local.
class DGSpace {
 public:
  DGSpace(std::shared_ptr<const Mesh> mesh, int degree, int components);

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  int degree() const { return basis_.degree(); }
  int components() const { return components_; }
  const ReferenceBasis& basis() const { return basis_; }

  std::size_t basis_size() const { return basis_.size(); }
  std::size_t local_dim() const { return basis_.size() * static_cast<std::size_t>(components_); }
  std::size_t num_elements() const { return maps_.size(); }
  std::size_t global_dim() const { return local_dim() * maps_.size(); }
  std::size_t dof(std::size_t element, std::size_t local) const {
    return element * local_dim() + local;
  }

  const ElementMap& element_map(std::size_t k) const { return maps_.at(k); }

  Tabulation tabulate(std::size_t element, std::span<const Point> ref_points) const;

  bool same_mesh(const DGSpace& other) const { return mesh_ == other.mesh_; }

 private:
  std::shared_ptr<const Mesh> mesh_;
  int components_;
  ReferenceBasis basis_;
  std::vector<ElementMap> maps_;
};

inline std::shared_ptr<const DGSpace> make_space(std::shared_ptr<const Mesh> mesh, int degree,
                                                 int components) {
  return std::make_shared<const DGSpace>(std::move(mesh), degree, components);
}

// Coefficient vector of a discrete field.
class FieldVec {
 public:
  explicit FieldVec(std::shared_ptr<const DGSpace> space);
  FieldVec(std::shared_ptr<const DGSpace> space, std::vector<double> coeffs);

  const DGSpace& space() const { return *space_; }
  const std::shared_ptr<const DGSpace>& space_ptr() const { return space_; }

  std::span<const double> coeffs() const { return coeffs_; }
  std::span<double> coeffs() { return coeffs_; }
  const std::vector<double>& vector() const { return coeffs_; }
  std::span<const double> element_coeffs(std::size_t k) const {
    return std::span<const double>(coeffs_).subspan(k * space_->local_dim(), space_->local_dim());
  }

  bool all_finite() const;

 private:
  std::shared_ptr<const DGSpace> space_;
  std::vector<double> coeffs_;
};

// Values and physical gradients of each component at a set of points.
struct PointValues {
  int components = 1;
  std::size_t num_points = 0;
  // [c * num_points + q]
  std::vector<double> value;
  std::vector<double> dx;
  std::vector<double> dy;

  double at(int c, std::size_t q) const { return value[static_cast<std::size_t>(c) * num_points + q]; }
  Vec2 grad(int c, std::size_t q) const {
    const std::size_t i = static_cast<std::size_t>(c) * num_points + q;
    return {dx[i], dy[i]};
  }
};

PointValues eval_on_element(const FieldVec& field, std::size_t element,
                            std::span<const Point> ref_points);

// Same, reusing a tabulation of the field's space on that element.
PointValues eval_with_tabulation(const FieldVec& field, std::size_t element,
                                 const Tabulation& tab);

// Quadrature points of an edge, generated in the edge's own parameter and
// mapped into both incident elements through physical coordinates.
struct EdgePoints {
  std::vector<Point> physical;
  std::vector<double> weights;  // include the edge length
  std::vector<Point> ref_plus;
  std::vector<Point> ref_minus;  // empty on boundary edges
};

EdgePoints edge_points(const Mesh& mesh, std::size_t edge, std::span<const double> edge_params,
                       std::span<const double> edge_weights = {});
EdgePoints edge_points(const Mesh& mesh, std::size_t edge, const EdgeRule& rule);

// Jump [v] = v|plus - v|minus and average {v} = (v|plus + v|minus) / 2 on
// interior edges; both equal the one-sided trace on boundary edges.
struct TraceValues {
  PointValues jump;
  PointValues average;
};

TraceValues eval_traces(const FieldVec& field, std::size_t edge,
                        std::span<const double> edge_params);

// Nodal interpolant; exact (and continuous across elements) for polynomials
// of degree <= k.
using ScalarFn = std::function<double(Point)>;
using VectorFn = std::function<Vec2(Point)>;
FieldVec interpolate(std::shared_ptr<const DGSpace> space, const ScalarFn& fn);
FieldVec interpolate(std::shared_ptr<const DGSpace> space, const VectorFn& fn);

}  // namespace thermoporo
