#pragma once

#include <vector>

#include "thermoporo/geometry.hpp"

namespace thermoporo {

// Rule on the reference triangle {(x, y): x, y >= 0, x + y <= 1}; weights sum
// to its area 1/2.
struct TriangleRule {
  std::vector<Point> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

// Rule on the reference edge [0, 1]; weights sum to 1.
struct EdgeRule {
  std::vector<double> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

inline constexpr int kMaxQuadratureDegree = 40;

// Gauss-Legendre nodes and weights on [0, 1].
EdgeRule gauss_legendre(int num_points);

// Exact for polynomials up to `degree`; throws std::invalid_argument outside
// [0, kMaxQuadratureDegree].
EdgeRule edge_quadrature(int degree);

// Collapsed (Duffy) Gauss product rule, exact up to `degree`.
TriangleRule triangle_quadrature(int degree);

}  // namespace thermoporo
