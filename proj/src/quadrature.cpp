#include "thermoporo/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace thermoporo {

namespace {

void CheckDegree(int degree) {
  if (degree < 0 || degree > kMaxQuadratureDegree) {
    throw std::invalid_argument("quadrature degree " + std::to_string(degree) +
                                " unsupported (0.." + std::to_string(kMaxQuadratureDegree) + ")");
  }
}

}  // namespace

EdgeRule gauss_legendre(int num_points) {
  if (num_points < 1) throw std::invalid_argument("Gauss-Legendre needs at least one point");
  EdgeRule rule;
  rule.degree = 2 * num_points - 1;
  rule.points.resize(static_cast<std::size_t>(num_points));
  rule.weights.resize(static_cast<std::size_t>(num_points));
  const int n = num_points;
  // Returns (P_n(x), P_n'(x)) by the three-term recurrence.
  auto legendre = [n](double x) {
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
  };
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [pn, dpn] = legendre(x);
      const double dx = pn / dpn;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map [-1, 1] -> [0, 1], ascending order.
    const auto slot = static_cast<std::size_t>(n - 1 - i);
    rule.points[slot] = 0.5 * (x + 1.0);
    rule.weights[slot] = 0.5 * w;
  }
  return rule;
}

EdgeRule edge_quadrature(int degree) {
  CheckDegree(degree);
  EdgeRule rule = gauss_legendre(degree / 2 + 1);
  rule.degree = degree;
  return rule;
}

TriangleRule triangle_quadrature(int degree) {
  CheckDegree(degree);
  // Under x = u, y = v (1 - u) a degree-d polynomial becomes degree d + 1 in
  // u once the Jacobian (1 - u) is included.
  const EdgeRule gu = gauss_legendre((degree + 1) / 2 + 1);
  const EdgeRule gv = gauss_legendre(degree / 2 + 1);
  TriangleRule rule;
  rule.degree = degree;
  rule.points.reserve(gu.size() * gv.size());
  rule.weights.reserve(gu.size() * gv.size());
  for (std::size_t i = 0; i < gu.size(); ++i) {
    const double u = gu.points[i];
    for (std::size_t j = 0; j < gv.size(); ++j) {
      const double v = gv.points[j];
      rule.points.push_back({u, v * (1.0 - u)});
      rule.weights.push_back(gu.weights[i] * gv.weights[j] * (1.0 - u));
    }
  }
  return rule;
}

}  // namespace thermoporo
