#pragma once

#include <array>
#include <cmath>

namespace thermoporo {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

using Point = Vec2;

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

// Row-major 2x2 matrix: {{xx, xy}, {yx, yy}}.
struct Mat2 {
  double xx = 0.0, xy = 0.0, yx = 0.0, yy = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

  Vec2 operator*(Vec2 v) const { return {xx * v.x + xy * v.y, yx * v.x + yy * v.y}; }
  Mat2 transposed() const { return {xx, yx, xy, yy}; }
  double det() const { return xx * yy - xy * yx; }
  double trace() const { return xx + yy; }
  friend bool operator==(const Mat2& a, const Mat2& b) = default;
};

inline double contract(const Mat2& a, const Mat2& b) {
  return a.xx * b.xx + a.xy * b.xy + a.yx * b.yx + a.yy * b.yy;
}

// Eigenvalues of the symmetric part, ascending.
inline std::array<double, 2> symmetric_eigenvalues(const Mat2& m) {
  const double a = m.xx;
  const double d = m.yy;
  const double b = 0.5 * (m.xy + m.yx);
  const double mean = 0.5 * (a + d);
  const double radius = std::hypot(0.5 * (a - d), b);
  return {mean - radius, mean + radius};
}

}  // namespace thermoporo
