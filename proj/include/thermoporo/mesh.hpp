#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "thermoporo/geometry.hpp"

namespace thermoporo {

struct Edge {
  std::array<int, 2> vertices{};
  double length = 0.0;
  // Interior edges: points from `plus` (larger element index) towards `minus`.
  // Boundary edges: outward normal of the domain.
  Vec2 normal;
  int plus = -1;
  int minus = -1;  // -1 on the boundary

  bool is_boundary() const { return minus < 0; }
};

struct EdgeNeighbors {
  int plus = -1;
  std::optional<int> minus;
};

// Uniform triangulation of the unit square. Cells are numbered row-major,
// each split along its lower-left to upper-right diagonal into a lower
// triangle (index 2c) and an upper triangle (index 2c + 1), both
// counter-clockwise.
class Mesh {
 public:
  static Mesh uniform(int n_subdiv);

  int n_subdiv() const { return n_subdiv_; }
  // Largest element diameter (the hypotenuse, sqrt(2) / n).
  double h() const { return h_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<bool>& boundary_vertex_flags() const { return boundary_vertex_; }

  const Edge& edge(std::size_t e) const;
  EdgeNeighbors edge_neighbors(std::size_t e) const;

  std::array<Point, 3> triangle_points(std::size_t k) const;
  double signed_area(std::size_t k) const;
  Point centroid(std::size_t k) const;

  // Debug dump with `# vertices`, `# triangles` and `# edges` sections.
  void write(std::ostream& os) const;

 private:
  Mesh() = default;

  int n_subdiv_ = 0;
  double h_ = 0.0;
  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Edge> edges_;
  std::vector<bool> boundary_vertex_;
};

inline Mesh build_uniform_mesh(int n_subdiv) { return Mesh::uniform(n_subdiv); }

}  // namespace thermoporo
