#include "thermoporo/mesh.hpp"

#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace thermoporo {

namespace {

std::uint64_t EdgeKey(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (hi << 32) | lo;
}

}  // namespace

Mesh Mesh::uniform(int n_subdiv) {
  if (n_subdiv < 1) {
    throw std::invalid_argument("uniform mesh needs n_subdiv >= 1, got " +
                                std::to_string(n_subdiv));
  }
  Mesh mesh;
  const int n = n_subdiv;
  mesh.n_subdiv_ = n;
  mesh.h_ = std::sqrt(2.0) / n;

  const int row = n + 1;
  mesh.vertices_.reserve(static_cast<std::size_t>(row * row));
  mesh.boundary_vertex_.reserve(static_cast<std::size_t>(row * row));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      mesh.vertices_.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
      mesh.boundary_vertex_.push_back(i == 0 || j == 0 || i == n || j == n);
    }
  }

  auto vid = [row](int i, int j) { return j * row + i; };
  mesh.triangles_.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      mesh.triangles_.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      mesh.triangles_.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }

  std::unordered_map<std::uint64_t, int> edge_of;
  edge_of.reserve(static_cast<std::size_t>(3 * n * n + 2 * n));
  for (int k = 0; k < static_cast<int>(mesh.triangles_.size()); ++k) {
    const auto& tri = mesh.triangles_[static_cast<std::size_t>(k)];
    for (int l = 0; l < 3; ++l) {
      const int a = tri[static_cast<std::size_t>(l)];
      const int b = tri[static_cast<std::size_t>((l + 1) % 3)];
      auto [it, inserted] = edge_of.try_emplace(EdgeKey(a, b), static_cast<int>(mesh.edges_.size()));
      if (inserted) {
        Edge edge;
        edge.vertices = {a, b};
        edge.plus = k;
        mesh.edges_.push_back(edge);
      } else {
        Edge& edge = mesh.edges_[static_cast<std::size_t>(it->second)];
        // Elements are visited in increasing order, so k is the larger index.
        edge.minus = edge.plus;
        edge.plus = k;
      }
    }
  }

  for (Edge& edge : mesh.edges_) {
    const Point a = mesh.vertices_[static_cast<std::size_t>(edge.vertices[0])];
    const Point b = mesh.vertices_[static_cast<std::size_t>(edge.vertices[1])];
    const Vec2 d = b - a;
    edge.length = norm(d);
    Vec2 n_e{d.y / edge.length, -d.x / edge.length};
    const Point from = mesh.centroid(static_cast<std::size_t>(edge.plus));
    const Point towards = edge.is_boundary()
                              ? 0.5 * (a + b)
                              : mesh.centroid(static_cast<std::size_t>(edge.minus));
    if (dot(n_e, towards - from) < 0.0) n_e = -1.0 * n_e;
    edge.normal = n_e;
  }
  return mesh;
}

const Edge& Mesh::edge(std::size_t e) const {
  if (e >= edges_.size()) {
    throw std::out_of_range("edge index " + std::to_string(e) + " out of range (" +
                            std::to_string(edges_.size()) + " edges)");
  }
  return edges_[e];
}

EdgeNeighbors Mesh::edge_neighbors(std::size_t e) const {
  const Edge& ed = edge(e);
  EdgeNeighbors out;
  out.plus = ed.plus;
  if (!ed.is_boundary()) out.minus = ed.minus;
  return out;
}

std::array<Point, 3> Mesh::triangle_points(std::size_t k) const {
  const auto& tri = triangles_.at(k);
  return {vertices_[static_cast<std::size_t>(tri[0])], vertices_[static_cast<std::size_t>(tri[1])],
          vertices_[static_cast<std::size_t>(tri[2])]};
}

double Mesh::signed_area(std::size_t k) const {
  const auto p = triangle_points(k);
  const Vec2 a = p[1] - p[0];
  const Vec2 b = p[2] - p[0];
  return 0.5 * (a.x * b.y - a.y * b.x);
}

Point Mesh::centroid(std::size_t k) const {
  const auto p = triangle_points(k);
  return {(p[0].x + p[1].x + p[2].x) / 3.0, (p[0].y + p[1].y + p[2].y) / 3.0};
}

void Mesh::write(std::ostream& os) const {
  const auto old_precision = os.precision(17);
  os << "# vertices\n";
  for (const Point& p : vertices_) os << p.x << ' ' << p.y << '\n';
  os << "# triangles\n";
  for (const auto& t : triangles_) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "# edges\n";
  for (const Edge& e : edges_) {
    os << e.vertices[0] << ' ' << e.vertices[1] << ' ' << e.plus << ' ' << e.minus << ' '
       << e.normal.x << ' ' << e.normal.y << ' ' << e.length << '\n';
  }
  os.precision(old_precision);
}

}  // namespace thermoporo
