#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace kschemo {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
double distance(Point a, Point b);

/// Tolerance used when classifying angles (right, obtuse, reentrant).
inline constexpr double kAngleTolerance = 1e-9;

/// A simple closed polygon, counterclockwise, with every interior angle in (0, 2*pi).
class PolygonalDomain {
 public:
  /// Validates the vertex list. Clockwise input is reversed to counterclockwise.
  /// Throws ValidationError naming the offending edges on degenerate or
  /// self-intersecting input.
  PolygonalDomain(std::vector<Point> vertices, std::string name);

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::string& name() const { return name_; }
  std::size_t size() const { return vertices_.size(); }

  /// Interior angle in radians at vertex `i`, in (0, 2*pi).
  double interior_angle(std::size_t i) const;
  double area() const;
  /// Indices of vertices whose interior angle exceeds pi.
  std::vector<std::size_t> reentrant_corners() const;
  bool contains(Point p) const;
  /// True if every edge is parallel to a coordinate axis.
  bool is_rectilinear() const;

 private:
  std::vector<Point> vertices_;
  std::string name_;
};

enum class DomainPreset { unit_square, l_shape, custom };

/// Builds a preset domain; `custom_vertices` is read only for DomainPreset::custom.
PolygonalDomain make_domain(DomainPreset preset, std::vector<Point> custom_vertices = {});
DomainPreset parse_domain_preset(const std::string& name);
std::string to_string(DomainPreset preset);

using Triangle = std::array<std::int32_t, 3>;
using Edge = std::array<std::int32_t, 2>;

/// Conforming triangulation. Immutable once constructed; every instance carries
/// a process-unique id that fields use to tie themselves to it.
class TriMesh {
 public:
  /// Validates orientation and conformity. Boundary edges are derived from
  /// connectivity when `boundary_edges` is empty, otherwise they must match it.
  TriMesh(std::vector<Point> nodes, std::vector<Triangle> triangles,
          std::vector<Edge> boundary_edges = {}, std::vector<std::int32_t> corner_nodes = {});

  const std::vector<Point>& nodes() const { return nodes_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Edge>& boundary_edges() const { return boundary_edges_; }
  const std::vector<std::int32_t>& corner_nodes() const { return corner_nodes_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }
  std::uint64_t id() const { return id_; }

  double signed_area(std::size_t t) const;
  double diameter(std::size_t t) const;
  double total_area() const;
  double max_diameter() const;
  /// Largest interior angle over all triangles, in radians.
  double max_angle() const;
  /// No angle exceeds pi/2 (within kAngleTolerance).
  bool is_nonobtuse() const;
  /// Number of distinct edges.
  std::size_t edge_count() const;

 private:
  std::vector<Point> nodes_;
  std::vector<Triangle> triangles_;
  std::vector<Edge> boundary_edges_;
  std::vector<std::int32_t> corner_nodes_;
  std::uint64_t id_;
};

struct Grading {
  std::vector<std::size_t> corner_indices;  // polygon vertex indices
  double ratio = 1.0;                       // in (0, 1]
};

struct MeshOptions {
  double h_target = 0.1;
  std::optional<Grading> grading;
  bool require_nonobtuse = false;
};

struct MeshResult {
  TriMesh mesh;
  /// Whether the produced mesh has no obtuse triangle.
  bool nonobtuse = false;
};

/// Triangulates the domain. Rectilinear polygons get a tensor grid split into
/// right triangles (always nonobtuse); others are ear-clipped and refined by
/// conforming longest-edge bisection. Grading refines by bisection toward the
/// listed corners. With `require_nonobtuse` a ValidationError is thrown when
/// the result has an obtuse triangle.
MeshResult triangulate(const PolygonalDomain& domain, const MeshOptions& options);

/// Splits each triangle into four through its edge midpoints.
TriMesh refine_uniform(const TriMesh& mesh);

void save_mesh(const TriMesh& mesh, const std::filesystem::path& path);
void write_mesh(const TriMesh& mesh, std::ostream& out);
TriMesh load_mesh(const std::filesystem::path& path);
TriMesh read_mesh(std::istream& in);

}  // namespace kschemo
