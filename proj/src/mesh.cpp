#include "kschemo/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "kschemo/error.hpp"

namespace kschemo {

namespace {

std::atomic<std::uint64_t> g_next_mesh_id{1};

std::uint64_t edge_key(std::int32_t a, std::int32_t b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

int orientation(Point a, Point b, Point c) {
  const double o = cross(b - a, c - a);
  return (o > 0) - (o < 0);
}

bool on_segment(Point a, Point b, Point p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

// Closed-segment intersection test, touching included.
bool segments_intersect(Point a, Point b, Point c, Point d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

double signed_polygon_area(const std::vector<Point>& v) {
  double twice = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    twice += cross(v[i], v[(i + 1) % v.size()]);
  }
  return 0.5 * twice;
}

std::string edge_name(std::size_t i, std::size_t n) {
  return std::to_string(i) + " (vertex " + std::to_string(i) + " -> " + std::to_string((i + 1) % n) +
         ")";
}

double point_segment_distance(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  double s = len2 > 0 ? dot(p - a, ab) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return distance(p, {a.x + s * ab.x, a.y + s * ab.y});
}

double point_triangle_distance(Point p, Point a, Point b, Point c) {
  const int o1 = orientation(a, b, p);
  const int o2 = orientation(b, c, p);
  const int o3 = orientation(c, a, p);
  if (o1 >= 0 && o2 >= 0 && o3 >= 0) return 0.0;
  return std::min({point_segment_distance(p, a, b), point_segment_distance(p, b, c),
                   point_segment_distance(p, c, a)});
}

double largest_angle(Point a, Point b, Point c) {
  const auto angle = [](Point apex, Point p, Point q) {
    const Point u = p - apex;
    const Point v = q - apex;
    return std::atan2(std::abs(cross(u, v)), dot(u, v));
  };
  return std::max({angle(a, b, c), angle(b, c, a), angle(c, a, b)});
}

std::vector<std::int32_t> find_corner_nodes(const std::vector<Point>& nodes,
                                            const std::vector<Point>& corners) {
  std::vector<std::int32_t> out;
  for (const Point& c : corners) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i] == c) {
        out.push_back(static_cast<std::int32_t>(i));
        break;
      }
    }
  }
  return out;
}

// Working triangulation supporting conforming longest-edge bisection.
class BisectionMesh {
 public:
  BisectionMesh(std::vector<Point> nodes, std::vector<Triangle> tris)
      : nodes_(std::move(nodes)), tris_(std::move(tris)) {
    for (std::size_t t = 0; t < tris_.size(); ++t) link(static_cast<std::int32_t>(t));
  }

  std::size_t size() const { return tris_.size(); }
  const Triangle& tri(std::size_t t) const { return tris_[t]; }
  Point node(std::int32_t i) const { return nodes_[static_cast<std::size_t>(i)]; }

  double diameter(std::size_t t) const {
    const auto& tr = tris_[t];
    return std::sqrt(longest_length2(tr));
  }

  // Bisects t along its longest edge, first bisecting neighbours as needed so
  // that the result stays conforming.
  void bisect(std::int32_t t) {
    for (;;) {
      const int e = longest_local_edge(tris_[static_cast<std::size_t>(t)]);
      const std::int32_t a = tris_[static_cast<std::size_t>(t)][e];
      const std::int32_t b = tris_[static_cast<std::size_t>(t)][(e + 1) % 3];
      const std::int32_t n = neighbour(t, a, b);
      if (n < 0) {
        split(a, b);
        return;
      }
      const auto& nt = tris_[static_cast<std::size_t>(n)];
      const int ne = longest_local_edge(nt);
      if (edge_key(nt[ne], nt[(ne + 1) % 3]) == edge_key(a, b)) {
        split(a, b);
        return;
      }
      bisect(n);
    }
  }

  std::vector<Point> take_nodes() { return std::move(nodes_); }
  std::vector<Triangle> take_triangles() { return std::move(tris_); }

 private:
  double length2(std::int32_t a, std::int32_t b) const {
    const Point d = node(a) - node(b);
    return dot(d, d);
  }

  double longest_length2(const Triangle& tr) const {
    return std::max({length2(tr[0], tr[1]), length2(tr[1], tr[2]), length2(tr[2], tr[0])});
  }

  // Edges are totally ordered by (length, key) so both sides of an edge agree.
  int longest_local_edge(const Triangle& tr) const {
    int best = 0;
    for (int e = 1; e < 3; ++e) {
      const double le = length2(tr[e], tr[(e + 1) % 3]);
      const double lb = length2(tr[best], tr[(best + 1) % 3]);
      if (le > lb || (le == lb && edge_key(tr[e], tr[(e + 1) % 3]) >
                                      edge_key(tr[best], tr[(best + 1) % 3]))) {
        best = e;
      }
    }
    return best;
  }

  std::int32_t neighbour(std::int32_t t, std::int32_t a, std::int32_t b) const {
    const auto& owners = edges_.at(edge_key(a, b));
    return owners[0] == t ? owners[1] : owners[0];
  }

  void link(std::int32_t t) {
    const auto& tr = tris_[static_cast<std::size_t>(t)];
    for (int e = 0; e < 3; ++e) {
      auto [it, inserted] = edges_.try_emplace(edge_key(tr[e], tr[(e + 1) % 3]),
                                               std::array<std::int32_t, 2>{t, -1});
      if (!inserted) it->second[1] = t;
    }
  }

  void unlink(std::int32_t t) {
    const auto& tr = tris_[static_cast<std::size_t>(t)];
    for (int e = 0; e < 3; ++e) {
      auto it = edges_.find(edge_key(tr[e], tr[(e + 1) % 3]));
      auto& owners = it->second;
      if (owners[0] == t) owners[0] = owners[1];
      owners[1] = -1;
      if (owners[0] < 0) edges_.erase(it);
    }
  }

  // Splits every triangle owning edge (a, b) at the edge midpoint.
  void split(std::int32_t a, std::int32_t b) {
    const auto owners = edges_.at(edge_key(a, b));
    const Point pa = node(a);
    const Point pb = node(b);
    const auto m = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)});
    for (const std::int32_t t : owners) {
      if (t < 0) continue;
      Triangle tr = tris_[static_cast<std::size_t>(t)];
      int e = 0;
      while (edge_key(tr[e], tr[(e + 1) % 3]) != edge_key(a, b)) ++e;
      const std::int32_t p = tr[e];
      const std::int32_t q = tr[(e + 1) % 3];
      const std::int32_t r = tr[(e + 2) % 3];
      unlink(t);
      tris_[static_cast<std::size_t>(t)] = {p, m, r};
      link(t);
      tris_.push_back({m, q, r});
      link(static_cast<std::int32_t>(tris_.size() - 1));
    }
  }

  std::vector<Point> nodes_;
  std::vector<Triangle> tris_;
  std::unordered_map<std::uint64_t, std::array<std::int32_t, 2>> edges_;
};

// Tensor grid through every vertex coordinate, each gap split into pieces no
// longer than h; cells inside the polygon are cut along their rising diagonal.
std::pair<std::vector<Point>, std::vector<Triangle>> grid_triangulation(const PolygonalDomain& d,
                                                                        double h) {
  const auto lines = [h](std::vector<double> coords) {
    std::sort(coords.begin(), coords.end());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
    std::vector<double> out{coords.front()};
    for (std::size_t i = 1; i < coords.size(); ++i) {
      const double gap = coords[i] - coords[i - 1];
      const auto pieces = std::max<long>(1, static_cast<long>(std::ceil(gap / h - 1e-9)));
      for (long k = 1; k < pieces; ++k) {
        out.push_back(coords[i - 1] + gap * static_cast<double>(k) / static_cast<double>(pieces));
      }
      out.push_back(coords[i]);
    }
    return out;
  };
  std::vector<double> xs_in, ys_in;
  for (const Point& p : d.vertices()) {
    xs_in.push_back(p.x);
    ys_in.push_back(p.y);
  }
  const std::vector<double> xs = lines(xs_in);
  const std::vector<double> ys = lines(ys_in);

  std::vector<Point> nodes;
  std::map<std::pair<std::size_t, std::size_t>, std::int32_t> index;
  const auto node_at = [&](std::size_t i, std::size_t j) {
    auto [it, inserted] = index.try_emplace({i, j}, static_cast<std::int32_t>(nodes.size()));
    if (inserted) nodes.push_back({xs[i], ys[j]});
    return it->second;
  };
  std::vector<Triangle> tris;
  for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const Point centre{0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])};
      if (!d.contains(centre)) continue;
      const auto ll = node_at(i, j);
      const auto lr = node_at(i + 1, j);
      const auto ur = node_at(i + 1, j + 1);
      const auto ul = node_at(i, j + 1);
      tris.push_back({ll, lr, ur});
      tris.push_back({ll, ur, ul});
    }
  }
  return {std::move(nodes), std::move(tris)};
}

std::vector<Triangle> ear_clip(const std::vector<Point>& v) {
  std::vector<std::int32_t> ring(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) ring[i] = static_cast<std::int32_t>(i);
  std::vector<Triangle> tris;
  while (ring.size() > 3) {
    bool clipped = false;
    for (std::size_t k = 0; k < ring.size(); ++k) {
      const auto ia = ring[(k + ring.size() - 1) % ring.size()];
      const auto ib = ring[k];
      const auto ic = ring[(k + 1) % ring.size()];
      const Point a = v[static_cast<std::size_t>(ia)];
      const Point b = v[static_cast<std::size_t>(ib)];
      const Point c = v[static_cast<std::size_t>(ic)];
      if (orientation(a, b, c) <= 0) continue;
      bool blocked = false;
      for (const auto j : ring) {
        if (j == ia || j == ib || j == ic) continue;
        const Point p = v[static_cast<std::size_t>(j)];
        if (orientation(a, b, p) >= 0 && orientation(b, c, p) >= 0 && orientation(c, a, p) >= 0) {
          blocked = true;
          break;
        }
      }
      if (blocked) continue;
      tris.push_back({ia, ib, ic});
      ring.erase(ring.begin() + static_cast<std::ptrdiff_t>(k));
      clipped = true;
      break;
    }
    if (!clipped) throw ValidationError("ear clipping failed: polygon has no ear");
  }
  tris.push_back({ring[0], ring[1], ring[2]});
  return tris;
}

}  // namespace

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

// ---------------------------------------------------------------------------
// PolygonalDomain

PolygonalDomain::PolygonalDomain(std::vector<Point> vertices, std::string name)
    : vertices_(std::move(vertices)), name_(std::move(name)) {
  const std::size_t n = vertices_.size();
  if (n < 3) throw ValidationError("polygon needs at least 3 vertices, got " + std::to_string(n));
  for (const Point& p : vertices_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw ValidationError("polygon vertex is not finite");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (vertices_[i] == vertices_[(i + 1) % n]) {
      throw ValidationError("degenerate polygon: edge " + edge_name(i, n) +
                            " has zero length (edges " + std::to_string((i + n - 1) % n) + " and " +
                            std::to_string(i) + " meet at a repeated vertex)");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const Point a = vertices_[i], b = vertices_[j], c = vertices_[(j + 1) % n];
    // Adjacent edges may only share their common vertex.
    if (orientation(a, b, c) == 0 && dot(a - b, c - b) > 0) {
      throw ValidationError("degenerate polygon: edges " + edge_name(i, n) + " and " +
                            edge_name(j, n) + " overlap");
    }
    for (std::size_t k = i + 2; k < n; ++k) {
      if (i == 0 && k == n - 1) continue;
      if (segments_intersect(a, b, vertices_[k], vertices_[(k + 1) % n])) {
        throw ValidationError("self-intersecting polygon: edges " + edge_name(i, n) + " and " +
                              edge_name(k, n) + " intersect");
      }
    }
  }
  const double area = signed_polygon_area(vertices_);
  if (area == 0.0) throw ValidationError("degenerate polygon: zero area");
  if (area < 0.0) std::reverse(vertices_.begin(), vertices_.end());
}

double PolygonalDomain::interior_angle(std::size_t i) const {
  const std::size_t n = vertices_.size();
  const Point v = vertices_[i];
  const Point next = vertices_[(i + 1) % n] - v;
  const Point prev = vertices_[(i + n - 1) % n] - v;
  double a = std::atan2(cross(next, prev), dot(next, prev));
  if (a < 0) a += 2.0 * std::numbers::pi;
  return a;
}

double PolygonalDomain::area() const { return signed_polygon_area(vertices_); }

std::vector<std::size_t> PolygonalDomain::reentrant_corners() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (interior_angle(i) > std::numbers::pi + kAngleTolerance) out.push_back(i);
  }
  return out;
}

bool PolygonalDomain::contains(Point p) const {
  bool inside = false;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point a = vertices_[i], b = vertices_[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) {
      inside = !inside;
    }
  }
  return inside;
}

bool PolygonalDomain::is_rectilinear() const {
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point d = vertices_[(i + 1) % n] - vertices_[i];
    if (d.x != 0.0 && d.y != 0.0) return false;
  }
  return true;
}

PolygonalDomain make_domain(DomainPreset preset, std::vector<Point> custom_vertices) {
  switch (preset) {
    case DomainPreset::unit_square:
      return PolygonalDomain({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, "unit_square");
    case DomainPreset::l_shape:
      return PolygonalDomain({{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}}, "l_shape");
    case DomainPreset::custom:
      return PolygonalDomain(std::move(custom_vertices), "custom");
  }
  throw ValidationError("unknown domain preset");
}

DomainPreset parse_domain_preset(const std::string& name) {
  if (name == "unit_square") return DomainPreset::unit_square;
  if (name == "l_shape") return DomainPreset::l_shape;
  if (name == "custom") return DomainPreset::custom;
  throw ValidationError("unknown domain preset '" + name + "'");
}

std::string to_string(DomainPreset preset) {
  switch (preset) {
    case DomainPreset::unit_square: return "unit_square";
    case DomainPreset::l_shape: return "l_shape";
    case DomainPreset::custom: return "custom";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// TriMesh

TriMesh::TriMesh(std::vector<Point> nodes, std::vector<Triangle> triangles,
                 std::vector<Edge> boundary_edges, std::vector<std::int32_t> corner_nodes)
    : nodes_(std::move(nodes)),
      triangles_(std::move(triangles)),
      corner_nodes_(std::move(corner_nodes)),
      id_(g_next_mesh_id.fetch_add(1)) {
  const auto n = static_cast<std::int32_t>(nodes_.size());
  if (triangles_.empty()) throw ValidationError("mesh has no triangles");
  std::vector<char> used(nodes_.size(), 0);
  // key -> (count, directed first occurrence)
  std::map<std::uint64_t, std::pair<int, Edge>> edges;
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tr = triangles_[t];
    for (const auto i : tr) {
      if (i < 0 || i >= n) {
        throw ValidationError("triangle " + std::to_string(t) + " references node " +
                              std::to_string(i) + " out of range");
      }
      used[static_cast<std::size_t>(i)] = 1;
    }
    if (tr[0] == tr[1] || tr[1] == tr[2] || tr[0] == tr[2]) {
      throw ValidationError("triangle " + std::to_string(t) + " repeats a node");
    }
    if (!(signed_area(t) > 0.0)) {
      throw ValidationError("triangle " + std::to_string(t) + " has non-positive signed area");
    }
    for (int e = 0; e < 3; ++e) {
      const Edge de{tr[e], tr[(e + 1) % 3]};
      auto [it, inserted] = edges.try_emplace(edge_key(de[0], de[1]), 1, de);
      if (inserted) continue;
      if (++it->second.first > 2) {
        throw ValidationError("edge (" + std::to_string(de[0]) + "," + std::to_string(de[1]) +
                              ") is shared by more than two triangles");
      }
      if (it->second.second == de) {
        throw ValidationError("inconsistent orientation across edge (" + std::to_string(de[0]) +
                              "," + std::to_string(de[1]) + ")");
      }
    }
  }
  for (std::size_t i = 0; i < used.size(); ++i) {
    if (!used[i]) throw ValidationError("node " + std::to_string(i) + " is not used by any triangle");
  }

  std::vector<Edge> derived;
  for (const auto& tr : triangles_) {
    for (int e = 0; e < 3; ++e) {
      const auto& rec = edges.at(edge_key(tr[e], tr[(e + 1) % 3]));
      if (rec.first == 1) derived.push_back({tr[e], tr[(e + 1) % 3]});
    }
  }

  // A triangulated simple polygon is a disk: V - E + F = 1 and the boundary is
  // one closed loop. Holes and hanging nodes both break this.
  const auto euler = static_cast<long>(nodes_.size()) - static_cast<long>(edges.size()) +
                     static_cast<long>(triangles_.size());
  if (euler != 1) {
    throw ValidationError("mesh is not a conforming disk triangulation (V - E + F = " +
                          std::to_string(euler) + ", expected 1)");
  }
  std::vector<int> degree(nodes_.size(), 0);
  for (const auto& e : derived) {
    ++degree[static_cast<std::size_t>(e[0])];
    ++degree[static_cast<std::size_t>(e[1])];
  }
  for (std::size_t i = 0; i < degree.size(); ++i) {
    if (degree[i] != 0 && degree[i] != 2) {
      throw ValidationError("boundary is not a simple loop at node " + std::to_string(i));
    }
  }

  if (boundary_edges.empty()) {
    boundary_edges_ = std::move(derived);
  } else {
    std::map<std::uint64_t, int> listed;
    for (const auto& e : boundary_edges) {
      if (e[0] < 0 || e[0] >= n || e[1] < 0 || e[1] >= n) {
        throw ValidationError("boundary edge references node out of range");
      }
      ++listed[edge_key(e[0], e[1])];
    }
    for (const auto& e : derived) {
      if (listed.erase(edge_key(e[0], e[1])) == 0) {
        throw ValidationError("edge (" + std::to_string(e[0]) + "," + std::to_string(e[1]) +
                              ") belongs to one triangle but is not a listed boundary edge");
      }
    }
    if (!listed.empty()) {
      throw ValidationError("a listed boundary edge is interior or not a mesh edge");
    }
    boundary_edges_ = std::move(boundary_edges);
  }

  for (const auto c : corner_nodes_) {
    if (c < 0 || c >= n) throw ValidationError("corner node out of range");
  }
}

double TriMesh::signed_area(std::size_t t) const {
  const auto& tr = triangles_[t];
  const Point a = nodes_[static_cast<std::size_t>(tr[0])];
  const Point b = nodes_[static_cast<std::size_t>(tr[1])];
  const Point c = nodes_[static_cast<std::size_t>(tr[2])];
  return 0.5 * cross(b - a, c - a);
}

double TriMesh::diameter(std::size_t t) const {
  const auto& tr = triangles_[t];
  const Point a = nodes_[static_cast<std::size_t>(tr[0])];
  const Point b = nodes_[static_cast<std::size_t>(tr[1])];
  const Point c = nodes_[static_cast<std::size_t>(tr[2])];
  return std::max({distance(a, b), distance(b, c), distance(c, a)});
}

double TriMesh::total_area() const {
  double s = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) s += signed_area(t);
  return s;
}

double TriMesh::max_diameter() const {
  double d = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) d = std::max(d, diameter(t));
  return d;
}

double TriMesh::max_angle() const {
  double m = 0.0;
  for (const auto& tr : triangles_) {
    m = std::max(m, largest_angle(nodes_[static_cast<std::size_t>(tr[0])],
                                  nodes_[static_cast<std::size_t>(tr[1])],
                                  nodes_[static_cast<std::size_t>(tr[2])]));
  }
  return m;
}

bool TriMesh::is_nonobtuse() const { return max_angle() <= std::numbers::pi / 2 + kAngleTolerance; }

std::size_t TriMesh::edge_count() const {
  // Each interior edge is seen twice, each boundary edge once.
  return (3 * triangles_.size() + boundary_edges_.size()) / 2;
}

// ---------------------------------------------------------------------------
// Meshing

MeshResult triangulate(const PolygonalDomain& domain, const MeshOptions& options) {
  if (!(options.h_target > 0.0) || !std::isfinite(options.h_target)) {
    throw ValidationError("h_target must be positive and finite");
  }
  if (options.grading && !(options.grading->ratio > 0.0 && options.grading->ratio <= 1.0)) {
    throw ValidationError("grading ratio must lie in (0, 1]");
  }
  const double h = options.h_target;

  std::vector<Point> nodes;
  std::vector<Triangle> tris;
  const bool structured = domain.is_rectilinear();
  if (structured) {
    std::tie(nodes, tris) = grid_triangulation(domain, h);
  } else {
    nodes = domain.vertices();
    tris = ear_clip(nodes);
  }

  BisectionMesh work(std::move(nodes), std::move(tris));
  if (!structured) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t t = 0; t < work.size(); ++t) {
        while (work.diameter(t) > h) {
          work.bisect(static_cast<std::int32_t>(t));
          changed = true;
        }
      }
    }
  }
  if (options.grading) {
    const double ratio = options.grading->ratio;
    std::vector<Point> corners;
    for (const auto ci : options.grading->corner_indices) {
      if (ci >= domain.size()) throw ValidationError("grading corner index out of range");
      corners.push_back(domain.vertices()[ci]);
    }
    const auto target = [&](std::size_t t) {
      const auto& tr = work.tri(t);
      double size = std::numeric_limits<double>::infinity();
      for (const Point c : corners) {
        const double d =
            point_triangle_distance(c, work.node(tr[0]), work.node(tr[1]), work.node(tr[2]));
        size = std::min(size, ratio * h * std::max(d / h, ratio));
      }
      return size;
    };
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t t = 0; t < work.size(); ++t) {
        while (work.diameter(t) > target(t)) {
          work.bisect(static_cast<std::int32_t>(t));
          changed = true;
        }
      }
    }
  }

  std::vector<Point> out_nodes = work.take_nodes();
  std::vector<std::int32_t> corner_nodes = find_corner_nodes(out_nodes, domain.vertices());
  TriMesh mesh(std::move(out_nodes), work.take_triangles(), {}, std::move(corner_nodes));
  const bool nonobtuse = mesh.is_nonobtuse();
  if (options.require_nonobtuse && !nonobtuse) {
    throw ValidationError("mesh of '" + domain.name() +
                          "' has obtuse triangles but require_nonobtuse is set");
  }
  return {std::move(mesh), nonobtuse};
}

TriMesh refine_uniform(const TriMesh& mesh) {
  std::vector<Point> nodes = mesh.nodes();
  std::unordered_map<std::uint64_t, std::int32_t> mid;
  const auto midpoint = [&](std::int32_t a, std::int32_t b) {
    auto [it, inserted] = mid.try_emplace(edge_key(a, b), static_cast<std::int32_t>(nodes.size()));
    if (inserted) {
      const Point pa = nodes[static_cast<std::size_t>(a)];
      const Point pb = nodes[static_cast<std::size_t>(b)];
      nodes.push_back({0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)});
    }
    return it->second;
  };
  std::vector<Triangle> tris;
  tris.reserve(4 * mesh.triangle_count());
  for (const auto& [a, b, c] : mesh.triangles()) {
    const auto ab = midpoint(a, b);
    const auto bc = midpoint(b, c);
    const auto ca = midpoint(c, a);
    tris.push_back({a, ab, ca});
    tris.push_back({ab, b, bc});
    tris.push_back({ca, bc, c});
    tris.push_back({ab, bc, ca});
  }
  std::vector<Edge> boundary;
  boundary.reserve(2 * mesh.boundary_edges().size());
  for (const auto& [a, b] : mesh.boundary_edges()) {
    const auto m = mid.at(edge_key(a, b));
    boundary.push_back({a, m});
    boundary.push_back({m, b});
  }
  return TriMesh(std::move(nodes), std::move(tris), std::move(boundary), mesh.corner_nodes());
}

// ---------------------------------------------------------------------------
// Plain-text I/O

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct LineReader {
  std::istream& in;
  std::size_t line_no = 0;

  // Next non-empty line with comments stripped, split into tokens.
  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream ss(line);
      tokens.clear();
      for (std::string tok; ss >> tok;) tokens.push_back(tok);
      if (!tokens.empty()) return true;
    }
    return false;
  }

  std::vector<std::string> expect(std::size_t count, const char* what) {
    std::vector<std::string> tokens;
    if (!next(tokens)) throw ParseError(line_no + 1, std::string("unexpected end of file, expected ") + what);
    if (tokens.size() != count) {
      throw ParseError(line_no, std::string("expected ") + what + " (" + std::to_string(count) +
                                    " fields), got " + std::to_string(tokens.size()));
    }
    return tokens;
  }
};

template <typename T>
T parse_number(const std::string& tok, std::size_t line) {
  T value{};
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw ParseError(line, "invalid number '" + tok + "'");
  }
  return value;
}

std::size_t parse_header(LineReader& r, const char* keyword) {
  const auto tokens = r.expect(2, keyword);
  if (tokens[0] != keyword) {
    throw ParseError(r.line_no, std::string("expected '") + keyword + " <count>', got '" + tokens[0] + "'");
  }
  const auto count = parse_number<long long>(tokens[1], r.line_no);
  if (count < 0) throw ParseError(r.line_no, "negative count");
  return static_cast<std::size_t>(count);
}

std::int32_t parse_index(const std::string& tok, std::size_t line, std::size_t node_count) {
  const auto i = parse_number<long long>(tok, line);
  if (i < 0 || static_cast<std::size_t>(i) >= node_count) {
    throw ParseError(line, "node index " + tok + " out of range [0, " + std::to_string(node_count) + ")");
  }
  return static_cast<std::int32_t>(i);
}

// Polygon vertices are the boundary nodes where the boundary turns.
std::vector<std::int32_t> boundary_turns(const std::vector<Point>& nodes, const std::vector<Edge>& boundary) {
  std::unordered_map<std::int32_t, Edge> around;  // node -> (incoming from, outgoing to)
  for (const auto& [a, b] : boundary) {
    around[b][0] = a;
    around[a][1] = b;
  }
  std::vector<std::int32_t> out;
  for (const auto& [a, b] : boundary) {
    const auto& nb = around[a];
    const Point p = nodes[static_cast<std::size_t>(nb[0])];
    const Point q = nodes[static_cast<std::size_t>(a)];
    const Point r = nodes[static_cast<std::size_t>(nb[1])];
    if (orientation(p, q, r) != 0) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

void write_mesh(const TriMesh& mesh, std::ostream& out) {
  out << "nodes " << mesh.node_count() << '\n';
  for (const Point& p : mesh.nodes()) out << format_double(p.x) << ' ' << format_double(p.y) << '\n';
  out << "triangles " << mesh.triangle_count() << '\n';
  for (const auto& [a, b, c] : mesh.triangles()) out << a << ' ' << b << ' ' << c << '\n';
  out << "boundary " << mesh.boundary_edges().size() << '\n';
  for (const auto& [a, b] : mesh.boundary_edges()) out << a << ' ' << b << '\n';
}

void save_mesh(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_mesh(mesh, out);
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

TriMesh read_mesh(std::istream& in) {
  LineReader r{in};
  const std::size_t n = parse_header(r, "nodes");
  std::vector<Point> nodes(n);
  for (auto& p : nodes) {
    const auto tok = r.expect(2, "node coordinates 'x y'");
    p = {parse_number<double>(tok[0], r.line_no), parse_number<double>(tok[1], r.line_no)};
  }
  const std::size_t m = parse_header(r, "triangles");
  std::vector<Triangle> tris(m);
  for (auto& t : tris) {
    const auto tok = r.expect(3, "triangle 'i j k'");
    for (int k = 0; k < 3; ++k) t[static_cast<std::size_t>(k)] = parse_index(tok[static_cast<std::size_t>(k)], r.line_no, n);
  }
  const std::size_t b = parse_header(r, "boundary");
  std::vector<Edge> boundary(b);
  for (auto& e : boundary) {
    const auto tok = r.expect(2, "boundary edge 'i j'");
    e = {parse_index(tok[0], r.line_no, n), parse_index(tok[1], r.line_no, n)};
  }
  std::vector<std::string> extra;
  if (r.next(extra)) throw ParseError(r.line_no, "unexpected trailing content '" + extra[0] + "'");
  if (boundary.empty()) throw ValidationError("mesh file lists no boundary edges");
  auto corners = boundary_turns(nodes, boundary);
  return TriMesh(std::move(nodes), std::move(tris), std::move(boundary), std::move(corners));
}

TriMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_mesh(in);
}

}  // namespace kschemo
