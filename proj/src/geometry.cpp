#include "robin/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <utility>

#include "robin/error.hpp"

namespace robin {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorKind::InvalidParameter, std::string(name) + " must be positive and finite");
  }
}

std::pair<int, int> undirected(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

struct Ring {
  std::vector<int> ids;
  std::vector<double> angles;  // increasing, in [offset, offset + 2*pi)
};

Ring make_ring(std::vector<Point>& nodes, double radius, int count, double offset) {
  Ring ring;
  ring.ids.reserve(count);
  ring.angles.reserve(count);
  for (int j = 0; j < count; ++j) {
    const double theta = offset + kTwoPi * j / count;
    ring.ids.push_back(static_cast<int>(nodes.size()));
    ring.angles.push_back(theta);
    nodes.push_back({radius * std::cos(theta), radius * std::sin(theta)});
  }
  return ring;
}

// Angle of `theta` measured counterclockwise from `base`, in (-pi, pi].
double relative_angle(double theta, double base) {
  double d = std::fmod(theta - base, kTwoPi);
  if (d > std::numbers::pi) d -= kTwoPi;
  if (d <= -std::numbers::pi) d += kTwoPi;
  return d;
}

void push_ccw(const std::vector<Point>& nodes, std::vector<Triangle>& tris, int a, int b, int c) {
  if (signed_area(nodes[a], nodes[b], nodes[c]) < 0.0) std::swap(b, c);
  tris.push_back({a, b, c});
}

// Stitches the band between two concentric rings by merging them in angular
// order: each step advances whichever ring has the nearer next node.
void stitch(const std::vector<Point>& nodes, const Ring& inner, const Ring& outer,
            std::vector<Triangle>& tris) {
  const int n_in = static_cast<int>(inner.ids.size());
  const int n_out = static_cast<int>(outer.ids.size());
  const double base = inner.angles[0];

  int j0 = 0;
  double best = kTwoPi;
  for (int j = 0; j < n_out; ++j) {
    const double d = std::abs(relative_angle(outer.angles[j], base));
    if (d < best) {
      best = d;
      j0 = j;
    }
  }
  const double out_start = relative_angle(outer.angles[j0], base);
  auto t_in = [&](int i) { return i == n_in ? kTwoPi : inner.angles[i] - base; };
  auto t_out = [&](int j) { return out_start + kTwoPi * j / n_out; };
  auto in_id = [&](int i) { return inner.ids[i % n_in]; };
  auto out_id = [&](int j) { return outer.ids[(j0 + j) % n_out]; };

  int i = 0;
  int j = 0;
  while (i < n_in || j < n_out) {
    const bool advance_inner = (j == n_out) || (i < n_in && t_in(i + 1) < t_out(j + 1));
    if (advance_inner) {
      push_ccw(nodes, tris, in_id(i), out_id(j), in_id(i + 1));
      ++i;
    } else {
      push_ccw(nodes, tris, in_id(i), out_id(j), out_id(j + 1));
      ++j;
    }
  }
}

int ring_count(double circumference, double h, int minimum) {
  return std::max(minimum, static_cast<int>(std::lround(circumference / h)));
}

Mesh triangulate_disk(double radius, double h) {
  const int rings = std::max(1, static_cast<int>(std::lround(radius / h)));
  std::vector<Point> nodes{{0.0, 0.0}};
  std::vector<Triangle> tris;
  std::vector<Edge> boundary;

  Ring previous;
  for (int k = 1; k <= rings; ++k) {
    const double r = radius * k / rings;
    const int n = ring_count(kTwoPi * r, h, 6);
    const double offset = (k % 2 == 0) ? std::numbers::pi / n : 0.0;
    Ring ring = make_ring(nodes, r, n, offset);
    if (k == 1) {
      for (int j = 0; j < n; ++j) push_ccw(nodes, tris, 0, ring.ids[j], ring.ids[(j + 1) % n]);
    } else {
      stitch(nodes, previous, ring, tris);
    }
    previous = std::move(ring);
  }
  const int n = static_cast<int>(previous.ids.size());
  for (int j = 0; j < n; ++j) boundary.push_back({previous.ids[j], previous.ids[(j + 1) % n]});
  return Mesh(std::move(nodes), std::move(tris), std::move(boundary));
}

Mesh triangulate_annulus(double r_inner, double r_outer, double h) {
  const int bands = std::max(1, static_cast<int>(std::lround((r_outer - r_inner) / h)));
  std::vector<Point> nodes;
  std::vector<Triangle> tris;
  std::vector<Edge> boundary;

  Ring first;
  Ring previous;
  for (int k = 0; k <= bands; ++k) {
    const double r = r_inner + (r_outer - r_inner) * k / bands;
    const int n = ring_count(kTwoPi * r, h, 6);
    const double offset = (k % 2 == 1) ? std::numbers::pi / n : 0.0;
    Ring ring = make_ring(nodes, r, n, offset);
    if (k == 0) {
      first = ring;
    } else {
      stitch(nodes, previous, ring, tris);
    }
    previous = std::move(ring);
  }
  const int n_out = static_cast<int>(previous.ids.size());
  for (int j = 0; j < n_out; ++j) boundary.push_back({previous.ids[j], previous.ids[(j + 1) % n_out]});
  const int n_in = static_cast<int>(first.ids.size());
  for (int j = 0; j < n_in; ++j) boundary.push_back({first.ids[(j + 1) % n_in], first.ids[j]});
  return Mesh(std::move(nodes), std::move(tris), std::move(boundary));
}

Mesh triangulate_rectangle(double width, double height, double h) {
  const int nx = std::max(1, static_cast<int>(std::lround(width / h)));
  const int ny = std::max(1, static_cast<int>(std::lround(height / h)));
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };

  std::vector<Point> nodes;
  nodes.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      // Snap the far edges so the measures are exact.
      const double x = (i == nx) ? width : width * i / nx;
      const double y = (j == ny) ? height : height * j / ny;
      nodes.push_back({x, y});
    }
  }
  std::vector<Triangle> tris;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  std::vector<Edge> boundary;
  for (int i = 0; i < nx; ++i) boundary.push_back({id(i, 0), id(i + 1, 0)});
  for (int j = 0; j < ny; ++j) boundary.push_back({id(nx, j), id(nx, j + 1)});
  for (int i = nx; i > 0; --i) boundary.push_back({id(i, ny), id(i - 1, ny)});
  for (int j = ny; j > 0; --j) boundary.push_back({id(0, j), id(0, j - 1)});
  return Mesh(std::move(nodes), std::move(tris), std::move(boundary));
}

}  // namespace

const char* to_string(DomainKind kind) noexcept {
  switch (kind) {
    case DomainKind::Ball: return "ball";
    case DomainKind::Rectangle: return "rectangle";
    case DomainKind::Annulus: return "annulus";
    case DomainKind::ExternalMesh: return "mesh";
  }
  return "unknown";
}

double unit_ball_volume(int dimension) {
  return std::pow(std::numbers::pi, 0.5 * dimension) / std::tgamma(0.5 * dimension + 1.0);
}

double Domain::diameter() const {
  switch (kind) {
    case DomainKind::Ball: return 2.0 * radius;
    case DomainKind::Rectangle: return std::hypot(width, height);
    case DomainKind::Annulus: return 2.0 * r_outer;
    case DomainKind::ExternalMesh: break;
  }
  throw Error(ErrorKind::InvalidParameter, "diameter of an external mesh domain is not known before loading");
}

Domain make_ball(int dimension, double radius) {
  if (dimension < 2) throw Error(ErrorKind::InvalidParameter, "ball dimension must be >= 2");
  require_positive(radius, "radius");
  Domain d;
  d.kind = DomainKind::Ball;
  d.dimension = dimension;
  d.radius = radius;
  const double omega = unit_ball_volume(dimension);
  d.volume = omega * std::pow(radius, dimension);
  d.boundary_measure = dimension * omega * std::pow(radius, dimension - 1);
  return d;
}

Domain make_rectangle(double width, double height) {
  require_positive(width, "width");
  require_positive(height, "height");
  Domain d;
  d.kind = DomainKind::Rectangle;
  d.width = width;
  d.height = height;
  d.volume = width * height;
  d.boundary_measure = 2.0 * (width + height);
  return d;
}

Domain make_annulus(double r_inner, double r_outer) {
  require_positive(r_inner, "inner radius");
  require_positive(r_outer, "outer radius");
  if (!(r_inner < r_outer)) throw Error(ErrorKind::InvalidParameter, "annulus requires r_in < r_out");
  Domain d;
  d.kind = DomainKind::Annulus;
  d.r_inner = r_inner;
  d.r_outer = r_outer;
  d.volume = std::numbers::pi * (r_outer * r_outer - r_inner * r_inner);
  d.boundary_measure = kTwoPi * (r_outer + r_inner);
  return d;
}

Domain make_domain(DomainKind kind, const DomainParams& params) {
  switch (kind) {
    case DomainKind::Ball: return make_ball(params.dimension, params.radius);
    case DomainKind::Rectangle: return make_rectangle(params.width, params.height);
    case DomainKind::Annulus: return make_annulus(params.r_inner, params.r_outer);
    case DomainKind::ExternalMesh: {
      if (params.mesh_path.empty()) throw Error(ErrorKind::InvalidParameter, "mesh domain needs a path");
      Domain d;
      d.kind = DomainKind::ExternalMesh;
      d.mesh_path = params.mesh_path;
      return d;
    }
  }
  throw Error(ErrorKind::InvalidParameter, "unknown domain kind");
}

Mesh::Mesh(std::vector<Point> nodes, std::vector<Triangle> triangles, std::vector<Edge> boundary_edges)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)), boundary_edges_(std::move(boundary_edges)) {
  const int n = static_cast<int>(nodes_.size());
  if (n < 3 || triangles_.empty() || boundary_edges_.empty()) {
    throw Error(ErrorKind::InvariantViolation, "mesh needs at least 3 nodes, 1 triangle and 1 boundary edge");
  }
  auto in_range = [n](int i) { return i >= 0 && i < n; };

  // Owning triangle edges, directed counterclockwise.
  std::map<std::pair<int, int>, std::pair<int, Edge>> owners;  // key -> (count, directed edge)
  areas_.reserve(triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    auto& tri = triangles_[t];
    for (int v : tri) {
      if (!in_range(v)) throw Error(ErrorKind::InvariantViolation, "triangle " + std::to_string(t) + " index out of range");
    }
    double area = signed_area(nodes_[tri[0]], nodes_[tri[1]], nodes_[tri[2]]);
    if (area < 0.0) {
      std::swap(tri[1], tri[2]);
      area = -area;
    }
    if (!(area > 0.0)) throw Error(ErrorKind::InvariantViolation, "triangle " + std::to_string(t) + " has zero area");
    areas_.push_back(area);
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k];
      const int b = tri[(k + 1) % 3];
      auto& slot = owners[undirected(a, b)];
      ++slot.first;
      slot.second = {a, b};
      if (slot.first > 2) throw Error(ErrorKind::InvariantViolation, "edge shared by more than two triangles");
    }
  }

  std::map<std::pair<int, int>, int> listed;
  for (std::size_t e = 0; e < boundary_edges_.size(); ++e) {
    auto& edge = boundary_edges_[e];
    if (!in_range(edge[0]) || !in_range(edge[1]) || edge[0] == edge[1]) {
      throw Error(ErrorKind::InvariantViolation, "boundary edge " + std::to_string(e) + " has invalid indices");
    }
    const auto key = undirected(edge[0], edge[1]);
    auto it = owners.find(key);
    if (it == owners.end()) {
      throw Error(ErrorKind::InvariantViolation, "dangling boundary edge " + std::to_string(e));
    }
    if (it->second.first != 1) {
      throw Error(ErrorKind::InvariantViolation, "boundary edge " + std::to_string(e) + " is interior");
    }
    if (++listed[key] > 1) throw Error(ErrorKind::InvariantViolation, "duplicate boundary edge " + std::to_string(e));
    edge = it->second.second;
  }
  for (const auto& [key, slot] : owners) {
    if (slot.first == 1 && !listed.contains(key)) {
      throw Error(ErrorKind::InvariantViolation, "boundary edge (" + std::to_string(key.first) + "," +
                                                      std::to_string(key.second) + ") missing from the boundary list");
    }
  }

  std::vector<int> next(n, -1);
  std::vector<int> in_degree(n, 0);
  on_boundary_.assign(n, false);
  lengths_.reserve(boundary_edges_.size());
  for (const auto& [a, b] : boundary_edges_) {
    if (next[a] != -1) throw Error(ErrorKind::InvariantViolation, "boundary node " + std::to_string(a) + " is pinched");
    next[a] = b;
    ++in_degree[b];
    on_boundary_[a] = on_boundary_[b] = true;
    lengths_.push_back(std::hypot(nodes_[b].x - nodes_[a].x, nodes_[b].y - nodes_[a].y));
  }
  for (int v = 0; v < n; ++v) {
    if (on_boundary_[v] && (next[v] == -1 || in_degree[v] != 1)) {
      throw Error(ErrorKind::InvariantViolation, "boundary does not close at node " + std::to_string(v));
    }
  }
  std::vector<bool> seen(n, false);
  for (int v = 0; v < n; ++v) {
    if (!on_boundary_[v] || seen[v]) continue;
    ++loop_count_;
    for (int w = v; !seen[w]; w = next[w]) seen[w] = true;
  }
}

MeshMeasures mesh_measures(const Mesh& mesh) {
  MeshMeasures m;
  for (double a : mesh.triangle_areas()) m.volume += a;
  for (double l : mesh.edge_lengths()) m.boundary += l;
  return m;
}

Mesh triangulate(const Domain& domain, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorKind::InvalidParameter, "h must be positive");
  if (domain.kind == DomainKind::ExternalMesh) return load_mesh(domain.mesh_path);
  if (domain.kind == DomainKind::Ball && domain.dimension != 2) {
    throw Error(ErrorKind::InvalidParameter, "only 2D balls can be triangulated; use the radial solver for N > 2");
  }
  if (h >= domain.diameter()) {
    throw Error(ErrorKind::InfeasibleResolution, "h must be smaller than the domain diameter");
  }
  switch (domain.kind) {
    case DomainKind::Ball: return triangulate_disk(domain.radius, h);
    case DomainKind::Annulus: return triangulate_annulus(domain.r_inner, domain.r_outer, h);
    case DomainKind::Rectangle: return triangulate_rectangle(domain.width, domain.height, h);
    case DomainKind::ExternalMesh: break;
  }
  throw Error(ErrorKind::InvalidParameter, "unknown domain kind");
}

}  // namespace robin
