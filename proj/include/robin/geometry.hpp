#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace robin {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class DomainKind { Ball, Rectangle, Annulus, ExternalMesh };

const char* to_string(DomainKind kind) noexcept;

/// Shape parameters for make_domain. Only the fields relevant to the kind are
/// read; the rest are ignored.
struct DomainParams {
  int dimension = 2;
  double radius = 1.0;
  double width = 1.0;
  double height = 1.0;
  double r_inner = 0.5;
  double r_outer = 1.0;
  std::filesystem::path mesh_path;
};

/// Computational domain. Closed-form measures are filled in for the built-in
/// kinds; an external mesh only knows its measures after loading.
struct Domain {
  DomainKind kind = DomainKind::Ball;
  int dimension = 2;
  double radius = 0.0;
  double width = 0.0;
  double height = 0.0;
  double r_inner = 0.0;
  double r_outer = 0.0;
  std::filesystem::path mesh_path;
  std::optional<double> volume;
  std::optional<double> boundary_measure;

  double diameter() const;
};

/// Volume of the unit ball in R^N.
double unit_ball_volume(int dimension);

Domain make_domain(DomainKind kind, const DomainParams& params);
Domain make_ball(int dimension, double radius);
Domain make_rectangle(double width, double height);
Domain make_annulus(double r_inner, double r_outer);

using Triangle = std::array<int, 3>;
using Edge = std::array<int, 2>;

/// Triangulated 2D domain. Triangles are stored counterclockwise; boundary
/// edges are directed so that the right-hand normal points out of the domain.
/// Construction validates and normalizes orientation, after which the mesh is
/// immutable.
class Mesh {
 public:
  Mesh(std::vector<Point> nodes, std::vector<Triangle> triangles, std::vector<Edge> boundary_edges);

  std::span<const Point> nodes() const { return nodes_; }
  std::span<const Triangle> triangles() const { return triangles_; }
  std::span<const Edge> boundary_edges() const { return boundary_edges_; }
  std::span<const double> triangle_areas() const { return areas_; }
  std::span<const double> edge_lengths() const { return lengths_; }

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }

  /// True for nodes that lie on some boundary edge.
  const std::vector<bool>& boundary_mask() const { return on_boundary_; }

  /// Number of closed boundary loops.
  int boundary_loop_count() const { return loop_count_; }

 private:
  std::vector<Point> nodes_;
  std::vector<Triangle> triangles_;
  std::vector<Edge> boundary_edges_;
  std::vector<double> areas_;
  std::vector<double> lengths_;
  std::vector<bool> on_boundary_;
  int loop_count_ = 0;
};

struct MeshMeasures {
  double volume = 0.0;
  double boundary = 0.0;
};

MeshMeasures mesh_measures(const Mesh& mesh);

/// Conforming triangulation of a built-in 2D domain with target edge length h.
/// Disks and annuli are built from concentric node rings stitched into
/// triangulated bands; rectangles from a structured grid.
Mesh triangulate(const Domain& domain, double h);

Mesh load_mesh(const std::filesystem::path& path);
Mesh parse_mesh(const std::string& text);
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);
std::string format_mesh(const Mesh& mesh);

}  // namespace robin
