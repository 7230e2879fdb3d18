#pragma once

// Boundary-fitted triangulations of star-shaped domains.
//
// The mesh is built from rings that are homothetic copies of the boundary
// about the domain center. Nodes on every ring sit at equal fractions of
// the boundary arclength, so tangential spacing is uniform along each ring.
// Adjacent rings are zipped together into triangles, and the innermost ring
// is closed by a fan around the center vertex.

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "habitat/geometry.hpp"

namespace habitat {

struct Mesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<double> cell_measure;
  std::vector<bool> boundary_flags;
  double resolution = 0.0;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_cells() const { return static_cast<int>(triangles.size()); }
  double total_measure() const;
  double min_cell_measure() const;
  Point centroid(int cell) const;

  /// Recomputes cell_measure from the vertex coordinates.
  void update_measures();

  /// Same topology with every vertex mapped through x -> s R x + shift.
  Mesh transformed(double scale, double angle, const Point& shift) const;

  /// Mesh from raw arrays; boundary flags from edges used by one triangle.
  static Mesh from_triangles(std::vector<Point> vertices,
                             std::vector<std::array<int, 3>> triangles);
};

/// Grading: edge length `boundary_h` within `layer_depth` of the boundary,
/// then growing by `growth` per ring up to `interior_h`.
struct MeshSizing {
  double boundary_h = 0.05;
  double interior_h = 0.05;
  double layer_depth = 0.0;
  double growth = 1.15;
  /// Ring vertex counts are rounded up to a multiple of this, so a disk mesh
  /// is invariant under rotation by 2π/symmetry.
  int symmetry = 1;

  static MeshSizing uniform(double h) { return {h, h, 0.0, 1.0}; }
};

/// Uniform triangulation with characteristic edge length `resolution`.
/// Requires resolution < R_min / 4.
Mesh build_mesh(const DomainSpec& spec, double resolution);
Mesh build_mesh(const DomainSpec& spec, const MeshSizing& sizing);

double aspect_ratio(const Mesh& mesh, int cell);

/// "v x y" per vertex, then "t i j k" per triangle (zero-based).
void write_mesh_text(const Mesh& mesh, std::ostream& out);

/// Vertex -> neighbouring vertices through triangle edges.
std::vector<std::vector<int>> vertex_neighbors(const Mesh& mesh);

/// Cell -> cells sharing an edge.
std::vector<std::vector<int>> cell_neighbors(const Mesh& mesh);

/// Bucketed point location with barycentric interpolation.
class PointLocator {
 public:
  explicit PointLocator(const Mesh& mesh);

  struct Hit {
    int cell = -1;
    std::array<double, 3> barycentric{};
  };

  std::optional<Hit> locate(const Point& p) const;

  /// Piecewise-linear interpolation of a vertex field; nullopt outside.
  std::optional<double> interpolate(const std::vector<double>& field,
                                    const Point& p) const;

 private:
  const Mesh* mesh_;
  Point lo_;
  double cell_size_ = 1.0;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<std::vector<int>> buckets_;
};

}  // namespace habitat
