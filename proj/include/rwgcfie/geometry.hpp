// SPDX-License-Identifier: Apache-2.0

#ifndef RWGCFIE_GEOMETRY_HPP
#define RWGCFIE_GEOMETRY_HPP

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace rwgcfie
{

using Vec3 = Eigen::Vector3d;
using Triangle = std::array<int, 3>;

// Flat-faceted surface. Per-triangle area, unit normal, centroid and diameter are computed
// once at construction; the mesh is immutable afterwards. The constructor rejects vertex
// indices out of range (DomainError) but otherwise accepts any triangle soup; use
// validate() to check closedness and orientation.
class SurfaceMesh
{
public:
  SurfaceMesh() = default;
  SurfaceMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

  const std::vector<Vec3> &vertices() const { return vertices_; }
  const std::vector<Triangle> &triangles() const { return triangles_; }
  const Vec3 &vertex(int v) const { return vertices_[v]; }
  const Triangle &triangle(int t) const { return triangles_[t]; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }

  double area(int t) const { return areas_[t]; }
  const Vec3 &normal(int t) const { return normals_[t]; }
  const Vec3 &centroid(int t) const { return centroids_[t]; }
  // Longest edge of triangle t.
  double diameter(int t) const { return diameters_[t]; }

  // Vertex position of corner `corner` (0..2) of triangle t.
  const Vec3 &corner(int t, int corner) const { return vertices_[triangles_[t][corner]]; }

  double total_area() const;
  double mean_area() const;

private:
  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<double> areas_;
  std::vector<Vec3> normals_;
  std::vector<Vec3> centroids_;
  std::vector<double> diameters_;
};

// Interior edge shared by a plus and a minus triangle. For v0 < v1 the plus triangle is the
// one whose cyclic vertex order contains the directed edge v0 -> v1.
struct Edge
{
  int v0 = -1;
  int v1 = -1;
  int plus_triangle = -1;
  int minus_triangle = -1;
  int plus_opposite = -1;   // vertex of the plus triangle not on the edge
  int minus_opposite = -1;  // vertex of the minus triangle not on the edge
  double length = 0.0;
};

struct EdgeTopology
{
  std::vector<Edge> edges;
  // For each triangle, the interior edge opposite each local corner (-1 on a boundary).
  std::vector<std::array<int, 3>> triangle_edges;

  int num_edges() const { return static_cast<int>(edges.size()); }
};

enum class BoundaryPolicy
{
  closed,  // every edge must have exactly two incident triangles
  open,    // single-triangle edges are skipped; used for isolated patches in tests
};

// Throws TopologyError naming the first non-manifold or inconsistently oriented edge.
EdgeTopology build_edge_topology(const SurfaceMesh &mesh,
                                 BoundaryPolicy policy = BoundaryPolicy::closed);

struct ValidationReport
{
  bool closed = true;
  bool oriented = true;
  int euler_characteristic = 0;
  int num_edges = 0;
  // Undirected edges (smaller index first) with incidence != 2.
  std::vector<std::pair<int, int>> non_manifold_edges;
  // Undirected edges traversed in the same direction by both incident triangles.
  std::vector<std::pair<int, int>> misoriented_edges;
  // Triangles with area below 1e-12 x mean area.
  std::vector<int> degenerate_triangles;

  bool ok() const
  {
    return closed && oriented && degenerate_triangles.empty();
  }
  std::string summary() const;
};

ValidationReport validate(const SurfaceMesh &mesh);

inline constexpr int max_icosphere_subdivisions = 7;

// Midpoint-subdivided regular icosahedron with every new vertex projected back onto the
// sphere; 20 * 4^subdivisions outward-oriented triangles.
SurfaceMesh icosphere(int subdivisions, double radius = 1.0);

// OFF reader/writer restricted to triangles: "OFF", "V F 0", V coordinate lines, F lines
// "3 i j k" with zero-based indices.
void write_off(const SurfaceMesh &mesh, std::ostream &out);
void write_off(const SurfaceMesh &mesh, const std::filesystem::path &path);
SurfaceMesh read_off(std::istream &in);
SurfaceMesh read_off(const std::filesystem::path &path);

}  // namespace rwgcfie

#endif  // RWGCFIE_GEOMETRY_HPP
