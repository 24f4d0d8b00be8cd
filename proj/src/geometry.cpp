// SPDX-License-Identifier: Apache-2.0

#include "rwgcfie/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "rwgcfie/errors.hpp"

namespace rwgcfie
{

namespace
{

std::uint64_t edge_key(int a, int b)
{
  if (a > b)
    std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

std::string edge_name(int a, int b)
{
  return "(" + std::to_string(std::min(a, b)) + ", " + std::to_string(std::max(a, b)) + ")";
}

// Directed edges of a triangle: corner c is opposite edge (c+1 -> c+2).
struct Incidence
{
  int triangle;
  int corner;  // local corner opposite the edge
  bool forward;  // true if the triangle traverses the edge from the smaller vertex index
};

std::map<std::uint64_t, std::vector<Incidence>> collect_incidence(const SurfaceMesh &mesh)
{
  std::map<std::uint64_t, std::vector<Incidence>> incidence;
  for (int t = 0; t < mesh.num_triangles(); ++t)
  {
    const auto &tri = mesh.triangle(t);
    for (int c = 0; c < 3; ++c)
    {
      const int a = tri[(c + 1) % 3];
      const int b = tri[(c + 2) % 3];
      incidence[edge_key(a, b)].push_back({t, c, a < b});
    }
  }
  return incidence;
}

}  // namespace

SurfaceMesh::SurfaceMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
  : vertices_(std::move(vertices)), triangles_(std::move(triangles))
{
  const int nv = num_vertices();
  const auto nt = triangles_.size();
  areas_.resize(nt);
  normals_.resize(nt);
  centroids_.resize(nt);
  diameters_.resize(nt);
  for (std::size_t t = 0; t < nt; ++t)
  {
    for (int v : triangles_[t])
    {
      if (v < 0 || v >= nv)
      {
        throw DomainError("triangle " + std::to_string(t) + " references vertex " +
                          std::to_string(v) + " but the mesh has " + std::to_string(nv) +
                          " vertices");
      }
    }
    const Vec3 &p0 = vertices_[triangles_[t][0]];
    const Vec3 &p1 = vertices_[triangles_[t][1]];
    const Vec3 &p2 = vertices_[triangles_[t][2]];
    const Vec3 cross = (p1 - p0).cross(p2 - p0);
    const double norm = cross.norm();
    areas_[t] = 0.5 * norm;
    normals_[t] = norm > 0.0 ? Vec3(cross / norm) : Vec3::Zero();
    centroids_[t] = (p0 + p1 + p2) / 3.0;
    diameters_[t] = std::max({(p1 - p0).norm(), (p2 - p1).norm(), (p0 - p2).norm()});
  }
}

double SurfaceMesh::total_area() const
{
  return std::accumulate(areas_.begin(), areas_.end(), 0.0);
}

double SurfaceMesh::mean_area() const
{
  return areas_.empty() ? 0.0 : total_area() / static_cast<double>(areas_.size());
}

EdgeTopology build_edge_topology(const SurfaceMesh &mesh, BoundaryPolicy policy)
{
  EdgeTopology topo;
  topo.triangle_edges.assign(mesh.num_triangles(), {-1, -1, -1});

  // Sorted map keeps edge numbering deterministic (lexicographic in (v0, v1)).
  for (const auto &[key, inc] : collect_incidence(mesh))
  {
    const int v0 = static_cast<int>(key >> 32);
    const int v1 = static_cast<int>(key & 0xffffffffu);
    if (inc.size() == 1 && policy == BoundaryPolicy::open)
      continue;
    if (inc.size() != 2)
    {
      throw TopologyError("non-manifold edge " + edge_name(v0, v1) + " has " +
                          std::to_string(inc.size()) + " incident triangles");
    }
    if (inc[0].forward == inc[1].forward)
    {
      throw TopologyError("edge " + edge_name(v0, v1) +
                          " is traversed in the same direction by triangles " +
                          std::to_string(inc[0].triangle) + " and " +
                          std::to_string(inc[1].triangle));
    }
    const Incidence &plus = inc[0].forward ? inc[0] : inc[1];
    const Incidence &minus = inc[0].forward ? inc[1] : inc[0];

    Edge e;
    e.v0 = v0;
    e.v1 = v1;
    e.plus_triangle = plus.triangle;
    e.minus_triangle = minus.triangle;
    e.plus_opposite = mesh.triangle(plus.triangle)[plus.corner];
    e.minus_opposite = mesh.triangle(minus.triangle)[minus.corner];
    e.length = (mesh.vertex(v1) - mesh.vertex(v0)).norm();

    const int index = topo.num_edges();
    topo.triangle_edges[plus.triangle][plus.corner] = index;
    topo.triangle_edges[minus.triangle][minus.corner] = index;
    topo.edges.push_back(e);
  }
  return topo;
}

std::string ValidationReport::summary() const
{
  std::ostringstream os;
  os << (ok() ? "valid" : "invalid") << " mesh: chi=" << euler_characteristic
     << ", edges=" << num_edges;
  if (!non_manifold_edges.empty())
    os << ", non-manifold edges=" << non_manifold_edges.size();
  if (!misoriented_edges.empty())
    os << ", misoriented edges=" << misoriented_edges.size();
  if (!degenerate_triangles.empty())
    os << ", degenerate triangles=" << degenerate_triangles.size();
  return os.str();
}

ValidationReport validate(const SurfaceMesh &mesh)
{
  ValidationReport report;
  const auto incidence = collect_incidence(mesh);
  report.num_edges = static_cast<int>(incidence.size());
  report.euler_characteristic =
    mesh.num_vertices() - report.num_edges + mesh.num_triangles();

  for (const auto &[key, inc] : incidence)
  {
    const std::pair<int, int> edge{static_cast<int>(key >> 32),
                                   static_cast<int>(key & 0xffffffffu)};
    if (inc.size() != 2)
    {
      report.closed = false;
      report.non_manifold_edges.push_back(edge);
    }
    else if (inc[0].forward == inc[1].forward)
    {
      report.oriented = false;
      report.misoriented_edges.push_back(edge);
    }
  }

  const double threshold = 1e-12 * mesh.mean_area();
  for (int t = 0; t < mesh.num_triangles(); ++t)
  {
    if (!(mesh.area(t) > threshold))
      report.degenerate_triangles.push_back(t);
  }
  return report;
}

SurfaceMesh icosphere(int subdivisions, double radius)
{
  if (subdivisions < 0)
    throw DomainError("icosphere subdivision level must be non-negative");
  if (subdivisions > max_icosphere_subdivisions)
  {
    throw ResourceLimitError("icosphere subdivision level " + std::to_string(subdivisions) +
                             " exceeds the limit of " +
                             std::to_string(max_icosphere_subdivisions));
  }
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw DomainError("icosphere radius must be positive");

  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> vertices = {
    {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
    {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
  };
  for (auto &v : vertices)
    v = radius * v.normalized();

  std::vector<Triangle> triangles = {
    {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
    {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
    {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1},
  };

  for (int level = 0; level < subdivisions; ++level)
  {
    std::unordered_map<std::uint64_t, int> midpoints;
    auto midpoint = [&](int a, int b) {
      const auto key = edge_key(a, b);
      if (auto it = midpoints.find(key); it != midpoints.end())
        return it->second;
      const Vec3 m = 0.5 * (vertices[a] + vertices[b]);
      vertices.push_back(radius * m.normalized());
      const int index = static_cast<int>(vertices.size()) - 1;
      midpoints.emplace(key, index);
      return index;
    };

    std::vector<Triangle> refined;
    refined.reserve(triangles.size() * 4);
    for (const auto &[a, b, c] : triangles)
    {
      const int ab = midpoint(a, b);
      const int bc = midpoint(b, c);
      const int ca = midpoint(c, a);
      refined.push_back({a, ab, ca});
      refined.push_back({b, bc, ab});
      refined.push_back({c, ca, bc});
      refined.push_back({ab, bc, ca});
    }
    triangles = std::move(refined);
  }
  return SurfaceMesh(std::move(vertices), std::move(triangles));
}

void write_off(const SurfaceMesh &mesh, std::ostream &out)
{
  const auto report = validate(mesh);
  if (!report.ok())
    throw TopologyError("refusing to write " + report.summary());

  out << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_triangles() << " 0\n";
  out.precision(std::numeric_limits<double>::max_digits10);
  for (const auto &v : mesh.vertices())
    out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto &[a, b, c] : mesh.triangles())
    out << "3 " << a << ' ' << b << ' ' << c << '\n';
  if (!out)
    throw IoError("failed while writing OFF data");
}

void write_off(const SurfaceMesh &mesh, const std::filesystem::path &path)
{
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot open '" + path.string() + "' for writing");
  write_off(mesh, out);
}

namespace
{

bool next_content_line(std::istream &in, std::string &line, std::size_t &line_no)
{
  while (std::getline(in, line))
  {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos)
      return true;
  }
  return false;
}

// Reads exactly `n` values from the line; anything left over is an error.
template <typename T>
bool parse_exact(const std::string &line, T *values, int n)
{
  std::istringstream is(line);
  for (int i = 0; i < n; ++i)
  {
    if (!(is >> values[i]))
      return false;
  }
  std::string rest;
  return !(is >> rest);
}

}  // namespace

SurfaceMesh read_off(std::istream &in)
{
  std::string line;
  std::size_t line_no = 0;

  if (!next_content_line(in, line, line_no))
    throw ParseError("empty OFF file", 0);
  {
    std::istringstream is(line);
    std::string magic, rest;
    is >> magic;
    if (magic != "OFF" || (is >> rest))
      throw ParseError("expected 'OFF' header", line_no);
  }

  long counts[3];
  if (!next_content_line(in, line, line_no) || !parse_exact(line, counts, 3))
    throw ParseError("expected 'V F E' counts", line_no);
  if (counts[0] < 0 || counts[1] < 0 || counts[0] > std::numeric_limits<int>::max() ||
      counts[1] > std::numeric_limits<int>::max())
  {
    throw ParseError("invalid vertex or face count", line_no);
  }
  const int nv = static_cast<int>(counts[0]);
  const int nf = static_cast<int>(counts[1]);

  std::vector<Vec3> vertices(nv);
  for (int v = 0; v < nv; ++v)
  {
    double xyz[3];
    if (!next_content_line(in, line, line_no))
      throw ParseError("file ends after " + std::to_string(v) + " of " +
                         std::to_string(nv) + " vertices",
                       line_no);
    if (!parse_exact(line, xyz, 3))
      throw ParseError("expected 'x y z' vertex coordinates", line_no);
    vertices[v] = Vec3(xyz[0], xyz[1], xyz[2]);
  }

  std::vector<Triangle> triangles(nf);
  for (int f = 0; f < nf; ++f)
  {
    long idx[4];
    if (!next_content_line(in, line, line_no))
      throw ParseError("file ends after " + std::to_string(f) + " of " +
                         std::to_string(nf) + " declared faces",
                       line_no);
    if (!parse_exact(line, idx, 4) || idx[0] != 3)
      throw ParseError("expected triangular face '3 i j k'", line_no);
    for (int c = 0; c < 3; ++c)
    {
      if (idx[c + 1] < 0 || idx[c + 1] >= nv)
        throw ParseError("vertex index " + std::to_string(idx[c + 1]) + " out of range",
                         line_no);
      triangles[f][c] = static_cast<int>(idx[c + 1]);
    }
  }

  if (next_content_line(in, line, line_no))
    throw ParseError("more faces than the declared count of " + std::to_string(nf), line_no);

  return SurfaceMesh(std::move(vertices), std::move(triangles));
}

SurfaceMesh read_off(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open '" + path.string() + "' for reading");
  return read_off(in);
}

}  // namespace rwgcfie
