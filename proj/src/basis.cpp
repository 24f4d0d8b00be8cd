// SPDX-License-Identifier: Apache-2.0

#include "rwgcfie/basis.hpp"

#include <string>

#include "rwgcfie/errors.hpp"

namespace rwgcfie
{

RwgBasis::RwgBasis(const SurfaceMesh &mesh, const EdgeTopology &topology)
  : mesh_(&mesh), local_(mesh.num_triangles())
{
  if (static_cast<int>(topology.triangle_edges.size()) != mesh.num_triangles())
    throw DomainError("edge topology was built for a different mesh");

  functions_.reserve(topology.edges.size());
  for (int e = 0; e < topology.num_edges(); ++e)
  {
    const Edge &edge = topology.edges[e];
    RwgFunction f;
    f.edge = e;
    f.plus_triangle = edge.plus_triangle;
    f.minus_triangle = edge.minus_triangle;
    f.plus_vertex = mesh.vertex(edge.plus_opposite);
    f.minus_vertex = mesh.vertex(edge.minus_opposite);
    f.length = edge.length;
    f.plus_area = mesh.area(edge.plus_triangle);
    f.minus_area = mesh.area(edge.minus_triangle);
    functions_.push_back(f);
  }

  for (int t = 0; t < mesh.num_triangles(); ++t)
  {
    for (int c = 0; c < 3; ++c)
    {
      const int e = topology.triangle_edges[t][c];
      if (e < 0)
        continue;
      const RwgFunction &f = functions_[e];
      LocalRwg &loc = local_[t][c];
      loc.function = e;
      if (f.plus_triangle == t)
      {
        loc.free_vertex = f.plus_vertex;
        loc.scale = f.length / (2.0 * f.plus_area);
      }
      else
      {
        loc.free_vertex = f.minus_vertex;
        loc.scale = -f.length / (2.0 * f.minus_area);
      }
    }
  }
}

const LocalRwg &RwgBasis::local(int i, int triangle) const
{
  if (i < 0 || i >= size())
    throw DomainError("basis index " + std::to_string(i) + " out of range");
  if (triangle >= 0 && triangle < mesh_->num_triangles())
  {
    for (const auto &loc : local_[triangle])
    {
      if (loc.function == i)
        return loc;
    }
  }
  throw DomainError("triangle " + std::to_string(triangle) +
                    " is not in the support of RWG function " + std::to_string(i));
}

Vec3 RwgBasis::value(int i, int triangle, const Vec3 &point) const
{
  return local(i, triangle).value(point);
}

double RwgBasis::divergence(int i, int triangle) const
{
  return local(i, triangle).divergence();
}

Vec3 RwgBasis::cross_n(int i, int triangle, const Vec3 &point) const
{
  return mesh_->normal(triangle).cross(local(i, triangle).value(point));
}

}  // namespace rwgcfie
