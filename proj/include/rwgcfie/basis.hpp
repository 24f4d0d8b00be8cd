// SPDX-License-Identifier: Apache-2.0

#ifndef RWGCFIE_BASIS_HPP
#define RWGCFIE_BASIS_HPP

#include <array>
#include <vector>

#include "rwgcfie/geometry.hpp"

namespace rwgcfie
{

// Rao-Wilton-Glisson function attached to one interior edge, normalised with the edge
// length:
//   t(r) =  l / (2 A+) (r - p+)   on the plus triangle,
//   t(r) =  l / (2 A-) (p- - r)   on the minus triangle.
struct RwgFunction
{
  int edge = -1;
  int plus_triangle = -1;
  int minus_triangle = -1;
  Vec3 plus_vertex = Vec3::Zero();   // p+, free vertex of the plus triangle
  Vec3 minus_vertex = Vec3::Zero();  // p-, free vertex of the minus triangle
  double length = 0.0;
  double plus_area = 0.0;
  double minus_area = 0.0;
};

// One basis function restricted to one triangle: t(r) = scale * (r - free_vertex), with
// scale = +-l / (2A). The surface divergence is 2 * scale.
struct LocalRwg
{
  int function = -1;  // -1 when the local edge is a boundary edge
  Vec3 free_vertex = Vec3::Zero();
  double scale = 0.0;

  bool active() const { return function >= 0; }
  Vec3 value(const Vec3 &r) const { return scale * (r - free_vertex); }
  double divergence() const { return 2.0 * scale; }
};

// RWG space over a mesh, indexed in EdgeTopology order. Holds a reference to the mesh,
// which must outlive the basis.
class RwgBasis
{
public:
  RwgBasis(const SurfaceMesh &mesh, const EdgeTopology &topology);

  int size() const { return static_cast<int>(functions_.size()); }
  const RwgFunction &function(int i) const { return functions_[i]; }
  const SurfaceMesh &mesh() const { return *mesh_; }

  // Up to three functions supported on triangle t, in local-corner order.
  const std::array<LocalRwg, 3> &on_triangle(int t) const { return local_[t]; }

  // Throw DomainError if `triangle` is not in the support of function i.
  Vec3 value(int i, int triangle, const Vec3 &point) const;
  double divergence(int i, int triangle) const;
  Vec3 cross_n(int i, int triangle, const Vec3 &point) const;  // n x t_i

private:
  const LocalRwg &local(int i, int triangle) const;

  const SurfaceMesh *mesh_;
  std::vector<RwgFunction> functions_;
  std::vector<std::array<LocalRwg, 3>> local_;
};

}  // namespace rwgcfie

#endif  // RWGCFIE_BASIS_HPP
