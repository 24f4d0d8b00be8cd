// SPDX-License-Identifier: Apache-2.0

#ifndef RWGCFIE_TESTS_SUPPORT_HPP
#define RWGCFIE_TESTS_SUPPORT_HPP

#include <memory>
#include <random>

#include <Eigen/Core>

#include "rwgcfie/basis.hpp"
#include "rwgcfie/geometry.hpp"

namespace rwgcfie::testing
{

// Mesh, topology and basis kept together so the basis' mesh reference stays valid.
struct Discretisation
{
  SurfaceMesh mesh;
  EdgeTopology topology;
  std::unique_ptr<RwgBasis> basis;

  explicit Discretisation(SurfaceMesh m, BoundaryPolicy policy = BoundaryPolicy::closed)
    : mesh(std::move(m)), topology(build_edge_topology(mesh, policy)),
      basis(std::make_unique<RwgBasis>(mesh, topology))
  {
  }
};

inline std::unique_ptr<Discretisation> sphere(int level)
{
  return std::make_unique<Discretisation>(icosphere(level));
}

// Two triangles folded along the shared edge (0,0,0)-(1,0,0); one interior RWG.
inline SurfaceMesh folded_pair()
{
  std::vector<Vec3> v{{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.3, 0.8, 0.0}, {0.6, -0.7, 0.35}};
  return SurfaceMesh(std::move(v), {Triangle{0, 1, 2}, Triangle{1, 0, 3}});
}

template <typename A>
double max_abs(const A &a)
{
  return a.cwiseAbs().maxCoeff();
}

inline Eigen::VectorXcd random_vector(int n, unsigned seed)
{
  std::mt19937 rng(seed);
  std::normal_distribution<double> dist;
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i)
    v[i] = {dist(rng), dist(rng)};
  return v;
}

}  // namespace rwgcfie::testing

#endif  // RWGCFIE_TESTS_SUPPORT_HPP
