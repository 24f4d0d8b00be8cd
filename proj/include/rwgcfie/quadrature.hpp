// SPDX-License-Identifier: Apache-2.0

#ifndef RWGCFIE_QUADRATURE_HPP
#define RWGCFIE_QUADRATURE_HPP

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <type_traits>
#include <vector>

#include "rwgcfie/errors.hpp"
#include "rwgcfie/geometry.hpp"

namespace rwgcfie
{

// Symmetric rule on the reference triangle (0,0), (1,0), (0,1). Points are barycentric
// (b0, b1, b2) with reference coordinates (b1, b2); weights are positive and sum to 1/2.
struct TriangleRule
{
  int degree = 0;
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;

  int size() const { return static_cast<int>(weights.size()); }
  // Physical point of node q on triangle t of the mesh.
  Vec3 map(const SurfaceMesh &mesh, int t, int q) const
  {
    const auto &b = points[q];
    return b[0] * mesh.corner(t, 0) + b[1] * mesh.corner(t, 1) + b[2] * mesh.corner(t, 2);
  }
};

// Supported degrees: 1, 2, 3, 5, 7 (the degree-3 and degree-7 requests are served by
// positive-weight rules of degree 4 and 8). Throws DomainError otherwise.
const TriangleRule &gauss_rule(int degree);

// n-point Gauss-Legendre rule on [0, 1].
struct LineRule
{
  std::vector<double> nodes;
  std::vector<double> weights;
};
LineRule gauss_legendre(int n);

enum class PairClass
{
  coincident,
  edge_adjacent,
  vertex_adjacent,
  separated,
};

std::string to_string(PairClass c);

// Classification of two mesh triangles by shared vertices. `corners_a`/`corners_b` list the
// local corners of each triangle with the shared vertices first, in matching order.
struct PanelPair
{
  PairClass kind = PairClass::separated;
  int shared = 0;
  std::array<int, 3> corners_a{0, 1, 2};
  std::array<int, 3> corners_b{0, 1, 2};
};

PanelPair classify_pair(int tri_a, int tri_b, const SurfaceMesh &mesh);

struct QuadratureConfig
{
  int regular_degree = 3;       // tensor rule for well-separated pairs
  int near_degree = 7;          // promoted rule for close pairs
  int singular_order = 6;       // Gauss points per dimension of the singular transforms
  double near_threshold = 2.0;  // promote when centroid distance < this * max diameter

  void validate() const;
};

// One node of a panel-pair rule; `w` includes both surface Jacobians, so that
// sum w f(x, y) approximates the double surface integral.
struct PairPoint
{
  Vec3 x;
  Vec3 y;
  double w;
};

// Panel-pair quadrature: tensor Gauss for separated pairs, singularity-cancelling
// relative-coordinate (Sauter-Schwab) transforms for coincident, edge- and vertex-adjacent
// pairs. Holds only precomputed reference rules and is safe to share across threads.
class PairQuadrature
{
public:
  explicit PairQuadrature(const QuadratureConfig &config = {});

  const QuadratureConfig &config() const { return config_; }

  // Fills `out` with the nodes for the pair (a, b) and returns its classification.
  PanelPair points(const SurfaceMesh &mesh, int a, int b, std::vector<PairPoint> &out) const;

  // Whether a separated pair is promoted to the near-field rule, and the rule it gets.
  bool is_near(const SurfaceMesh &mesh, int a, int b) const;
  const TriangleRule &separated_rule(const SurfaceMesh &mesh, int a, int b) const
  {
    return is_near(mesh, a, b) ? *near_ : *regular_;
  }
  const TriangleRule &regular_rule() const { return *regular_; }
  const TriangleRule &near_rule() const { return *near_; }

private:
  // Reference nodes (s1, s2, t1, t2) on the unit triangle for each of the two panels.
  struct ReferenceRule
  {
    std::vector<std::array<double, 4>> nodes;
    std::vector<double> weights;
  };
  static ReferenceRule coincident_rule(int order);
  static ReferenceRule edge_rule(int order);
  static ReferenceRule vertex_rule(int order);

  void map_reference(const SurfaceMesh &mesh, int a, int b, const PanelPair &pair,
                     const ReferenceRule &rule, std::vector<PairPoint> &out) const;

  QuadratureConfig config_;
  const TriangleRule *regular_;
  const TriangleRule *near_;
  ReferenceRule coincident_;
  ReferenceRule edge_;
  ReferenceRule vertex_;
};

// exp(ik|x-y|) / (4 pi |x-y|)
struct HelmholtzKernel
{
  double k;
  std::complex<double> operator()(const Vec3 &x, const Vec3 &y) const
  {
    const double r = (x - y).norm();
    return std::polar(1.0 / (4.0 * std::numbers::pi * r), k * r);
  }
};

// 1 / (4 pi |x-y|)
struct LaplaceKernel
{
  double operator()(const Vec3 &x, const Vec3 &y) const
  {
    return 1.0 / (4.0 * std::numbers::pi * (x - y).norm());
  }
};

namespace detail
{

template <typename A, typename B>
auto contract(const A &a, const B &b)
{
  if constexpr (std::is_arithmetic_v<A> || std::is_same_v<A, std::complex<double>>)
    return a * b;
  else
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];  // bilinear, no conjugation
}

}  // namespace detail

// Double integral over tri_a x tri_b of kernel(x, y) fa(x) . fb(y) (a plain product when
// the factors are scalars). Vector factors are 3-vectors, real or complex; the product is
// bilinear (no conjugation).
template <typename Kernel, typename Fa, typename Fb>
std::complex<double> pair_integral(const Kernel &kernel, int tri_a, int tri_b, Fa &&fa,
                                   Fb &&fb, const SurfaceMesh &mesh,
                                   const PairQuadrature &quadrature)
{
  std::vector<PairPoint> nodes;
  quadrature.points(mesh, tri_a, tri_b, nodes);
  std::complex<double> sum = 0.0;
  for (const auto &p : nodes)
    sum += p.w * kernel(p.x, p.y) * std::complex<double>(detail::contract(fa(p.x), fb(p.y)));
  if (!std::isfinite(sum.real()) || !std::isfinite(sum.imag()))
  {
    throw NumericalError("non-finite panel-pair integral for triangles " +
                         std::to_string(tri_a) + " and " + std::to_string(tri_b));
  }
  return sum;
}

}  // namespace rwgcfie

#endif  // RWGCFIE_QUADRATURE_HPP
