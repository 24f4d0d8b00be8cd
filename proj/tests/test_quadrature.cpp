// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <set>

#include "rwgcfie/errors.hpp"
#include "rwgcfie/quadrature.hpp"
#include "support.hpp"

using namespace rwgcfie;

namespace
{

double factorial(int n)
{
  return n <= 1 ? 1.0 : n * factorial(n - 1);
}

// Integral of x^p y^q over the reference triangle: p! q! / (p + q + 2)!.
double monomial_exact(int p, int q)
{
  return factorial(p) * factorial(q) / factorial(p + q + 2);
}

double apply_rule(const TriangleRule &rule, int p, int q)
{
  double sum = 0.0;
  for (int i = 0; i < rule.size(); ++i)
    sum += rule.weights[i] * std::pow(rule.points[i][1], p) * std::pow(rule.points[i][2], q);
  return sum;
}

SurfaceMesh equilateral()
{
  return SurfaceMesh({{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.5, std::sqrt(3.0) / 2.0, 0.0}},
                     {Triangle{0, 1, 2}});
}

const auto one = [](const Vec3 &) { return 1.0; };

// Pair-integral fixture from tests/oracles/pair_integrals.py: closed-form inner potentials,
// outer subdivision at four levels and Richardson extrapolation. Equals (3/4) ln 3 / (4 pi).
constexpr double laplace_equilateral_self = 6.556859110130364e-02;

}  // namespace

TEST_CASE("triangle rules are positive and integrate monomials exactly", "[quadrature]")
{
  // Declared degree -> degree actually guaranteed by the tabulated rule.
  const std::vector<std::pair<int, int>> rules{{1, 1}, {2, 2}, {3, 4}, {5, 5}, {7, 8}};
  for (const auto &[declared, exact_to] : rules)
  {
    const TriangleRule &rule = gauss_rule(declared);
    double total = 0.0;
    for (double w : rule.weights)
    {
      CHECK(w > 0.0);
      total += w;
    }
    CHECK(std::abs(total - 0.5) < 1e-15);
    for (const auto &b : rule.points)
      CHECK(std::abs(b[0] + b[1] + b[2] - 1.0) < 1e-14);
    for (int p = 0; p <= exact_to; ++p)
      for (int q = 0; p + q <= exact_to; ++q)
        CHECK(std::abs(apply_rule(rule, p, q) - monomial_exact(p, q)) < 1e-14);
  }
  CHECK(gauss_rule(1).size() == 1);
  CHECK(gauss_rule(1).weights[0] == 0.5);
  CHECK(std::abs(apply_rule(gauss_rule(3), 2, 1) - 1.0 / 60.0) < 1e-15);
  CHECK(std::abs(apply_rule(gauss_rule(7), 3, 3) - 36.0 / 40320.0) < 1e-15);
  CHECK_THROWS_AS(gauss_rule(4), DomainError);
}

TEST_CASE("Gauss-Legendre rules", "[quadrature]")
{
  for (int n : {1, 4, 9})
  {
    const LineRule r = gauss_legendre(n);
    for (int p = 0; p < 2 * n; ++p)
    {
      double sum = 0.0;
      for (int i = 0; i < n; ++i)
        sum += r.weights[i] * std::pow(r.nodes[i], p);
      CHECK(std::abs(sum - 1.0 / (p + 1)) < 1e-14);
    }
  }
  CHECK_THROWS_AS(gauss_legendre(0), DomainError);
}

TEST_CASE("pair classification follows shared vertices", "[quadrature]")
{
  const SurfaceMesh mesh = icosphere(1);
  const int F = mesh.num_triangles();
  int coincident = 0, edge = 0, vertex = 0, separated = 0, sharing = 0;
  for (int a = 0; a < F; ++a)
    for (int b = 0; b < F; ++b)
    {
      const PanelPair p = classify_pair(a, b, mesh);
      CHECK(p.kind == classify_pair(b, a, mesh).kind);
      std::set<int> va(mesh.triangle(a).begin(), mesh.triangle(a).end());
      int shared = 0;
      for (int v : mesh.triangle(b))
        shared += va.count(v);
      CHECK(p.shared == shared);
      for (int s = 0; s < p.shared; ++s)
        CHECK(mesh.triangle(a)[p.corners_a[s]] == mesh.triangle(b)[p.corners_b[s]]);
      switch (p.kind)
      {
      case PairClass::coincident:
        ++coincident;
        break;
      case PairClass::edge_adjacent:
        ++edge;
        break;
      case PairClass::vertex_adjacent:
        ++vertex;
        break;
      case PairClass::separated:
        ++separated;
        break;
      }
      if (a != b && shared > 0)
        ++sharing;
    }
  CHECK(coincident == F);
  CHECK(edge == 3 * F);
  CHECK(separated == F * F - F - sharing);
  CHECK(vertex == sharing - edge);
}

TEST_CASE("Laplace self-integral on an equilateral triangle", "[quadrature]")
{
  const SurfaceMesh mesh = equilateral();
  const PairQuadrature quad;
  const double value = pair_integral(LaplaceKernel{}, 0, 0, one, one, mesh, quad).real();
  CHECK(value > 0.0);
  CHECK(std::abs(value - laplace_equilateral_self) < 1e-6 * laplace_equilateral_self);
}

TEST_CASE("singular-order refinement changes coincident integrals by < 1e-6", "[quadrature]")
{
  const SurfaceMesh mesh = equilateral();
  QuadratureConfig fine;
  fine.singular_order = 2 * QuadratureConfig{}.singular_order;
  const PairQuadrature base, refined(fine);
  const auto linear = [](const Vec3 &x) { return Vec3(x[0], x[1] - 0.2, 0.0); };
  for (double k : {0.0, 1.0, 6.1})
  {
    auto eval = [&](const PairQuadrature &q)
    {
      return k == 0.0 ? pair_integral(LaplaceKernel{}, 0, 0, linear, linear, mesh, q)
                      : pair_integral(HelmholtzKernel{k}, 0, 0, linear, linear, mesh, q);
    };
    const std::complex<double> a = eval(base), b = eval(refined);
    CHECK(std::abs(a - b) < 1e-6 * std::abs(b));
  }
}

TEST_CASE("Helmholtz tends to Laplace as k -> 0", "[quadrature]")
{
  const SurfaceMesh mesh = icosphere(1);
  const PairQuadrature quad;
  for (int b : {0, 1, 7})
  {
    const double laplace = pair_integral(LaplaceKernel{}, 0, b, one, one, mesh, quad).real();
    const double areas = mesh.area(0) * mesh.area(b);
    for (double k : {1e-2, 1e-3, 1e-4})
    {
      const auto diff = pair_integral(HelmholtzKernel{k}, 0, b, one, one, mesh, quad) - laplace;
      // Leading term ik/(4 pi) A_a A_b; real part O(k^2).
      CHECK(std::abs(diff.imag() / k - areas / (4.0 * std::numbers::pi)) < 1e-3 * areas);
      CHECK(std::abs(diff.real()) < 10.0 * k * k * laplace);
    }
  }
}

TEST_CASE("far pair matches the midpoint approximation", "[quadrature]")
{
  const double diameter = 1.0;
  const double d = 20.0 * diameter;
  const SurfaceMesh mesh({{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.4, 0.8, 0.0},
                          {d, 0.2, 0.1}, {d + 0.9, 0.0, 0.3}, {d + 0.3, 0.7, 0.5}},
                         {Triangle{0, 1, 2}, Triangle{3, 4, 5}});
  const PairQuadrature quad;
  const double r = (mesh.centroid(0) - mesh.centroid(1)).norm();
  const double areas = mesh.area(0) * mesh.area(1);
  const double lap = pair_integral(LaplaceKernel{}, 0, 1, one, one, mesh, quad).real();
  CHECK(std::abs(lap - areas / (4.0 * std::numbers::pi * r)) < 0.01 * lap);
  // The midpoint rule also ignores the phase variation across each panel, so keep k * diameter small.
  const double k = 0.1;
  const auto hel = pair_integral(HelmholtzKernel{k}, 0, 1, one, one, mesh, quad);
  const auto mid = areas * HelmholtzKernel{k}(mesh.centroid(0), mesh.centroid(1));
  CHECK(std::abs(hel - mid) < 0.01 * std::abs(mid));
}

TEST_CASE("pair integrals are symmetric under swapping the panels", "[quadrature]")
{
  const SurfaceMesh mesh = icosphere(1);
  const PairQuadrature quad;
  const auto f = [](const Vec3 &x) { return Vec3(1.0 + x[0], x[1] * x[2], 0.5 - x[2]); };
  const auto g = [](const Vec3 &x) { return Vec3(x[2], 2.0 - x[0], x[0] * x[1]); };
  std::set<PairClass> seen;
  for (int b = 0; b < mesh.num_triangles(); ++b)
  {
    seen.insert(classify_pair(0, b, mesh).kind);
    const HelmholtzKernel kernel{2.0};
    const auto ab = pair_integral(kernel, 0, b, f, g, mesh, quad);
    const auto ba = pair_integral(kernel, b, 0, g, f, mesh, quad);
    CHECK(std::abs(ab - ba) <= 1e-10 * std::abs(ab));
    const auto lab = pair_integral(LaplaceKernel{}, 0, b, f, g, mesh, quad);
    const auto lba = pair_integral(LaplaceKernel{}, b, 0, g, f, mesh, quad);
    CHECK(std::abs(lab - lba) <= 1e-10 * std::abs(lab));
  }
  CHECK(seen.size() == 4);
}

TEST_CASE("Laplace self-integrals are positive on every panel", "[quadrature]")
{
  const SurfaceMesh mesh = icosphere(2);
  const PairQuadrature quad;
  for (int t = 0; t < mesh.num_triangles(); t += 7)
    CHECK(pair_integral(LaplaceKernel{}, t, t, one, one, mesh, quad).real() > 0.0);
}

TEST_CASE("adjacent-pair rules converge under refinement", "[quadrature]")
{
  const SurfaceMesh mesh = icosphere(1);
  QuadratureConfig fine;
  fine.singular_order = 10;
  const PairQuadrature base, refined(fine);
  for (int b = 1; b < mesh.num_triangles(); ++b)
  {
    const PairClass kind = classify_pair(0, b, mesh).kind;
    if (kind == PairClass::separated)
      continue;
    const auto a = pair_integral(LaplaceKernel{}, 0, b, one, one, mesh, base);
    const auto c = pair_integral(LaplaceKernel{}, 0, b, one, one, mesh, refined);
    CHECK(std::abs(a - c) < 1e-6 * std::abs(c));
  }
}

TEST_CASE("near-field promotion and configuration checks", "[quadrature]")
{
  const SurfaceMesh mesh = icosphere(2);
  const PairQuadrature quad;
  int near = 0, far = 0;
  for (int b = 0; b < mesh.num_triangles(); ++b)
  {
    if (classify_pair(0, b, mesh).kind != PairClass::separated)
      continue;
    (quad.is_near(mesh, 0, b) ? near : far)++;
    CHECK(quad.is_near(mesh, 0, b) == quad.is_near(mesh, b, 0));
  }
  CHECK(near > 0);
  CHECK(far > 0);

  QuadratureConfig bad;
  bad.regular_degree = 4;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = {};
  bad.singular_order = 0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = {};
  bad.near_threshold = -1.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("pair weights integrate the product of areas", "[quadrature]")
{
  const SurfaceMesh mesh = icosphere(1);
  const PairQuadrature quad;
  std::vector<PairPoint> nodes;
  for (int b = 0; b < mesh.num_triangles(); ++b)
  {
    quad.points(mesh, 3, b, nodes);
    double total = 0.0;
    for (const PairPoint &p : nodes)
      total += p.w;
    CHECK(std::abs(total - mesh.area(3) * mesh.area(b)) < 1e-13);
  }
}
