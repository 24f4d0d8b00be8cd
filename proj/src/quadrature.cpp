// SPDX-License-Identifier: Apache-2.0

#include "rwgcfie/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rwgcfie
{

namespace
{

using Bary = std::array<double, 3>;

// Orbit of (a, b, c) under permutation, weight w each.
void add_orbit(TriangleRule &rule, double a, double b, double c, double w)
{
  Bary p{a, b, c};
  std::sort(p.begin(), p.end());
  do
  {
    rule.points.push_back(p);
    rule.weights.push_back(w);
  } while (std::next_permutation(p.begin(), p.end()));
}

TriangleRule make_rule(int degree)
{
  TriangleRule r;
  r.degree = degree;
  switch (degree)
  {
  case 1:
    add_orbit(r, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0);
    break;
  case 2:
    add_orbit(r, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0);
    break;
  case 3:
  {
    // Dunavant, 6 points, exact to degree 4.
    const double a = 0.445948490915964886318329253883;
    const double b = 0.0915762135097707434595714634022;
    add_orbit(r, 1.0 - 2.0 * a, a, a, 0.223381589678011465695007008433);
    add_orbit(r, 1.0 - 2.0 * b, b, b, 0.109951743655321867638326324900);
    break;
  }
  case 5:
  {
    // Radon, 7 points.
    const double s = std::sqrt(15.0);
    const double a = (6.0 - s) / 21.0;
    const double b = (6.0 + s) / 21.0;
    add_orbit(r, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.225);
    add_orbit(r, 1.0 - 2.0 * a, a, a, (155.0 - s) / 1200.0);
    add_orbit(r, 1.0 - 2.0 * b, b, b, (155.0 + s) / 1200.0);
    break;
  }
  case 7:
    // Dunavant, 16 points, exact to degree 8.
    add_orbit(r, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.144315607677787);
    add_orbit(r, 0.081414823414554, 0.459292588292723, 0.459292588292723, 0.095091634267285);
    add_orbit(r, 0.658861384496480, 0.170569307751760, 0.170569307751760, 0.103217370534718);
    add_orbit(r, 0.898905543365938, 0.050547228317031, 0.050547228317031, 0.032458497623198);
    add_orbit(r, 0.008394777409958, 0.263112829634638, 0.728492392955404, 0.027230314174435);
    break;
  default:
    throw DomainError("unsupported triangle rule degree " + std::to_string(degree) +
                      " (supported: 1, 2, 3, 5, 7)");
  }
  // Tabulated weights are normalised to unit total; the reference triangle has area 1/2.
  double total = 0.0;
  for (double w : r.weights)
    total += w;
  for (double &w : r.weights)
    w *= 0.5 / total;
  return r;
}

}  // namespace

const TriangleRule &gauss_rule(int degree)
{
  static const TriangleRule r1 = make_rule(1), r2 = make_rule(2), r3 = make_rule(3),
                            r5 = make_rule(5), r7 = make_rule(7);
  switch (degree)
  {
  case 1:
    return r1;
  case 2:
    return r2;
  case 3:
    return r3;
  case 5:
    return r5;
  case 7:
    return r7;
  default:
    throw DomainError("unsupported triangle rule degree " + std::to_string(degree) +
                      " (supported: 1, 2, 3, 5, 7)");
  }
}

LineRule gauss_legendre(int n)
{
  if (n < 1)
    throw DomainError("Gauss-Legendre rule needs at least one point");
  LineRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i)
  {
    // Newton on P_n starting from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter)
    {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j)
      {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    // Map from [-1, 1] to [0, 1].
    rule.nodes[n - 1 - i] = 0.5 * (x + 1.0);
    rule.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

std::string to_string(PairClass c)
{
  switch (c)
  {
  case PairClass::coincident:
    return "coincident";
  case PairClass::edge_adjacent:
    return "edge-adjacent";
  case PairClass::vertex_adjacent:
    return "vertex-adjacent";
  case PairClass::separated:
    return "separated";
  }
  return "unknown";
}

PanelPair classify_pair(int tri_a, int tri_b, const SurfaceMesh &mesh)
{
  const auto &ta = mesh.triangle(tri_a);
  const auto &tb = mesh.triangle(tri_b);
  PanelPair pair;
  if (tri_a == tri_b)
  {
    pair.kind = PairClass::coincident;
    pair.shared = 3;
    return pair;
  }

  int shared = 0;
  std::array<bool, 3> used_a{}, used_b{};
  for (int i = 0; i < 3; ++i)
  {
    for (int j = 0; j < 3; ++j)
    {
      if (ta[i] == tb[j])
      {
        pair.corners_a[shared] = i;
        pair.corners_b[shared] = j;
        used_a[i] = used_b[j] = true;
        ++shared;
        break;
      }
    }
  }
  int na = shared, nb = shared;
  for (int i = 0; i < 3; ++i)
  {
    if (!used_a[i])
      pair.corners_a[na++] = i;
    if (!used_b[i])
      pair.corners_b[nb++] = i;
  }
  pair.shared = shared;
  switch (shared)
  {
  case 3:
    pair.kind = PairClass::coincident;  // duplicated triangle
    break;
  case 2:
    pair.kind = PairClass::edge_adjacent;
    break;
  case 1:
    pair.kind = PairClass::vertex_adjacent;
    break;
  default:
    pair.kind = PairClass::separated;
  }
  return pair;
}

void QuadratureConfig::validate() const
{
  auto supported = [](int d) { return d == 1 || d == 2 || d == 3 || d == 5 || d == 7; };
  if (!supported(regular_degree) || !supported(near_degree))
    throw DomainError("quadrature degrees must be one of 1, 2, 3, 5, 7");
  if (singular_order < 1 || singular_order > 32)
    throw DomainError("singular quadrature order must be in [1, 32]");
  if (!(near_threshold >= 0.0))
    throw DomainError("near-field threshold must be non-negative");
}

// The singular rules follow Sauter & Schwab: the 4D integral over the pair of reference
// triangles {0 <= eta <= xi <= 1} is split into sub-simplices, each mapped from [0,1]^4 so
// that the Jacobian cancels the 1/|x-y| singularity. Reference coordinates (xi, eta) are
// converted to the unit triangle by (xi - eta, eta), with shared vertices at the origin and,
// for edge adjacency, the shared edge along the first axis.
PairQuadrature::ReferenceRule PairQuadrature::coincident_rule(int order)
{
  const LineRule g = gauss_legendre(order);
  ReferenceRule rule;
  auto push = [&](double s0, double s1, double t0, double t1, double w) {
    rule.nodes.push_back({s0 - s1, s1, t0 - t1, t1});
    rule.weights.push_back(w);
  };
  for (int a = 0; a < order; ++a)
    for (int b = 0; b < order; ++b)
      for (int c = 0; c < order; ++c)
        for (int d = 0; d < order; ++d)
        {
          const double xi = g.nodes[a], e1 = g.nodes[b], e2 = g.nodes[c], e3 = g.nodes[d];
          const double w = g.weights[a] * g.weights[b] * g.weights[c] * g.weights[d] * xi *
                           xi * xi * e1 * e1 * e2;
          push(xi, xi * (1.0 - e1 + e1 * e2), xi * (1.0 - e1 * e2 * e3), xi * (1.0 - e1), w);
          push(xi * (1.0 - e1 * e2 * e3), xi * (1.0 - e1), xi, xi * (1.0 - e1 + e1 * e2), w);
          push(xi, xi * (e1 * (1.0 - e2 + e2 * e3)), xi * (1.0 - e1 * e2),
               xi * (e1 * (1.0 - e2)), w);
          push(xi * (1.0 - e1 * e2), xi * (e1 * (1.0 - e2)), xi,
               xi * (e1 * (1.0 - e2 + e2 * e3)), w);
          push(xi * (1.0 - e1 * e2 * e3), xi * (e1 * (1.0 - e2 * e3)), xi,
               xi * (e1 * (1.0 - e2)), w);
          push(xi, xi * (e1 * (1.0 - e2)), xi * (1.0 - e1 * e2 * e3),
               xi * (e1 * (1.0 - e2 * e3)), w);
        }
  return rule;
}

PairQuadrature::ReferenceRule PairQuadrature::edge_rule(int order)
{
  const LineRule g = gauss_legendre(order);
  ReferenceRule rule;
  auto push = [&](double s0, double s1, double t0, double t1, double w) {
    rule.nodes.push_back({s0 - s1, s1, t0 - t1, t1});
    rule.weights.push_back(w);
  };
  for (int a = 0; a < order; ++a)
    for (int b = 0; b < order; ++b)
      for (int c = 0; c < order; ++c)
        for (int d = 0; d < order; ++d)
        {
          const double xi = g.nodes[a], e1 = g.nodes[b], e2 = g.nodes[c], e3 = g.nodes[d];
          const double base =
            g.weights[a] * g.weights[b] * g.weights[c] * g.weights[d] * xi * xi * xi * e1 * e1;
          const double w = base * e2;
          push(xi, xi * e1 * e3, xi * (1.0 - e1 * e2), xi * (e1 * (1.0 - e2)), base);
          push(xi, xi * e1, xi * (1.0 - e1 * e2 * e3), xi * (e1 * e2 * (1.0 - e3)), w);
          push(xi * (1.0 - e1 * e2), xi * (e1 * (1.0 - e2)), xi, xi * (e1 * e2 * e3), w);
          push(xi * (1.0 - e1 * e2 * e3), xi * (e1 * e2 * (1.0 - e3)), xi, xi * e1, w);
          push(xi * (1.0 - e1 * e2 * e3), xi * (e1 * (1.0 - e2 * e3)), xi, xi * (e1 * e2), w);
        }
  return rule;
}

PairQuadrature::ReferenceRule PairQuadrature::vertex_rule(int order)
{
  const LineRule g = gauss_legendre(order);
  ReferenceRule rule;
  auto push = [&](double s0, double s1, double t0, double t1, double w) {
    rule.nodes.push_back({s0 - s1, s1, t0 - t1, t1});
    rule.weights.push_back(w);
  };
  for (int a = 0; a < order; ++a)
    for (int b = 0; b < order; ++b)
      for (int c = 0; c < order; ++c)
        for (int d = 0; d < order; ++d)
        {
          const double xi = g.nodes[a], e1 = g.nodes[b], e2 = g.nodes[c], e3 = g.nodes[d];
          const double w =
            g.weights[a] * g.weights[b] * g.weights[c] * g.weights[d] * xi * xi * xi * e2;
          push(xi, xi * e1, xi * e2, xi * e2 * e3, w);
          push(xi * e2, xi * e2 * e3, xi, xi * e1, w);
        }
  return rule;
}

PairQuadrature::PairQuadrature(const QuadratureConfig &config)
  : config_(config)
{
  config_.validate();
  regular_ = &gauss_rule(config_.regular_degree);
  near_ = &gauss_rule(config_.near_degree);
  coincident_ = coincident_rule(config_.singular_order);
  edge_ = edge_rule(config_.singular_order);
  vertex_ = vertex_rule(config_.singular_order);
}

bool PairQuadrature::is_near(const SurfaceMesh &mesh, int a, int b) const
{
  const double dist = (mesh.centroid(a) - mesh.centroid(b)).norm();
  return dist < config_.near_threshold * std::max(mesh.diameter(a), mesh.diameter(b));
}

void PairQuadrature::map_reference(const SurfaceMesh &mesh, int a, int b,
                                   const PanelPair &pair, const ReferenceRule &rule,
                                   std::vector<PairPoint> &out) const
{
  const Vec3 &a0 = mesh.corner(a, pair.corners_a[0]);
  const Vec3 a1 = mesh.corner(a, pair.corners_a[1]) - a0;
  const Vec3 a2 = mesh.corner(a, pair.corners_a[2]) - a0;
  const Vec3 &b0 = mesh.corner(b, pair.corners_b[0]);
  const Vec3 b1 = mesh.corner(b, pair.corners_b[1]) - b0;
  const Vec3 b2 = mesh.corner(b, pair.corners_b[2]) - b0;
  const double jac = 4.0 * mesh.area(a) * mesh.area(b);
  out.resize(rule.weights.size());
  for (std::size_t q = 0; q < rule.weights.size(); ++q)
  {
    const auto &n = rule.nodes[q];
    out[q].x = a0 + n[0] * a1 + n[1] * a2;
    out[q].y = b0 + n[2] * b1 + n[3] * b2;
    out[q].w = jac * rule.weights[q];
  }
}

PanelPair PairQuadrature::points(const SurfaceMesh &mesh, int a, int b,
                                 std::vector<PairPoint> &out) const
{
  // Nodes are always generated for the ordered pair (min, max) so that swapping the panels
  // swaps x and y exactly.
  if (a > b)
  {
    points(mesh, b, a, out);
    for (auto &p : out)
      std::swap(p.x, p.y);
    return classify_pair(a, b, mesh);
  }
  const PanelPair pair = classify_pair(a, b, mesh);
  switch (pair.kind)
  {
  case PairClass::coincident:
    map_reference(mesh, a, b, pair, coincident_, out);
    return pair;
  case PairClass::edge_adjacent:
    map_reference(mesh, a, b, pair, edge_, out);
    return pair;
  case PairClass::vertex_adjacent:
    map_reference(mesh, a, b, pair, vertex_, out);
    return pair;
  case PairClass::separated:
    break;
  }

  const TriangleRule &rule = is_near(mesh, a, b) ? *near_ : *regular_;
  const int n = rule.size();
  const double jac = 4.0 * mesh.area(a) * mesh.area(b);
  out.resize(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
  {
    const Vec3 x = rule.map(mesh, a, i);
    for (int j = 0; j < n; ++j)
    {
      auto &p = out[static_cast<std::size_t>(i) * n + j];
      p.x = x;
      p.y = rule.map(mesh, b, j);
      p.w = jac * rule.weights[i] * rule.weights[j];
    }
  }
  return pair;
}

}  // namespace rwgcfie
