// SPDX-License-Identifier: Apache-2.0

#include "rwgcfie/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "rwgcfie/errors.hpp"
#include "rwgcfie/quadrature.hpp"

namespace rwgcfie
{

namespace
{

using cd = std::complex<double>;

// Riccati-Bessel psi_n = x j_n(x) and eta_n = x y_n(x) with derivatives, n = 0..order.
struct RiccatiBessel
{
  std::vector<double> psi, dpsi, eta, deta;
};

RiccatiBessel riccati_bessel(double x, int order)
{
  RiccatiBessel rb;
  rb.psi.resize(order + 1);
  rb.dpsi.resize(order + 1);
  rb.eta.resize(order + 1);
  rb.deta.resize(order + 1);

  // Downward recurrence on the ratios r_n = psi_n / psi_{n-1}; stable for the regular part.
  const int start = order + 20 + static_cast<int>(std::ceil(x));
  std::vector<double> ratio(start + 2, 0.0);
  for (int n = start; n >= 1; --n)
    ratio[n] = 1.0 / ((2.0 * n + 1.0) / x - ratio[n + 1]);
  rb.psi[0] = std::sin(x);
  for (int n = 1; n <= order; ++n)
    rb.psi[n] = ratio[n] * rb.psi[n - 1];

  // Upward recurrence for the irregular part.
  rb.eta[0] = -std::cos(x);
  if (order >= 1)
    rb.eta[1] = -std::cos(x) / x - std::sin(x);
  for (int n = 1; n < order; ++n)
    rb.eta[n + 1] = (2.0 * n + 1.0) / x * rb.eta[n] - rb.eta[n - 1];

  rb.dpsi[0] = std::cos(x);
  rb.deta[0] = std::sin(x);
  for (int n = 1; n <= order; ++n)
  {
    rb.dpsi[n] = rb.psi[n - 1] - n / x * rb.psi[n];
    rb.deta[n] = rb.eta[n - 1] - n / x * rb.eta[n];
  }
  return rb;
}

// Angular functions pi_n, tau_n for n = 1..order at mu = cos(theta); index 0 unused.
void angular(double mu, int order, std::vector<double> &pi, std::vector<double> &tau)
{
  pi.assign(order + 1, 0.0);
  tau.assign(order + 1, 0.0);
  if (order >= 1)
    pi[1] = 1.0;
  for (int n = 2; n <= order; ++n)
    pi[n] = (2.0 * n - 1.0) / (n - 1.0) * mu * pi[n - 1] - n / (n - 1.0) * pi[n - 2];
  for (int n = 1; n <= order; ++n)
    tau[n] = n * mu * pi[n] - (n + 1.0) * pi[n - 1];
}

}  // namespace

int MieConfig::truncation_rule(double ka)
{
  return static_cast<int>(std::ceil(ka + 4.0 * std::cbrt(ka) + 10.0));
}

void MieConfig::validate() const
{
  if (!(k > 0.0) || !std::isfinite(k))
    throw DomainError("Mie reference needs a positive wavenumber");
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw DomainError("Mie reference needs a positive radius");
  if (std::abs(direction.norm() - 1.0) > 1e-12 || std::abs(polarisation.norm() - 1.0) > 1e-12)
    throw DomainError("Mie reference needs unit direction and polarisation");
  if (std::abs(direction.dot(polarisation)) >= 1e-12)
    throw DomainError("Mie reference needs polarisation orthogonal to the direction");
  if (order < 0)
    throw DomainError("Mie truncation order must be non-negative");
  if (!(mu > 0.0) || !(eps > 0.0))
    throw DomainError("medium constants must be positive");
}

MieConfig MieConfig::from_excitation(const Excitation &exc, double radius)
{
  MieConfig cfg;
  cfg.k = exc.k;
  cfg.radius = radius;
  cfg.direction = exc.direction;
  cfg.polarisation = exc.polarisation;
  cfg.amplitude = exc.amplitude;
  cfg.mu = exc.mu;
  cfg.eps = exc.eps;
  return cfg;
}

MieSeries::MieSeries(const MieConfig &config) : config_(config)
{
  config_.validate();
  ez_ = config_.direction;
  ex_ = config_.polarisation;
  ey_ = ez_.cross(ex_);

  const int order = config_.truncation();
  const double x = config_.ka();
  const RiccatiBessel rb = riccati_bessel(x, order);
  a_.resize(order);
  b_.resize(order);
  c_pi_.resize(order);
  c_tau_.resize(order);
  cd in = 1.0;  // i^n
  for (int n = 1; n <= order; ++n)
  {
    in *= cd(0.0, 1.0);
    const cd xi(rb.psi[n], rb.eta[n]);
    const cd dxi(rb.dpsi[n], rb.deta[n]);
    a_[n - 1] = rb.dpsi[n] / dxi;
    b_[n - 1] = rb.psi[n] / xi;
    const cd en = in * (2.0 * n + 1.0) / (n * (n + 1.0));
    c_pi_[n - 1] = cd(0.0, 1.0) * en / dxi;
    c_tau_[n - 1] = en / xi;
  }
}

Vec3c MieSeries::current(const Vec3 &point) const
{
  const double r = point.norm();
  if (std::abs(r - config_.radius) > 1e-9 * config_.radius)
    throw DomainError("Mie current requested off the sphere surface");

  const double lx = point.dot(ex_), ly = point.dot(ey_), lz = point.dot(ez_);
  const double mu = std::clamp(lz / r, -1.0, 1.0);
  const double sin_theta = std::sqrt(std::max(0.0, 1.0 - mu * mu));
  const double phi = std::atan2(ly, lx);
  const double cphi = std::cos(phi), sphi = std::sin(phi);

  std::vector<double> pi, tau;
  angular(mu, order(), pi, tau);
  cd s_theta = 0.0, s_phi = 0.0;
  for (int n = 1; n <= order(); ++n)
  {
    s_theta += c_pi_[n - 1] * pi[n] - c_tau_[n - 1] * tau[n];
    s_phi += c_pi_[n - 1] * tau[n] - c_tau_[n - 1] * pi[n];
  }
  const double h0 = config_.amplitude * std::sqrt(config_.eps / config_.mu);
  const double x = config_.ka();
  const cd h_theta = h0 * sphi / x * s_theta;
  const cd h_phi = h0 * cphi / x * s_phi;

  const Vec3 theta_hat = (mu * cphi) * ex_ + (mu * sphi) * ey_ - sin_theta * ez_;
  const Vec3 phi_hat = -sphi * ex_ + cphi * ey_;
  // n x H = H_theta phi_hat - H_phi theta_hat
  return phi_hat.cast<cd>() * h_theta - theta_hat.cast<cd>() * h_phi;
}

double MieSeries::cross_section_series() const
{
  double sum = 0.0;
  for (int n = 1; n <= order(); ++n)
    sum += (2.0 * n + 1.0) * (std::norm(a_[n - 1]) + std::norm(b_[n - 1]));
  const double k = config_.k;
  return 2.0 * std::numbers::pi / (k * k) * sum;
}

double MieSeries::cross_section_far_field() const
{
  // |S1|^2 + |S2|^2 is a polynomial of degree <= 2 order in cos(theta); Gauss-Legendre with
  // order + 2 nodes integrates it exactly.
  const LineRule rule = gauss_legendre(order() + 2);
  std::vector<double> pi, tau;
  double integral = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q)
  {
    const double mu = 2.0 * rule.nodes[q] - 1.0;
    angular(mu, order(), pi, tau);
    cd s1 = 0.0, s2 = 0.0;
    for (int n = 1; n <= order(); ++n)
    {
      const double f = (2.0 * n + 1.0) / (n * (n + 1.0));
      s1 += f * (a_[n - 1] * pi[n] + b_[n - 1] * tau[n]);
      s2 += f * (a_[n - 1] * tau[n] + b_[n - 1] * pi[n]);
    }
    integral += 2.0 * rule.weights[q] * (std::norm(s1) + std::norm(s2));
  }
  const double k = config_.k;
  return std::numbers::pi / (k * k) * integral;
}

Vec3c mie_surface_current(const MieConfig &config, const Vec3 &point)
{
  return MieSeries(config).current(point);
}

namespace
{

// Degree-3 rule nodes on every facet with the reference current at their radial projection.
template <typename Visit>
void visit_nodes(const RwgBasis &basis, const MieSeries &series, Visit &&visit)
{
  const SurfaceMesh &mesh = basis.mesh();
  const TriangleRule &rule = gauss_rule(3);
  const double radius = series.config().radius;
  for (int t = 0; t < mesh.num_triangles(); ++t)
  {
    const double jac = 2.0 * mesh.area(t);
    for (int q = 0; q < rule.size(); ++q)
    {
      const Vec3 x = rule.map(mesh, t, q);
      const Vec3c ref = series.current(x * (radius / x.norm()));
      visit(t, x, jac * rule.weights[q], ref);
    }
  }
}

}  // namespace

double relative_error(const Eigen::VectorXcd &x, const RwgBasis &basis, const MieConfig &config)
{
  if (x.size() != basis.size())
    throw DomainError("coefficient vector has " + std::to_string(x.size()) +
                      " entries but the basis has " + std::to_string(basis.size()));
  const MieSeries series(config);
  double num = 0.0, den = 0.0;
  visit_nodes(basis, series, [&](int t, const Vec3 &p, double w, const Vec3c &ref) {
    Vec3c j = Vec3c::Zero();
    for (const auto &loc : basis.on_triangle(t))
    {
      if (loc.active())
        j += x[loc.function] * loc.value(p).cast<cd>();
    }
    num += w * (j - ref).squaredNorm();
    den += w * ref.squaredNorm();
  });
  if (!(den > 0.0))
    throw NumericalError("reference current has zero norm");
  return std::sqrt(num / den);
}

Eigen::VectorXcd l2_projection(const RwgBasis &basis, const MieConfig &config)
{
  const MieSeries series(config);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(basis.size());
  visit_nodes(basis, series, [&](int t, const Vec3 &p, double w, const Vec3c &ref) {
    for (const auto &loc : basis.on_triangle(t))
    {
      if (loc.active())
        rhs[loc.function] += w * (loc.value(p).cast<cd>().transpose() * ref)(0);
    }
  });
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> gram(assemble_G(basis, 3));
  if (gram.info() != Eigen::Success)
    throw NumericalError("Gram matrix factorisation failed");
  Eigen::VectorXcd x(basis.size());
  x.real() = gram.solve(Eigen::VectorXd(rhs.real()));
  x.imag() = gram.solve(Eigen::VectorXd(rhs.imag()));
  return x;
}

MieDiagnostic diagnose_mie(const MieConfig &config)
{
  MieDiagnostic d;
  const MieSeries series(config);
  d.ka = config.ka();
  d.order = series.order();
  d.cross_section_series = series.cross_section_series();
  d.cross_section_far_field = series.cross_section_far_field();
  d.cross_section_mismatch = std::abs(d.cross_section_series - d.cross_section_far_field) /
                             std::abs(d.cross_section_series);

  // Sensitivity of the current to the truncation order at fixed sample points.
  MieConfig doubled = config;
  doubled.order = 2 * series.order();
  const MieSeries reference(doubled);
  const double r = config.radius;
  const Vec3 &dz = config.direction;
  const Vec3 &dx = config.polarisation;
  const Vec3 dy = dz.cross(dx);
  double max_change = 0.0;
  constexpr int samples = 20;
  for (int s = 0; s < samples; ++s)
  {
    // Points spread in theta and phi, including near both poles.
    const double theta = std::numbers::pi * (s + 0.5) / samples;
    const double phi = 2.0 * std::numbers::pi * 0.381966 * s;
    const Vec3 p = r * (std::sin(theta) * std::cos(phi) * dx + std::sin(theta) * std::sin(phi) * dy +
                        std::cos(theta) * dz);
    const Vec3c j0 = series.current(p);
    const Vec3c j1 = reference.current(p);
    max_change = std::max(max_change, (j1 - j0).norm() / j1.norm());
  }
  d.truncation_change = max_change;

  bool rayleigh_ok = true;
  if (d.ka <= 0.1)
  {
    d.rayleigh_checked = true;
    const double h0 = config.amplitude * std::sqrt(config.eps / config.mu);
    const double pole = series.current(r * dz).norm();
    const double equator = series.current(r * dx).norm();
    d.rayleigh_ratio = pole / equator;
    d.rayleigh_magnitude = pole / (1.5 * h0);
    rayleigh_ok = std::abs(d.rayleigh_ratio - 1.0) <= mie_rayleigh_tolerance &&
                  std::abs(d.rayleigh_magnitude - 1.0) <= mie_rayleigh_tolerance;
  }

  const bool cs_ok = d.cross_section_mismatch <= mie_cross_section_tolerance;
  const bool trunc_ok = d.truncation_change <= mie_truncation_tolerance;
  d.ok = cs_ok && trunc_ok && rayleigh_ok;

  std::ostringstream os;
  os.precision(3);
  os << "ka=" << d.ka << " order=" << d.order << " cross-section mismatch="
     << d.cross_section_mismatch << (cs_ok ? "" : " (FAIL)") << " truncation change="
     << d.truncation_change << (trunc_ok ? "" : " (FAIL)");
  if (d.rayleigh_checked)
  {
    os << " rayleigh ratio=" << d.rayleigh_ratio << " magnitude=" << d.rayleigh_magnitude
       << (rayleigh_ok ? "" : " (FAIL)");
  }
  d.summary = os.str();
  return d;
}

MieDiagnostic mie_self_check(const MieConfig &config)
{
  MieDiagnostic d = diagnose_mie(config);
  if (!d.ok)
    throw OracleError("Mie reference failed its self-check: " + d.summary);
  return d;
}

}  // namespace rwgcfie
