// SPDX-License-Identifier: Apache-2.0

#ifndef RWGCFIE_REFERENCE_HPP
#define RWGCFIE_REFERENCE_HPP

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rwgcfie/assembly.hpp"
#include "rwgcfie/basis.hpp"

namespace rwgcfie
{

// Plane-wave scattering by a PEC sphere centred at the origin.
struct MieConfig
{
  double k = 1.0;
  double radius = 1.0;
  Vec3 direction{0.0, 0.0, 1.0};
  Vec3 polarisation{1.0, 0.0, 0.0};
  double amplitude = 1.0;
  double mu = 1.0;
  double eps = 1.0;
  int order = 0;  // series truncation; 0 selects truncation_rule(ka)

  double ka() const { return k * radius; }
  int truncation() const { return order > 0 ? order : truncation_rule(ka()); }
  // ceil(ka + 4 ka^(1/3) + 10)
  static int truncation_rule(double ka);
  void validate() const;  // throws DomainError

  static MieConfig from_excitation(const Excitation &exc, double radius = 1.0);
};

// Precomputed series for one configuration; evaluation is thread-safe.
class MieSeries
{
public:
  explicit MieSeries(const MieConfig &config);

  const MieConfig &config() const { return config_; }
  int order() const { return static_cast<int>(a_.size()); }

  // Exterior coefficients a_n = psi_n'/xi_n', b_n = psi_n/xi_n for n = 1..order.
  const std::vector<std::complex<double>> &a() const { return a_; }
  const std::vector<std::complex<double>> &b() const { return b_; }

  // Surface current n x H_total at a point on the sphere. Throws DomainError if the point
  // is further than 1e-9 (relative to the radius) from the sphere.
  Vec3c current(const Vec3 &point) const;

  // Scattering cross-section from the coefficient series, and from integrating the
  // far-field amplitudes over the scattering angle.
  double cross_section_series() const;
  double cross_section_far_field() const;

private:
  MieConfig config_;
  Vec3 ex_, ey_, ez_;  // local frame: ez = d, ex = p, ey = d x p
  std::vector<std::complex<double>> a_, b_;
  std::vector<std::complex<double>> c_pi_, c_tau_;  // per-order weights of the current sum
};

Vec3c mie_surface_current(const MieConfig &config, const Vec3 &point);

// Relative tangential L2 error of j = sum x_i t_i against the Mie current, evaluated with
// the degree-3 triangle rule; the reference is taken at the radial projection of each node.
double relative_error(const Eigen::VectorXcd &x, const RwgBasis &basis, const MieConfig &config);

// Coefficients of the L2-orthogonal projection of the Mie current onto the RWG space,
// using the same quadrature as relative_error.
Eigen::VectorXcd l2_projection(const RwgBasis &basis, const MieConfig &config);

struct MieDiagnostic
{
  double ka = 0.0;
  int order = 0;
  double cross_section_series = 0.0;
  double cross_section_far_field = 0.0;
  double cross_section_mismatch = 0.0;  // relative
  double truncation_change = 0.0;       // max relative change of J when the order is doubled
  bool rayleigh_checked = false;        // only for ka <= 0.1
  double rayleigh_ratio = 0.0;          // |J(pole)| / |J(equator along p)|, -> 1 as ka -> 0
  double rayleigh_magnitude = 0.0;      // |J(pole)| / (3/2 |H0|), -> 1 as ka -> 0
  bool ok = false;
  std::string summary;
};

inline constexpr double mie_cross_section_tolerance = 1e-8;
inline constexpr double mie_truncation_tolerance = 1e-10;
inline constexpr double mie_rayleigh_tolerance = 0.05;

MieDiagnostic diagnose_mie(const MieConfig &config);
// Runs diagnose_mie and throws OracleError when any check fails.
MieDiagnostic mie_self_check(const MieConfig &config);

}  // namespace rwgcfie

#endif  // RWGCFIE_REFERENCE_HPP
