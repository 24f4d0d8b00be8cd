// SPDX-License-Identifier: Apache-2.0

#ifndef RWGCFIE_ASSEMBLY_HPP
#define RWGCFIE_ASSEMBLY_HPP

#include <complex>
#include <filesystem>
#include <optional>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "rwgcfie/basis.hpp"
#include "rwgcfie/quadrature.hpp"

namespace rwgcfie
{

using cplx = std::complex<double>;
using Vec3c = Eigen::Vector3cd;

// a x b for a real and b complex. Eigen's cross() conjugates complex results, which is
// wrong for field products, so complex cross products go through this helper.
inline Vec3c cross(const Vec3 &a, const Vec3c &b)
{
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

enum class Formulation
{
  regcfie,  // (K + i k^2 R G^-1 T) x = b
  cfie,     // (K - i w mu alpha T) x = b_H + alpha b_E
  efie,     // i w mu T x = b_E
  mfie,     // K x = b_H
};

std::string to_string(Formulation f);
Formulation parse_formulation(const std::string &name);  // throws DomainError

// Plane-wave incidence in a homogeneous medium, time convention exp(-i w t):
//   E = amplitude p exp(i k d.x),  H = sqrt(eps/mu) (d x p) amplitude exp(i k d.x).
struct Excitation
{
  Vec3 direction{0.0, 0.0, 1.0};
  Vec3 polarisation{1.0, 0.0, 0.0};
  double amplitude = 1.0;
  double k = 1.0;
  double mu = 1.0;
  double eps = 1.0;
  std::optional<double> alpha;  // standard-CFIE coupling

  double omega() const { return k / std::sqrt(mu * eps); }
  Vec3c electric(const Vec3 &x) const;
  Vec3c magnetic(const Vec3 &x) const;

  // Throws DomainError unless |d| = |p| = 1, p.d = 0, k > 0 and (for cfie) alpha != 0.
  void validate(Formulation f) const;
};

// Dense Galerkin matrices on an RWG basis. Matrices not requested stay empty.
struct SystemMatrices
{
  Eigen::MatrixXcd T;                // <n x t_i, T_k t_j>
  Eigen::MatrixXcd K;                // <t_i, (I/2 - K_k) t_j>
  Eigen::MatrixXd R;                 // <t_i, T^S_0 (n x t_j)>
  Eigen::SparseMatrix<double> G;     // <t_i, t_j>
  double k = 0.0;

  int size() const { return static_cast<int>(G.rows()); }
};

struct OperatorSelection
{
  bool T = true;
  bool K = true;
  bool R = true;
};

// Which operators a formulation needs.
OperatorSelection operators_for(Formulation f);

struct AssemblyOptions
{
  QuadratureConfig quadrature;
  int workers = 0;           // 0: all hardware threads
  bool mfie_kernel = true;   // false leaves only the identity part of K (test hook)
  int excitation_degree = 7; // rule for single-surface integrals of the incident field
};

int resolve_workers(int requested);

// Gram matrix; the integrand is quadratic so any rule of degree >= 2 is exact.
Eigen::SparseMatrix<double> assemble_G(const RwgBasis &basis, int degree = 3);

// Assembles the selected dense operators in one pass over unordered triangle pairs.
// Entries are:
//   T_ij = int int G^k t_i.t_j - (1/k^2) int int G^k div t_i div t_j
//   K_ij = G_ij / 2 - int int t_i(x) . [n(x) x (grad_x G^k(x,y) x t_j(y))]
//   R_ij = - int int G^0 (n x t_i)(x) . (n x t_j)(y)
// The coincident-panel part of the K kernel vanishes identically on flat triangles and is
// skipped. Throws NumericalError if any entry is not finite.
SystemMatrices assemble_system(const RwgBasis &basis, double k, OperatorSelection which,
                               const AssemblyOptions &options = {});

Eigen::MatrixXcd assemble_T(const RwgBasis &basis, double k, const AssemblyOptions &options = {});
Eigen::MatrixXcd assemble_K(const RwgBasis &basis, double k, const AssemblyOptions &options = {});
Eigen::MatrixXd assemble_R(const RwgBasis &basis, const AssemblyOptions &options = {});

// Single-surface projections of the incident field.
Eigen::VectorXcd project_electric(const RwgBasis &basis, const Excitation &exc, int degree);  // <t_i, E>
Eigen::VectorXcd project_n_cross_h(const RwgBasis &basis, const Excitation &exc, int degree); // <t_i, n x H>

// w eps <t_i, T^S_0 (E x n)> = -w eps int int G^0 (n x t_i)(x) . (E x n)(y).
Eigen::VectorXcd regularised_electric_term(const RwgBasis &basis, const Excitation &exc,
                                           const AssemblyOptions &options = {});

// Right-hand side of the chosen formulation:
//   regcfie: <t, n x H> + w eps <t, T^S_0 (E x n)>
//   cfie:    <t, n x H> + alpha <t, E>
//   efie:    -<t, E>          (so that i w mu T x = b)
//   mfie:    <t, n x H>
Eigen::VectorXcd assemble_excitation(const RwgBasis &basis, const Excitation &exc,
                                     Formulation formulation,
                                     const AssemblyOptions &options = {});

// Binary matrix dump: "BEMM", u32 rows, u32 cols, 4 reserved zero bytes, then row-major
// (re, im) pairs; everything little-endian.
void write_matrix(const Eigen::MatrixXcd &m, const std::filesystem::path &path);
Eigen::MatrixXcd read_matrix(const std::filesystem::path &path);

}  // namespace rwgcfie

#endif  // RWGCFIE_ASSEMBLY_HPP
