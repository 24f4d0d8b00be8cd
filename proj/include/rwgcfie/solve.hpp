// SPDX-License-Identifier: Apache-2.0

#ifndef RWGCFIE_SOLVE_HPP
#define RWGCFIE_SOLVE_HPP

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>

#include "rwgcfie/assembly.hpp"

namespace rwgcfie
{

// Direct sparse Cholesky factorisation of the Gram matrix.
class GramFactor
{
public:
  explicit GramFactor(const Eigen::SparseMatrix<double> &G);  // throws NumericalError if not SPD

  int size() const { return size_; }
  Eigen::VectorXcd solve(const Eigen::VectorXcd &v) const;
  Eigen::VectorXd solve(const Eigen::VectorXd &v) const;

private:
  int size_;
  std::shared_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> llt_;
};

// The sign of the EFIE block in the standard CFIE, K + i w mu alpha sigma T.
inline constexpr double cfie_sign = -1.0;

// Discrete system operator of one formulation:
//   regcfie: K + i k^2 R G^-1 T
//   cfie:    K + i w mu alpha sigma T
//   efie:    T                  (with the i w mu factor moved to the right-hand side)
//   mfie:    K
struct LinearOperatorSpec
{
  Formulation formulation = Formulation::regcfie;
  const SystemMatrices *matrices = nullptr;
  const GramFactor *gram = nullptr;  // required for regcfie
  double alpha = 0.5;
  double omega_mu = 0.0;  // w mu; 0 means k (unit medium)

  double k() const { return matrices->k; }
  double iwmu_scale() const { return omega_mu > 0.0 ? omega_mu : k(); }
  void validate() const;  // throws DomainError
};

Eigen::VectorXcd apply_operator(const LinearOperatorSpec &spec, const Eigen::VectorXcd &v);

// Explicitly formed dense system matrix (for diagnostics and tests).
Eigen::MatrixXcd form_system_matrix(const LinearOperatorSpec &spec);

struct GmresOptions
{
  double tol = 1e-5;
  int max_iter = 500;
  void validate() const;  // throws DomainError
};

struct GmresResult
{
  Eigen::VectorXcd x;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;  // relative residual after each Arnoldi step
  double final_residual = 1.0;
};

using LinearMap = std::function<Eigen::VectorXcd(const Eigen::VectorXcd &)>;

// Unrestarted GMRES from x0 = 0 with modified Gram-Schmidt (plus one re-orthogonalisation
// pass when needed) and Givens rotations. Stops when ||b - A x|| / ||b|| <= tol.
GmresResult gmres(const LinearMap &apply, const Eigen::VectorXcd &b, const GmresOptions &options);

struct SolveReport
{
  Formulation formulation = Formulation::regcfie;
  double k = 0.0;
  int n_unknowns = 0;
  int n_triangles = 0;
  double alpha = 0.5;
  double tol = 0.0;
  Eigen::VectorXcd x;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;
  double final_residual = 1.0;
  double assembly_time = 0.0;  // seconds
  double solve_time = 0.0;
  double wall_time = 0.0;
};

struct SolveConfig
{
  AssemblyOptions assembly;
  GmresOptions gmres;
  double alpha = 0.5;
};

// Solves with already assembled matrices and right-hand side b of the formulation.
SolveReport solve_system(const SystemMatrices &matrices, const GramFactor *gram,
                         const Eigen::VectorXcd &b, Formulation formulation,
                         const Excitation &exc, const SolveConfig &config);

// Assembles what the formulation needs, builds the right-hand side and runs GMRES.
SolveReport solve_formulation(const RwgBasis &basis, const Excitation &exc,
                              Formulation formulation, const SolveConfig &config = {});

// Solves several formulations for one excitation, assembling the union of the required
// operators once. Reports are returned in the order of `formulations`; assembly time is
// shared and counted in each report's wall time.
std::vector<SolveReport> solve_formulations(const RwgBasis &basis, const Excitation &exc,
                                            const std::vector<Formulation> &formulations,
                                            const SolveConfig &config = {});

struct SpectralSummary
{
  Eigen::VectorXcd eigenvalues;
  double min_abs = 0.0;
  double max_abs = 0.0;
  double ratio = 0.0;  // max_abs / min_abs
};

inline constexpr int spectral_size_limit = 4000;

// Eigenvalues of G^-1 A for the system matrix A described by `spec`. Throws ResourceLimitError
// above spectral_size_limit unknowns.
SpectralSummary spectral_diagnostic(const LinearOperatorSpec &spec, const GramFactor &gram);

}  // namespace rwgcfie

#endif  // RWGCFIE_SOLVE_HPP
