// SPDX-License-Identifier: Apache-2.0

#include "rwgcfie/solve.hpp"

#include <chrono>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "rwgcfie/errors.hpp"

namespace rwgcfie
{

namespace
{

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Eigen::VectorXcd real_times_complex(const Eigen::MatrixXd &a, const Eigen::VectorXcd &v)
{
  Eigen::VectorXcd out(a.rows());
  out.real() = a * v.real();
  out.imag() = a * v.imag();
  return out;
}

}  // namespace

GramFactor::GramFactor(const Eigen::SparseMatrix<double> &G)
  : size_(static_cast<int>(G.rows())),
    llt_(std::make_shared<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>(G))
{
  if (G.rows() != G.cols())
    throw DomainError("Gram matrix must be square");
  if (llt_->info() != Eigen::Success)
    throw NumericalError("Gram matrix is not symmetric positive definite");
}

Eigen::VectorXd GramFactor::solve(const Eigen::VectorXd &v) const
{
  if (v.size() != size_)
    throw DomainError("Gram solve: dimension mismatch");
  return llt_->solve(v);
}

Eigen::VectorXcd GramFactor::solve(const Eigen::VectorXcd &v) const
{
  if (v.size() != size_)
    throw DomainError("Gram solve: dimension mismatch");
  Eigen::VectorXcd out(size_);
  out.real() = llt_->solve(Eigen::VectorXd(v.real()));
  out.imag() = llt_->solve(Eigen::VectorXd(v.imag()));
  return out;
}

void LinearOperatorSpec::validate() const
{
  if (!matrices)
    throw DomainError("operator has no matrices");
  const int n = matrices->size();
  const OperatorSelection need = operators_for(formulation);
  auto check = [&](bool needed, Eigen::Index rows, Eigen::Index cols, const char *name) {
    if (needed && (rows != n || cols != n))
      throw DomainError(std::string("operator needs an assembled ") + name + " matrix of size " +
                        std::to_string(n));
  };
  check(need.T, matrices->T.rows(), matrices->T.cols(), "T");
  check(need.K, matrices->K.rows(), matrices->K.cols(), "K");
  check(need.R, matrices->R.rows(), matrices->R.cols(), "R");
  if (formulation == Formulation::regcfie && (!gram || gram->size() != n))
    throw DomainError("regularised CFIE needs a Gram factorisation of matching size");
}

Eigen::VectorXcd apply_operator(const LinearOperatorSpec &spec, const Eigen::VectorXcd &v)
{
  spec.validate();
  if (v.size() != spec.matrices->size())
    throw DomainError("apply_operator: vector has " + std::to_string(v.size()) +
                      " entries, operator has " + std::to_string(spec.matrices->size()));
  const SystemMatrices &m = *spec.matrices;
  const cplx i(0.0, 1.0);
  switch (spec.formulation)
  {
  case Formulation::regcfie:
  {
    const Eigen::VectorXcd y = spec.gram->solve(Eigen::VectorXcd(m.T * v));
    return m.K * v + (i * m.k * m.k) * real_times_complex(m.R, y);
  }
  case Formulation::cfie:
    return m.K * v + (i * spec.iwmu_scale() * spec.alpha * cfie_sign) * (m.T * v);
  case Formulation::efie:
    return m.T * v;
  case Formulation::mfie:
    return m.K * v;
  }
  return {};
}

Eigen::MatrixXcd form_system_matrix(const LinearOperatorSpec &spec)
{
  spec.validate();
  const SystemMatrices &m = *spec.matrices;
  const int n = m.size();
  const cplx i(0.0, 1.0);
  switch (spec.formulation)
  {
  case Formulation::regcfie:
  {
    Eigen::MatrixXcd ginv_t(n, n);
    for (int c = 0; c < n; ++c)
      ginv_t.col(c) = spec.gram->solve(Eigen::VectorXcd(m.T.col(c)));
    return m.K + (i * m.k * m.k) * (m.R.cast<cplx>() * ginv_t);
  }
  case Formulation::cfie:
    return m.K + (i * spec.iwmu_scale() * spec.alpha * cfie_sign) * m.T;
  case Formulation::efie:
    return m.T;
  case Formulation::mfie:
    return m.K;
  }
  return {};
}

void GmresOptions::validate() const
{
  if (!(tol > 0.0))
    throw DomainError("GMRES tolerance must be positive");
  if (max_iter < 1)
    throw DomainError("GMRES needs max_iter >= 1");
}

GmresResult gmres(const LinearMap &apply, const Eigen::VectorXcd &b, const GmresOptions &options)
{
  options.validate();
  const Eigen::Index n = b.size();
  GmresResult result;
  result.x = Eigen::VectorXcd::Zero(n);

  const double beta = b.norm();
  if (beta == 0.0)
  {
    result.converged = true;
    result.final_residual = 0.0;
    return result;
  }

  const int m = options.max_iter;
  std::vector<Eigen::VectorXcd> basis;
  basis.reserve(m + 1);
  basis.push_back(b / beta);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(m + 1, m);
  std::vector<cplx> cs(m), sn(m);
  Eigen::VectorXcd g = Eigen::VectorXcd::Zero(m + 1);
  g[0] = beta;

  int steps = 0;
  bool breakdown = false;
  for (int j = 0; j < m; ++j)
  {
    Eigen::VectorXcd w = apply(basis[j]);
    if (w.size() != n)
      throw DomainError("GMRES operator returned a vector of the wrong size");

    // Modified Gram-Schmidt, repeated once if orthogonality is visibly lost.
    for (int pass = 0; pass < 2; ++pass)
    {
      for (int l = 0; l <= j; ++l)
      {
        const cplx c = basis[l].dot(w);
        h(l, j) += c;
        w -= c * basis[l];
      }
      const double wn = w.norm();
      double loss = 0.0;
      if (pass == 0 && wn > 0.0)
      {
        for (int l = 0; l <= j; ++l)
          loss = std::max(loss, std::abs(basis[l].dot(w)) / wn);
      }
      if (loss <= 1e-8)
        break;
    }
    const double hn = w.norm();
    h(j + 1, j) = hn;

    for (int l = 0; l < j; ++l)
    {
      const cplx t = std::conj(cs[l]) * h(l, j) + std::conj(sn[l]) * h(l + 1, j);
      h(l + 1, j) = -sn[l] * h(l, j) + cs[l] * h(l + 1, j);
      h(l, j) = t;
    }
    const cplx a = h(j, j);
    const double bb = hn;
    const double r = std::hypot(std::abs(a), bb);
    if (r == 0.0)
    {
      cs[j] = 1.0;
      sn[j] = 0.0;
    }
    else
    {
      cs[j] = a / r;
      sn[j] = bb / r;
    }
    h(j, j) = r;
    h(j + 1, j) = 0.0;
    g[j + 1] = -sn[j] * g[j];
    g[j] = std::conj(cs[j]) * g[j];

    steps = j + 1;
    const double rel = std::abs(g[j + 1]) / beta;
    result.residual_history.push_back(rel);
    if (rel <= options.tol)
      break;
    if (hn <= 1e-14 * beta)
    {
      breakdown = true;
      break;
    }
    basis.push_back(w / hn);
  }

  // Back substitution for the upper-triangular least-squares system.
  Eigen::VectorXcd y(steps);
  for (int l = steps - 1; l >= 0; --l)
  {
    cplx s = g[l];
    for (int c = l + 1; c < steps; ++c)
      s -= h(l, c) * y[c];
    y[l] = s / h(l, l);
  }
  for (int l = 0; l < steps; ++l)
    result.x += y[l] * basis[l];

  result.iterations = steps;
  result.final_residual = result.residual_history.empty() ? 1.0 : result.residual_history.back();
  result.converged = breakdown || result.final_residual <= options.tol;
  if (!result.x.allFinite())
    throw NumericalError("GMRES produced a non-finite solution");
  return result;
}

SolveReport solve_system(const SystemMatrices &matrices, const GramFactor *gram,
                         const Eigen::VectorXcd &b, Formulation formulation,
                         const Excitation &exc, const SolveConfig &config)
{
  const auto start = Clock::now();
  LinearOperatorSpec spec;
  spec.formulation = formulation;
  spec.matrices = &matrices;
  spec.gram = gram;
  spec.alpha = config.alpha;
  spec.omega_mu = exc.omega() * exc.mu;
  spec.validate();
  if (b.size() != matrices.size())
    throw DomainError("right-hand side does not match the system size");

  Eigen::VectorXcd rhs = b;
  if (formulation == Formulation::efie)
    rhs /= cplx(0.0, spec.iwmu_scale());

  const GmresResult g =
    gmres([&](const Eigen::VectorXcd &v) { return apply_operator(spec, v); }, rhs, config.gmres);

  SolveReport report;
  report.formulation = formulation;
  report.k = matrices.k;
  report.n_unknowns = matrices.size();
  report.alpha = config.alpha;
  report.tol = config.gmres.tol;
  report.x = g.x;
  report.iterations = g.iterations;
  report.converged = g.converged;
  report.residual_history = g.residual_history;
  report.final_residual = g.final_residual;
  report.solve_time = seconds_since(start);
  report.wall_time = report.solve_time;
  return report;
}

SolveReport solve_formulation(const RwgBasis &basis, const Excitation &exc,
                              Formulation formulation, const SolveConfig &config)
{
  const auto start = Clock::now();
  Excitation e = exc;
  if (formulation == Formulation::cfie)
    e.alpha = config.alpha;
  e.validate(formulation);
  config.gmres.validate();

  SystemMatrices matrices = assemble_system(basis, e.k, operators_for(formulation), config.assembly);
  std::unique_ptr<GramFactor> gram;
  if (formulation == Formulation::regcfie)
    gram = std::make_unique<GramFactor>(matrices.G);
  const Eigen::VectorXcd b = assemble_excitation(basis, e, formulation, config.assembly);
  const double assembly_time = seconds_since(start);

  SolveReport report = solve_system(matrices, gram.get(), b, formulation, e, config);
  report.n_triangles = basis.mesh().num_triangles();
  report.assembly_time = assembly_time;
  report.wall_time = seconds_since(start);
  return report;
}

std::vector<SolveReport> solve_formulations(const RwgBasis &basis, const Excitation &exc,
                                            const std::vector<Formulation> &formulations,
                                            const SolveConfig &config)
{
  const auto start = Clock::now();
  config.gmres.validate();
  OperatorSelection need{false, false, false};
  bool need_gram = false;
  for (Formulation f : formulations)
  {
    Excitation e = exc;
    if (f == Formulation::cfie)
      e.alpha = config.alpha;
    e.validate(f);
    const OperatorSelection s = operators_for(f);
    need.T = need.T || s.T;
    need.K = need.K || s.K;
    need.R = need.R || s.R;
    need_gram = need_gram || f == Formulation::regcfie;
  }
  if (formulations.empty())
    return {};

  SystemMatrices matrices = assemble_system(basis, exc.k, need, config.assembly);
  std::unique_ptr<GramFactor> gram;
  if (need_gram)
    gram = std::make_unique<GramFactor>(matrices.G);
  const double assembly_time = seconds_since(start);

  std::vector<SolveReport> reports;
  for (Formulation f : formulations)
  {
    const auto rhs_start = Clock::now();
    Excitation e = exc;
    if (f == Formulation::cfie)
      e.alpha = config.alpha;
    const Eigen::VectorXcd b = assemble_excitation(basis, e, f, config.assembly);
    const double rhs_time = seconds_since(rhs_start);
    SolveReport report = solve_system(matrices, gram.get(), b, f, e, config);
    report.n_triangles = basis.mesh().num_triangles();
    report.assembly_time = assembly_time + rhs_time;
    report.wall_time = report.assembly_time + report.solve_time;
    reports.push_back(std::move(report));
  }
  return reports;
}

SpectralSummary spectral_diagnostic(const LinearOperatorSpec &spec, const GramFactor &gram)
{
  spec.validate();
  const int n = spec.matrices->size();
  if (n > spectral_size_limit)
    throw ResourceLimitError("spectral diagnostic limited to " +
                             std::to_string(spectral_size_limit) + " unknowns, got " +
                             std::to_string(n));
  const Eigen::MatrixXcd a = form_system_matrix(spec);
  Eigen::MatrixXcd ginv_a(n, n);
  for (int c = 0; c < n; ++c)
    ginv_a.col(c) = gram.solve(Eigen::VectorXcd(a.col(c)));
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(ginv_a, false);
  if (solver.info() != Eigen::Success)
    throw NumericalError("eigenvalue computation did not converge");

  SpectralSummary s;
  s.eigenvalues = solver.eigenvalues();
  const Eigen::VectorXd mag = s.eigenvalues.cwiseAbs();
  s.min_abs = mag.minCoeff();
  s.max_abs = mag.maxCoeff();
  s.ratio = s.max_abs / s.min_abs;
  return s;
}

}  // namespace rwgcfie
