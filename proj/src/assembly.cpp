// SPDX-License-Identifier: Apache-2.0

#include "rwgcfie/assembly.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numbers>
#include <thread>
#include <vector>

#include "rwgcfie/errors.hpp"

namespace rwgcfie
{

namespace
{

constexpr double inv_four_pi = 1.0 / (4.0 * std::numbers::pi);

// Complex-weighted accumulation of a real 3-vector, kept as separate real/imag parts.
struct Acc3
{
  Vec3 re = Vec3::Zero();
  Vec3 im = Vec3::Zero();
  void add(double wr, double wi, const Vec3 &v)
  {
    re += wr * v;
    im += wi * v;
  }
  cplx dot(const Vec3 &v) const { return {re.dot(v), im.dot(v)}; }
  // (v x this)
  Acc3 cross_from_left(const Vec3 &v) const { return {v.cross(re), v.cross(im)}; }
};

struct Acc1
{
  double re = 0.0;
  double im = 0.0;
  void add(double wr, double wi, double v)
  {
    re += wr * v;
    im += wi * v;
  }
  cplx value() const { return {re, im}; }
};

// Moments of the kernels over one panel pair, taken about a common origin. With
// X = x - o, Y = y - o, d = x - y and RWG functions t = s (X - P) on each panel they reduce
// all 3x3 local interactions to a handful of vector algebra operations.
struct PairMoments
{
  // T: int G^k {1, X, Y, X.Y}
  Acc1 t0, txy;
  Acc3 tx, ty;
  // R: int G^0 {1, u, v, u.v} with u = n_a x X, v = n_b x Y
  double r0 = 0.0, ruv = 0.0;
  Vec3 ru = Vec3::Zero(), rv = Vec3::Zero();
  // K, test on a: g = G^k (ikR - 1) / R^2 so that grad_x G^k = g d
  //   S = int g (d x Y).(X x n_a), U = int g d x Y, V = int g (X x n_a) x d, D = int g d
  Acc1 ks;
  Acc3 ku, kv, kd;
  // K, test on b (d' = -d): S' = int g (d' x X).(Y x n_b), U' = int g d' x X,
  //   V' = int g (Y x n_b) x d'
  Acc1 ks2;
  Acc3 ku2, kv2;
};

struct LocalFn
{
  int index;
  Vec3 p;  // free vertex relative to the moment origin
  double s;
};

int active_functions(const RwgBasis &basis, int t, const Vec3 &origin,
                     std::array<LocalFn, 3> &out)
{
  int n = 0;
  for (const auto &loc : basis.on_triangle(t))
  {
    if (loc.active())
      out[n++] = {loc.function, loc.free_vertex - origin, loc.scale};
  }
  return n;
}

template <typename Fn>
void parallel_for(int count, int workers, Fn &&body)
{
  std::atomic<int> next{0};
  auto run = [&](int worker) {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1))
      body(worker, i);
  };
  if (workers <= 1)
  {
    run(0);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int w = 0; w < workers; ++w)
  {
    pool.emplace_back([&, w] {
      try
      {
        run(w);
      }
      catch (...)
      {
        std::lock_guard lock(error_mutex);
        if (!error)
          error = std::current_exception();
        next.store(count);
      }
    });
  }
  for (auto &t : pool)
    t.join();
  if (error)
    std::rethrow_exception(error);
}

}  // namespace

std::string to_string(Formulation f)
{
  switch (f)
  {
  case Formulation::regcfie:
    return "regcfie";
  case Formulation::cfie:
    return "cfie";
  case Formulation::efie:
    return "efie";
  case Formulation::mfie:
    return "mfie";
  }
  return "unknown";
}

Formulation parse_formulation(const std::string &name)
{
  for (auto f : {Formulation::regcfie, Formulation::cfie, Formulation::efie, Formulation::mfie})
  {
    if (name == to_string(f))
      return f;
  }
  throw DomainError("unknown formulation '" + name + "' (expected regcfie, cfie, efie or mfie)");
}

Vec3c Excitation::electric(const Vec3 &x) const
{
  const cplx phase = std::polar(amplitude, k * direction.dot(x));
  return polarisation.cast<cplx>() * phase;
}

Vec3c Excitation::magnetic(const Vec3 &x) const
{
  const cplx phase = std::polar(amplitude * std::sqrt(eps / mu), k * direction.dot(x));
  return direction.cross(polarisation).cast<cplx>() * phase;
}

void Excitation::validate(Formulation f) const
{
  if (std::abs(direction.norm() - 1.0) > 1e-12)
    throw DomainError("propagation direction must be a unit vector");
  if (std::abs(polarisation.norm() - 1.0) > 1e-12)
    throw DomainError("polarisation must be a unit vector");
  if (std::abs(direction.dot(polarisation)) >= 1e-12)
    throw DomainError("polarisation must be orthogonal to the propagation direction");
  if (!(k > 0.0) || !std::isfinite(k))
    throw DomainError("wavenumber must be positive");
  if (!(mu > 0.0) || !(eps > 0.0))
    throw DomainError("medium constants must be positive");
  if (f == Formulation::cfie && (!alpha || *alpha == 0.0))
    throw DomainError("standard CFIE needs a coupling alpha with non-zero real part");
}

OperatorSelection operators_for(Formulation f)
{
  switch (f)
  {
  case Formulation::regcfie:
    return {true, true, true};
  case Formulation::cfie:
    return {true, true, false};
  case Formulation::efie:
    return {true, false, false};
  case Formulation::mfie:
    return {false, true, false};
  }
  return {};
}

int resolve_workers(int requested)
{
  if (requested > 0)
    return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

Eigen::SparseMatrix<double> assemble_G(const RwgBasis &basis, int degree)
{
  const SurfaceMesh &mesh = basis.mesh();
  const TriangleRule &rule = gauss_rule(degree);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.num_triangles()) * 9);
  for (int t = 0; t < mesh.num_triangles(); ++t)
  {
    const auto &local = basis.on_triangle(t);
    const double jac = 2.0 * mesh.area(t);
    for (int q = 0; q < rule.size(); ++q)
    {
      const Vec3 x = rule.map(mesh, t, q);
      const double w = jac * rule.weights[q];
      for (const auto &li : local)
      {
        if (!li.active())
          continue;
        const Vec3 ti = li.value(x);
        for (const auto &lj : local)
        {
          if (lj.active())
            triplets.emplace_back(li.function, lj.function, w * ti.dot(lj.value(x)));
        }
      }
    }
  }
  Eigen::SparseMatrix<double> g(basis.size(), basis.size());
  g.setFromTriplets(triplets.begin(), triplets.end());
  return g;
}

SystemMatrices assemble_system(const RwgBasis &basis, double k, OperatorSelection which,
                               const AssemblyOptions &options)
{
  if (!(k > 0.0) || !std::isfinite(k))
    throw DomainError("wavenumber must be positive");

  const SurfaceMesh &mesh = basis.mesh();
  const int n = basis.size();
  const int nt = mesh.num_triangles();
  const PairQuadrature quad(options.quadrature);
  const bool do_k_kernel = which.K && options.mfie_kernel;

  SystemMatrices sys;
  sys.k = k;
  sys.G = assemble_G(basis);
  if (which.T)
    sys.T.setZero(n, n);
  if (which.K)
    sys.K.setZero(n, n);
  if (which.R)
    sys.R.setZero(n, n);

  const bool any_pair_work = which.T || which.R || do_k_kernel;
  const int workers = resolve_workers(options.workers);
  std::mutex flush_mutex;

  struct Scratch
  {
    std::vector<PairPoint> points;
    // Row buffers hold (i on a, j anywhere); column buffers hold (j on b > a, i on a).
    std::array<Eigen::VectorXcd, 3> row_t, col_t, row_k, col_k;
    std::array<Eigen::VectorXd, 3> row_r, col_r;
  };
  std::vector<Scratch> scratch(workers);
  for (auto &s : scratch)
  {
    for (int c = 0; c < 3; ++c)
    {
      if (which.T)
        s.row_t[c].setZero(n), s.col_t[c].setZero(n);
      if (do_k_kernel)
        s.row_k[c].setZero(n), s.col_k[c].setZero(n);
      if (which.R)
        s.row_r[c].setZero(n), s.col_r[c].setZero(n);
    }
  }

  const double inv_k2 = 1.0 / (k * k);

  auto process_test_triangle = [&](int worker, int a) {
    Scratch &s = scratch[worker];
    const Vec3 origin = mesh.centroid(a);
    const Vec3 &na = mesh.normal(a);
    std::array<LocalFn, 3> fa;
    const int nfa = active_functions(basis, a, origin, fa);
    if (nfa == 0)
      return;

    for (int b = a; b < nt; ++b)
    {
      std::array<LocalFn, 3> fb;
      const int nfb = active_functions(basis, b, origin, fb);
      if (nfb == 0)
        continue;
      const Vec3 &nb = mesh.normal(b);
      const PanelPair pair = quad.points(mesh, a, b, s.points);
      const bool k_pair = do_k_kernel && pair.kind != PairClass::coincident;
      const bool mirrored = b != a;

      PairMoments m;
      for (const PairPoint &p : s.points)
      {
        const Vec3 X = p.x - origin;
        const Vec3 Y = p.y - origin;
        const Vec3 d = p.x - p.y;
        const double r = d.norm();
        const double inv_r = 1.0 / r;
        const double g0 = p.w * inv_four_pi * inv_r;
        const double c = std::cos(k * r);
        const double sn = std::sin(k * r);
        const double gr = g0 * c;
        const double gi = g0 * sn;
        if (which.T)
        {
          m.t0.add(gr, gi, 1.0);
          m.tx.add(gr, gi, X);
          m.ty.add(gr, gi, Y);
          m.txy.add(gr, gi, X.dot(Y));
        }
        if (which.R)
        {
          const Vec3 u = na.cross(X);
          const Vec3 v = nb.cross(Y);
          m.r0 += g0;
          m.ru += g0 * u;
          m.rv += g0 * v;
          m.ruv += g0 * u.dot(v);
        }
        if (k_pair)
        {
          // g = G^k (ikR - 1) / R^2
          const double inv_r2 = inv_r * inv_r;
          const double wr = (-gr - gi * k * r) * inv_r2;
          const double wi = (-gi + gr * k * r) * inv_r2;
          const Vec3 dxy = d.cross(Y);
          const Vec3 xna = X.cross(na);
          m.ks.add(wr, wi, dxy.dot(xna));
          m.ku.add(wr, wi, dxy);
          m.kv.add(wr, wi, xna.cross(d));
          m.kd.add(wr, wi, d);
          if (mirrored)
          {
            const Vec3 dyx = (-d).cross(X);
            const Vec3 ynb = Y.cross(nb);
            m.ks2.add(wr, wi, dyx.dot(ynb));
            m.ku2.add(wr, wi, dyx);
            m.kv2.add(wr, wi, ynb.cross(-d));
          }
        }
      }

      for (int ci = 0; ci < nfa; ++ci)
      {
        const LocalFn &ti = fa[ci];
        const int c = ci;  // buffer slot
        const Vec3 na_pi = na.cross(ti.p);
        const Vec3 pi_na = ti.p.cross(na);
        for (int cj = 0; cj < nfb; ++cj)
        {
          const LocalFn &tj = fb[cj];
          const double ss = ti.s * tj.s;
          const int j = tj.index;
          if (which.T)
          {
            const cplx v = ss * (m.txy.value() - m.ty.dot(ti.p) - m.tx.dot(tj.p) +
                                 ti.p.dot(tj.p) * m.t0.value()) -
                           4.0 * ss * inv_k2 * m.t0.value();
            s.row_t[c][j] += v;
            if (mirrored)
              s.col_t[c][j] += v;
          }
          if (which.R)
          {
            const Vec3 nb_pj = nb.cross(tj.p);
            const double v =
              -ss * (m.ruv - na_pi.dot(m.rv) - nb_pj.dot(m.ru) + na_pi.dot(nb_pj) * m.r0);
            s.row_r[c][j] += v;
            if (mirrored)
              s.col_r[c][j] += v;
          }
          if (k_pair)
          {
            const cplx kab = ss * (m.ks.value() - m.ku.dot(pi_na) - m.kv.dot(tj.p) +
                                   m.kd.cross_from_left(pi_na).dot(tj.p));
            s.row_k[c][j] -= kab;
            if (mirrored)
            {
              // D' = -D, so (P_j x n_b) x D' = -(P_j x n_b) x D.
              const Vec3 pj_nb = tj.p.cross(nb);
              const cplx kba = ss * (m.ks2.value() - m.ku2.dot(pj_nb) - m.kv2.dot(ti.p) -
                                     m.kd.cross_from_left(pj_nb).dot(ti.p));
              s.col_k[c][j] -= kba;
            }
          }
        }
      }
    }

    std::lock_guard lock(flush_mutex);
    for (int c = 0; c < nfa; ++c)
    {
      const int i = fa[c].index;
      if (which.T)
      {
        sys.T.row(i) += s.row_t[c].transpose();
        sys.T.col(i) += s.col_t[c];
        s.row_t[c].setZero();
        s.col_t[c].setZero();
      }
      if (do_k_kernel)
      {
        sys.K.row(i) += s.row_k[c].transpose();
        sys.K.col(i) += s.col_k[c];
        s.row_k[c].setZero();
        s.col_k[c].setZero();
      }
      if (which.R)
      {
        sys.R.row(i) += s.row_r[c].transpose();
        sys.R.col(i) += s.col_r[c];
        s.row_r[c].setZero();
        s.col_r[c].setZero();
      }
    }
  };

  if (any_pair_work)
    parallel_for(nt, workers, process_test_triangle);

  if (which.K)
  {
    for (int c = 0; c < sys.G.outerSize(); ++c)
    {
      for (Eigen::SparseMatrix<double>::InnerIterator it(sys.G, c); it; ++it)
        sys.K(it.row(), it.col()) += 0.5 * it.value();
    }
  }

  auto check = [](const auto &mat, const char *name) {
    if (!mat.allFinite())
      throw NumericalError(std::string("non-finite entry in assembled ") + name + " matrix");
  };
  if (which.T)
    check(sys.T, "T");
  if (which.K)
    check(sys.K, "K");
  if (which.R)
    check(sys.R, "R");
  return sys;
}

Eigen::MatrixXcd assemble_T(const RwgBasis &basis, double k, const AssemblyOptions &options)
{
  return std::move(assemble_system(basis, k, {true, false, false}, options).T);
}

Eigen::MatrixXcd assemble_K(const RwgBasis &basis, double k, const AssemblyOptions &options)
{
  return std::move(assemble_system(basis, k, {false, true, false}, options).K);
}

Eigen::MatrixXd assemble_R(const RwgBasis &basis, const AssemblyOptions &options)
{
  // R uses the static kernel only; the wavenumber passed here is irrelevant.
  return std::move(assemble_system(basis, 1.0, {false, false, true}, options).R);
}

namespace
{

template <typename Field>
Eigen::VectorXcd project_field(const RwgBasis &basis, int degree, Field &&field)
{
  const SurfaceMesh &mesh = basis.mesh();
  const TriangleRule &rule = gauss_rule(degree);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(basis.size());
  for (int t = 0; t < mesh.num_triangles(); ++t)
  {
    const double jac = 2.0 * mesh.area(t);
    for (int q = 0; q < rule.size(); ++q)
    {
      const Vec3 x = rule.map(mesh, t, q);
      const Vec3c f = field(t, x);
      const double w = jac * rule.weights[q];
      for (const auto &loc : basis.on_triangle(t))
      {
        if (loc.active())
          out[loc.function] += w * (loc.value(x).cast<cplx>().transpose() * f)(0);
      }
    }
  }
  return out;
}

}  // namespace

Eigen::VectorXcd project_electric(const RwgBasis &basis, const Excitation &exc, int degree)
{
  return project_field(basis, degree, [&](int, const Vec3 &x) { return exc.electric(x); });
}

Eigen::VectorXcd project_n_cross_h(const RwgBasis &basis, const Excitation &exc, int degree)
{
  const SurfaceMesh &mesh = basis.mesh();
  return project_field(basis, degree, [&](int t, const Vec3 &x) -> Vec3c {
    return cross(mesh.normal(t), exc.magnetic(x));
  });
}

Eigen::VectorXcd regularised_electric_term(const RwgBasis &basis, const Excitation &exc,
                                           const AssemblyOptions &options)
{
  const SurfaceMesh &mesh = basis.mesh();
  const int nt = mesh.num_triangles();
  const PairQuadrature quad(options.quadrature);

  // (E x n) at the regular and near-field rule nodes of every triangle.
  auto tabulate = [&](const TriangleRule &rule) {
    std::vector<std::vector<Vec3c>> table(nt);
    for (int t = 0; t < nt; ++t)
    {
      table[t].resize(rule.size());
      for (int q = 0; q < rule.size(); ++q)
        table[t][q] = -cross(mesh.normal(t), exc.electric(rule.map(mesh, t, q)));
    }
    return table;
  };
  const auto regular_table = tabulate(quad.regular_rule());
  const auto near_table = tabulate(quad.near_rule());

  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(basis.size());
  const int workers = resolve_workers(options.workers);
  std::vector<std::vector<PairPoint>> scratch(workers);
  std::mutex flush_mutex;

  parallel_for(nt, workers, [&](int worker, int a) {
    const Vec3 origin = mesh.centroid(a);
    const Vec3 &na = mesh.normal(a);
    std::array<LocalFn, 3> fa;
    const int nfa = active_functions(basis, a, origin, fa);
    if (nfa == 0)
      return;
    // int G^0 (n_a x X).F  and  int G^0 F over all b
    cplx scalar = 0.0;
    Vec3c vector = Vec3c::Zero();
    auto &points = scratch[worker];

    for (int b = 0; b < nt; ++b)
    {
      const Vec3 &nb = mesh.normal(b);
      const PanelPair pair = classify_pair(a, b, mesh);
      if (pair.kind == PairClass::separated)
      {
        const bool near = quad.is_near(mesh, a, b);
        const TriangleRule &rule = near ? quad.near_rule() : quad.regular_rule();
        const auto &table = near ? near_table[b] : regular_table[b];
        const double jac = 4.0 * mesh.area(a) * mesh.area(b);
        for (int i = 0; i < rule.size(); ++i)
        {
          const Vec3 x = rule.map(mesh, a, i);
          const Vec3 u = na.cross(x - origin);
          for (int j = 0; j < rule.size(); ++j)
          {
            const Vec3 y = rule.map(mesh, b, j);
            const double g = jac * rule.weights[i] * rule.weights[j] * inv_four_pi /
                             (x - y).norm();
            const Vec3c &f = table[j];
            scalar += g * (u[0] * f[0] + u[1] * f[1] + u[2] * f[2]);
            vector += g * f;
          }
        }
      }
      else
      {
        quad.points(mesh, a, b, points);
        for (const PairPoint &p : points)
        {
          const Vec3c f = -cross(nb, exc.electric(p.y));
          const Vec3 u = na.cross(p.x - origin);
          const double g = p.w * inv_four_pi / (p.x - p.y).norm();
          scalar += g * (u[0] * f[0] + u[1] * f[1] + u[2] * f[2]);
          vector += g * f;
        }
      }
    }

    const double omega_eps = exc.omega() * exc.eps;
    std::lock_guard lock(flush_mutex);
    for (int c = 0; c < nfa; ++c)
    {
      const Vec3 na_pi = na.cross(fa[c].p);
      const cplx proj = na_pi[0] * vector[0] + na_pi[1] * vector[1] + na_pi[2] * vector[2];
      out[fa[c].index] += -omega_eps * fa[c].s * (scalar - proj);
    }
  });

  if (!out.allFinite())
    throw NumericalError("non-finite entry in the regularised excitation");
  return out;
}

Eigen::VectorXcd assemble_excitation(const RwgBasis &basis, const Excitation &exc,
                                     Formulation formulation, const AssemblyOptions &options)
{
  exc.validate(formulation);
  const int degree = options.excitation_degree;
  switch (formulation)
  {
  case Formulation::regcfie:
    return project_n_cross_h(basis, exc, degree) +
           regularised_electric_term(basis, exc, options);
  case Formulation::cfie:
    return project_n_cross_h(basis, exc, degree) + *exc.alpha * project_electric(basis, exc, degree);
  case Formulation::efie:
    return -project_electric(basis, exc, degree);
  case Formulation::mfie:
    return project_n_cross_h(basis, exc, degree);
  }
  return {};
}

namespace
{

template <typename T>
void put_le(std::ostream &out, T value)
{
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char *>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream &in)
{
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char *>(bytes), sizeof(T)))
    throw ParseError("truncated matrix file", 0);
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_matrix(const Eigen::MatrixXcd &m, const std::filesystem::path &path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot open '" + path.string() + "' for writing");
  out.write("BEMM", 4);
  put_le(out, static_cast<std::uint32_t>(m.rows()));
  put_le(out, static_cast<std::uint32_t>(m.cols()));
  put_le(out, std::uint32_t{0});
  for (Eigen::Index i = 0; i < m.rows(); ++i)
  {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
    {
      put_le(out, m(i, j).real());
      put_le(out, m(i, j).imag());
    }
  }
  if (!out)
    throw IoError("failed while writing '" + path.string() + "'");
}

Eigen::MatrixXcd read_matrix(const std::filesystem::path &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open '" + path.string() + "' for reading");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "BEMM", 4) != 0)
    throw ParseError("not a BEMM matrix file", 0);
  const auto rows = get_le<std::uint32_t>(in);
  const auto cols = get_le<std::uint32_t>(in);
  get_le<std::uint32_t>(in);
  Eigen::MatrixXcd m(rows, cols);
  for (std::uint32_t i = 0; i < rows; ++i)
  {
    for (std::uint32_t j = 0; j < cols; ++j)
    {
      const double re = get_le<double>(in);
      const double im = get_le<double>(in);
      m(i, j) = {re, im};
    }
  }
  return m;
}

}  // namespace rwgcfie
