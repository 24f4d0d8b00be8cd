// SPDX-License-Identifier: Apache-2.0

#include "rwgcfie/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rwgcfie/basis.hpp"
#include "rwgcfie/geometry.hpp"
#include "rwgcfie/reference.hpp"

namespace rwgcfie
{

namespace
{

std::string trim(const std::string &s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string &text, char sep)
{
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep))
    parts.push_back(trim(item));
  return parts;
}

double to_double(const std::string &text)
{
  std::size_t used = 0;
  const double v = std::stod(text, &used);
  if (used != text.size() || !std::isfinite(v))
    throw std::invalid_argument(text);
  return v;
}

int to_int(const std::string &text)
{
  std::size_t used = 0;
  const int v = std::stoi(text, &used);
  if (used != text.size())
    throw std::invalid_argument(text);
  return v;
}

bool to_bool(const std::string &text)
{
  if (text == "true" || text == "1" || text == "yes" || text == "on")
    return true;
  if (text == "false" || text == "0" || text == "no" || text == "off")
    return false;
  throw std::invalid_argument(text);
}

Vec3 to_vec3(const std::string &text)
{
  const auto parts = split(text, ',');
  if (parts.size() != 3)
    throw std::invalid_argument(text);
  return {to_double(parts[0]), to_double(parts[1]), to_double(parts[2])};
}

std::string format_number(const char *fmt, double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace

ConfigMap parse_config(std::istream &in)
{
  ConfigMap entries;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw))
  {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty())
      continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected key=value", line);
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty())
      throw ParseError("empty key", line);
    if (entries.count(key))
      throw ParseError("key '" + key + "' given twice", line);
    entries[key] = {value, line};
  }
  return entries;
}

ConfigMap parse_config_file(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open config file '" + path.string() + "'");
  return parse_config(in);
}

std::vector<Formulation> parse_method_list(const std::string &text)
{
  std::vector<Formulation> methods;
  for (const auto &name : split(text, ','))
  {
    if (!name.empty())
      methods.push_back(parse_formulation(name));
  }
  if (methods.empty())
    throw DomainError("empty method list");
  return methods;
}

std::vector<int> parse_int_list(const std::string &text)
{
  std::vector<int> values;
  for (const auto &item : split(text, ','))
  {
    if (item.empty())
      continue;
    try
    {
      values.push_back(to_int(item));
    }
    catch (const std::exception &)
    {
      throw DomainError("'" + item + "' is not an integer");
    }
  }
  return values;
}

void apply_config(const ConfigMap &entries, RunConfig &config)
{
  for (const auto &[key, entry] : entries)
  {
    const std::string &v = entry.value;
    try
    {
      if (key == "method")
        config.methods = {parse_formulation(v)};
      else if (key == "methods")
        config.methods = parse_method_list(v);
      else if (key == "k")
        config.k = to_double(v);
      else if (key == "k_min")
        config.k_min = to_double(v);
      else if (key == "k_max")
        config.k_max = to_double(v);
      else if (key == "k_steps")
        config.k_steps = to_int(v);
      else if (key == "mesh")
        config.mesh = v;
      else if (key == "subdiv")
        config.subdiv = to_int(v);
      else if (key == "subdiv_list")
        config.subdiv_list = parse_int_list(v);
      else if (key == "alpha")
        config.alpha = to_double(v);
      else if (key == "tol")
        config.tol = to_double(v);
      else if (key == "max_iter")
        config.max_iter = to_int(v);
      else if (key == "quad.regular_degree")
        config.quad.regular_degree = to_int(v);
      else if (key == "quad.near_degree")
        config.quad.near_degree = to_int(v);
      else if (key == "quad.singular_order")
        config.quad.singular_order = to_int(v);
      else if (key == "quad.near_threshold")
        config.quad.near_threshold = to_double(v);
      else if (key == "out")
        config.out = v;
      else if (key == "workers")
        config.workers = to_int(v);
      else if (key == "mie_reference")
        config.mie_reference = to_bool(v);
      else if (key == "direction")
        config.direction = to_vec3(v);
      else if (key == "polarisation")
        config.polarisation = to_vec3(v);
      else
        throw ParseError("unknown config key '" + key + "'", entry.line);
    }
    catch (const ParseError &)
    {
      throw;
    }
    catch (const std::exception &)
    {
      throw ParseError("invalid value '" + v + "' for config key '" + key + "'", entry.line);
    }
  }
}

const std::string &csv_header()
{
  static const std::string header = "method,k,n_triangles,n_edges,alpha,tol,iterations,converged,"
                                    "rel_error,final_residual,wall_time_s";
  return header;
}

std::string format_csv_row(const CsvRow &row)
{
  auto num = [](const std::optional<double> &v, const char *fmt) {
    return v ? format_number(fmt, *v) : std::string();
  };
  auto integer = [](const std::optional<int> &v) { return v ? std::to_string(*v) : std::string(); };
  std::ostringstream os;
  os << row.method << ',' << num(row.k, "%.10g") << ',' << integer(row.n_triangles) << ','
     << integer(row.n_edges) << ',' << num(row.alpha, "%.10g") << ',' << num(row.tol, "%.10g")
     << ',' << integer(row.iterations) << ','
     << (row.converged ? (*row.converged ? "true" : "false") : "") << ','
     << num(row.rel_error, "%.8e") << ',' << num(row.final_residual, "%.8e") << ','
     << num(row.wall_time_s, "%.3f");
  return os.str();
}

void append_csv(const std::filesystem::path &path, const std::vector<CsvRow> &rows)
{
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out)
    throw IoError("cannot open '" + path.string() + "' for writing");
  if (fresh)
    out << csv_header() << '\n';
  for (const auto &row : rows)
    out << format_csv_row(row) << '\n';
  if (!out)
    throw IoError("failed while writing '" + path.string() + "'");
}

void write_csv(const std::filesystem::path &path, const std::vector<CsvRow> &rows)
{
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw IoError("cannot open '" + path.string() + "' for writing");
  out << csv_header() << '\n';
  for (const auto &row : rows)
    out << format_csv_row(row) << '\n';
  if (!out)
    throw IoError("failed while writing '" + path.string() + "'");
}

CsvRow report_row(const SolveReport &report, int n_edges, std::optional<double> rel_error)
{
  CsvRow row;
  row.method = to_string(report.formulation);
  row.k = report.k;
  row.n_triangles = report.n_triangles;
  row.n_edges = n_edges;
  if (report.formulation == Formulation::cfie)
    row.alpha = report.alpha;
  row.tol = report.tol;
  row.iterations = report.iterations;
  row.converged = report.converged;
  row.rel_error = rel_error;
  row.final_residual = report.final_residual;
  row.wall_time_s = report.wall_time;
  return row;
}

double fit_convergence_order(const std::vector<int> &n_triangles, const std::vector<double> &errors)
{
  if (n_triangles.size() != errors.size() || n_triangles.size() < 2)
    throw DomainError("order fit needs at least two (mesh, error) pairs");
  const double n = static_cast<double>(errors.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < errors.size(); ++i)
  {
    if (!(errors[i] > 0.0) || n_triangles[i] <= 0)
      throw DomainError("order fit needs positive errors and triangle counts");
    const double x = std::log(std::sqrt(static_cast<double>(n_triangles[i])));
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0)
    throw DomainError("order fit needs distinct mesh sizes");
  return -(n * sxy - sx * sy) / denom;
}

std::vector<double> k_grid(double k_min, double k_max, int steps)
{
  if (steps < 2)
    throw DomainError("a wavenumber sweep needs at least two steps");
  if (!(k_min < k_max))
    throw DomainError("a wavenumber sweep needs k_min < k_max");
  std::vector<double> ks(steps);
  for (int i = 0; i < steps; ++i)
    ks[i] = k_min + (k_max - k_min) * i / (steps - 1);
  ks.back() = k_max;
  return ks;
}

namespace
{

struct Flags
{
  std::optional<std::string> config;
  std::optional<std::string> method;
  std::optional<std::string> methods;
  std::optional<std::string> mesh;
  std::optional<std::string> out;
  std::optional<std::string> subdiv_list;
  std::optional<int> subdiv;
  std::optional<int> k_steps;
  std::optional<int> max_iter;
  std::optional<int> workers;
  std::optional<int> quad_regular;
  std::optional<int> quad_near;
  std::optional<int> quad_order;
  std::optional<double> k;
  std::optional<double> k_min;
  std::optional<double> k_max;
  std::optional<double> alpha;
  std::optional<double> tol;
  std::optional<double> quad_threshold;
  bool mie_reference = false;
};

void add_common(CLI::App &cmd, Flags &f)
{
  cmd.add_option("--config", f.config, "key=value configuration file (flags take precedence)");
  cmd.add_option("--mesh", f.mesh, "OFF mesh file");
  cmd.add_option("--subdiv", f.subdiv, "icosphere subdivision level");
  cmd.add_option("--alpha", f.alpha, "standard-CFIE coupling (default 0.5)");
  cmd.add_option("--tol", f.tol, "GMRES relative residual tolerance (default 1e-5)");
  cmd.add_option("--max-iter", f.max_iter, "GMRES iteration limit (default 500)");
  cmd.add_option("--workers", f.workers, "assembly threads (default: all)");
  cmd.add_option("--out", f.out, "CSV output path");
  cmd.add_option("--quad-regular-degree", f.quad_regular, "tensor rule degree for separated pairs");
  cmd.add_option("--quad-near-degree", f.quad_near, "tensor rule degree for near pairs");
  cmd.add_option("--quad-singular-order", f.quad_order, "Gauss order of the singular transforms");
  cmd.add_option("--quad-near-threshold", f.quad_threshold, "near-field promotion threshold");
  cmd.add_flag("--mie-reference", f.mie_reference, "score against the Mie series (unit sphere)");
}

RunConfig resolve(const Flags &f)
{
  RunConfig cfg;
  if (f.config)
  {
    try
    {
      apply_config(parse_config_file(*f.config), cfg);
    }
    catch (const ParseError &e)
    {
      throw UsageError(std::string("config file '") + *f.config + "': " + e.what());
    }
    catch (const IoError &e)
    {
      throw UsageError(e.what());
    }
  }
  try
  {
    if (f.method)
      cfg.methods = {parse_formulation(*f.method)};
    if (f.methods)
      cfg.methods = parse_method_list(*f.methods);
    if (f.subdiv_list)
      cfg.subdiv_list = parse_int_list(*f.subdiv_list);
  }
  catch (const DomainError &e)
  {
    throw UsageError(e.what());
  }
  if (f.mesh)
  {
    cfg.mesh = f.mesh;
    cfg.subdiv.reset();
  }
  if (f.subdiv)
  {
    cfg.subdiv = f.subdiv;
    if (!f.mesh)
      cfg.mesh.reset();
  }
  if (f.k)
    cfg.k = f.k;
  if (f.k_min)
    cfg.k_min = f.k_min;
  if (f.k_max)
    cfg.k_max = f.k_max;
  if (f.k_steps)
    cfg.k_steps = f.k_steps;
  if (f.alpha)
    cfg.alpha = *f.alpha;
  if (f.tol)
    cfg.tol = *f.tol;
  if (f.max_iter)
    cfg.max_iter = *f.max_iter;
  if (f.workers)
    cfg.workers = *f.workers;
  if (f.out)
    cfg.out = f.out;
  if (f.quad_regular)
    cfg.quad.regular_degree = *f.quad_regular;
  if (f.quad_near)
    cfg.quad.near_degree = *f.quad_near;
  if (f.quad_order)
    cfg.quad.singular_order = *f.quad_order;
  if (f.quad_threshold)
    cfg.quad.near_threshold = *f.quad_threshold;
  if (f.mie_reference)
    cfg.mie_reference = true;
  return cfg;
}

void check_common(const RunConfig &cfg, bool needs_mesh)
{
  if (needs_mesh && cfg.mesh.has_value() == cfg.subdiv.has_value())
    throw UsageError("give exactly one of --mesh and --subdiv");
  if (!(cfg.tol > 0.0))
    throw UsageError("--tol must be positive");
  if (cfg.max_iter < 1)
    throw UsageError("--max-iter must be at least 1");
  if (cfg.workers < 0)
    throw UsageError("--workers must be non-negative");
  if (cfg.alpha == 0.0)
    for (Formulation m : cfg.methods)
      if (m == Formulation::cfie)
        throw UsageError("--alpha must be non-zero for cfie");
  try
  {
    cfg.quad.validate();
  }
  catch (const DomainError &e)
  {
    throw UsageError(e.what());
  }
}

void check_k(double k, const char *name)
{
  if (!(k > 0.0) || !std::isfinite(k))
    throw UsageError(std::string(name) + " must be positive");
}

SurfaceMesh load_mesh(const RunConfig &cfg, std::optional<int> level = std::nullopt)
{
  SurfaceMesh mesh;
  if (level)
    mesh = icosphere(*level);
  else if (cfg.subdiv)
    mesh = icosphere(*cfg.subdiv);
  else
    mesh = read_off(std::filesystem::path(*cfg.mesh));
  const ValidationReport report = validate(mesh);
  if (!report.ok())
    throw TopologyError("mesh failed validation: " + report.summary());
  return mesh;
}

void require_unit_sphere(const SurfaceMesh &mesh)
{
  for (const Vec3 &v : mesh.vertices())
  {
    if (std::abs(v.norm() - 1.0) > 1e-6)
      throw DomainError("--mie-reference needs a unit sphere centred at the origin");
  }
}

Excitation excitation_for(const RunConfig &cfg, double k)
{
  Excitation exc;
  exc.direction = cfg.direction;
  exc.polarisation = cfg.polarisation;
  exc.k = k;
  exc.alpha = cfg.alpha;
  return exc;
}

SolveConfig solve_config_for(const RunConfig &cfg)
{
  SolveConfig sc;
  sc.alpha = cfg.alpha;
  sc.gmres.tol = cfg.tol;
  sc.gmres.max_iter = cfg.max_iter;
  sc.assembly.quadrature = cfg.quad;
  sc.assembly.workers = cfg.workers;
  return sc;
}

// Solves every requested method at one k and returns the rows.
std::vector<CsvRow> run_point(const SurfaceMesh &mesh, const RunConfig &cfg, double k,
                              const std::vector<Formulation> &methods, bool reference,
                              std::vector<SolveReport> *reports_out = nullptr,
                              std::vector<double> *errors_out = nullptr)
{
  const EdgeTopology topology = build_edge_topology(mesh);
  const RwgBasis basis(mesh, topology);
  const Excitation exc = excitation_for(cfg, k);
  std::optional<MieConfig> mie;
  if (reference)
  {
    mie = MieConfig::from_excitation(exc);
    mie_self_check(*mie);
  }
  const auto reports = solve_formulations(basis, exc, methods, solve_config_for(cfg));
  std::vector<CsvRow> rows;
  for (const auto &report : reports)
  {
    std::optional<double> err;
    if (mie)
      err = relative_error(report.x, basis, *mie);
    rows.push_back(report_row(report, topology.num_edges(), err));
    if (errors_out)
      errors_out->push_back(err.value_or(0.0));
  }
  if (reports_out)
    reports_out->insert(reports_out->end(), reports.begin(), reports.end());
  return rows;
}

void emit(const RunConfig &cfg, const std::vector<CsvRow> &rows, bool append, std::ostream &out)
{
  if (cfg.out)
  {
    if (append)
      append_csv(*cfg.out, rows);
    else
      write_csv(*cfg.out, rows);
    for (const auto &row : rows)
      out << format_csv_row(row) << '\n';
  }
  else
  {
    out << csv_header() << '\n';
    for (const auto &row : rows)
      out << format_csv_row(row) << '\n';
  }
}

bool all_converged(const std::vector<CsvRow> &rows)
{
  for (const auto &row : rows)
    if (row.converged && !*row.converged)
      return false;
  return true;
}

int cmd_mesh_gen(int subdiv, double radius, const std::string &path, std::ostream &out)
{
  const SurfaceMesh mesh = icosphere(subdiv, radius);
  write_off(mesh, std::filesystem::path(path));
  const EdgeTopology topology = build_edge_topology(mesh);
  out << "F=" << mesh.num_triangles() << " E=" << topology.num_edges()
      << " V=" << mesh.num_vertices() << '\n';
  return exit_ok;
}

int cmd_solve(const RunConfig &cfg, std::ostream &out)
{
  check_common(cfg, true);
  if (!cfg.k)
    throw UsageError("--k is required");
  check_k(*cfg.k, "--k");
  if (cfg.methods.size() != 1)
    throw UsageError("solve takes a single --method");
  const SurfaceMesh mesh = load_mesh(cfg);
  if (cfg.mie_reference)
    require_unit_sphere(mesh);
  const auto rows = run_point(mesh, cfg, *cfg.k, cfg.methods, cfg.mie_reference);
  emit(cfg, rows, true, out);
  return all_converged(rows) ? exit_ok : exit_not_converged;
}

int cmd_sweep(const RunConfig &cfg, std::ostream &out)
{
  check_common(cfg, true);
  if (!cfg.k_min || !cfg.k_max || !cfg.k_steps)
    throw UsageError("sweep needs --k-min, --k-max and --k-steps");
  check_k(*cfg.k_min, "--k-min");
  if (*cfg.k_steps < 2)
    throw UsageError("--k-steps must be at least 2");
  if (!(*cfg.k_min < *cfg.k_max))
    throw UsageError("--k-min must be smaller than --k-max");
  const SurfaceMesh mesh = load_mesh(cfg);
  if (cfg.mie_reference)
    require_unit_sphere(mesh);
  std::vector<CsvRow> rows;
  for (double k : k_grid(*cfg.k_min, *cfg.k_max, *cfg.k_steps))
  {
    auto point = run_point(mesh, cfg, k, cfg.methods, cfg.mie_reference);
    rows.insert(rows.end(), point.begin(), point.end());
  }
  emit(cfg, rows, false, out);
  return all_converged(rows) ? exit_ok : exit_not_converged;
}

int cmd_convergence(const RunConfig &cfg, std::ostream &out)
{
  check_common(cfg, false);
  if (cfg.mesh)
    throw UsageError("convergence uses --subdiv-list, not --mesh");
  if (cfg.subdiv_list.size() < 2)
    throw UsageError("--subdiv-list needs at least two levels");
  for (std::size_t i = 1; i < cfg.subdiv_list.size(); ++i)
    if (cfg.subdiv_list[i] <= cfg.subdiv_list[i - 1])
      throw UsageError("--subdiv-list must be strictly increasing");
  if (cfg.methods.size() != 1)
    throw UsageError("convergence takes a single --method");
  const double k = cfg.k.value_or(1.0);
  check_k(k, "--k");

  std::vector<CsvRow> rows;
  std::vector<int> triangles;
  std::vector<double> errors;
  for (int level : cfg.subdiv_list)
  {
    const SurfaceMesh mesh = load_mesh(cfg, level);
    auto point = run_point(mesh, cfg, k, cfg.methods, true, nullptr, &errors);
    triangles.push_back(mesh.num_triangles());
    rows.insert(rows.end(), point.begin(), point.end());
  }
  CsvRow summary;
  summary.method = "order_fit";
  summary.k = k;
  summary.rel_error = fit_convergence_order(triangles, errors);
  rows.push_back(summary);
  emit(cfg, rows, false, out);
  return all_converged(rows) ? exit_ok : exit_not_converged;
}

}  // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
  CLI::App app{"Galerkin BEM solver for PEC scattering with RWG basis functions"};
  app.require_subcommand(1);

  int gen_subdiv = -1;
  double gen_radius = 1.0;
  std::string gen_out;
  auto *mesh_gen = app.add_subcommand("mesh-gen", "write an icosphere mesh as OFF");
  mesh_gen->add_option("--subdiv", gen_subdiv, "subdivision level")->required();
  mesh_gen->add_option("--radius", gen_radius, "sphere radius (default 1)");
  mesh_gen->add_option("--out", gen_out, "output OFF path")->required();

  Flags solve_flags, sweep_flags, conv_flags;
  auto *solve = app.add_subcommand("solve", "solve one formulation at one wavenumber");
  add_common(*solve, solve_flags);
  solve->add_option("--method", solve_flags.method, "regcfie | cfie | efie | mfie");
  solve->add_option("--k", solve_flags.k, "wavenumber");

  auto *sweep = app.add_subcommand("sweep", "solve over a wavenumber grid");
  add_common(*sweep, sweep_flags);
  sweep->add_option("--methods", sweep_flags.methods, "comma-separated formulations");
  sweep->add_option("--k-min", sweep_flags.k_min, "first wavenumber");
  sweep->add_option("--k-max", sweep_flags.k_max, "last wavenumber");
  sweep->add_option("--k-steps", sweep_flags.k_steps, "number of wavenumbers (>= 2)");

  auto *conv = app.add_subcommand("convergence", "error against mesh refinement");
  add_common(*conv, conv_flags);
  conv->add_option("--subdiv-list", conv_flags.subdiv_list, "comma-separated icosphere levels");
  conv->add_option("--method", conv_flags.method, "formulation (default regcfie)");
  conv->add_option("--k", conv_flags.k, "wavenumber (default 1)");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  try
  {
    if (mesh_gen->parsed())
    {
      if (!(gen_radius > 0.0))
        throw UsageError("--radius must be positive");
      if (gen_subdiv < 0)
        throw UsageError("--subdiv must be non-negative");
      return cmd_mesh_gen(gen_subdiv, gen_radius, gen_out, out);
    }
    if (solve->parsed())
      return cmd_solve(resolve(solve_flags), out);
    if (sweep->parsed())
      return cmd_sweep(resolve(sweep_flags), out);
    if (conv->parsed())
      return cmd_convergence(resolve(conv_flags), out);
  }
  catch (const UsageError &e)
  {
    err << "usage error: " << e.what() << '\n';
    return exit_usage;
  }
  catch (const std::exception &e)
  {
    err << "error: " << e.what() << '\n';
    return exit_runtime;
  }
  return exit_usage;
}

}  // namespace rwgcfie
