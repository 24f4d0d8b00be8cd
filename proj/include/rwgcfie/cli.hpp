// SPDX-License-Identifier: Apache-2.0

#ifndef RWGCFIE_CLI_HPP
#define RWGCFIE_CLI_HPP

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rwgcfie/assembly.hpp"
#include "rwgcfie/errors.hpp"
#include "rwgcfie/quadrature.hpp"
#include "rwgcfie/solve.hpp"

namespace rwgcfie
{

inline constexpr int exit_ok = 0;
inline constexpr int exit_runtime = 1;
inline constexpr int exit_usage = 2;
inline constexpr int exit_not_converged = 3;

// Invalid command line or configuration; maps to exit code 2.
class UsageError : public Error
{
public:
  using Error::Error;
};

struct RunConfig
{
  std::vector<Formulation> methods{Formulation::regcfie};
  std::optional<double> k;
  std::optional<double> k_min;
  std::optional<double> k_max;
  std::optional<int> k_steps;
  std::optional<std::string> mesh;
  std::optional<int> subdiv;
  std::vector<int> subdiv_list;
  double alpha = 0.5;
  double tol = 1e-5;
  int max_iter = 500;
  QuadratureConfig quad;
  std::optional<std::string> out;
  int workers = 0;
  bool mie_reference = false;
  Vec3 direction{0.0, 0.0, 1.0};
  Vec3 polarisation{1.0, 0.0, 0.0};
};

// key=value lines; '#' starts a comment; blank lines ignored. Keys map to their value and
// 1-based line number. Throws ParseError on a malformed line or a repeated key.
struct ConfigValue
{
  std::string value;
  std::size_t line = 0;
};
using ConfigMap = std::map<std::string, ConfigValue>;

ConfigMap parse_config(std::istream &in);
ConfigMap parse_config_file(const std::filesystem::path &path);  // IoError if unreadable

// Applies recognised keys to `config`; throws ParseError naming the line on an unknown key
// or an unparsable value. Recognised keys: method, methods, k, k_min, k_max, k_steps, mesh,
// subdiv, subdiv_list, alpha, tol, max_iter, quad.regular_degree, quad.near_degree,
// quad.singular_order, quad.near_threshold, out, workers, mie_reference, direction,
// polarisation.
void apply_config(const ConfigMap &entries, RunConfig &config);

std::vector<Formulation> parse_method_list(const std::string &text);
std::vector<int> parse_int_list(const std::string &text);

struct CsvRow
{
  std::string method;
  std::optional<double> k;
  std::optional<int> n_triangles;
  std::optional<int> n_edges;
  std::optional<double> alpha;
  std::optional<double> tol;
  std::optional<int> iterations;
  std::optional<bool> converged;
  std::optional<double> rel_error;
  std::optional<double> final_residual;
  std::optional<double> wall_time_s;
};

const std::string &csv_header();
std::string format_csv_row(const CsvRow &row);

// Appends rows to `path`, writing the header first if the file is new or empty.
void append_csv(const std::filesystem::path &path, const std::vector<CsvRow> &rows);
// Replaces `path` with the header followed by `rows`.
void write_csv(const std::filesystem::path &path, const std::vector<CsvRow> &rows);

CsvRow report_row(const SolveReport &report, int n_edges, std::optional<double> rel_error);

// Convergence order p from errors e_l ~ C h_l^p with h_l ~ 1/sqrt(F_l), by least squares on
// log e against log sqrt(F). Throws DomainError with fewer than two levels.
double fit_convergence_order(const std::vector<int> &n_triangles, const std::vector<double> &errors);

// Wavenumbers k_min + i (k_max - k_min) / (steps - 1), i = 0..steps-1.
std::vector<double> k_grid(double k_min, double k_max, int steps);

// Entry point of the command-line tool; returns the process exit code.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace rwgcfie

#endif  // RWGCFIE_CLI_HPP
