// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rwgcfie/cli.hpp"

using namespace rwgcfie;
namespace fs = std::filesystem;

namespace
{

struct Run
{
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args)
{
  args.insert(args.begin(), "rwgcfie");
  std::vector<const char *> argv;
  for (const auto &a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const fs::path &path)
{
  std::ifstream in(path);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);)
    out.push_back(line);
  return out;
}

std::vector<std::string> fields(const std::string &line)
{
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string f; std::getline(ss, f, ',');)
    out.push_back(f);
  if (!line.empty() && line.back() == ',')
    out.emplace_back();
  return out;
}

// Directory removed at scope exit.
struct TempDir
{
  fs::path path;
  explicit TempDir(const std::string &name)
    : path(fs::temp_directory_path() / ("rwgcfie_cli_" + name))
  {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string &name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("CSV header and row formatting", "[cli]")
{
  CHECK(csv_header() ==
        "method,k,n_triangles,n_edges,alpha,tol,iterations,converged,rel_error,final_residual,wall_time_s");
  CsvRow row;
  row.method = "cfie";
  row.k = 6.05;
  row.n_triangles = 1280;
  row.n_edges = 1920;
  row.alpha = 0.5;
  row.tol = 1e-5;
  row.iterations = 17;
  row.converged = true;
  row.rel_error = 0.0448;
  row.final_residual = 8.5e-6;
  row.wall_time_s = 1.23456;
  CHECK(format_csv_row(row) ==
        "cfie,6.05,1280,1920,0.5,1e-05,17,true,4.48000000e-02,8.50000000e-06,1.235");
  CsvRow sparse;
  sparse.method = "order_fit";
  sparse.k = 1.0;
  sparse.rel_error = 1.0;
  CHECK(format_csv_row(sparse) == "order_fit,1,,,,,,,1.00000000e+00,,");
  CHECK(fields(format_csv_row(sparse)).size() == 11);
}

TEST_CASE("report rows carry alpha only for cfie", "[cli]")
{
  SolveReport r;
  r.formulation = Formulation::regcfie;
  r.k = 1.0;
  r.alpha = 0.5;
  r.converged = false;
  CsvRow row = report_row(r, 30, std::nullopt);
  CHECK_FALSE(row.alpha);
  CHECK_FALSE(row.rel_error);
  CHECK(row.converged == false);
  r.formulation = Formulation::cfie;
  row = report_row(r, 30, 0.1);
  REQUIRE(row.alpha);
  CHECK(*row.alpha == 0.5);
}

TEST_CASE("config parsing", "[cli]")
{
  std::istringstream in("# comment line\n\nk = 2.5   # trailing comment\nmethods=regcfie, efie\n"
                        "quad.singular_order=6\nmie_reference=true\ndirection=0,1,0\n");
  const ConfigMap map = parse_config(in);
  CHECK(map.at("k").value == "2.5");
  CHECK(map.at("k").line == 3);
  RunConfig cfg;
  apply_config(map, cfg);
  CHECK(cfg.k == 2.5);
  CHECK(cfg.methods == std::vector<Formulation>{Formulation::regcfie, Formulation::efie});
  CHECK(cfg.quad.singular_order == 6);
  CHECK(cfg.mie_reference);
  CHECK(cfg.direction == Vec3(0.0, 1.0, 0.0));
  CHECK(cfg.alpha == 0.5);
  CHECK(cfg.tol == 1e-5);
  CHECK(cfg.max_iter == 500);

  std::istringstream missing_eq("k 2\n");
  CHECK_THROWS_AS(parse_config(missing_eq), ParseError);
  std::istringstream twice("k=1\nk=2\n");
  CHECK_THROWS_AS(parse_config(twice), ParseError);

  std::istringstream unknown("k=1\n\nfrobnicate=3\n");
  try
  {
    apply_config(parse_config(unknown), cfg);
    FAIL("expected ParseError");
  }
  catch (const ParseError &e)
  {
    CHECK(e.line() == 3);
  }
  std::istringstream bad_value("tol=abc\n");
  CHECK_THROWS_AS(apply_config(parse_config(bad_value), cfg), ParseError);
  CHECK_THROWS_AS(parse_config_file("/nonexistent/config.txt"), IoError);
}

TEST_CASE("list parsing and wavenumber grid", "[cli]")
{
  CHECK(parse_int_list("2, 3,4") == std::vector<int>{2, 3, 4});
  CHECK_THROWS_AS(parse_int_list("2,x"), DomainError);
  CHECK_THROWS_AS(parse_method_list(""), DomainError);
  CHECK_THROWS_AS(parse_method_list("regcfie,bogus"), DomainError);

  const auto ks = k_grid(6.0, 6.1, 11);
  REQUIRE(ks.size() == 11);
  CHECK(ks.front() == 6.0);
  CHECK(ks.back() == 6.1);
  CHECK(std::abs(ks[5] - 6.05) < 1e-14);
  CHECK_THROWS_AS(k_grid(1.0, 2.0, 1), DomainError);
  CHECK_THROWS_AS(k_grid(2.0, 1.0, 3), DomainError);
}

TEST_CASE("convergence order fit", "[cli]")
{
  // e = C h^p with h = 1/sqrt(F).
  const std::vector<int> F{320, 1280, 5120};
  for (double p : {1.0, 2.0})
  {
    std::vector<double> e;
    for (int f : F)
      e.push_back(0.7 * std::pow(1.0 / std::sqrt(static_cast<double>(f)), p));
    CHECK(std::abs(fit_convergence_order(F, e) - p) < 1e-12);
  }
  CHECK_THROWS_AS(fit_convergence_order({320}, {0.1}), DomainError);
  CHECK_THROWS_AS(fit_convergence_order({320, 1280}, {0.1, 0.0}), DomainError);
}

TEST_CASE("mesh-gen writes an OFF file", "[cli]")
{
  const TempDir dir("mesh_gen");
  const Run r = run({"mesh-gen", "--subdiv", "2", "--out", dir.file("s2.off")});
  REQUIRE(r.code == exit_ok);
  CHECK(r.out.find("F=320 E=480 V=162") != std::string::npos);
  const auto off = lines(dir.file("s2.off"));
  REQUIRE(off.size() >= 2);
  CHECK(off[0] == "OFF");
  CHECK(off[1] == "162 320 0");
  CHECK(run({"mesh-gen", "--subdiv", "9", "--out", dir.file("x.off")}).code == exit_runtime);
  CHECK(run({"mesh-gen", "--subdiv", "2"}).code == exit_usage);

  // The generated file passes solve's input validation.
  const Run s = run({"solve", "--mesh", dir.file("s2.off"), "--method", "mfie", "--k", "1", "--workers", "1"});
  CHECK(s.code == exit_ok);
}

TEST_CASE("solve appends schema-complete rows", "[cli]")
{
  const TempDir dir("solve");
  const std::string csv = dir.file("r.csv");
  const Run first = run({"solve", "--subdiv", "2", "--method", "cfie", "--k", "1.0", "--mie-reference",
                         "--out", csv});
  REQUIRE(first.code == exit_ok);
  const Run second = run({"solve", "--subdiv", "1", "--method", "regcfie", "--k", "1.0", "--out", csv});
  REQUIRE(second.code == exit_ok);
  const auto rows = lines(csv);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == csv_header());
  const auto cfie = fields(rows[1]);
  REQUIRE(cfie.size() == 11);
  CHECK(cfie[0] == "cfie");
  CHECK(cfie[2] == "320");
  CHECK(cfie[3] == "480");
  CHECK(cfie[4] == "0.5");
  CHECK(cfie[7] == "true");
  CHECK(std::stod(cfie[8]) < 0.15);
  const auto reg = fields(rows[2]);
  REQUIRE(reg.size() == 11);
  CHECK(reg[0] == "regcfie");
  CHECK(reg[4].empty());
  CHECK(reg[8].empty());
}

TEST_CASE("solve exit codes", "[cli]")
{
  const TempDir dir("solve_codes");
  CHECK(run({"solve", "--subdiv", "1", "--method", "mfie"}).code == exit_usage);
  CHECK(run({"solve", "--subdiv", "1", "--method", "nope", "--k", "1"}).code == exit_usage);
  CHECK(run({"solve", "--subdiv", "1", "--mesh", "a.off", "--method", "mfie", "--k", "1"}).code == exit_usage);
  CHECK(run({"solve", "--method", "mfie", "--k", "1"}).code == exit_usage);
  CHECK(run({"solve", "--subdiv", "1", "--method", "mfie", "--k", "-1"}).code == exit_usage);
  CHECK(run({"solve", "--subdiv", "1", "--method", "mfie", "--k", "1", "--tol", "0"}).code == exit_usage);
  CHECK(run({"solve", "--mesh", dir.file("missing.off"), "--method", "mfie", "--k", "1"}).code == exit_runtime);
  CHECK(run({"solve", "--subdiv", "1", "--method", "mfie", "--k", "1", "--bogus"}).code == exit_usage);

  const std::string csv = dir.file("nc.csv");
  const Run nc = run({"solve", "--subdiv", "1", "--method", "efie", "--k", "1", "--max-iter", "2", "--out", csv});
  CHECK(nc.code == exit_not_converged);
  const auto rows = lines(csv);
  REQUIRE(rows.size() == 2);
  CHECK(fields(rows[1])[7] == "false");

  // Mie reference on a non-unit sphere is a runtime error.
  run({"mesh-gen", "--subdiv", "1", "--radius", "2", "--out", dir.file("big.off")});
  CHECK(run({"solve", "--mesh", dir.file("big.off"), "--method", "mfie", "--k", "1", "--mie-reference"}).code ==
        exit_runtime);
}

TEST_CASE("config file precedence", "[cli]")
{
  const TempDir dir("config");
  {
    std::ofstream cfg(dir.file("run.cfg"));
    cfg << "# solver settings\nmethod = cfie\nk = 2.0\nsubdiv = 1\nalpha = 0.25\nout = "
        << dir.file("from_config.csv") << "\n";
  }
  // Config values alone.
  REQUIRE(run({"solve", "--config", dir.file("run.cfg")}).code == exit_ok);
  auto rows = lines(dir.file("from_config.csv"));
  REQUIRE(rows.size() == 2);
  auto f = fields(rows[1]);
  CHECK(f[0] == "cfie");
  CHECK(f[1] == "2");
  CHECK(f[2] == "80");
  CHECK(f[4] == "0.25");

  // Flags override the file.
  const std::string over = dir.file("override.csv");
  REQUIRE(run({"solve", "--config", dir.file("run.cfg"), "--alpha", "0.75", "--k", "1.5", "--out", over}).code ==
          exit_ok);
  rows = lines(over);
  REQUIRE(rows.size() == 2);
  f = fields(rows[1]);
  CHECK(f[1] == "1.5");
  CHECK(f[4] == "0.75");

  {
    std::ofstream bad(dir.file("bad.cfg"));
    bad << "k = 1\nnot_a_key = 2\n";
  }
  const Run r = run({"solve", "--config", dir.file("bad.cfg"), "--subdiv", "1"});
  CHECK(r.code == exit_usage);
  CHECK(r.err.find("line 2") != std::string::npos);
  CHECK(run({"solve", "--config", dir.file("absent.cfg")}).code == exit_usage);
}

TEST_CASE("sweep rows and usage errors", "[cli]")
{
  const TempDir dir("sweep");
  const std::string csv = dir.file("sweep.csv");
  const Run r = run({"sweep", "--subdiv", "1", "--methods", "regcfie,efie", "--k-min", "1", "--k-max", "1.2",
                     "--k-steps", "3", "--mie-reference", "--out", csv});
  CHECK(r.code == exit_ok);
  const auto rows = lines(csv);
  REQUIRE(rows.size() == 7);
  CHECK(rows[0] == csv_header());
  for (std::size_t i = 1; i < rows.size(); ++i)
  {
    const auto f = fields(rows[i]);
    REQUIRE(f.size() == 11);
    CHECK(!f[8].empty());
  }
  CHECK(fields(rows[1])[0] == "regcfie");
  CHECK(fields(rows[2])[0] == "efie");
  CHECK(fields(rows[6])[1] == "1.2");

  CHECK(run({"sweep", "--subdiv", "1", "--methods", "regcfie", "--k-min", "1", "--k-max", "2", "--k-steps", "1"})
          .code == exit_usage);
  CHECK(run({"sweep", "--subdiv", "1", "--methods", "regcfie", "--k-min", "2", "--k-max", "1", "--k-steps", "3"})
          .code == exit_usage);

  // A non-convergent point is a row, and the sweep reports it through the exit code.
  const std::string nc = dir.file("nc.csv");
  CHECK(run({"sweep", "--subdiv", "1", "--methods", "efie", "--k-min", "1", "--k-max", "1.1", "--k-steps", "2",
             "--max-iter", "2", "--out", nc})
          .code == exit_not_converged);
  CHECK(lines(nc).size() == 3);
}

TEST_CASE("convergence study rows and order summary", "[cli]")
{
  const TempDir dir("convergence");
  const std::string csv = dir.file("conv.csv");
  REQUIRE(run({"convergence", "--subdiv-list", "0,1,2", "--k", "1", "--out", csv}).code == exit_ok);
  const auto rows = lines(csv);
  REQUIRE(rows.size() == 5);
  std::vector<double> errors;
  for (int i = 1; i <= 3; ++i)
  {
    const auto f = fields(rows[i]);
    CHECK(f[0] == "regcfie");
    errors.push_back(std::stod(f[8]));
  }
  CHECK(errors[1] < errors[0]);
  CHECK(errors[2] < errors[1]);
  const auto summary = fields(rows[4]);
  REQUIRE(summary.size() == 11);
  CHECK(summary[0] == "order_fit");
  CHECK(std::stod(summary[8]) > 0.0);

  CHECK(run({"convergence", "--subdiv-list", "2"}).code == exit_usage);
  CHECK(run({"convergence", "--subdiv-list", "2,1"}).code == exit_usage);
}

TEST_CASE("single-worker runs are deterministic apart from wall time", "[cli]")
{
  const TempDir dir("determinism");
  auto strip = [](const std::vector<std::string> &rows)
  {
    std::vector<std::string> out;
    for (const auto &row : rows)
      out.push_back(row.substr(0, row.find_last_of(',')));
    return out;
  };
  const std::vector<std::string> args{"sweep", "--subdiv", "1", "--methods", "regcfie,cfie", "--k-min", "1",
                                      "--k-max", "2", "--k-steps", "2", "--workers", "1", "--mie-reference"};
  auto a_args = args, b_args = args;
  a_args.insert(a_args.end(), {"--out", dir.file("a.csv")});
  b_args.insert(b_args.end(), {"--out", dir.file("b.csv")});
  REQUIRE(run(a_args).code == exit_ok);
  REQUIRE(run(b_args).code == exit_ok);
  CHECK(strip(lines(dir.file("a.csv"))) == strip(lines(dir.file("b.csv"))));
}

TEST_CASE("output without --out goes to stdout", "[cli]")
{
  const Run r = run({"solve", "--subdiv", "0", "--method", "mfie", "--k", "1"});
  REQUIRE(r.code == exit_ok);
  CHECK(r.out.rfind(csv_header() + "\n", 0) == 0);
}
