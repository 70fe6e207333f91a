#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "fmc/commands.hpp"

using namespace fmc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "fmc_test_commands" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

struct Quiet {
  std::ostringstream log, err;
  CommandOptions opts() {
    CommandOptions o;
    o.log = &log;
    o.err = &err;
    return o;
  }
};

const char* kNegSign =
    "domain.kind = interval\n"
    "domain.n = 256\n"
    "nonlinearity.kind = neg_sign\n";

}  // namespace

TEST_CASE("config parsing") {
  const RunConfig c = parse(
      "# sample\n"
      "domain.kind = disk\n"
      "domain.radius = 2\n"
      "domain.refinement = 3   # fine enough\n"
      "nonlinearity.kind = step\n"
      "nonlinearity.a = 1\n"
      "nonlinearity.b = -1\n"
      "solver.selection_rule = hi\n"
      "solver.outer_tol = 1e-9\n"
      "output.svg = false\n");
  CHECK(c.domain.kind == DomainConfig::Kind::disk);
  CHECK(c.domain.radius == 2.0);
  CHECK(c.domain.refinement == 3);
  CHECK(c.nonlinearity.params.at("b") == -1.0);
  CHECK(c.solver.selection_rule == SelectionRule::upper);
  CHECK(c.solver.outer_tol == 1e-9);
  CHECK_FALSE(c.emit_svg);

  CHECK_THROWS_WITH_AS(parse("domain.kind = interval\nnonlinearity.kind = zero\nsolver.bogus = 1\n"),
                       doctest::Contains("line 3"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("domain.kind = interval\ndomain.n = ten\nnonlinearity.kind = zero\n"),
                       doctest::Contains("domain.n"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("domain.kind = interval\ndomain.kind = disk\nnonlinearity.kind = zero\n"),
                       doctest::Contains("already set on line 1"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("domain.kind = interval\nnonlinearity.kind = zero\ndomain.radius = 1\n"),
                       doctest::Contains("line 3"), ConfigError);
  CHECK_THROWS_AS(parse("domain.kind = interval\n"), ConfigError);
  CHECK_THROWS_AS(parse("nonlinearity.kind = zero\n"), ConfigError);
  CHECK_THROWS_AS(parse("domain.kind = interval\nnonlinearity.kind = prescribed\n"), ConfigError);
  CHECK_THROWS_AS(parse("domain.kind = interval\nnonlinearity.kind = power\nnonlinearity.c = 1\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse("domain.kind = interval\nnonlinearity.kind = zero\nsolver.damping = 2\n"),
                  ConfigError);
  CHECK_THROWS_WITH_AS(parse("domain.kind = interval\nnonlinearity.kind zero\n"),
                       doctest::Contains("line 2"), ConfigError);
}

TEST_CASE("missing mesh file") {
  const auto dir = scratch("missing_mesh");
  const auto cfg = write_file(dir / "run.cfg",
                              "domain.kind = file\ndomain.path = nowhere/mesh.txt\n"
                              "nonlinearity.kind = zero\n");
  Quiet q;
  CHECK(cmd_solve(cfg, q.opts()) == kExitError);
  CHECK(q.err.str().find("nowhere/mesh.txt") != std::string::npos);
}

TEST_CASE("solve then verify round trip for catalog problems") {
  const std::pair<const char*, std::string> cases[] = {
      {"neg_sign", kNegSign},
      {"zero", "domain.kind = interval\nnonlinearity.kind = zero\n"},
      {"constant", "domain.kind = interval\ndomain.n = 128\nnonlinearity.kind = constant\n"
                   "nonlinearity.a = 1\n"},
      {"heaviside", "domain.kind = disk\ndomain.refinement = 3\nnonlinearity.kind = heaviside\n"},
      {"step", "domain.kind = rectangle\nnonlinearity.kind = step\nnonlinearity.a = 2\n"
               "nonlinearity.b = -1\nnonlinearity.s0 = 0.1\n"},
      {"power", "domain.kind = interval\nnonlinearity.kind = power\nnonlinearity.c = -3\n"
                "nonlinearity.r = 3\n"},
      {"prescribed", "domain.kind = disk\ndomain.refinement = 3\nnonlinearity.kind = prescribed\n"
                     "nonlinearity.e = 2\n"},
      {"tiny", "domain.kind = interval\ndomain.n = 4\nnonlinearity.kind = neg_sign\n"},
  };
  for (const auto& [name, text] : cases) {
    const std::string problem = name;
    CAPTURE(problem);
    const auto dir = scratch(std::string("roundtrip_") + name);
    const auto cfg = write_file(dir / "run.cfg", text);
    CommandOptions o;
    Quiet q;
    o = q.opts();
    o.out = dir / "out";
    CHECK(cmd_solve(cfg, o) == kExitOk);
    CHECK(fs::exists(dir / "out" / "solution.csv"));
    CHECK(fs::exists(dir / "out" / "report.txt"));
    CHECK(fs::exists(dir / "out" / "solution.svg"));
    Quiet v;
    CHECK(cmd_verify(cfg, dir / "out" / "solution.csv", v.opts()) == kExitOk);
    CHECK(v.log.str().find("passed = true") != std::string::npos);
  }
}

TEST_CASE("neg_sign report") {
  const auto dir = scratch("report");
  const auto cfg = write_file(dir / "run.cfg", std::string(kNegSign) + "output.dir = result\n");
  Quiet q;
  REQUIRE(cmd_solve(cfg, q.opts()) == kExitOk);
  const std::string report = slurp(dir / "result" / "report.txt");
  CHECK(report.find("energy = -0.2955") != std::string::npos);
  CHECK(report.find("converged = true") != std::string::npos);
  CHECK(report.find("lower_bound = -3") != std::string::npos);
  CHECK(report.find("energy_trace = 0, ") != std::string::npos);
}

TEST_CASE("zero problem writes a zero field") {
  const auto dir = scratch("zero");
  const auto cfg = write_file(dir / "run.cfg",
                              "domain.kind = interval\nnonlinearity.kind = zero\n"
                              "output.dir = out\n");
  Quiet q;
  REQUIRE(cmd_solve(cfg, q.opts()) == kExitOk);
  const Mesh m = build_interval_mesh(-1.0, 1.0, 64);
  const auto t = read_solution_csv(m, dir / "out" / "solution.csv");
  CHECK(t.u.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(q.log.str().find("energy = 0\n") != std::string::npos);
}

TEST_CASE("verify rejects bad inputs") {
  const auto dir = scratch("verify_bad");
  const auto cfg = write_file(dir / "run.cfg",
                              "domain.kind = interval\ndomain.n = 8\nnonlinearity.kind = constant\n"
                              "nonlinearity.a = 1\n");
  const Mesh m = build_interval_mesh(-1.0, 1.0, 8);
  const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(9);
  write_solution_csv(m, Field::zero(m), Eigen::VectorXd::Ones(9), zeros, dir / "zero.csv");
  Quiet q;
  CHECK(cmd_verify(cfg, dir / "zero.csv", q.opts()) == kExitNotConverged);
  CHECK(q.log.str().find("max_inclusion_residual = 1\n") != std::string::npos);

  // Drop the last two rows.
  std::istringstream full(slurp(dir / "zero.csv"));
  std::ofstream cut(dir / "cut.csv");
  std::string line;
  for (int k = 0; k < 8 && std::getline(full, line); ++k) cut << line << '\n';
  cut.close();
  Quiet t;
  CHECK(cmd_verify(cfg, dir / "cut.csv", t.opts()) == kExitError);
  CHECK(t.err.str().find("rows") != std::string::npos);

  const auto other = write_file(dir / "other.cfg",
                                "domain.kind = interval\ndomain.n = 16\nnonlinearity.kind = zero\n");
  Quiet s;
  CHECK(cmd_verify(other, dir / "zero.csv", s.opts()) == kExitError);

  Quiet w;
  write_file(dir / "junk.csv", "node,x,u,zeta,residual\n0,abc,0,0,0\n");
  CHECK(cmd_verify(cfg, dir / "junk.csv", w.opts()) == kExitError);

  // Steeper than the light cone.
  Field steep = Field::zero(m);
  steep.values[4] = 2.0;
  steep.dirichlet_zero = false;
  write_solution_csv(m, steep, zeros, zeros, dir / "steep.csv");
  Quiet f;
  CHECK(cmd_verify(cfg, dir / "steep.csv", f.opts()) == kExitNotConverged);
  CHECK(f.log.str().find("in_K0 = false") != std::string::npos);
}

TEST_CASE("sweeps") {
  const auto dir = scratch("sweep");
  const auto cfg = write_file(dir / "run.cfg", std::string(kNegSign) + "output.svg = false\n");
  Quiet q;
  CommandOptions o = q.opts();
  o.out = dir / "rules";
  CHECK(cmd_sweep(cfg, "selection_rule", {"lo", "mid", "hi"}, o) == kExitOk);
  const std::string table = slurp(dir / "rules" / "sweep.csv");
  CHECK(table.rfind("value,energy,linf_error,outer_iterations,inner_iterations,converged\n", 0) == 0);
  for (const char* rule : {"lo,", "mid,", "hi,"}) CHECK(table.find(rule) != std::string::npos);
  CHECK(fs::exists(dir / "rules" / "selection_rule_mid" / "solution.csv"));

  Quiet e;
  CHECK(cmd_sweep(cfg, "n", {}, e.opts()) == kExitOk);
  Quiet u;
  CHECK(cmd_sweep(cfg, "colour", {"1"}, u.opts()) == kExitError);
  Quiet b;
  CHECK(cmd_sweep(cfg, "n", {"0"}, b.opts()) == kExitError);

  // Refinement study for a constant load: the error falls with every halving of h.
  const auto pcfg = write_file(dir / "p.cfg",
                               "domain.kind = interval\nnonlinearity.kind = prescribed\n"
                               "nonlinearity.e = 1\noutput.svg = false\n");
  Quiet p;
  CommandOptions po = p.opts();
  po.out = dir / "n";
  po.threads = 4;
  CHECK(cmd_sweep(pcfg, "n", {"32", "64", "128", "256"}, po) == kExitOk);
  std::istringstream rows(slurp(dir / "n" / "sweep.csv"));
  std::string row;
  std::getline(rows, row);
  double previous = 1e300;
  int count = 0;
  while (std::getline(rows, row)) {
    std::stringstream cells(row);
    std::string value, energy, err;
    std::getline(cells, value, ',');
    std::getline(cells, energy, ',');
    std::getline(cells, err, ',');
    const double e_now = std::stod(err);
    CHECK(e_now < 0.7 * previous);
    previous = e_now;
    ++count;
  }
  CHECK(count == 4);
}

TEST_CASE("repeated runs write identical CSV") {
  const auto dir = scratch("repeat");
  const auto cfg = write_file(dir / "run.cfg",
                              "domain.kind = disk\nnonlinearity.kind = step\nnonlinearity.a = 1\n"
                              "nonlinearity.b = -1\n");
  for (const char* sub : {"a", "b"}) {
    Quiet q;
    CommandOptions o = q.opts();
    o.out = dir / sub;
    o.seed = 42;
    REQUIRE(cmd_solve(cfg, o) != kExitError);
  }
  CHECK(slurp(dir / "a" / "solution.csv") == slurp(dir / "b" / "solution.csv"));
  CHECK(slurp(dir / "a" / "report.txt") == slurp(dir / "b" / "report.txt"));
}

TEST_CASE("mesh info") {
  const auto dir = scratch("mesh_info");
  const Mesh m = build_disk_mesh(1.0, 2);
  write_mesh(m, dir / "disk.mesh");
  Quiet q;
  CHECK(cmd_mesh_info(dir / "disk.mesh", q.opts()) == kExitOk);
  CHECK(q.log.str().find("nodes = " + std::to_string(m.num_nodes())) != std::string::npos);

  const auto cfg = write_file(dir / "run.cfg",
                              "domain.kind = file\ndomain.path = disk.mesh\nnonlinearity.kind = zero\n");
  Quiet c;
  CHECK(cmd_mesh_info(cfg, c.opts()) == kExitOk);
  CHECK(c.log.str() == q.log.str());

  Quiet s;
  CommandOptions so = s.opts();
  so.out = dir / "out";
  CHECK(cmd_solve(cfg, so) == kExitOk);

  Quiet bad;
  CHECK(cmd_mesh_info(dir / "absent.cfg", bad.opts()) == kExitError);
}
