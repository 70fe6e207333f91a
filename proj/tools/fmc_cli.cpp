// fmc: batch front end for the Minkowski mean-curvature inclusion solver.
//
//   fmc solve     --config run.cfg [--out dir] [--seed n]
//   fmc verify    --config run.cfg --solution out/solution.csv [--seed n]
//   fmc sweep     --config run.cfg --param n --values 32,64,128 [--threads n]
//   fmc mesh-info --config run.cfg | --mesh mesh.txt

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fmc/commands.hpp"

namespace {

std::vector<std::string> split_values(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  for (std::string v; std::getline(ss, v, ',');)
    if (!v.empty()) out.push_back(v);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Filippov solutions of the Dirichlet problem for the Minkowski "
               "mean-curvature operator"};
  app.require_subcommand(1);

  std::string config, out, solution, param, values, mesh;
  std::uint64_t seed = 0;
  int threads = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out, "Output directory (overrides output.dir)");
    sub->add_option("--seed", seed, "Seed for random trial fields");
    sub->add_option("--threads", threads, "Concurrent runs")->check(CLI::PositiveNumber);
  };

  auto* solve = app.add_subcommand("solve", "Solve the configured problem");
  solve->add_option("--config", config, "Run configuration")->required();
  add_common(solve);

  auto* verify = app.add_subcommand("verify", "Check a solution against its config");
  verify->add_option("--config", config, "Run configuration")->required();
  verify->add_option("--solution", solution, "solution.csv from a solve")->required();
  add_common(verify);

  auto* sweep = app.add_subcommand("sweep", "Repeat a solve over parameter values");
  sweep->add_option("--config", config, "Run configuration")->required();
  sweep->add_option("--param", param, "n, refinement, selection_rule or outer_tol")
      ->required();
  sweep->add_option("--values", values, "Comma-separated values");
  add_common(sweep);

  auto* info = app.add_subcommand("mesh-info", "Summarise a mesh");
  auto* info_cfg = info->add_option("--config", config, "Run configuration");
  auto* info_mesh = info->add_option("--mesh", mesh, "Mesh file");
  info_cfg->excludes(info_mesh);
  add_common(info);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fmc::kExitError;
  }

  fmc::CommandOptions opts;
  if (!out.empty()) opts.out = out;
  opts.seed = seed;
  opts.threads = threads;

  if (solve->parsed()) return fmc::cmd_solve(config, opts);
  if (verify->parsed()) return fmc::cmd_verify(config, solution, opts);
  if (sweep->parsed()) return fmc::cmd_sweep(config, param, split_values(values), opts);
  if (info->parsed()) {
    if (config.empty() && mesh.empty()) {
      std::cerr << "mesh-info needs --config or --mesh\n";
      return fmc::kExitError;
    }
    return fmc::cmd_mesh_info(mesh.empty() ? config : mesh, opts);
  }
  return fmc::kExitError;
}
