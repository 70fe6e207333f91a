#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fmc/config.hpp"
#include "fmc/solver.hpp"

namespace fmc {

/// Exit codes shared by all verbs.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotConverged = 2;

struct CommandOptions {
  /// Overrides output.dir from the config.
  std::optional<std::filesystem::path> out;
  std::uint64_t seed = 0;
  /// Concurrent runs in `sweep`.
  int threads = 1;
  std::ostream* log = nullptr;  // defaults to std::cout
  std::ostream* err = nullptr;  // defaults to std::cerr
};

/// Outcome of one configured solve, as written to disk by cmd_solve.
struct RunOutcome {
  SolveResult result;
  double psi = 0.0;
  double script_f = 0.0;
  EnergyBounds bounds;
  std::optional<double> analytic_linf_error;
  std::string failure;  // non-empty when the inner solver gave up
};

/// Builds mesh and spec, runs the solver and writes solution.csv,
/// report.txt and solution.svg into `out_dir` as enabled.
RunOutcome run_solve(const RunConfig& config, const std::filesystem::path& out_dir,
                     std::uint64_t seed);

int cmd_solve(const std::filesystem::path& config, const CommandOptions& opts);
int cmd_verify(const std::filesystem::path& config,
               const std::filesystem::path& solution_csv,
               const CommandOptions& opts);
int cmd_sweep(const std::filesystem::path& config, const std::string& parameter,
              const std::vector<std::string>& values, const CommandOptions& opts);
/// Mesh summary for the config's domain, or for a mesh file when `config`
/// has the mesh-file header.
int cmd_mesh_info(const std::filesystem::path& path, const CommandOptions& opts);

struct SolutionTable {
  std::vector<Point> coords;
  Eigen::VectorXd u;
  Eigen::VectorXd zeta;
};

/// Writes node, coordinates, u, zeta and residual columns with 17
/// significant digits.
void write_solution_csv(const Mesh& mesh, const Field& u,
                        const Eigen::VectorXd& zeta,
                        const Eigen::VectorXd& residual,
                        const std::filesystem::path& path);
/// Reads a solution table and checks it against the mesh; throws
/// std::runtime_error on malformed input or shape mismatch.
SolutionTable read_solution_csv(const Mesh& mesh, const std::filesystem::path& path);

}  // namespace fmc
