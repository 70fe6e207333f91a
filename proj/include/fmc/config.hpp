#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "fmc/mesh.hpp"
#include "fmc/nonlinearity.hpp"
#include "fmc/solver.hpp"
#include "fmc/verify.hpp"

namespace fmc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DomainConfig {
  enum class Kind { interval, rectangle, disk, file };
  Kind kind = Kind::interval;
  double a = -1.0, b = 1.0;
  int n = 64;
  double lx = 1.0, ly = 1.0;
  int nx = 8, ny = 8;
  double radius = 1.0;
  int refinement = 3;
  std::filesystem::path path;
};

struct NonlinearityConfig {
  /// Catalog name, or "prescribed" for a direct M(v) = e solve.
  std::string kind = "zero";
  std::map<std::string, double> params;
  double e = 0.0;

  bool prescribed() const { return kind == "prescribed"; }
};

/// A batch run, read from a flat `section.key = value` file.
struct RunConfig {
  DomainConfig domain;
  NonlinearityConfig nonlinearity;
  SolverOptions solver;
  VerifyOptions verify;
  /// Relative to the config file when read from disk.
  std::filesystem::path output_dir = "out";
  bool emit_csv = true;
  bool emit_svg = true;
  bool emit_report = true;
};

/// Parses a config. Relative paths are resolved against `base_dir`.
RunConfig parse_config(std::istream& in,
                       const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Applies one `key = value` assignment on top of a parsed config and
/// re-validates it.
void apply_setting(RunConfig& config, const std::string& key,
                   const std::string& value);

Mesh build_mesh(const DomainConfig& domain);
/// The spec used for energies and checks; `prescribed` maps to constant(e).
Nonlinearity build_nonlinearity(const NonlinearityConfig& config);

/// Closed-form solution for the configured problem when one is known:
/// constant right-hand sides on a centred interval or on a disk, and the
/// neg_sign problem when u has a single sign.
std::optional<std::function<double(const Point&)>> analytic_reference(
    const RunConfig& config, const Field& u);

}  // namespace fmc
