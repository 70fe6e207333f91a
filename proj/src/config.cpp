#include "fmc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fmc/energy.hpp"

namespace fmc {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  if (used != v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  const double d = to_real(key, v);
  if (d != std::floor(d) || std::abs(d) > 1e9)
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return static_cast<int>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

const std::set<std::string> kCatalogParams{"a", "b", "s0", "c", "r"};

void assign(RunConfig& cfg, const std::string& key, const std::string& value,
            const std::filesystem::path& base_dir) {
  auto& d = cfg.domain;
  auto& s = cfg.solver;
  auto& v = cfg.verify;
  if (key == "domain.kind") {
    if (value == "interval") d.kind = DomainConfig::Kind::interval;
    else if (value == "rectangle") d.kind = DomainConfig::Kind::rectangle;
    else if (value == "disk") d.kind = DomainConfig::Kind::disk;
    else if (value == "file") d.kind = DomainConfig::Kind::file;
    else throw ConfigError(key + ": unknown domain kind '" + value + "'");
  } else if (key == "domain.a") d.a = to_real(key, value);
  else if (key == "domain.b") d.b = to_real(key, value);
  else if (key == "domain.n") d.n = to_int(key, value);
  else if (key == "domain.lx") d.lx = to_real(key, value);
  else if (key == "domain.ly") d.ly = to_real(key, value);
  else if (key == "domain.nx") d.nx = to_int(key, value);
  else if (key == "domain.ny") d.ny = to_int(key, value);
  else if (key == "domain.radius") d.radius = to_real(key, value);
  else if (key == "domain.refinement") d.refinement = to_int(key, value);
  else if (key == "domain.path") {
    std::filesystem::path p(value);
    d.path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  } else if (key == "nonlinearity.kind") cfg.nonlinearity.kind = value;
  else if (key == "nonlinearity.e") cfg.nonlinearity.e = to_real(key, value);
  else if (key.rfind("nonlinearity.", 0) == 0 &&
           kCatalogParams.count(key.substr(13)))
    cfg.nonlinearity.params[key.substr(13)] = to_real(key, value);
  else if (key == "solver.inner_tol") s.inner_tol = to_real(key, value);
  else if (key == "solver.outer_tol") s.outer_tol = to_real(key, value);
  else if (key == "solver.max_inner") s.max_inner = to_int(key, value);
  else if (key == "solver.max_outer") s.max_outer = to_int(key, value);
  else if (key == "solver.working_margin") s.working_margin = to_real(key, value);
  else if (key == "solver.damping") s.damping = to_real(key, value);
  else if (key == "solver.escape_window") s.escape_window = to_real(key, value);
  else if (key == "solver.stationarity_trials")
    s.stationarity_trials = static_cast<std::size_t>(std::max(0, to_int(key, value)));
  else if (key == "solver.selection_rule") {
    try {
      s.selection_rule = parse_selection_rule(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key + ": " + e.what());
    }
  } else if (key == "solver.initial") {
    if (value != "zero")
      throw ConfigError(key + ": only 'zero' is supported");
    s.initial.reset();
  } else if (key == "output.dir") {
    std::filesystem::path p(value);
    cfg.output_dir = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  } else if (key == "output.csv") cfg.emit_csv = to_bool(key, value);
  else if (key == "output.svg") cfg.emit_svg = to_bool(key, value);
  else if (key == "output.report") cfg.emit_report = to_bool(key, value);
  else if (key == "verify.trials")
    v.vi_trials = static_cast<std::size_t>(std::max(0, to_int(key, value)));
  else if (key == "verify.residual_tol") v.residual_tol = to_real(key, value);
  else if (key == "verify.vi_tol") v.vi_tol = to_real(key, value);
  else if (key == "verify.analytic_tol") v.analytic_tol = to_real(key, value);
  else if (key == "verify.bruteforce_tol") v.bruteforce_tol = to_real(key, value);
  else if (key == "verify.grid_step") v.grid_step = to_real(key, value);
  else if (key == "verify.brute_force") v.brute_force = to_bool(key, value);
  else if (key == "verify.tol_jump") v.residual.tol_jump = to_real(key, value);
  else if (key == "verify.bracket_slack") v.residual.bracket_slack = to_real(key, value);
  else throw ConfigError("unknown key '" + key + "'");
}

// Keys that only make sense for one domain kind.
const std::map<std::string, DomainConfig::Kind> kDomainKeys{
    {"domain.a", DomainConfig::Kind::interval},
    {"domain.b", DomainConfig::Kind::interval},
    {"domain.n", DomainConfig::Kind::interval},
    {"domain.lx", DomainConfig::Kind::rectangle},
    {"domain.ly", DomainConfig::Kind::rectangle},
    {"domain.nx", DomainConfig::Kind::rectangle},
    {"domain.ny", DomainConfig::Kind::rectangle},
    {"domain.radius", DomainConfig::Kind::disk},
    {"domain.refinement", DomainConfig::Kind::disk},
    {"domain.path", DomainConfig::Kind::file},
};

void validate(const RunConfig& cfg) {
  try {
    cfg.solver.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  try {
    (void)build_nonlinearity(cfg.nonlinearity);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("nonlinearity: ") + e.what());
  }
  if (cfg.domain.kind == DomainConfig::Kind::file) {
    if (cfg.domain.path.empty()) throw ConfigError("domain.path is required for file domains");
    if (!std::filesystem::exists(cfg.domain.path))
      throw ConfigError("mesh file not found: " + cfg.domain.path.string());
  }
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  std::map<std::string, std::size_t> seen;
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(number) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(number) +
                        ": expected 'key = value'");
    if (auto it = seen.find(key); it != seen.end())
      throw ConfigError("config line " + std::to_string(number) + ": key '" +
                        key + "' already set on line " +
                        std::to_string(it->second));
    seen.emplace(key, number);
    try {
      assign(cfg, key, value, base_dir);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(number) + ": " + e.what());
    }
  }
  if (!seen.count("domain.kind")) throw ConfigError("config: domain.kind is required");
  if (!seen.count("nonlinearity.kind"))
    throw ConfigError("config: nonlinearity.kind is required");
  for (const auto& [key, kind] : kDomainKeys)
    if (auto it = seen.find(key); it != seen.end() && kind != cfg.domain.kind)
      throw ConfigError("config line " + std::to_string(it->second) + ": '" +
                        key + "' does not apply to this domain kind");
  if (!seen.count("output.dir") && !base_dir.empty()) cfg.output_dir = base_dir / "out";
  if (cfg.nonlinearity.prescribed() && !seen.count("nonlinearity.e"))
    throw ConfigError("config: prescribed problems need nonlinearity.e");
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in, path.parent_path());
}

void apply_setting(RunConfig& config, const std::string& key,
                   const std::string& value) {
  assign(config, key, value, {});
  validate(config);
}

Mesh build_mesh(const DomainConfig& d) {
  switch (d.kind) {
    case DomainConfig::Kind::interval: return build_interval_mesh(d.a, d.b, d.n);
    case DomainConfig::Kind::rectangle:
      return build_rectangle_mesh(d.lx, d.ly, d.nx, d.ny);
    case DomainConfig::Kind::disk: return build_disk_mesh(d.radius, d.refinement);
    case DomainConfig::Kind::file: return read_mesh(d.path);
  }
  throw ConfigError("unknown domain kind");
}

Nonlinearity build_nonlinearity(const NonlinearityConfig& config) {
  if (config.prescribed()) return catalog::constant(config.e);
  return catalog::by_name(config.kind, config.params);
}

std::optional<std::function<double(const Point&)>> analytic_reference(
    const RunConfig& config, const Field& u) {
  std::optional<double> rhs;
  const auto& nl = config.nonlinearity;
  if (nl.prescribed()) rhs = nl.e;
  else if (nl.kind == "zero") rhs = 0.0;
  else if (nl.kind == "constant") rhs = nl.params.at("a");
  else if (nl.kind == "neg_sign") {
    // M(u) = -sign(u) reduces to a constant right-hand side when u keeps one
    // sign in the interior.
    const bool nonneg = (u.values.array() >= 0.0).all();
    const bool nonpos = (u.values.array() <= 0.0).all();
    if (nonneg && !nonpos) rhs = -1.0;
    else if (nonpos && !nonneg) rhs = 1.0;
    else if (nonneg && nonpos) rhs = 0.0;
  }
  if (!rhs) return std::nullopt;

  const auto& d = config.domain;
  if (d.kind == DomainConfig::Kind::interval) {
    const double centre = 0.5 * (d.a + d.b);
    const auto sol = analytic_radial(*rhs, 0.5 * (d.b - d.a), 1);
    return [sol, centre](const Point& x) { return sol(std::abs(x[0] - centre)); };
  }
  if (d.kind == DomainConfig::Kind::disk) {
    const auto sol = analytic_radial(*rhs, d.radius, 2);
    return [sol](const Point& x) { return sol.at(x); };
  }
  return std::nullopt;
}

}  // namespace fmc
