#include "fmc/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "fmc/energy.hpp"
#include "fmc/svg.hpp"
#include "fmc/verify.hpp"

namespace fmc {

namespace {

std::ostream& log_of(const CommandOptions& o) { return o.log ? *o.log : std::cout; }
std::ostream& err_of(const CommandOptions& o) { return o.err ? *o.err : std::cerr; }

std::string sci(double v) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(16) << v;
  return s.str();
}

const char* kCoordNames[] = {"x", "y", "z"};

void write_report(const RunConfig& config, const Mesh& mesh,
                  const RunOutcome& run, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const auto& r = run.result;
  out << std::setprecision(17);
  out << "problem = " << config.nonlinearity.kind << '\n';
  out << "selection_rule = " << to_string(config.solver.selection_rule) << '\n';
  out << "nodes = " << mesh.num_nodes() << '\n';
  out << "elements = " << mesh.num_elements() << '\n';
  out << "volume = " << mesh.volume() << '\n';
  out << "mesh_size = " << mesh.mesh_size() << '\n';
  out << "converged = " << (r.converged ? "true" : "false") << '\n';
  if (!run.failure.empty()) out << "failure = " << run.failure << '\n';
  out << "energy = " << r.energy_trace.back() << '\n';
  out << "psi = " << run.psi << '\n';
  out << "script_f = " << run.script_f << '\n';
  out << "outer_iterations = " << r.outer_iterations << '\n';
  out << "inner_iterations = " << r.inner_iterations << '\n';
  out << "stationarity = " << r.stationarity << '\n';
  out << "max_inclusion_residual = " << r.residual << '\n';
  out << "max_abs_u = " << r.u.values.lpNorm<Eigen::Infinity>() << '\n';
  out << "max_element_gradient = " << max_element_gradient_norm(mesh, r.u.values) << '\n';
  out << "c_omega = " << run.bounds.c_omega << '\n';
  out << "C1 = " << run.bounds.C1 << '\n';
  out << "C2 = " << run.bounds.C2 << '\n';
  out << "lower_bound = " << run.bounds.lower_bound << '\n';
  if (run.analytic_linf_error)
    out << "analytic_linf_error = " << *run.analytic_linf_error << '\n';
  out << "energy_trace =";
  for (std::size_t k = 0; k < r.energy_trace.size(); ++k)
    out << (k ? ", " : " ") << r.energy_trace[k];
  out << '\n';
}

std::filesystem::path output_dir(const RunConfig& cfg, const CommandOptions& o) {
  return o.out ? *o.out : cfg.output_dir;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& cell, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    throw std::runtime_error("solution line " + std::to_string(line) +
                             ": bad number '" + cell + "'");
  }
  if (used != cell.size())
    throw std::runtime_error("solution line " + std::to_string(line) +
                             ": bad number '" + cell + "'");
  return v;
}

}  // namespace

void write_solution_csv(const Mesh& mesh, const Field& u,
                        const Eigen::VectorXd& zeta,
                        const Eigen::VectorXd& residual,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "node";
  for (int c = 0; c < mesh.dim(); ++c) out << ',' << kCoordNames[c];
  out << ",u,zeta,residual\n";
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    out << i;
    for (int c = 0; c < mesh.dim(); ++c) out << ',' << sci(mesh.node(i)[c]);
    out << ',' << sci(u.values[idx]) << ',' << sci(zeta[idx]) << ','
        << sci(residual[idx]) << '\n';
  }
}

SolutionTable read_solution_csv(const Mesh& mesh, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open solution file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("solution file is empty");
  const auto header = split_csv(line);
  const std::size_t cols = static_cast<std::size_t>(mesh.dim()) + 4;
  if (header.size() != cols || header.front() != "node" ||
      header[cols - 3] != "u" || header[cols - 2] != "zeta")
    throw std::runtime_error("solution header does not match a " +
                             std::to_string(mesh.dim()) + "D mesh");

  SolutionTable t;
  const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
  t.u.resize(n);
  t.zeta.resize(n);
  std::size_t row = 0, number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != cols)
      throw std::runtime_error("solution line " + std::to_string(number) +
                               ": expected " + std::to_string(cols) + " columns");
    if (row >= mesh.num_nodes())
      throw std::runtime_error("solution has more rows than the mesh has nodes");
    if (parse_cell(cells[0], number) != static_cast<double>(row))
      throw std::runtime_error("solution line " + std::to_string(number) +
                               ": node index out of order");
    Point p{0.0, 0.0, 0.0};
    for (int c = 0; c < mesh.dim(); ++c) {
      p[c] = parse_cell(cells[1 + c], number);
      const double ref = mesh.node(row)[c];
      if (std::abs(p[c] - ref) > 1e-12 * (1.0 + std::abs(ref)))
        throw std::runtime_error("solution line " + std::to_string(number) +
                                 ": coordinates do not match the mesh");
    }
    t.coords.push_back(p);
    t.u[static_cast<Eigen::Index>(row)] = parse_cell(cells[cols - 3], number);
    t.zeta[static_cast<Eigen::Index>(row)] = parse_cell(cells[cols - 2], number);
    ++row;
  }
  if (row != mesh.num_nodes())
    throw std::runtime_error("solution has " + std::to_string(row) +
                             " rows but the mesh has " +
                             std::to_string(mesh.num_nodes()) + " nodes");
  return t;
}

RunOutcome run_solve(const RunConfig& config, const std::filesystem::path& out_dir,
                     std::uint64_t seed) {
  const Mesh mesh = build_mesh(config.domain);
  const Nonlinearity spec = build_nonlinearity(config.nonlinearity);
  SolverOptions opts = config.solver;
  opts.seed = seed;

  RunOutcome run;
  auto& r = run.result;
  try {
    if (config.nonlinearity.prescribed()) {
      const Eigen::VectorXd e = Eigen::VectorXd::Constant(
          static_cast<Eigen::Index>(mesh.num_nodes()), config.nonlinearity.e);
      auto sol = solve_prescribed(mesh, e, opts);
      r.u = std::move(sol.u);
      r.zeta = e;
      r.inner_iterations = sol.iterations;
      r.energy_trace.push_back(total_energy(mesh, r.u, spec));
      r.stationarity = stationarity_measure(mesh, r.u, spec,
                                            opts.stationarity_trials, seed);
      ResidualOptions ro;
      ro.margin = opts.working_margin;
      r.residual = inclusion_residual(mesh, r.u, spec, ro).lpNorm<Eigen::Infinity>();
      r.converged = true;
    } else {
      r = solve_inclusion(mesh, spec, opts);
    }
  } catch (const NonConvergence& e) {
    r.u = e.last_iterate();
    r.zeta = nodal_selection(mesh, r.u, spec, opts.selection_rule);
    r.energy_trace.push_back(total_energy(mesh, r.u, spec));
    r.residual = e.residual();
    r.converged = false;
    run.failure = e.what();
  }

  run.psi = psi(mesh, r.u);
  run.script_f = script_f(mesh, r.u, spec);
  run.bounds = bounds(mesh, spec);
  if (auto ref = analytic_reference(config, r.u)) {
    double err = 0.0;
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i)
      err = std::max(err, std::abs(r.u.values[static_cast<Eigen::Index>(i)] -
                                   (*ref)(mesh.node(i))));
    run.analytic_linf_error = err;
  }

  std::filesystem::create_directories(out_dir);
  if (config.emit_csv) {
    Eigen::VectorXd residual;
    ResidualOptions ro;
    ro.margin = opts.working_margin;
    try {
      residual = inclusion_residual(mesh, r.u, spec, ro);
    } catch (const MarginViolation&) {
      residual = Eigen::VectorXd::Constant(r.u.values.size(), std::nan(""));
    }
    write_solution_csv(mesh, r.u, r.zeta, residual, out_dir / "solution.csv");
  }
  if (config.emit_report) write_report(config, mesh, run, out_dir / "report.txt");
  if (config.emit_svg) write_svg(mesh, r.u, r.zeta, spec, out_dir / "solution.svg");
  return run;
}

int cmd_solve(const std::filesystem::path& config_path, const CommandOptions& opts) {
  auto& log = log_of(opts);
  auto& err = err_of(opts);
  RunConfig cfg;
  try {
    cfg = load_config(config_path);
    const auto dir = output_dir(cfg, opts);
    const RunOutcome run = run_solve(cfg, dir, opts.seed);
    const auto& r = run.result;
    log << std::setprecision(10);
    log << "converged = " << (r.converged ? "true" : "false") << '\n';
    log << "energy = " << r.energy_trace.back() << '\n';
    log << "outer_iterations = " << r.outer_iterations << '\n';
    log << "inner_iterations = " << r.inner_iterations << '\n';
    log << "stationarity = " << r.stationarity << '\n';
    log << "max_inclusion_residual = " << r.residual << '\n';
    log << "lower_bound = " << run.bounds.lower_bound << '\n';
    if (run.analytic_linf_error)
      log << "analytic_linf_error = " << *run.analytic_linf_error << '\n';
    if (!run.failure.empty()) err << "solver: " << run.failure << '\n';
    log << "output = " << dir.string() << '\n';
    return r.converged ? kExitOk : kExitNotConverged;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const MeshError& e) {
    err << "mesh error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitError;
}

int cmd_verify(const std::filesystem::path& config_path,
               const std::filesystem::path& solution_csv,
               const CommandOptions& opts) {
  auto& log = log_of(opts);
  auto& err = err_of(opts);
  RunConfig cfg;
  std::optional<Mesh> mesh;
  SolutionTable table;
  try {
    cfg = load_config(config_path);
    mesh = build_mesh(cfg.domain);
    table = read_solution_csv(*mesh, solution_csv);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }

  const Nonlinearity spec = build_nonlinearity(cfg.nonlinearity);
  const Field u{table.u, false};
  const Feasibility feas = feasibility(*mesh, u);
  if (!feas.in_K0) {
    log << "in_K0 = false\n";
    log << "max_element_gradient = " << feas.max_element_gradient_norm << '\n';
    log << "boundary_violation = " << feas.boundary_violation << '\n';
    log << "passed = false\n";
    return kExitNotConverged;
  }

  VerifyOptions vo = cfg.verify;
  vo.seed = opts.seed;
  vo.residual.margin = cfg.solver.working_margin;
  if (auto ref = analytic_reference(cfg, u)) vo.reference = *ref;
  try {
    const VerificationReport rep = verify_solution(*mesh, u, table.zeta, spec, vo);
    log << rep.to_text();
    return rep.passed() ? kExitOk : kExitNotConverged;
  } catch (const MarginViolation& e) {
    log << "strictly_feasible = false\n";
    log << "passed = false\n";
    err << "verify: " << e.what() << '\n';
    return kExitNotConverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

int cmd_sweep(const std::filesystem::path& config_path, const std::string& parameter,
              const std::vector<std::string>& values, const CommandOptions& opts) {
  auto& log = log_of(opts);
  auto& err = err_of(opts);
  static const std::map<std::string, std::string> kKeys{
      {"n", "domain.n"},
      {"refinement", "domain.refinement"},
      {"selection_rule", "solver.selection_rule"},
      {"outer_tol", "solver.outer_tol"}};
  const auto key = kKeys.find(parameter);
  if (key == kKeys.end()) {
    err << "error: unknown sweep parameter '" << parameter
        << "' (expected n, refinement, selection_rule or outer_tol)\n";
    return kExitError;
  }
  if (values.empty()) return kExitOk;

  std::vector<RunConfig> configs;
  std::filesystem::path root;
  try {
    const RunConfig base = load_config(config_path);
    root = output_dir(base, opts);
    for (const auto& v : values) {
      RunConfig c = base;
      apply_setting(c, key->second, v);
      configs.push_back(std::move(c));
    }
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitError;
  }

  std::vector<std::optional<RunOutcome>> outcomes(values.size());
  std::vector<std::string> errors(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < values.size();) {
      try {
        outcomes[k] = run_solve(configs[k], root / (parameter + "_" + values[k]),
                                opts.seed);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  const int threads = std::clamp(opts.threads, 1, static_cast<int>(values.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::filesystem::create_directories(root);
  std::ofstream out(root / "sweep.csv");
  out << "value,energy,linf_error,outer_iterations,inner_iterations,converged\n";
  int code = kExitOk;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!outcomes[k]) {
      err << "run " << parameter << "=" << values[k] << " failed: " << errors[k] << '\n';
      code = kExitError;
      continue;
    }
    const auto& r = outcomes[k]->result;
    out << values[k] << ',' << sci(r.energy_trace.back()) << ',';
    if (outcomes[k]->analytic_linf_error) out << sci(*outcomes[k]->analytic_linf_error);
    out << ',' << r.outer_iterations << ',' << r.inner_iterations << ','
        << (r.converged ? "true" : "false") << '\n';
    log << parameter << " = " << values[k] << "  energy = " << std::setprecision(10)
        << r.energy_trace.back();
    if (outcomes[k]->analytic_linf_error)
      log << "  linf_error = " << *outcomes[k]->analytic_linf_error;
    log << "  converged = " << (r.converged ? "true" : "false") << '\n';
    if (!r.converged && code == kExitOk) code = kExitNotConverged;
  }
  return code;
}

int cmd_mesh_info(const std::filesystem::path& path, const CommandOptions& opts) {
  auto& log = log_of(opts);
  auto& err = err_of(opts);
  try {
    std::ifstream probe(path);
    if (!probe) throw std::runtime_error("cannot open " + path.string());
    std::string first;
    // A mesh file starts with its `dim` header; anything else is a config.
    for (std::string line; std::getline(probe, line);) {
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      std::istringstream ss(line);
      if (ss >> first) break;
    }
    const Mesh mesh = first == "dim" ? read_mesh(path) : build_mesh(load_config(path).domain);
    log << std::setprecision(12);
    log << "dim = " << mesh.dim() << '\n';
    log << "nodes = " << mesh.num_nodes() << '\n';
    log << "elements = " << mesh.num_elements() << '\n';
    log << "boundary_nodes = " << mesh.boundary_nodes().size() << '\n';
    log << "interior_nodes = " << mesh.interior_nodes().size() << '\n';
    log << "volume = " << mesh.volume() << '\n';
    log << "mesh_size = " << mesh.mesh_size() << '\n';
    log << "inradius = " << inradius(mesh) << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace fmc
