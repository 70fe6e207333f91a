#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fmc/commands.hpp"
#include "fmc/energy.hpp"
#include "fmc/sampling.hpp"
#include "fmc/solver.hpp"
#include "fmc/verify.hpp"

namespace py = pybind11;
using namespace fmc;

namespace {

Field as_field(const Mesh& mesh, const Eigen::VectorXd& values) {
  Field f{values, false};
  check_field(mesh, f);
  return f;
}

Eigen::MatrixXd node_matrix(const Mesh& m) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m.num_nodes()), m.dim());
  for (std::size_t i = 0; i < m.num_nodes(); ++i)
    for (int c = 0; c < m.dim(); ++c) out(static_cast<Eigen::Index>(i), c) = m.node(i)[c];
  return out;
}

Eigen::MatrixXi element_matrix(const Mesh& m) {
  Eigen::MatrixXi out(static_cast<Eigen::Index>(m.num_elements()), m.dim() + 1);
  for (std::size_t e = 0; e < m.num_elements(); ++e)
    for (int k = 0; k <= m.dim(); ++k) out(static_cast<Eigen::Index>(e), k) = m.element(e)[k];
  return out;
}

Mesh mesh_from_arrays(int dim, const Eigen::MatrixXd& nodes, const Eigen::MatrixXi& elements,
                      const std::vector<int>& boundary) {
  if (nodes.cols() != dim || elements.cols() != dim + 1)
    throw MeshError("nodes need dim columns and elements dim + 1 columns");
  std::vector<Point> pts(static_cast<std::size_t>(nodes.rows()), Point{0.0, 0.0, 0.0});
  for (Eigen::Index i = 0; i < nodes.rows(); ++i)
    for (int c = 0; c < dim; ++c) pts[static_cast<std::size_t>(i)][c] = nodes(i, c);
  std::vector<Simplex> simp(static_cast<std::size_t>(elements.rows()), Simplex{-1, -1, -1, -1});
  for (Eigen::Index e = 0; e < elements.rows(); ++e)
    for (int k = 0; k <= dim; ++k) simp[static_cast<std::size_t>(e)][k] = elements(e, k);
  return Mesh::from_arrays(dim, pts, simp, boundary);
}

SolverOptions solver_options(const py::kwargs& kw) {
  SolverOptions o;
  for (auto item : kw) {
    const auto key = item.first.cast<std::string>();
    const py::handle v = item.second;
    if (key == "inner_tol") o.inner_tol = v.cast<double>();
    else if (key == "outer_tol") o.outer_tol = v.cast<double>();
    else if (key == "max_inner") o.max_inner = v.cast<int>();
    else if (key == "max_outer") o.max_outer = v.cast<int>();
    else if (key == "working_margin") o.working_margin = v.cast<double>();
    else if (key == "damping") o.damping = v.cast<double>();
    else if (key == "escape_window") o.escape_window = v.cast<double>();
    else if (key == "stationarity_trials") o.stationarity_trials = v.cast<std::size_t>();
    else if (key == "seed") o.seed = v.cast<std::uint64_t>();
    else if (key == "selection_rule") o.selection_rule = parse_selection_rule(v.cast<std::string>());
    else if (key == "initial") o.initial = Field{v.cast<Eigen::VectorXd>(), true};
    else if (key == "on_iterate") {
      auto fn = v.cast<py::function>();
      o.on_iterate = [fn](const IterateEvent& ev) {
        fn(ev.stage == IterateStage::inner ? "inner" : "outer", ev.index, ev.field.values);
      };
    } else {
      throw py::type_error("unknown solver option '" + key + "'");
    }
  }
  return o;
}

Eigen::VectorXd rhs_vector(const Mesh& mesh, const py::object& e) {
  if (py::isinstance<py::float_>(e) || py::isinstance<py::int_>(e))
    return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(mesh.num_nodes()), e.cast<double>());
  return e.cast<Eigen::VectorXd>();
}

py::dict report_dict(const VerificationReport& r) {
  py::dict d;
  d["max_inclusion_residual"] = r.max_inclusion_residual;
  d["vi_min_slack"] = r.vi_min_slack;
  d["analytic_linf_error"] = r.analytic_linf_error;
  d["bruteforce_gap"] = r.bruteforce_gap;
  d["residual_passed"] = r.residual_passed;
  d["vi_passed"] = r.vi_passed;
  d["analytic_passed"] = r.analytic_passed;
  d["bruteforce_passed"] = r.bruteforce_passed;
  d["passed"] = r.passed();
  return d;
}

}  // namespace

PYBIND11_MODULE(_fmc, m) {
  m.doc() = "Filippov solutions of the Dirichlet problem for the Minkowski mean-curvature operator";

  py::register_exception<MeshError>(m, "MeshError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<MarginViolation>(m, "MarginViolation", PyExc_ArithmeticError);
  py::register_exception<NonConvergence>(m, "NonConvergence", PyExc_RuntimeError);

  py::class_<Mesh>(m, "Mesh")
      .def_static("from_arrays", &mesh_from_arrays, py::arg("dim"), py::arg("nodes"),
                  py::arg("elements"), py::arg("boundary"))
      .def_property_readonly("dim", &Mesh::dim)
      .def_property_readonly("num_nodes", &Mesh::num_nodes)
      .def_property_readonly("num_elements", &Mesh::num_elements)
      .def_property_readonly("nodes", &node_matrix)
      .def_property_readonly("elements", &element_matrix)
      .def_property_readonly("boundary_nodes", &Mesh::boundary_nodes)
      .def_property_readonly("interior_nodes", &Mesh::interior_nodes)
      .def_property_readonly("node_weights", &Mesh::node_weights)
      .def_property_readonly("volume", &Mesh::volume)
      .def_property_readonly("mesh_size", &Mesh::mesh_size)
      .def_property_readonly("inradius", [](const Mesh& mesh) { return inradius(mesh); })
      .def("write", [](const Mesh& mesh, const std::filesystem::path& p) { write_mesh(mesh, p); })
      .def("__repr__", [](const Mesh& mesh) {
        return "<Mesh dim=" + std::to_string(mesh.dim()) + " nodes=" +
               std::to_string(mesh.num_nodes()) + " elements=" +
               std::to_string(mesh.num_elements()) + ">";
      });

  m.def("interval_mesh", &build_interval_mesh, py::arg("a"), py::arg("b"), py::arg("n"));
  m.def("rectangle_mesh", &build_rectangle_mesh, py::arg("lx"), py::arg("ly"), py::arg("nx"),
        py::arg("ny"));
  m.def("disk_mesh", &build_disk_mesh, py::arg("radius"), py::arg("refinement"));
  m.def("read_mesh", py::overload_cast<const std::filesystem::path&>(&read_mesh));

  py::class_<Nonlinearity>(m, "Nonlinearity")
      .def_static("catalog", &catalog::by_name, py::arg("name"),
                  py::arg("params") = std::map<std::string, double>{})
      .def_static("black_box",
                  [](std::string name, std::function<double(double, double, double, double)> f,
                     double C, double q) {
                    return Nonlinearity::black_box(
                        std::move(name),
                        [f](const Point& x, double s) { return f(x[0], x[1], x[2], s); }, C, q);
                  },
                  py::arg("name"), py::arg("f"), py::arg("C"), py::arg("q"),
                  "f(x, y, z, s); envelopes are estimated by sampling")
      .def_property_readonly("name", &Nonlinearity::name)
      .def_property_readonly("growth_C", &Nonlinearity::growth_C)
      .def_property_readonly("growth_q", &Nonlinearity::growth_q)
      .def_property_readonly("has_jump_metadata", &Nonlinearity::has_jump_metadata)
      .def("__call__", [](const Nonlinearity& f, double s, double x, double y, double z) {
        return f.evaluate(Point{x, y, z}, s);
      }, py::arg("s"), py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("z") = 0.0)
      .def("envelope", [](const Nonlinearity& f, double s, double x, double y, double z) {
        const Bracket b = envelope(f, Point{x, y, z}, s);
        return py::make_tuple(b.lo, b.hi);
      }, py::arg("s"), py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("z") = 0.0)
      .def("primitive", [](const Nonlinearity& f, double s, double x, double y, double z) {
        return primitive(f, Point{x, y, z}, s);
      }, py::arg("s"), py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("z") = 0.0)
      .def("selection", [](const Nonlinearity& f, double s, const std::string& rule, double x,
                           double y, double z) {
        return selection(f, Point{x, y, z}, s, parse_selection_rule(rule));
      }, py::arg("s"), py::arg("rule") = "mid", py::arg("x") = 0.0, py::arg("y") = 0.0,
         py::arg("z") = 0.0);

  m.def("psi", [](const Mesh& mesh, const Eigen::VectorXd& v) { return psi(mesh, as_field(mesh, v)); });
  m.def("psi_gradient", [](const Mesh& mesh, const Eigen::VectorXd& v, double margin) {
    return psi_gradient(mesh, as_field(mesh, v), margin);
  }, py::arg("mesh"), py::arg("v"), py::arg("margin") = kDefaultGradientMargin);
  m.def("script_f", [](const Mesh& mesh, const Eigen::VectorXd& v, const Nonlinearity& f) {
    return script_f(mesh, as_field(mesh, v), f);
  });
  m.def("total_energy", [](const Mesh& mesh, const Eigen::VectorXd& v, const Nonlinearity& f) {
    return total_energy(mesh, as_field(mesh, v), f);
  });
  m.def("max_element_gradient", &max_element_gradient_norm);
  m.def("feasible", [](const Mesh& mesh, const Eigen::VectorXd& v) {
    return feasibility(mesh, as_field(mesh, v)).in_K0;
  });
  m.def("bounds", [](const Mesh& mesh, const Nonlinearity& f) {
    const auto b = bounds(mesh, f);
    py::dict d;
    d["c_omega"] = b.c_omega;
    d["C1"] = b.C1;
    d["C2"] = b.C2;
    d["lower_bound"] = b.lower_bound;
    return d;
  });

  py::class_<SolveResult>(m, "SolveResult")
      .def_property_readonly("u", [](const SolveResult& r) { return r.u.values; })
      .def_readonly("zeta", &SolveResult::zeta)
      .def_readonly("inner_iterations", &SolveResult::inner_iterations)
      .def_readonly("outer_iterations", &SolveResult::outer_iterations)
      .def_readonly("energy_trace", &SolveResult::energy_trace)
      .def_readonly("stationarity", &SolveResult::stationarity)
      .def_readonly("converged", &SolveResult::converged)
      .def_readonly("residual", &SolveResult::residual)
      .def_property_readonly("energy", [](const SolveResult& r) { return r.energy_trace.back(); });

  m.def("solve_prescribed", [](const Mesh& mesh, const py::object& e, const py::kwargs& kw) {
    const auto sol = solve_prescribed(mesh, rhs_vector(mesh, e), solver_options(kw));
    return py::make_tuple(sol.u.values, sol.iterations, sol.residual);
  }, py::arg("mesh"), py::arg("e"),
        "Returns (u, newton_iterations, residual). Keyword arguments are solver options.");
  m.def("solve_inclusion", [](const Mesh& mesh, const Nonlinearity& f, const py::kwargs& kw) {
    return solve_inclusion(mesh, f, solver_options(kw));
  }, py::arg("mesh"), py::arg("spec"));
  m.def("stationarity_measure", [](const Mesh& mesh, const Eigen::VectorXd& u,
                                   const Nonlinearity& f, std::size_t trials, std::uint64_t seed) {
    return stationarity_measure(mesh, as_field(mesh, u), f, trials, seed);
  }, py::arg("mesh"), py::arg("u"), py::arg("spec"), py::arg("trials") = 100, py::arg("seed") = 0);

  m.def("inclusion_residual", [](const Mesh& mesh, const Eigen::VectorXd& u,
                                 const Nonlinearity& f, std::optional<double> tol_jump) {
    ResidualOptions o;
    o.tol_jump = tol_jump;
    return inclusion_residual(mesh, as_field(mesh, u), f, o);
  }, py::arg("mesh"), py::arg("u"), py::arg("spec"), py::arg("tol_jump") = py::none());
  m.def("variational_inequality_check",
        [](const Mesh& mesh, const Eigen::VectorXd& u, const Eigen::VectorXd& zeta,
           std::size_t trials, std::uint64_t seed) {
          return variational_inequality_check(mesh, as_field(mesh, u), zeta, trials, seed);
        },
        py::arg("mesh"), py::arg("u"), py::arg("zeta"), py::arg("trials") = 200,
        py::arg("seed") = 0);
  m.def("analytic_radial", [](double a, double R, int N) {
    const auto s = analytic_radial(a, R, N);
    return py::cpp_function([s](double r) { return s(r); });
  }, py::arg("a"), py::arg("R"), py::arg("N"), "Returns u(r) for M(u) = a on the ball of radius R.");
  m.def("brute_force_minimize", [](const Mesh& mesh, const Nonlinearity& f, double step) {
    const auto r = brute_force_minimize(mesh, f, step);
    return py::make_tuple(r.u.values, r.energy);
  }, py::arg("mesh"), py::arg("spec"), py::arg("grid_step") = 0.01);
  m.def("verify_solution", [](const Mesh& mesh, const Eigen::VectorXd& u,
                              const Eigen::VectorXd& zeta, const Nonlinearity& f,
                              std::size_t trials, std::uint64_t seed) {
    VerifyOptions o;
    o.vi_trials = trials;
    o.seed = seed;
    return report_dict(verify_solution(mesh, as_field(mesh, u), zeta, f, o));
  }, py::arg("mesh"), py::arg("u"), py::arg("zeta"), py::arg("spec"), py::arg("trials") = 200,
        py::arg("seed") = 0);

  m.def("run_config", [](const std::filesystem::path& config,
                         std::optional<std::filesystem::path> out, std::uint64_t seed) {
    const RunConfig cfg = load_config(config);
    const RunOutcome run = run_solve(cfg, out ? *out : cfg.output_dir, seed);
    py::dict d;
    d["converged"] = run.result.converged;
    d["energy"] = run.result.energy_trace.back();
    d["outer_iterations"] = run.result.outer_iterations;
    d["analytic_linf_error"] = run.analytic_linf_error;
    d["u"] = run.result.u.values;
    return d;
  }, py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = 0,
        "Runs a config file like `fmc solve` and returns a summary.");
}
