#include "fmc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/SparseCholesky>

#include "fmc/energy.hpp"
#include "fmc/sampling.hpp"
#include "fmc/verify.hpp"

namespace fmc {

void SolverOptions::validate() const {
  if (!(inner_tol > 0.0) || !(outer_tol > 0.0))
    throw std::invalid_argument("solver tolerances must be positive");
  if (max_inner < 1 || max_outer < 1)
    throw std::invalid_argument("solver iteration caps must be >= 1");
  if (!(damping > 0.0 && damping < 1.0))
    throw std::invalid_argument("damping must lie in (0, 1)");
  if (!(working_margin > 0.0 && working_margin < 0.5))
    throw std::invalid_argument("working margin must lie in (0, 0.5)");
  if (!(escape_window >= 0.0))
    throw std::invalid_argument("escape window must be >= 0");
}

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kMinStep = 1e-20;
// Energy increase tolerated before the segment safeguard kicks in.
constexpr double kEnergySlack = 1e-12;

void notify(const SolverOptions& opts, IterateStage stage, std::size_t index,
            const Field& f) {
  if (opts.on_iterate) opts.on_iterate(IterateEvent{stage, index, f});
}

Field starting_field(const Mesh& mesh, const SolverOptions& opts) {
  if (!opts.initial) return Field::zero(mesh);
  Field f = *opts.initial;
  check_field(mesh, f);
  for (int b : mesh.boundary_nodes())
    if (f.values[b] != 0.0)
      throw std::invalid_argument("initial field must vanish on the boundary");
  f.dirichlet_zero = true;
  const double g = max_element_gradient_norm(mesh, f.values);
  if (!(g <= 1.0 - opts.working_margin))
    throw std::invalid_argument(
        "initial field is not strictly feasible (max element gradient " +
        std::to_string(g) + ")");
  return f;
}

}  // namespace

PrescribedSolution solve_prescribed(const Mesh& mesh, const Eigen::VectorXd& e,
                                    const SolverOptions& opts) {
  opts.validate();
  if (static_cast<std::size_t>(e.size()) != mesh.num_nodes())
    throw std::invalid_argument("right-hand side has " +
                                std::to_string(e.size()) + " values for " +
                                std::to_string(mesh.num_nodes()) + " nodes");
  if (!e.allFinite())
    throw std::invalid_argument("right-hand side has non-finite values");

  const auto& interior = mesh.interior_nodes();
  const auto n = interior.size();
  std::vector<int> dof_of(mesh.num_nodes(), -1);
  for (std::size_t k = 0; k < n; ++k) dof_of[interior[k]] = static_cast<int>(k);

  PrescribedSolution out{starting_field(mesh, opts), 0, 0.0};
  Field& w = out.u;
  if (n == 0) {
    notify(opts, IterateStage::inner, 0, w);
    return out;
  }

  const Eigen::VectorXd load = mesh.node_weights().cwiseProduct(e);
  auto interior_residual = [&](const Field& f) {
    const Eigen::VectorXd full =
        psi_gradient(mesh, f, opts.working_margin) + load;
    Eigen::VectorXd r(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) r[static_cast<Eigen::Index>(k)] = full[interior[k]];
    return r;
  };

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool analyzed = false;
  const double limit = 1.0 - opts.working_margin;

  for (int it = 0;; ++it) {
    const Eigen::VectorXd r = interior_residual(w);
    if (!r.allFinite())
      throw NumericalError("NaN in the Newton residual at iteration " +
                           std::to_string(it));
    out.residual = r.lpNorm<Eigen::Infinity>();
    out.iterations = static_cast<std::size_t>(it);
    notify(opts, IterateStage::inner, out.iterations, w);
    if (out.residual <= opts.inner_tol) return out;
    if (it >= opts.max_inner)
      throw NonConvergence("Newton solve did not reach tolerance in " +
                               std::to_string(opts.max_inner) + " iterations",
                           w, out.residual);

    const auto hess = psi_hessian(mesh, w, dof_of, n, opts.working_margin);
    if (!analyzed) {
      ldlt.analyzePattern(hess);
      analyzed = true;
    }
    ldlt.factorize(hess);
    if (ldlt.info() != Eigen::Success)
      throw NumericalError("Hessian factorization failed at iteration " +
                           std::to_string(it));
    const Eigen::VectorXd step = ldlt.solve(-r);
    if (!step.allFinite())
      throw NumericalError("NaN in the Newton direction at iteration " +
                           std::to_string(it));

    Eigen::VectorXd full_step = Eigen::VectorXd::Zero(w.values.size());
    for (std::size_t k = 0; k < n; ++k) full_step[interior[k]] = step[static_cast<Eigen::Index>(k)];
    const double slope = r.dot(step);

    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd trial;
    while (t >= kMinStep) {
      trial = w.values + t * full_step;
      if (max_element_gradient_norm(mesh, trial) <= limit) {
        const double change = psi_difference(mesh, w.values, trial) +
                              t * load.dot(full_step);
        if (change <= kArmijo * t * slope) {
          accepted = true;
          break;
        }
      }
      t *= opts.damping;
    }
    if (!accepted)
      throw NonConvergence("line search stalled at iteration " +
                               std::to_string(it),
                           w, out.residual);
    w.values = trial;
  }
}

Eigen::VectorXd nodal_selection(const Mesh& mesh, const Field& u,
                                const Nonlinearity& spec, SelectionRule rule) {
  check_field(mesh, u);
  Eigen::VectorXd z(u.values.size());
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    z[idx] = selection(spec, mesh.node(i), u.values[idx], rule);
  }
  return z;
}

double stationarity_measure(const Mesh& mesh, const Field& u,
                            const Nonlinearity& spec, std::size_t trials,
                            std::uint64_t seed) {
  check_field(mesh, u);
  const auto nn = static_cast<Eigen::Index>(mesh.num_nodes());
  Eigen::VectorXd lo(nn), hi(nn);
  for (Eigen::Index i = 0; i < nn; ++i) {
    const Bracket b = envelope(spec, mesh.node(static_cast<std::size_t>(i)), u.values[i]);
    lo[i] = b.lo;
    hi[i] = b.hi;
  }
  const auto& w = mesh.node_weights();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> exponent(-4.0, 0.0);
  double eps = 0.0;
  for (std::size_t k = 0; k < trials; ++k) {
    const Field bump = random_bump(mesh, rng);
    const double lambda = std::pow(10.0, exponent(rng));
    const Eigen::VectorXd d = lambda * (bump.values - u.values);
    const double dist = d.lpNorm<Eigen::Infinity>();
    if (!(dist > 0.0)) continue;
    // Lumped G0(u; d): each node contributes max over its bracket ends.
    double g0 = 0.0;
    for (Eigen::Index i = 0; i < nn; ++i)
      g0 += w[i] * std::max(lo[i] * d[i], hi[i] * d[i]);
    const double dpsi = psi_difference(mesh, u.values, u.values + d);
    if (!std::isfinite(dpsi)) continue;
    eps = std::max(eps, -(g0 + dpsi) / dist);
  }
  return eps;
}

namespace {

struct SegmentStep {
  Field u;
  double energy;
  bool full;  // the whole candidate was taken
};

// Best point of {u + lambda (cand - u) : lambda = 1, 1/2, 1/4, ...} when the
// full step raises the energy; u itself when nothing improves.
SegmentStep segment_search(const Mesh& mesh, const Nonlinearity& spec,
                           const Field& u, double energy, const Field& cand) {
  const double e_full = total_energy(mesh, cand, spec);
  if (e_full <= energy + kEnergySlack) return {cand, e_full, true};
  SegmentStep best{u, energy, false};
  double lambda = 1.0;
  for (int k = 1; k <= 40; ++k) {
    lambda *= 0.5;
    Field v = u;
    v.values += lambda * (cand.values - u.values);
    const double ev = total_energy(mesh, v, spec);
    if (ev < best.energy) best = {std::move(v), ev, false};
  }
  return best;
}

bool same_on_interior(const Mesh& mesh, const Eigen::VectorXd& a,
                      const Eigen::VectorXd& b) {
  if (a.size() != b.size()) return false;
  for (int i : mesh.interior_nodes())
    if (a[i] != b[i]) return false;
  return true;
}

}  // namespace

SolveResult solve_inclusion(const Mesh& mesh, const Nonlinearity& spec,
                            const SolverOptions& opts) {
  opts.validate();
  SolveResult res;
  Field u = starting_field(mesh, opts);
  double energy = total_energy(mesh, u, spec);
  res.energy_trace.push_back(energy);
  notify(opts, IterateStage::outer, 0, u);

  SolverOptions inner = opts;
  auto prescribed = [&](const Eigen::VectorXd& zeta) {
    inner.initial = u;
    auto sol = solve_prescribed(mesh, zeta, inner);
    res.inner_iterations += sol.iterations;
    return std::move(sol.u);
  };

  // Retry the prescribed solve with every near-jump node pinned to one end of
  // its bracket; keeps the better of the two ends if it lowers the energy.
  auto escape = [&]() -> std::optional<std::pair<SegmentStep, Eigen::VectorXd>> {
    std::optional<std::pair<SegmentStep, Eigen::VectorXd>> best;
    for (SelectionRule end : {SelectionRule::lower, SelectionRule::upper}) {
      Eigen::VectorXd zeta = nodal_selection(mesh, u, spec, opts.selection_rule);
      bool any = false;
      for (int i : mesh.interior_nodes()) {
        const Point& x = mesh.node(static_cast<std::size_t>(i));
        for (const auto& j : spec.jumps()) {
          if (std::abs(u.values[i] - j.level(x)) > opts.escape_window) continue;
          const double a = j.below(x), b = j.above(x);
          zeta[i] = end == SelectionRule::lower ? std::min(a, b) : std::max(a, b);
          any = true;
          break;
        }
      }
      if (!any) return best;
      ++res.outer_iterations;
      Field cand = prescribed(zeta);
      SegmentStep step = segment_search(mesh, spec, u, energy, cand);
      if (step.energy < energy - kEnergySlack &&
          (!best || step.energy < best->first.energy))
        best.emplace(std::move(step), std::move(zeta));
    }
    return best;
  };

  Eigen::VectorXd last_zeta;
  bool u_solves_last = false;  // u == solve_prescribed(last_zeta)
  bool fixed = false;
  while (static_cast<int>(res.outer_iterations) < opts.max_outer) {
    Eigen::VectorXd zeta = nodal_selection(mesh, u, spec, opts.selection_rule);
    if (u_solves_last && same_on_interior(mesh, zeta, last_zeta)) {
      fixed = true;
      break;
    }
    ++res.outer_iterations;
    SegmentStep step = segment_search(mesh, spec, u, energy, prescribed(zeta));
    const double delta = (step.u.values - u.values).lpNorm<Eigen::Infinity>();
    u = std::move(step.u);
    energy = step.energy;
    u_solves_last = step.full;
    last_zeta = std::move(zeta);
    res.energy_trace.push_back(energy);
    notify(opts, IterateStage::outer, res.outer_iterations, u);

    if (delta <= opts.outer_tol) {
      if (static_cast<int>(res.outer_iterations) >= opts.max_outer) {
        fixed = true;
        break;
      }
      auto jumped = escape();
      if (!jumped) {
        fixed = true;
        break;
      }
      u = std::move(jumped->first.u);
      energy = jumped->first.energy;
      u_solves_last = jumped->first.full;
      last_zeta = std::move(jumped->second);
      res.energy_trace.push_back(energy);
      notify(opts, IterateStage::outer, res.outer_iterations, u);
    }
  }

  res.u = std::move(u);
  res.u.dirichlet_zero = true;
  res.zeta = nodal_selection(mesh, res.u, spec, opts.selection_rule);
  // On a jump level the selection that u solves is M(u) itself, clamped to
  // the bracket; the rule's pick is only where the iteration started.
  const Eigen::VectorXd m = discrete_operator(mesh, res.u, opts.working_margin);
  for (int i : mesh.interior_nodes()) {
    const Point& x = mesh.node(static_cast<std::size_t>(i));
    if (!spec.jump_at(x, res.u.values[i])) continue;
    const Bracket b = envelope(spec, x, res.u.values[i]);
    res.zeta[i] = std::clamp(m[i], b.lo, b.hi);
  }
  res.stationarity =
      stationarity_measure(mesh, res.u, spec, opts.stationarity_trials, opts.seed);
  ResidualOptions ropts;
  ropts.margin = opts.working_margin;
  res.residual = inclusion_residual(mesh, res.u, spec, ropts).lpNorm<Eigen::Infinity>();
  const double final_energy = res.energy_trace.back();
  res.converged =
      fixed && res.stationarity <= opts.outer_tol * (1.0 + std::abs(final_energy));
  return res;
}

}  // namespace fmc
