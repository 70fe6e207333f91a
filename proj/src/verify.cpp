#include "fmc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "fmc/sampling.hpp"

namespace fmc {

Eigen::VectorXd discrete_operator(const Mesh& mesh, const Field& u,
                                  double margin) {
  const Eigen::VectorXd g = psi_gradient(mesh, u, margin);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(g.size());
  for (int i : mesh.interior_nodes()) m[i] = -g[i] / mesh.node_weights()[i];
  return m;
}

Eigen::VectorXd inclusion_residual(const Mesh& mesh, const Field& u,
                                   const Nonlinearity& spec,
                                   const ResidualOptions& opts) {
  const Eigen::VectorXd m = discrete_operator(mesh, u, opts.margin);
  const double window = opts.tol_jump.value_or(mesh.mesh_size());
  Eigen::VectorXd r = Eigen::VectorXd::Zero(m.size());
  for (int i : mesh.interior_nodes()) {
    const Point& x = mesh.node(static_cast<std::size_t>(i));
    Bracket b = envelope(spec, x, u.values[i]);
    for (const auto& j : spec.jumps()) {
      if (std::abs(u.values[i] - j.level(x)) > window) continue;
      const double lo = std::min(j.below(x), j.above(x));
      const double hi = std::max(j.below(x), j.above(x));
      b.lo = std::min(b.lo, lo);
      b.hi = std::max(b.hi, hi);
    }
    b.lo -= opts.bracket_slack;
    b.hi += opts.bracket_slack;
    r[i] = b.distance(m[i]);
  }
  return r;
}

double variational_inequality_check(const Mesh& mesh, const Field& u,
                                    const Eigen::VectorXd& zeta,
                                    std::size_t trials, std::uint64_t seed) {
  check_field(mesh, u);
  if (zeta.size() != u.values.size() || !zeta.allFinite())
    throw std::invalid_argument("selection must be finite with one value per node");

  auto slack = [&](const Eigen::VectorXd& w) {
    const double dpsi = psi_difference(mesh, u.values, w);
    return dpsi + lumped_pairing(mesh, zeta, w - u.values);
  };

  double worst = slack(u.values);
  worst = std::min(worst, slack(Eigen::VectorXd::Zero(u.values.size())));
  const Field cone = boundary_cone(mesh);
  for (double scale : {1.0, -1.0, 0.5, -0.5})
    worst = std::min(worst, slack(scale * cone.values));

  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < trials; ++k)
    worst = std::min(worst, slack(random_bump(mesh, rng).values));
  return worst;
}

double RadialSolution::operator()(double r) const {
  if (a == 0.0) return 0.0;
  const double n = N;
  return (n / a) * (std::sqrt(1.0 + (a * r / n) * (a * r / n)) -
                    std::sqrt(1.0 + (a * R / n) * (a * R / n)));
}

double RadialSolution::derivative(double r) const {
  const double z = a * r / N;
  return z / std::sqrt(1.0 + z * z);
}

double RadialSolution::at(const Point& x) const {
  return (*this)(std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
}

RadialSolution analytic_radial(double a, double R, int N) {
  if (!(R > 0.0)) throw std::invalid_argument("radius must be positive");
  if (N < 1) throw std::invalid_argument("dimension must be >= 1");
  return RadialSolution{a, R, N};
}

BruteForceResult brute_force_minimize(const Mesh& mesh,
                                      const Nonlinearity& spec,
                                      double grid_step) {
  if (!(grid_step > 0.0)) throw std::invalid_argument("grid_step must be positive");
  const auto& interior = mesh.interior_nodes();
  const std::size_t n = interior.size();
  if (n > 4)
    throw std::invalid_argument("brute force supports at most 4 interior nodes, mesh has " +
                                std::to_string(n));

  BruteForceResult best;
  best.u = Field::zero(mesh);
  if (n == 0) {
    best.energy = total_energy(mesh, best.u, spec);
    best.feasible_configurations = 1;
    return best;
  }

  const double c = inradius(mesh);
  const long K = static_cast<long>(std::floor(c / grid_step + 1e-9));
  std::vector<double> grid;
  for (long k = -K; k <= K; ++k) grid.push_back(static_cast<double>(k) * grid_step);
  const std::size_t G = grid.size();

  // Potential contribution of each interior node at each grid value.
  std::vector<std::vector<double>> potential(n, std::vector<double>(G));
  for (std::size_t d = 0; d < n; ++d) {
    const auto i = static_cast<std::size_t>(interior[d]);
    for (std::size_t g = 0; g < G; ++g)
      potential[d][g] = mesh.node_weights()[interior[d]] *
                        primitive(spec, mesh.node(i), grid[g]);
  }

  Eigen::VectorXd values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_nodes()));
  std::vector<std::size_t> digit(n, 0);
  const double limit2 = (1.0 + kGradientSlack) * (1.0 + kGradientSlack);
  for (;;) {
    double energy = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
      values[interior[d]] = grid[digit[d]];
      energy += potential[d][digit[d]];
    }
    bool feasible = true;
    for (std::size_t e = 0; e < mesh.num_elements() && feasible; ++e) {
      const double g2 = element_gradient3(mesh, values, e).squaredNorm();
      if (g2 > limit2) {
        feasible = false;
        break;
      }
      energy += mesh.element_measure(e) * (1.0 - std::sqrt(std::max(0.0, 1.0 - g2)));
    }
    if (feasible) {
      ++best.feasible_configurations;
      // Strict comparison keeps the lexicographically smallest minimiser.
      if (energy < best.energy) {
        best.energy = energy;
        best.u.values = values;
      }
    }
    std::size_t d = n;
    while (d > 0) {
      --d;
      if (++digit[d] < G) break;
      digit[d] = 0;
      if (d == 0) {
        best.energy = total_energy(mesh, best.u, spec);
        return best;
      }
    }
  }
}

bool VerificationReport::passed() const {
  return residual_passed && vi_passed && analytic_passed.value_or(true) &&
         bruteforce_passed.value_or(true);
}

std::string VerificationReport::to_text() const {
  std::ostringstream out;
  out << std::setprecision(17);
  auto flag = [](bool b) { return b ? "true" : "false"; };
  out << "max_inclusion_residual = " << max_inclusion_residual << '\n';
  out << "residual_passed = " << flag(residual_passed) << '\n';
  out << "vi_min_slack = " << vi_min_slack << '\n';
  out << "vi_passed = " << flag(vi_passed) << '\n';
  if (analytic_linf_error) {
    out << "analytic_linf_error = " << *analytic_linf_error << '\n';
    out << "analytic_passed = " << flag(analytic_passed.value_or(false)) << '\n';
  } else {
    out << "analytic_linf_error = n/a\n";
  }
  if (bruteforce_gap) {
    out << "bruteforce_gap = " << *bruteforce_gap << '\n';
    out << "bruteforce_passed = " << flag(bruteforce_passed.value_or(false)) << '\n';
  } else {
    out << "bruteforce_gap = n/a\n";
  }
  out << "passed = " << flag(passed()) << '\n';
  return out.str();
}

VerificationReport verify_solution(const Mesh& mesh, const Field& u,
                                   const Eigen::VectorXd& zeta,
                                   const Nonlinearity& spec,
                                   const VerifyOptions& opts) {
  VerificationReport rep;
  rep.max_inclusion_residual =
      inclusion_residual(mesh, u, spec, opts.residual).lpNorm<Eigen::Infinity>();
  rep.residual_passed = rep.max_inclusion_residual <= opts.residual_tol;
  rep.vi_min_slack =
      variational_inequality_check(mesh, u, zeta, opts.vi_trials, opts.seed);
  rep.vi_passed = rep.vi_min_slack >= -opts.vi_tol;

  if (opts.reference) {
    double err = 0.0;
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i)
      err = std::max(err, std::abs(u.values[static_cast<Eigen::Index>(i)] -
                                   opts.reference(mesh.node(i))));
    rep.analytic_linf_error = err;
    rep.analytic_passed = err <= opts.analytic_tol;
  }
  if (opts.brute_force && mesh.interior_nodes().size() <= 4) {
    const auto bf = brute_force_minimize(mesh, spec, opts.grid_step);
    rep.bruteforce_gap = total_energy(mesh, u, spec) - bf.energy;
    rep.bruteforce_passed = *rep.bruteforce_gap <= opts.bruteforce_tol;
  }
  return rep;
}

}  // namespace fmc
