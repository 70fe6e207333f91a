#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "fmc/energy.hpp"
#include "fmc/mesh.hpp"
#include "fmc/nonlinearity.hpp"

namespace fmc {

struct ResidualOptions {
  /// Extra slack added to both ends of the bracket.
  double bracket_slack = 0.0;
  /// Nodes within this distance of a jump level are checked against the full
  /// jump interval. Defaults to the mesh size.
  std::optional<double> tol_jump;
  double margin = kDefaultGradientMargin;
};

/// Lumped weak form of the operator: m_i = -(psi_gradient)_i / w_i at
/// interior nodes, zero on the boundary.
Eigen::VectorXd discrete_operator(const Mesh& mesh, const Field& u,
                                  double margin = kDefaultGradientMargin);

/// Per-node distance of m_i from [f_lower(x_i, u_i), f_upper(x_i, u_i)];
/// zero on the boundary.
Eigen::VectorXd inclusion_residual(const Mesh& mesh, const Field& u,
                                   const Nonlinearity& spec,
                                   const ResidualOptions& opts = {});

/// min over trial fields w of psi(w) - psi(u) + <zeta, w - u>_lumped.
/// The trial set is: u itself, the zero field, +-cone and +-cone/2 (the
/// cone scaled into K0), and `trials` random smooth bumps.
double variational_inequality_check(const Mesh& mesh, const Field& u,
                                    const Eigen::VectorXd& zeta,
                                    std::size_t trials, std::uint64_t seed = 0);

/// Closed-form solution of M(v) = a on the ball of radius R in R^N with
/// v = 0 on the sphere:
///   u(r) = (N/a) (sqrt(1 + (a r/N)^2) - sqrt(1 + (a R/N)^2)).
struct RadialSolution {
  double a = 0.0;
  double R = 1.0;
  int N = 1;

  double operator()(double r) const;
  double derivative(double r) const;
  /// Evaluates at |x|.
  double at(const Point& x) const;
};

RadialSolution analytic_radial(double a, double R, int N);

struct BruteForceResult {
  Field u;
  double energy = kInfinity;
  std::size_t feasible_configurations = 0;
};

/// Exhaustive minimisation of I over interior nodal values on the grid
/// {k * grid_step} within [-inradius, inradius]. Meshes with more than four
/// interior nodes are rejected.
BruteForceResult brute_force_minimize(const Mesh& mesh,
                                      const Nonlinearity& spec,
                                      double grid_step);

struct VerifyOptions {
  double residual_tol = 1e-2;
  double vi_tol = 1e-6;
  std::size_t vi_trials = 200;
  std::uint64_t seed = 0;
  ResidualOptions residual;
  /// Closed-form reference, when one is known for the problem.
  std::function<double(const Point&)> reference;
  double analytic_tol = 2e-2;
  /// Run the brute-force comparison when the mesh has at most four
  /// interior nodes.
  bool brute_force = true;
  double grid_step = 0.01;
  double bruteforce_tol = 1e-3;
};

struct VerificationReport {
  double max_inclusion_residual = 0.0;
  double vi_min_slack = 0.0;
  std::optional<double> analytic_linf_error;
  std::optional<double> bruteforce_gap;

  bool residual_passed = false;
  bool vi_passed = false;
  std::optional<bool> analytic_passed;
  std::optional<bool> bruteforce_passed;

  bool passed() const;
  /// Flat `key = value` lines.
  std::string to_text() const;
};

VerificationReport verify_solution(const Mesh& mesh, const Field& u,
                                   const Eigen::VectorXd& zeta,
                                   const Nonlinearity& spec,
                                   const VerifyOptions& opts = {});

}  // namespace fmc
