#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fmc/mesh.hpp"
#include "fmc/nonlinearity.hpp"

namespace fmc {

enum class IterateStage { inner, outer };

struct IterateEvent {
  IterateStage stage;
  std::size_t index;
  const Field& field;
};

struct SolverOptions {
  double inner_tol = 1e-10;
  double outer_tol = 1e-8;
  int max_inner = 200;
  int max_outer = 100;
  /// Every iterate keeps its element gradients at or below 1 - margin.
  double working_margin = 1e-12;
  /// Backtracking factor of the line search.
  double damping = 0.5;
  /// Starting field; zero when empty.
  std::optional<Field> initial;

  SelectionRule selection_rule = SelectionRule::midpoint;
  /// When the fixed point stalls, nodes within this distance of a jump
  /// level are retried with each end of their bracket.
  double escape_window = 1e-6;
  std::size_t stationarity_trials = 100;
  std::uint64_t seed = 0;

  /// Called with every inner and outer iterate.
  std::function<void(const IterateEvent&)> on_iterate;

  void validate() const;
};

/// The inner Newton solve ran out of iterations or stalled.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, Field last, double residual)
      : std::runtime_error(what), last_(std::move(last)), residual_(residual) {}
  const Field& last_iterate() const { return last_; }
  double residual() const { return residual_; }

 private:
  Field last_;
  double residual_;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PrescribedSolution {
  Field u;
  std::size_t iterations = 0;
  /// Max-norm of the interior gradient of the convex objective.
  double residual = 0.0;
};

/// Minimises psi(w) + <e, w>_lumped over zero-boundary fields, i.e. solves
/// the discrete M(v) = e, v = 0 on the boundary, by damped Newton.
PrescribedSolution solve_prescribed(const Mesh& mesh, const Eigen::VectorXd& e,
                                    const SolverOptions& opts = {});

struct SolveResult {
  Field u;
  Eigen::VectorXd zeta;
  std::size_t inner_iterations = 0;
  std::size_t outer_iterations = 0;
  std::vector<double> energy_trace;
  double stationarity = 0.0;
  bool converged = false;
  double residual = 0.0;
};

/// Fixed-point iteration u <- solve_prescribed(selection(u)) with an energy
/// safeguard along segments and bracket-endpoint retries at jump levels.
SolveResult solve_inclusion(const Mesh& mesh, const Nonlinearity& spec,
                            const SolverOptions& opts = {});

/// PS-type certificate: the largest normalised violation
///   max(0, max_v -(G0(u; v-u) + psi(v) - psi(u)) / |v - u|_inf)
/// over random feasible trial fields v, where G0 is the lumped generalized
/// directional derivative of the potential term.
double stationarity_measure(const Mesh& mesh, const Field& u,
                            const Nonlinearity& spec, std::size_t trials,
                            std::uint64_t seed = 0);

/// Nodal values of the selection at u.
Eigen::VectorXd nodal_selection(const Mesh& mesh, const Field& u,
                                const Nonlinearity& spec, SelectionRule rule);

}  // namespace fmc
