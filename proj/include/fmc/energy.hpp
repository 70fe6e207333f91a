#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "fmc/mesh.hpp"
#include "fmc/nonlinearity.hpp"

namespace fmc {

/// Value of Psi and I outside the feasible set.
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Relative slack on the unit gradient bound when deciding membership in K0,
/// so that exact unit-slope fields survive rounding in the P1 gradient.
inline constexpr double kGradientSlack = 1e-12;

/// Default strict-feasibility margin for gradient and Hessian evaluation.
inline constexpr double kDefaultGradientMargin = 1e-9;

struct Feasibility {
  bool in_K0 = true;
  double max_element_gradient_norm = 0.0;
  double boundary_violation = 0.0;
};

struct EnergyBounds {
  double c_omega = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double lower_bound = 0.0;
};

/// Raised when a derivative of Psi is requested too close to |grad v| = 1.
class MarginViolation : public std::runtime_error {
 public:
  MarginViolation(std::size_t element, double norm, double margin)
      : std::runtime_error("element " + std::to_string(element) +
                           " has gradient norm " + std::to_string(norm) +
                           " above 1 - " + std::to_string(margin)),
        element_(element),
        norm_(norm) {}
  std::size_t element() const { return element_; }
  double norm() const { return norm_; }

 private:
  std::size_t element_;
  double norm_;
};

double max_element_gradient_norm(const Mesh& mesh, const Eigen::VectorXd& v);

Feasibility feasibility(const Mesh& mesh, const Field& field);

/// Relativistic area sum_T |T| (1 - sqrt(1 - |g_T|^2)); +inf off K0.
double psi(const Mesh& mesh, const Field& field);

/// Exact nodal gradient of psi. Boundary components are included; Dirichlet
/// solves mask them.
Eigen::VectorXd psi_gradient(const Mesh& mesh, const Field& field,
                             double margin = kDefaultGradientMargin);

/// Exact Hessian of psi restricted to the given node subset (ordered as in
/// `dofs`, with `dof_of[node] = -1` for excluded nodes).
Eigen::SparseMatrix<double> psi_hessian(const Mesh& mesh, const Field& field,
                                        const std::vector<int>& dof_of,
                                        std::size_t n_dofs,
                                        double margin = kDefaultGradientMargin);

/// psi(to) - psi(from) summed per element in a cancellation-free form.
/// Both fields must lie in K0; the result is +inf when `to` does not.
double psi_difference(const Mesh& mesh, const Eigen::VectorXd& from,
                      const Eigen::VectorXd& to);

/// Lumped pairing sum_i w_i a_i b_i.
double lumped_pairing(const Mesh& mesh, const Eigen::VectorXd& a,
                      const Eigen::VectorXd& b);

/// Potential term sum_i w_i F(x_i, v_i) under lumped quadrature.
double script_f(const Mesh& mesh, const Field& field, const Nonlinearity& spec);

/// I = psi + script_f; +inf off K0.
double total_energy(const Mesh& mesh, const Field& field,
                    const Nonlinearity& spec);

EnergyBounds bounds(const Mesh& mesh, const Nonlinearity& spec);

}  // namespace fmc
