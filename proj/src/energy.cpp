#include "fmc/energy.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fmc {

double max_element_gradient_norm(const Mesh& mesh, const Eigen::VectorXd& v) {
  double worst = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e)
    worst = std::max(worst, element_gradient3(mesh, v, e).norm());
  return worst;
}

Feasibility feasibility(const Mesh& mesh, const Field& field) {
  check_field(mesh, field);
  Feasibility f;
  f.max_element_gradient_norm = max_element_gradient_norm(mesh, field.values);
  for (int b : mesh.boundary_nodes())
    f.boundary_violation =
        std::max(f.boundary_violation, std::abs(field.values[b]));
  f.in_K0 = f.max_element_gradient_norm <= 1.0 + kGradientSlack &&
            f.boundary_violation == 0.0;
  return f;
}

double psi(const Mesh& mesh, const Field& field) {
  if (!feasibility(mesh, field).in_K0) return kInfinity;
  double total = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const double g2 = element_gradient3(mesh, field.values, e).squaredNorm();
    total += mesh.element_measure(e) * (1.0 - std::sqrt(std::max(0.0, 1.0 - g2)));
  }
  return total;
}

double psi_difference(const Mesh& mesh, const Eigen::VectorXd& from,
                      const Eigen::VectorXd& to) {
  double total = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Eigen::Vector3d g0 = element_gradient3(mesh, from, e);
    const Eigen::Vector3d g1 = element_gradient3(mesh, to, e);
    if (g1.norm() > 1.0 + kGradientSlack) return kInfinity;
    const double s0 = std::sqrt(std::max(0.0, 1.0 - g0.squaredNorm()));
    const double s1 = std::sqrt(std::max(0.0, 1.0 - g1.squaredNorm()));
    const double denom = s0 + s1;
    if (denom == 0.0) continue;
    // sqrt(1-|g0|^2) - sqrt(1-|g1|^2) = (|g1|^2 - |g0|^2) / (s0 + s1)
    total += mesh.element_measure(e) * (g1 - g0).dot(g1 + g0) / denom;
  }
  return total;
}

Eigen::VectorXd psi_gradient(const Mesh& mesh, const Field& field,
                             double margin) {
  check_field(mesh, field);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(field.values.size());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Eigen::Vector3d g = element_gradient3(mesh, field.values, e);
    const double norm = g.norm();
    if (!(norm <= 1.0 - margin)) throw MarginViolation(e, norm, margin);
    // d/dg (1 - sqrt(1 - |g|^2)) = g / sqrt(1 - |g|^2)
    const Eigen::Vector3d flux =
        mesh.element_measure(e) * g / std::sqrt(1.0 - g.squaredNorm());
    const auto verts = mesh.element(e);
    for (int k = 0; k <= mesh.dim(); ++k)
      grad[verts[k]] += flux.dot(mesh.basis_gradient(e, k));
  }
  return grad;
}

Eigen::SparseMatrix<double> psi_hessian(const Mesh& mesh, const Field& field,
                                        const std::vector<int>& dof_of,
                                        std::size_t n_dofs, double margin) {
  check_field(mesh, field);
  const int d1 = mesh.dim() + 1;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.num_elements() * static_cast<std::size_t>(d1 * d1));
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Eigen::Vector3d g = element_gradient3(mesh, field.values, e);
    const double g2 = g.squaredNorm();
    if (!(std::sqrt(g2) <= 1.0 - margin))
      throw MarginViolation(e, std::sqrt(g2), margin);
    const double s = std::sqrt(1.0 - g2);
    // Second derivative of 1 - sqrt(1 - |g|^2): I/s + g g^T / s^3.
    const Eigen::Matrix3d density =
        Eigen::Matrix3d::Identity() / s + g * g.transpose() / (s * s * s);
    const auto verts = mesh.element(e);
    for (int a = 0; a < d1; ++a) {
      const int ra = dof_of[verts[a]];
      if (ra < 0) continue;
      const Eigen::Vector3d ga = density * mesh.basis_gradient(e, a);
      for (int b = 0; b < d1; ++b) {
        const int rb = dof_of[verts[b]];
        if (rb < 0) continue;
        trips.emplace_back(ra, rb,
                           mesh.element_measure(e) *
                               ga.dot(mesh.basis_gradient(e, b)));
      }
    }
  }
  Eigen::SparseMatrix<double> h(static_cast<Eigen::Index>(n_dofs),
                                static_cast<Eigen::Index>(n_dofs));
  h.setFromTriplets(trips.begin(), trips.end());
  return h;
}

double lumped_pairing(const Mesh& mesh, const Eigen::VectorXd& a,
                      const Eigen::VectorXd& b) {
  return (mesh.node_weights().array() * a.array() * b.array()).sum();
}

double script_f(const Mesh& mesh, const Field& field,
                const Nonlinearity& spec) {
  check_field(mesh, field);
  double total = 0.0;
  const auto& w = mesh.node_weights();
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    total += w[idx] * primitive(spec, mesh.node(i), field.values[idx]);
  }
  return total;
}

double total_energy(const Mesh& mesh, const Field& field,
                    const Nonlinearity& spec) {
  const double p = psi(mesh, field);
  if (!std::isfinite(p)) return kInfinity;
  return p + script_f(mesh, field, spec);
}

EnergyBounds bounds(const Mesh& mesh, const Nonlinearity& spec) {
  EnergyBounds b;
  const double C = spec.growth_C(), q = spec.growth_q();
  b.c_omega = inradius(mesh);
  b.C1 = C * (1.0 + std::pow(b.c_omega, q - 1.0));
  b.C2 = C * (b.c_omega + std::pow(b.c_omega, q) / q);
  b.lower_bound = -b.C2 * mesh.volume();
  return b;
}

}  // namespace fmc
