#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fmc {

/// Node coordinates. Components beyond the mesh dimension are zero.
using Point = std::array<double, 3>;

/// Local connectivity of a simplex: dim+1 node indices, unused slots are -1.
using Simplex = std::array<int, 4>;

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Simplicial P1 mesh of a bounded domain with a marked boundary.
///
/// The mesh is immutable once built. Construction validates the connectivity
/// and precomputes element measures, basis-function gradients and the lumped
/// (vertex) quadrature weights, so that every query afterwards is a lookup.
class Mesh {
 public:
  static Mesh from_arrays(int dim, std::vector<Point> nodes,
                          std::vector<Simplex> elements,
                          std::vector<int> boundary_nodes);

  int dim() const { return dim_; }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_elements() const { return elements_.size(); }

  const std::vector<Point>& nodes() const { return nodes_; }
  const Point& node(std::size_t i) const { return nodes_[i]; }

  /// The dim+1 vertex indices of element e.
  std::span<const int> element(std::size_t e) const {
    return {elements_[e].data(), static_cast<std::size_t>(dim_ + 1)};
  }
  const std::vector<Simplex>& elements() const { return elements_; }

  const std::vector<int>& boundary_nodes() const { return boundary_; }
  const std::vector<int>& interior_nodes() const { return interior_; }
  bool is_boundary(std::size_t node) const { return on_boundary_[node] != 0; }

  double element_measure(std::size_t e) const { return measure_[e]; }
  const std::vector<double>& element_measures() const { return measure_; }
  const Eigen::VectorXd& node_weights() const { return node_weight_; }

  /// Gradient of the local basis function attached to vertex `local` of
  /// element e (padded with zeros to three components).
  Eigen::Vector3d basis_gradient(std::size_t e, int local) const {
    return basis_grad_[e].col(local);
  }

  double volume() const { return volume_; }
  /// Longest edge over all elements.
  double mesh_size() const { return h_; }

 private:
  Mesh() = default;

  int dim_ = 0;
  std::vector<Point> nodes_;
  std::vector<Simplex> elements_;
  std::vector<int> boundary_;
  std::vector<int> interior_;
  std::vector<char> on_boundary_;
  std::vector<double> measure_;
  std::vector<Eigen::Matrix<double, 3, 4>> basis_grad_;
  Eigen::VectorXd node_weight_;
  double volume_ = 0.0;
  double h_ = 0.0;
};

/// Nodal values of a P1 function on a mesh.
struct Field {
  Eigen::VectorXd values;
  /// When set, the field is promised to vanish exactly on the boundary.
  bool dirichlet_zero = false;

  static Field zero(const Mesh& mesh);
  static Field interpolate(const Mesh& mesh,
                           const std::function<double(const Point&)>& fn);
};

/// Throws MeshError when the field does not fit the mesh or breaks its
/// dirichlet_zero promise.
void check_field(const Mesh& mesh, const Field& field);

/// Zero every boundary value and set the dirichlet_zero flag.
Field with_zero_boundary(const Mesh& mesh, Field field);

Mesh build_interval_mesh(double a, double b, int n);
/// Triangulated rectangle [0, lx] x [0, ly]; every grid cell is split into
/// two triangles along its lower-left to upper-right diagonal.
Mesh build_rectangle_mesh(double lx, double ly, int nx, int ny);
/// Disk of the given radius centred at the origin. Level 0 is the inscribed
/// hexagon; each level splits every triangle in four and pushes the new
/// boundary midpoints radially onto the circle.
Mesh build_disk_mesh(double radius, int refinement);

/// Constant gradient of the P1 interpolant of `field` on element e.
Eigen::VectorXd element_gradient(const Mesh& mesh, const Field& field,
                                 std::size_t element);

/// Same as element_gradient, padded to three components. No bounds checks.
inline Eigen::Vector3d element_gradient3(const Mesh& mesh,
                                         const Eigen::VectorXd& values,
                                         std::size_t e) {
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  const auto verts = mesh.element(e);
  for (int k = 0; k <= mesh.dim(); ++k)
    g += values[verts[k]] * mesh.basis_gradient(e, k);
  return g;
}

/// Discrete c(Omega): the largest distance from an interior node to its
/// nearest boundary node. For a convex mesh this bounds |v| at every node of
/// any zero-boundary field whose element gradients have norm at most one.
double inradius(const Mesh& mesh);

Mesh read_mesh(std::istream& in);
Mesh read_mesh(const std::filesystem::path& path);
void write_mesh(const Mesh& mesh, std::ostream& out);
void write_mesh(const Mesh& mesh, const std::filesystem::path& path);

}  // namespace fmc
