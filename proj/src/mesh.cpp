#include "fmc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <utility>

#include <Eigen/LU>

namespace fmc {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

double distance(const Point& a, const Point& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace

Mesh Mesh::from_arrays(int dim, std::vector<Point> nodes,
                       std::vector<Simplex> elements,
                       std::vector<int> boundary_nodes) {
  if (dim < 1 || dim > 3)
    throw MeshError("mesh dimension must be 1, 2 or 3, got " +
                    std::to_string(dim));
  if (nodes.empty()) throw MeshError("mesh has no nodes");
  if (elements.empty()) throw MeshError("mesh has no elements");

  Mesh m;
  m.dim_ = dim;
  m.nodes_ = std::move(nodes);
  m.elements_ = std::move(elements);
  const auto n_nodes = static_cast<int>(m.nodes_.size());

  for (auto& p : m.nodes_)
    for (int c = dim; c < 3; ++c) p[c] = 0.0;

  m.on_boundary_.assign(m.nodes_.size(), 0);
  for (int b : boundary_nodes) {
    if (b < 0 || b >= n_nodes)
      throw MeshError("boundary node index " + std::to_string(b) +
                      " out of range (" + std::to_string(n_nodes) +
                      " nodes)");
    m.on_boundary_[b] = 1;
  }
  for (int i = 0; i < n_nodes; ++i) {
    if (m.on_boundary_[i])
      m.boundary_.push_back(i);
    else
      m.interior_.push_back(i);
  }
  if (dim == 1 && m.boundary_.size() != 2)
    throw MeshError("a 1D mesh needs exactly two boundary nodes, got " +
                    std::to_string(m.boundary_.size()));

  m.measure_.resize(m.elements_.size());
  m.basis_grad_.resize(m.elements_.size());
  m.node_weight_ = Eigen::VectorXd::Zero(n_nodes);
  const double dfact = factorial(dim);

  for (std::size_t e = 0; e < m.elements_.size(); ++e) {
    auto& s = m.elements_[e];
    for (int k = 0; k < 4; ++k) {
      if (k > dim) {
        s[k] = -1;
        continue;
      }
      if (s[k] < 0 || s[k] >= n_nodes)
        throw MeshError("element " + std::to_string(e) +
                        " references node " + std::to_string(s[k]) +
                        " of " + std::to_string(n_nodes));
    }
    Eigen::MatrixXd jac(dim, dim);
    const Point& p0 = m.nodes_[s[0]];
    for (int k = 1; k <= dim; ++k)
      for (int c = 0; c < dim; ++c) jac(c, k - 1) = m.nodes_[s[k]][c] - p0[c];
    const double det = jac.determinant();
    const double measure = std::abs(det) / dfact;
    if (!(measure > 0.0) || !std::isfinite(measure))
      throw MeshError("element " + std::to_string(e) +
                      " has non-positive measure");
    m.measure_[e] = measure;

    // Rows of J^{-1} are the gradients of barycentric coordinates 1..dim.
    const Eigen::MatrixXd inv = jac.inverse();
    Eigen::Matrix<double, 3, 4> grads = Eigen::Matrix<double, 3, 4>::Zero();
    for (int k = 1; k <= dim; ++k)
      for (int c = 0; c < dim; ++c) grads(c, k) = inv(k - 1, c);
    for (int k = 1; k <= dim; ++k) grads.col(0) -= grads.col(k);
    m.basis_grad_[e] = grads;

    for (int k = 0; k <= dim; ++k) {
      m.node_weight_[s[k]] += measure / (dim + 1);
      for (int l = k + 1; l <= dim; ++l)
        m.h_ = std::max(m.h_, distance(m.nodes_[s[k]], m.nodes_[s[l]]));
    }
    m.volume_ += measure;
  }
  return m;
}

Field Field::zero(const Mesh& mesh) {
  return Field{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_nodes())),
               true};
}

Field Field::interpolate(const Mesh& mesh,
                         const std::function<double(const Point&)>& fn) {
  Field f{Eigen::VectorXd(static_cast<Eigen::Index>(mesh.num_nodes())), false};
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i)
    f.values[static_cast<Eigen::Index>(i)] = fn(mesh.node(i));
  return f;
}

void check_field(const Mesh& mesh, const Field& field) {
  if (static_cast<std::size_t>(field.values.size()) != mesh.num_nodes())
    throw MeshError("field has " + std::to_string(field.values.size()) +
                    " values but the mesh has " +
                    std::to_string(mesh.num_nodes()) + " nodes");
  if (field.dirichlet_zero)
    for (int b : mesh.boundary_nodes())
      if (field.values[b] != 0.0)
        throw MeshError("field flagged dirichlet_zero is nonzero at boundary "
                        "node " + std::to_string(b));
}

Field with_zero_boundary(const Mesh& mesh, Field field) {
  for (int b : mesh.boundary_nodes()) field.values[b] = 0.0;
  field.dirichlet_zero = true;
  return field;
}

Mesh build_interval_mesh(double a, double b, int n) {
  if (!(a < b)) throw MeshError("interval mesh needs a < b");
  if (n < 1) throw MeshError("interval mesh needs at least one element");
  std::vector<Point> nodes(n + 1);
  const double h = (b - a) / n;
  for (int i = 0; i <= n; ++i) nodes[i] = {a + i * h, 0.0, 0.0};
  nodes[n][0] = b;
  std::vector<Simplex> elems(n);
  for (int i = 0; i < n; ++i) elems[i] = {i, i + 1, -1, -1};
  return Mesh::from_arrays(1, std::move(nodes), std::move(elems), {0, n});
}

Mesh build_rectangle_mesh(double lx, double ly, int nx, int ny) {
  if (!(lx > 0.0) || !(ly > 0.0) || nx < 1 || ny < 1)
    throw MeshError("rectangle mesh needs positive sides and counts");
  std::vector<Point> nodes;
  nodes.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  std::vector<int> boundary;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const double x = (i == nx) ? lx : lx * i / nx;
      const double y = (j == ny) ? ly : ly * j / ny;
      if (i == 0 || j == 0 || i == nx || j == ny)
        boundary.push_back(static_cast<int>(nodes.size()));
      nodes.push_back({x, y, 0.0});
    }
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<Simplex> elems;
  elems.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      elems.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), -1});
      elems.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1), -1});
    }
  return Mesh::from_arrays(2, std::move(nodes), std::move(elems),
                           std::move(boundary));
}

Mesh build_disk_mesh(double radius, int refinement) {
  if (!(radius > 0.0)) throw MeshError("disk mesh needs a positive radius");
  if (refinement < 0) throw MeshError("disk refinement level must be >= 0");

  std::vector<Point> nodes{{0.0, 0.0, 0.0}};
  for (int k = 0; k < 6; ++k) {
    const double t = k * std::numbers::pi / 3.0;
    nodes.push_back({radius * std::cos(t), radius * std::sin(t), 0.0});
  }
  std::vector<Simplex> elems;
  for (int k = 0; k < 6; ++k) elems.push_back({0, 1 + k, 1 + (k + 1) % 6, -1});
  std::vector<char> bnd(nodes.size(), 1);
  bnd[0] = 0;

  for (int level = 0; level < refinement; ++level) {
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& t : elems)
      for (int a = 0; a < 3; ++a) {
        const int u = t[a], v = t[(a + 1) % 3];
        ++edge_count[{std::min(u, v), std::max(u, v)}];
      }
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int u, int v) {
      const std::pair<int, int> key{std::min(u, v), std::max(u, v)};
      if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
      Point p{0.5 * (nodes[u][0] + nodes[v][0]),
              0.5 * (nodes[u][1] + nodes[v][1]), 0.0};
      const bool on_circle = edge_count[key] == 1;
      if (on_circle) {
        const double r = std::hypot(p[0], p[1]);
        p[0] *= radius / r;
        p[1] *= radius / r;
      }
      const int id = static_cast<int>(nodes.size());
      nodes.push_back(p);
      bnd.push_back(on_circle ? 1 : 0);
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<Simplex> next;
    next.reserve(elems.size() * 4);
    for (const auto& t : elems) {
      const int a = t[0], b = t[1], c = t[2];
      const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
      next.push_back({a, ab, ca, -1});
      next.push_back({ab, b, bc, -1});
      next.push_back({ca, bc, c, -1});
      next.push_back({ab, bc, ca, -1});
    }
    elems = std::move(next);
  }

  std::vector<int> boundary;
  for (std::size_t i = 0; i < bnd.size(); ++i)
    if (bnd[i]) boundary.push_back(static_cast<int>(i));
  return Mesh::from_arrays(2, std::move(nodes), std::move(elems),
                           std::move(boundary));
}

Eigen::VectorXd element_gradient(const Mesh& mesh, const Field& field,
                                 std::size_t element) {
  if (element >= mesh.num_elements())
    throw MeshError("element index " + std::to_string(element) +
                    " out of range (" + std::to_string(mesh.num_elements()) +
                    " elements)");
  check_field(mesh, field);
  return element_gradient3(mesh, field.values, element).head(mesh.dim());
}

double inradius(const Mesh& mesh) {
  double best = 0.0;
  for (int i : mesh.interior_nodes()) {
    double nearest = std::numeric_limits<double>::infinity();
    for (int b : mesh.boundary_nodes())
      nearest = std::min(nearest, distance(mesh.node(i), mesh.node(b)));
    if (std::isfinite(nearest)) best = std::max(best, nearest);
  }
  return best;
}

}  // namespace fmc
