#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fmc/energy.hpp"
#include "fmc/mesh.hpp"
#include "fmc/sampling.hpp"

using namespace fmc;

namespace {

// Independent inradius oracle: every interior node against every boundary
// node, written without the library helpers.
double brute_inradius(const Mesh& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.num_nodes(); ++i) {
    if (m.is_boundary(i)) continue;
    double nearest = 1e300;
    for (std::size_t j = 0; j < m.num_nodes(); ++j) {
      if (!m.is_boundary(j)) continue;
      double d2 = 0.0;
      for (int c = 0; c < 3; ++c) d2 += std::pow(m.node(i)[c] - m.node(j)[c], 2);
      nearest = std::min(nearest, std::sqrt(d2));
    }
    best = std::max(best, nearest);
  }
  return best;
}

}  // namespace

TEST_CASE("interval mesh") {
  const Mesh m = build_interval_mesh(-1.0, 1.0, 4);
  REQUIRE(m.num_nodes() == 5);
  const double xs[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  for (int i = 0; i < 5; ++i) CHECK(m.node(i)[0] == xs[i]);
  for (double mu : m.element_measures()) CHECK(mu == 0.5);
  CHECK(m.boundary_nodes() == std::vector<int>{0, 4});

  const Mesh tiny = build_interval_mesh(0.0, 1.0, 1);
  CHECK(tiny.num_nodes() == 2);
  CHECK(tiny.boundary_nodes().size() == 2);
  CHECK(tiny.interior_nodes().empty());
  CHECK(tiny.element_measure(0) == 1.0);

  const Mesh fine = build_interval_mesh(-1.0, 1.0, 256);
  CHECK(std::abs(fine.volume() - 2.0) <= 1e-12 * 2.0);

  CHECK_THROWS_AS(build_interval_mesh(0.0, 1.0, 0), MeshError);
  CHECK_THROWS_AS(build_interval_mesh(1.0, 1.0, 4), MeshError);
  CHECK_THROWS_AS(build_interval_mesh(2.0, 1.0, 4), MeshError);
}

TEST_CASE("rectangle mesh") {
  const Mesh one = build_rectangle_mesh(1.0, 1.0, 1, 1);
  CHECK(one.num_nodes() == 4);
  CHECK(one.num_elements() == 2);
  CHECK(std::abs(one.volume() - 1.0) <= 1e-12);

  CHECK(std::abs(build_rectangle_mesh(2.0, 1.0, 2, 1).volume() - 2.0) <= 2e-12);

  const Mesh sq = build_rectangle_mesh(1.0, 1.0, 8, 8);
  CHECK(sq.num_elements() == 128);
  CHECK(sq.boundary_nodes().size() == 32);
  for (int b : sq.boundary_nodes()) {
    const auto& p = sq.node(b);
    const bool on_edge = p[0] == 0.0 || p[0] == 1.0 || p[1] == 0.0 || p[1] == 1.0;
    CHECK(on_edge);
  }
  CHECK_THROWS_AS(build_rectangle_mesh(0.0, 1.0, 2, 2), MeshError);
  CHECK_THROWS_AS(build_rectangle_mesh(1.0, -1.0, 2, 2), MeshError);
  CHECK_THROWS_AS(build_rectangle_mesh(1.0, 1.0, 0, 2), MeshError);
}

TEST_CASE("disk mesh") {
  const Mesh coarse = build_disk_mesh(1.0, 0);
  CHECK(coarse.volume() < std::numbers::pi);
  CHECK(coarse.boundary_nodes().size() == 6);

  for (double radius : {1.0, 2.0}) {
    const Mesh m = build_disk_mesh(radius, 4);
    const double area = std::numbers::pi * radius * radius;
    // Oracle: direct sum of triangle areas from the cross product.
    double sum = 0.0;
    for (std::size_t e = 0; e < m.num_elements(); ++e) {
      const auto v = m.element(e);
      const auto &a = m.node(v[0]), &b = m.node(v[1]), &c = m.node(v[2]);
      sum += 0.5 * std::abs((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
    }
    CHECK(std::abs(sum - area) <= 0.01 * area);
    CHECK(std::abs(m.volume() - sum) <= 1e-12 * sum);
    for (int b : m.boundary_nodes())
      CHECK(std::hypot(m.node(b)[0], m.node(b)[1]) == doctest::Approx(radius).epsilon(1e-14));
  }
  CHECK_THROWS_AS(build_disk_mesh(0.0, 2), MeshError);
  CHECK_THROWS_AS(build_disk_mesh(-1.0, 2), MeshError);
}

TEST_CASE("node weights sum to the volume") {
  for (const Mesh& m : {build_interval_mesh(-1, 1, 37), build_rectangle_mesh(2, 3, 5, 7),
                        build_disk_mesh(1.5, 3)}) {
    double measures = 0.0;
    for (double mu : m.element_measures()) {
      CHECK(mu > 0.0);
      measures += mu;
    }
    CHECK(std::abs(m.node_weights().sum() - measures) <= 1e-12 * measures);
  }
}

TEST_CASE("element gradient") {
  const Mesh m = build_interval_mesh(0.0, 1.0, 2);
  Field f = Field::zero(m);
  f.values[1] = 0.5;
  f.dirichlet_zero = false;
  CHECK(element_gradient(m, f, 0)[0] == doctest::Approx(1.0));
  CHECK(element_gradient(m, f, 1)[0] == doctest::Approx(-1.0));
  CHECK(element_gradient(m, Field::zero(m), 1).norm() == 0.0);

  const Mesh tri = Mesh::from_arrays(2, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}},
                                     {{0, 1, 2, -1}}, {0, 1, 2});
  const Field g{Eigen::Vector3d(0.0, 1.0, 0.0), false};
  const auto grad = element_gradient(tri, g, 0);
  CHECK(grad[0] == doctest::Approx(1.0));
  CHECK(grad[1] == doctest::Approx(0.0));

  CHECK_THROWS_AS(element_gradient(m, f, 2), MeshError);
  CHECK_THROWS_AS(element_gradient(m, Field{Eigen::VectorXd::Zero(2), false}, 0),
                  MeshError);
}

TEST_CASE("element gradient is linear in the field") {
  const Mesh m = build_disk_mesh(1.0, 2);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Field u{Eigen::VectorXd::NullaryExpr(m.num_nodes(), [&] { return n(rng); }), false};
    Field v{Eigen::VectorXd::NullaryExpr(m.num_nodes(), [&] { return n(rng); }), false};
    const double a = n(rng), b = n(rng);
    const Field w{a * u.values + b * v.values, false};
    for (std::size_t e = 0; e < m.num_elements(); ++e) {
      const Eigen::VectorXd lhs = element_gradient(m, w, e);
      const Eigen::VectorXd rhs = a * element_gradient(m, u, e) + b * element_gradient(m, v, e);
      CHECK((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }
  }
}

TEST_CASE("inradius matches the brute-force distance oracle") {
  const Mesh interval = build_interval_mesh(-1, 1, 256);
  CHECK(inradius(interval) == brute_inradius(interval));
  CHECK(std::abs(inradius(interval) - 1.0) <= interval.mesh_size());

  const Mesh square = build_rectangle_mesh(1, 1, 8, 8);
  CHECK(inradius(square) == brute_inradius(square));
  CHECK(std::abs(inradius(square) - 0.5) <= square.mesh_size());

  const Mesh disk = build_disk_mesh(1.0, 4);
  CHECK(inradius(disk) == brute_inradius(disk));
  CHECK(std::abs(inradius(disk) - 1.0) <= disk.mesh_size());
}

TEST_CASE("discrete sup bound for zero-boundary fields in K0") {
  std::mt19937_64 rng(3);
  for (const Mesh& m : {build_interval_mesh(-1, 1, 64), build_rectangle_mesh(1, 1, 8, 8),
                        build_disk_mesh(1.0, 3)}) {
    const double c = inradius(m) + m.mesh_size();
    for (int k = 0; k < 50; ++k) {
      const Field f = scale_to_gradient(m, random_bump(m, rng), 1.0);
      CHECK(f.values.lpNorm<Eigen::Infinity>() <= c);
    }
    const Field cone = boundary_cone(m);
    CHECK(cone.values.lpNorm<Eigen::Infinity>() <= c);
  }
}

TEST_CASE("measures are invariant under node reordering") {
  const Mesh m = build_disk_mesh(1.0, 2);
  std::vector<int> perm(m.num_nodes());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(11));
  std::vector<Point> nodes(m.num_nodes());
  for (std::size_t i = 0; i < m.num_nodes(); ++i) nodes[perm[i]] = m.node(i);
  std::vector<Simplex> elems = m.elements();
  for (auto& s : elems)
    for (int k = 0; k < 3; ++k) s[k] = perm[s[k]];
  std::vector<int> bnd;
  for (int b : m.boundary_nodes()) bnd.push_back(perm[b]);
  const Mesh r = Mesh::from_arrays(2, nodes, elems, bnd);
  for (std::size_t e = 0; e < m.num_elements(); ++e)
    CHECK(r.element_measure(e) == doctest::Approx(m.element_measure(e)).epsilon(1e-14));
  for (std::size_t i = 0; i < m.num_nodes(); ++i)
    CHECK(r.node_weights()[perm[i]] == doctest::Approx(m.node_weights()[i]).epsilon(1e-14));
  CHECK(r.volume() == doctest::Approx(m.volume()).epsilon(1e-14));
}

TEST_CASE("mesh file round trip") {
  for (const Mesh& m : {build_interval_mesh(0, 1, 4), build_disk_mesh(1.0, 2)}) {
    std::stringstream ss;
    write_mesh(m, ss);
    const Mesh r = read_mesh(ss);
    CHECK(r.dim() == m.dim());
    CHECK(r.nodes() == m.nodes());
    CHECK(r.elements() == m.elements());
    CHECK(r.boundary_nodes() == m.boundary_nodes());
  }
}

TEST_CASE("mesh file errors") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_mesh(in);
  };
  CHECK_THROWS_WITH_AS(parse(""), "mesh file is empty", MeshError);
  CHECK_THROWS_WITH_AS(parse("# only a comment\n"), "mesh file is empty", MeshError);

  const std::string bad_ref =
      "dim 1\nnodes 5\n0\n0.25\n0.5\n0.75\n1\nelements 4\n0 1\n1 2\n2 3\n3 99\nboundary\n0 4\n";
  CHECK_THROWS_WITH_AS(parse(bad_ref), doctest::Contains("line 12"), MeshError);

  CHECK_THROWS_WITH_AS(parse("dim 2\nnodes 1\n0\n"), doctest::Contains("line 3"), MeshError);
  CHECK_THROWS_AS(parse("dim 1\nnodes 2\n0\n1\nelements 1\n0 1\n"), MeshError);
  CHECK_THROWS_AS(parse("dim 1\nnodes 2\n0\n0\nelements 1\n0 1\nboundary\n0 1\n"), MeshError);

  const std::string ok =
      "# unit interval\ndim 1\nnodes 3  # three\n0\n0.5\n1\nelements 2\n0 1\n1 2\nboundary\n0 2\n";
  const Mesh m = parse(ok);
  CHECK(m.num_nodes() == 3);
  CHECK(m.volume() == doctest::Approx(1.0));
}

TEST_CASE("fields check their shape and boundary promise") {
  const Mesh m = build_interval_mesh(0, 1, 4);
  CHECK_NOTHROW(check_field(m, Field::zero(m)));
  Field f = Field::zero(m);
  f.values[0] = 1.0;
  CHECK_THROWS_AS(check_field(m, f), MeshError);
  f.dirichlet_zero = false;
  CHECK_NOTHROW(check_field(m, f));
  CHECK(with_zero_boundary(m, f).values[0] == 0.0);
}
