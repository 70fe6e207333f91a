#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "fmc/energy.hpp"
#include "fmc/sampling.hpp"

using namespace fmc;

namespace {

Field cone_1d(const Mesh& m, double t = 1.0) {
  return Field::interpolate(m, [t](const Point& x) { return t * (1.0 - std::abs(x[0])); });
}

// Independent psi oracle: per-element gradient from the vertex values,
// accumulated in long double.
long double psi_oracle_1d(const Mesh& m, const Eigen::VectorXd& v) {
  long double sum = 0.0L;
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const auto s = m.element(e);
    const long double len = m.node(s[1])[0] - m.node(s[0])[0];
    const long double g = (v[s[1]] - v[s[0]]) / len;
    sum += std::abs(len) * (1.0L - std::sqrt(1.0L - g * g));
  }
  return sum;
}

}  // namespace

TEST_CASE("psi examples") {
  const Mesh m = build_interval_mesh(-1.0, 1.0, 256);
  CHECK(psi(m, Field::zero(m)) == 0.0);
  CHECK(psi(m, cone_1d(m)) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(psi(m, cone_1d(m, 1.5)) == kInfinity);

  std::mt19937_64 rng(1);
  for (int k = 0; k < 20; ++k) {
    const Field f = random_bump(m, rng);
    CHECK(psi(m, f) == doctest::Approx(static_cast<double>(psi_oracle_1d(m, f.values)))
                           .epsilon(1e-12));
  }
}

TEST_CASE("psi_difference agrees with the direct difference") {
  const Mesh m = build_disk_mesh(1.0, 3);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 20; ++k) {
    const Field a = random_bump(m, rng), b = random_bump(m, rng);
    const double direct = psi(m, b) - psi(m, a);
    CHECK(std::abs(psi_difference(m, a.values, b.values) - direct) <= 1e-13 * (1.0 + m.volume()));
  }
  const Field cone = boundary_cone(m);
  CHECK(psi_difference(m, Field::zero(m).values, 3.0 * cone.values) == kInfinity);
}

TEST_CASE("psi gradient: two-element formula") {
  // Interval (0,1) with n = 2: psi(t) = 2 * 0.5 * (1 - sqrt(1 - 4 t^2)).
  const Mesh m = build_interval_mesh(0.0, 1.0, 2);
  const double t = 0.1;
  Field f = Field::zero(m);
  f.values[1] = t;
  const double expected = 4.0 * t / std::sqrt(1.0 - 4.0 * t * t);
  const Eigen::VectorXd g = psi_gradient(m, f);
  CHECK(g[1] == doctest::Approx(expected).epsilon(1e-14));
  CHECK(g[0] == doctest::Approx(-0.5 * expected).epsilon(1e-14));
  CHECK(psi_gradient(m, Field::zero(m)).norm() == 0.0);

  f.values[1] = 0.5;  // |g| = 1
  CHECK_THROWS_AS(psi_gradient(m, f), MarginViolation);
}

TEST_CASE("psi gradient matches central differences") {
  const Mesh m = build_rectangle_mesh(1.0, 1.0, 6, 6);
  std::mt19937_64 rng(3);
  const double step = 1e-6;
  for (int k = 0; k < 10; ++k) {
    const Field f = random_bump(m, rng, 0.8);
    const Eigen::VectorXd g = psi_gradient(m, f);
    const double scale = g.lpNorm<Eigen::Infinity>();
    for (int i : m.interior_nodes()) {
      Eigen::VectorXd p = f.values, q = f.values;
      p[i] += step;
      q[i] -= step;
      const double fd = psi_difference(m, q, p) / (2.0 * step);
      CHECK(std::abs(fd - g[i]) <= 1e-6 * scale);
    }
  }
}

TEST_CASE("psi hessian matches differences of the gradient") {
  const Mesh m = build_disk_mesh(1.0, 2);
  std::mt19937_64 rng(4);
  const Field f = random_bump(m, rng, 0.7);
  std::vector<int> dof_of(m.num_nodes(), -1);
  const auto& interior = m.interior_nodes();
  for (std::size_t k = 0; k < interior.size(); ++k) dof_of[interior[k]] = static_cast<int>(k);
  const Eigen::MatrixXd H = Eigen::MatrixXd(psi_hessian(m, f, dof_of, interior.size()));
  CHECK((H - H.transpose()).norm() <= 1e-12 * H.norm());
  const double step = 1e-6;
  for (std::size_t c = 0; c < interior.size(); ++c) {
    Field p = f, q = f;
    p.values[interior[c]] += step;
    q.values[interior[c]] -= step;
    const Eigen::VectorXd col = (psi_gradient(m, p) - psi_gradient(m, q)) / (2.0 * step);
    for (std::size_t r = 0; r < interior.size(); ++r)
      CHECK(std::abs(col[interior[r]] - H(r, c)) <= 1e-6 * (1.0 + H.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("script_f and total energy") {
  const Mesh m = build_interval_mesh(-1.0, 1.0, 256);
  const auto ns = catalog::neg_sign();
  CHECK(script_f(m, Field::zero(m), ns) == 0.0);
  CHECK(script_f(m, cone_1d(m), ns) == doctest::Approx(-1.0).epsilon(1e-3));

  std::mt19937_64 rng(5);
  const Field b = random_bump(m, rng);
  const double direct = (m.node_weights().array() * b.values.array()).sum();
  CHECK(script_f(m, b, catalog::constant(1.0)) == doctest::Approx(direct).epsilon(1e-12));

  CHECK(total_energy(m, Field::zero(m), ns) == 0.0);
  const double t = 1.0 / std::sqrt(5.0);
  CHECK(std::abs(total_energy(m, cone_1d(m, t), ns) - (2.0 - std::sqrt(5.0))) <= 2e-3);
  CHECK(total_energy(m, cone_1d(m, 2.0), ns) == kInfinity);

  // The one-parameter energy 2(1 - sqrt(1 - t^2)) - t is smallest at 1/sqrt(5).
  for (double s : {0.3, 0.4, 0.5, 0.6})
    CHECK(total_energy(m, cone_1d(m, s), ns) >= total_energy(m, cone_1d(m, t), ns) - 1e-12);
}

TEST_CASE("feasibility") {
  const Mesh m = build_interval_mesh(-1.0, 1.0, 256);
  const auto z = feasibility(m, Field::zero(m));
  CHECK(z.in_K0);
  CHECK(z.max_element_gradient_norm == 0.0);
  const auto c = feasibility(m, cone_1d(m));
  CHECK(c.in_K0);
  CHECK(c.max_element_gradient_norm == doctest::Approx(1.0).epsilon(1e-12));
  const auto c2 = feasibility(m, cone_1d(m, 2.0));
  CHECK_FALSE(c2.in_K0);
  CHECK(c2.max_element_gradient_norm == doctest::Approx(2.0).epsilon(1e-12));

  Field lifted{Eigen::VectorXd::Constant(m.num_nodes(), 0.1), false};
  const auto l = feasibility(m, lifted);
  CHECK_FALSE(l.in_K0);
  CHECK(l.boundary_violation == doctest::Approx(0.1));
}

TEST_CASE("bounds") {
  const auto interval = bounds(build_interval_mesh(-1.0, 1.0, 256), catalog::neg_sign());
  CHECK(interval.c_omega == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(interval.C1 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(interval.C2 == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(interval.lower_bound == doctest::Approx(-3.0).epsilon(1e-12));

  const auto none = bounds(build_interval_mesh(-1.0, 1.0, 16), catalog::constant(0.0));
  CHECK(none.C1 == 0.0);
  CHECK(none.C2 == 0.0);
  CHECK(none.lower_bound == 0.0);

  const auto square = bounds(build_rectangle_mesh(1.0, 1.0, 8, 8), catalog::neg_sign());
  CHECK(square.c_omega == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(square.C2 == doctest::Approx(0.625).epsilon(1e-12));
  CHECK(square.lower_bound == doctest::Approx(-0.625).epsilon(1e-12));
}

TEST_CASE("psi is convex and bounded by the volume on K0") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const Mesh& m : {build_interval_mesh(-1, 1, 64), build_disk_mesh(1.0, 2)}) {
    for (int k = 0; k < 200; ++k) {
      const Field a = random_bump(m, rng, 1.0), b = random_bump(m, rng, 1.0);
      const double lam = unit(rng);
      const Field mix{lam * a.values + (1.0 - lam) * b.values, true};
      const double pa = psi(m, a), pb = psi(m, b), pm = psi(m, mix);
      CHECK(pm <= lam * pa + (1.0 - lam) * pb + 1e-12);
      CHECK(pa >= 0.0);
      CHECK(pa <= m.volume() * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("energy respects the lower bound and F is Lipschitz on K0") {
  std::mt19937_64 rng(7);
  const Mesh m = build_interval_mesh(-1, 1, 64);
  const Nonlinearity specs[] = {catalog::neg_sign(), catalog::constant(2.0),
                                catalog::power(-1.0, 3.0), catalog::step(-1.0, 1.0, 0.2)};
  for (const auto& spec : specs) {
    const auto b = bounds(m, spec);
    for (int k = 0; k < 100; ++k) {
      const Field u = random_bump(m, rng, 1.0), v = random_bump(m, rng, 1.0);
      CHECK(total_energy(m, u, spec) >= b.lower_bound);
      const double gap = std::abs(script_f(m, u, spec) - script_f(m, v, spec));
      CHECK(gap <= b.C1 * m.volume() * (u.values - v.values).lpNorm<Eigen::Infinity>() + 1e-12);
    }
  }
}
