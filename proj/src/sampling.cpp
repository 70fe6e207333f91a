#include "fmc/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fmc/energy.hpp"

namespace fmc {

Field scale_to_gradient(const Mesh& mesh, Field field, double target) {
  const double g = max_element_gradient_norm(mesh, field.values);
  if (g > 0.0) field.values *= target / g;
  return field;
}

Field random_bump(const Mesh& mesh, std::mt19937_64& rng,
                  double max_gradient) {
  Point lo{0.0, 0.0, 0.0}, hi{0.0, 0.0, 0.0};
  for (int c = 0; c < mesh.dim(); ++c) {
    lo[c] = std::numeric_limits<double>::infinity();
    hi[c] = -lo[c];
    for (const auto& p : mesh.nodes()) {
      lo[c] = std::min(lo[c], p[c]);
      hi[c] = std::max(hi[c], p[c]);
    }
  }
  double diam = 0.0;
  for (int c = 0; c < mesh.dim(); ++c) diam = std::max(diam, hi[c] - lo[c]);

  std::uniform_int_distribution<int> count(1, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> amp(0.0, 1.0);

  struct Gaussian {
    Point centre;
    double width;
    double amplitude;
  };
  std::vector<Gaussian> parts(static_cast<std::size_t>(count(rng)));
  for (auto& g : parts) {
    for (int c = 0; c < 3; ++c)
      g.centre[c] = c < mesh.dim() ? lo[c] + (hi[c] - lo[c]) * unit(rng) : 0.0;
    g.width = diam * (0.1 + 0.4 * unit(rng));
    g.amplitude = amp(rng);
  }

  Field f = Field::interpolate(mesh, [&](const Point& x) {
    double v = 0.0;
    for (const auto& g : parts) {
      double r2 = 0.0;
      for (int c = 0; c < 3; ++c) r2 += (x[c] - g.centre[c]) * (x[c] - g.centre[c]);
      v += g.amplitude * std::exp(-r2 / (g.width * g.width));
    }
    return v;
  });
  f = with_zero_boundary(mesh, std::move(f));
  // Strictly positive scale so that trial fields never collapse to zero.
  const double target = max_gradient * (0.01 + 0.99 * unit(rng));
  return scale_to_gradient(mesh, std::move(f), target);
}

Field boundary_cone(const Mesh& mesh) {
  Field f = Field::interpolate(mesh, [&](const Point& x) {
    double best = std::numeric_limits<double>::infinity();
    for (int b : mesh.boundary_nodes()) {
      const auto& p = mesh.node(b);
      const double d = std::sqrt((x[0] - p[0]) * (x[0] - p[0]) +
                                 (x[1] - p[1]) * (x[1] - p[1]) +
                                 (x[2] - p[2]) * (x[2] - p[2]));
      best = std::min(best, d);
    }
    return std::isfinite(best) ? best : 0.0;
  });
  f = with_zero_boundary(mesh, std::move(f));
  const double g = max_element_gradient_norm(mesh, f.values);
  if (g > 1.0) f.values /= g;
  return f;
}

}  // namespace fmc
