#include "fmc/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

namespace fmc {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kPad = 40.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Blue -> white -> red, t in [0, 1].
std::string colour(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const std::array<double, 3> lo{0.23, 0.30, 0.75}, mid{0.87, 0.87, 0.87},
      hi{0.71, 0.02, 0.15};
  std::array<double, 3> c{};
  for (int k = 0; k < 3; ++k)
    c[k] = t < 0.5 ? lo[k] + (mid[k] - lo[k]) * 2.0 * t
                   : mid[k] + (hi[k] - mid[k]) * (2.0 * t - 1.0);
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(c[0] * 255),
                static_cast<int>(c[1] * 255), static_cast<int>(c[2] * 255));
  return buf;
}

std::string render_1d(const Mesh& mesh, const Field& u,
                      const Nonlinearity& spec) {
  std::vector<std::size_t> order(mesh.num_nodes());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    return mesh.node(a)[0] < mesh.node(b)[0];
  });
  const double x0 = mesh.node(order.front())[0], x1 = mesh.node(order.back())[0];

  // Vertical range covers u and any jump level visible inside it.
  double lo = u.values.minCoeff(), hi = u.values.maxCoeff();
  std::vector<std::vector<double>> levels;
  for (const auto& j : spec.jumps()) {
    std::vector<double> lv;
    for (auto i : order) lv.push_back(j.level(mesh.node(i)));
    const auto [mn, mx] = std::minmax_element(lv.begin(), lv.end());
    if (*mx >= lo - 1.0 && *mn <= hi + 1.0) {
      lo = std::min(lo, *mn);
      hi = std::max(hi, *mx);
      levels.push_back(std::move(lv));
    }
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double span = hi - lo;
  lo -= 0.05 * span;
  hi += 0.05 * span;

  auto px = [&](double x) { return kPad + (x - x0) / (x1 - x0) * (kWidth - 2 * kPad); };
  auto py = [&](double y) { return kHeight - kPad - (y - lo) / (hi - lo) * (kHeight - 2 * kPad); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
      << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<rect x=\"" << kPad << "\" y=\"" << kPad << "\" width=\""
      << kWidth - 2 * kPad << "\" height=\"" << kHeight - 2 * kPad
      << "\" fill=\"none\" stroke=\"#888\"/>\n";
  if (lo < 0.0 && hi > 0.0)
    out << "<line x1=\"" << kPad << "\" y1=\"" << num(py(0.0)) << "\" x2=\""
        << kWidth - kPad << "\" y2=\"" << num(py(0.0))
        << "\" stroke=\"#ccc\"/>\n";
  for (const auto& lv : levels) {
    out << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-dasharray=\"6 4\" points=\"";
    for (std::size_t k = 0; k < order.size(); ++k)
      out << num(px(mesh.node(order[k])[0])) << ',' << num(py(lv[k])) << ' ';
    out << "\"/>\n";
  }
  out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (auto i : order)
    out << num(px(mesh.node(i)[0])) << ',' << num(py(u.values[static_cast<Eigen::Index>(i)])) << ' ';
  out << "\"/>\n";
  out << "<text x=\"" << kPad << "\" y=\"" << kPad - 10 << "\" font-size=\"14\">u(x), "
      << spec.name() << "  [" << num(u.values.minCoeff()) << ", "
      << num(u.values.maxCoeff()) << "]</text>\n";
  out << "</svg>\n";
  return out.str();
}

void panel_2d(std::ostringstream& out, const Mesh& mesh,
              const Eigen::VectorXd& values, double offset_x,
              const std::string& title) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& p : mesh.nodes()) {
    xmin = std::min(xmin, p[0]);
    xmax = std::max(xmax, p[0]);
    ymin = std::min(ymin, p[1]);
    ymax = std::max(ymax, p[1]);
  }
  const double size = kHeight - 2 * kPad;
  const double scale = size / std::max(xmax - xmin, ymax - ymin);
  auto px = [&](double x) { return offset_x + kPad + (x - xmin) * scale; };
  auto py = [&](double y) { return kHeight - kPad - (y - ymin) * scale; };
  const double vmin = values.minCoeff(), vmax = values.maxCoeff();
  const double range = vmax - vmin > 1e-300 ? vmax - vmin : 1.0;

  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto verts = mesh.element(e);
    double mean = 0.0;
    for (int v : verts) mean += values[v];
    mean /= static_cast<double>(verts.size());
    const std::string fill = colour((mean - vmin) / range);
    out << "<polygon fill=\"" << fill << "\" stroke=\"" << fill << "\" points=\"";
    for (int v : verts) out << num(px(mesh.node(static_cast<std::size_t>(v))[0])) << ','
                            << num(py(mesh.node(static_cast<std::size_t>(v))[1])) << ' ';
    out << "\"/>\n";
  }
  out << "<text x=\"" << offset_x + kPad << "\" y=\"" << kPad - 10
      << "\" font-size=\"14\">" << title << "  [" << num(vmin) << ", "
      << num(vmax) << "]</text>\n";
}

std::string render_2d(const Mesh& mesh, const Field& u,
                      const Eigen::VectorXd& zeta) {
  const double panel = kHeight;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * panel
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << 2 * panel << ' '
      << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  panel_2d(out, mesh, u.values, 0.0, "u");
  panel_2d(out, mesh, zeta, panel, "zeta");
  out << "</svg>\n";
  return out.str();
}

}  // namespace

std::string render_svg(const Mesh& mesh, const Field& u,
                       const Eigen::VectorXd& zeta, const Nonlinearity& spec) {
  check_field(mesh, u);
  if (mesh.dim() == 1) return render_1d(mesh, u, spec);
  if (mesh.dim() == 2) return render_2d(mesh, u, zeta);
  return {};
}

bool write_svg(const Mesh& mesh, const Field& u, const Eigen::VectorXd& zeta,
               const Nonlinearity& spec, const std::filesystem::path& path) {
  const std::string svg = render_svg(mesh, u, zeta, spec);
  if (svg.empty()) return false;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << svg;
  return true;
}

}  // namespace fmc
