#include "fmc/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <utility>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace fmc {

SelectionRule parse_selection_rule(const std::string& name) {
  if (name == "lo" || name == "lower") return SelectionRule::lower;
  if (name == "mid" || name == "midpoint") return SelectionRule::midpoint;
  if (name == "hi" || name == "upper") return SelectionRule::upper;
  throw std::invalid_argument("unknown selection rule '" + name +
                              "' (expected lo, mid or hi)");
}

std::string to_string(SelectionRule rule) {
  switch (rule) {
    case SelectionRule::lower: return "lo";
    case SelectionRule::midpoint: return "mid";
    case SelectionRule::upper: return "hi";
  }
  return "mid";
}

namespace {

void check_growth_constants(double C, double q) {
  if (!(C >= 0.0)) throw std::invalid_argument("growth constant C must be >= 0");
  if (!(q > 1.0) || !std::isfinite(q))
    throw std::invalid_argument("growth exponent q must lie in (1, inf)");
}

constexpr int kMaxQuadratureSplits = 4000;
constexpr double kQuadratureRelTol = 1e-10;

double gauss7(const std::function<double(double)>& g, double a, double b) {
  return boost::math::quadrature::gauss<double, 7>::integrate(g, a, b);
}

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

// One 15-point Kronrod panel; the error is its distance to the embedded
// 7-point Gauss value.
Panel make_panel(const std::function<double(double)>& g, double a, double b) {
  // Boost reports the error relative to the L1 norm of the panel.
  double error = 0.0, l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      g, a, b, 0, 0.0, &error, &l1);
  return {a, b, value, error * l1};
}

// Global adaptive scheme: keep splitting the panel with the largest error
// estimate until the summed estimate meets the tolerance.
double integrate_piece(const std::function<double(double)>& g, double a,
                       double b) {
  if (a == b) return 0.0;
  const double mass = gauss7([&](double t) { return std::abs(g(t)); }, a, b);
  const double abs_tol =
      kQuadratureRelTol * std::max(mass, std::numeric_limits<double>::min());
  std::priority_queue<Panel> panels;
  panels.push(make_panel(g, a, b));
  double error = panels.top().error;
  for (int split = 0; error > abs_tol && split < kMaxQuadratureSplits; ++split) {
    const Panel worst = panels.top();
    const double m = 0.5 * (worst.a + worst.b);
    if (!(m > worst.a && m < worst.b)) break;
    panels.pop();
    const Panel left = make_panel(g, worst.a, m), right = make_panel(g, m, worst.b);
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
  }
  double value = 0.0;
  error = 0.0;
  for (; !panels.empty(); panels.pop()) {
    value += panels.top().value;
    error += panels.top().error;
  }
  if (error > abs_tol || !std::isfinite(value)) {
    const double achieved = std::isfinite(value) ? error / std::max(mass, 1e-300)
                                                 : std::numeric_limits<double>::infinity();
    throw QuadratureError("primitive quadrature did not converge on [" +
                              std::to_string(a) + ", " + std::to_string(b) +
                              "]",
                          achieved);
  }
  return value;
}

}  // namespace

Nonlinearity Nonlinearity::black_box(std::string name, Rule f, double growth_C,
                                     double growth_q) {
  check_growth_constants(growth_C, growth_q);
  Nonlinearity n;
  n.name_ = std::move(name);
  n.f_ = std::move(f);
  n.exact_ = false;
  n.growth_C_ = growth_C;
  n.growth_q_ = growth_q;
  return n;
}

Nonlinearity Nonlinearity::with_jumps(std::string name, Rule f,
                                      std::vector<JumpDescriptor> jumps,
                                      double growth_C, double growth_q) {
  check_growth_constants(growth_C, growth_q);
  for (const auto& j : jumps)
    if (!j.level || !j.below || !j.above)
      throw std::invalid_argument("jump descriptor with an empty rule");
  Nonlinearity n;
  n.name_ = std::move(name);
  n.f_ = std::move(f);
  n.jumps_ = std::move(jumps);
  n.exact_ = true;
  n.growth_C_ = growth_C;
  n.growth_q_ = growth_q;
  return n;
}

const JumpDescriptor* Nonlinearity::jump_at(const Point& x, double s) const {
  for (const auto& j : jumps_)
    if (j.level(x) == s) return &j;
  return nullptr;
}

Bracket envelope(const Nonlinearity& spec, const Point& x, double s,
                 const EstimatorOptions& est) {
  if (spec.has_jump_metadata()) {
    if (const auto* j = spec.jump_at(x, s)) {
      const double a = j->below(x), b = j->above(x);
      return {std::min(a, b), std::max(a, b), false};
    }
    const double v = spec.evaluate(x, s);
    return {v, v, false};
  }

  Bracket out{0.0, 0.0, true};
  const int n = std::max(est.samples, 1);
  for (double delta : est.deltas) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int k = 0; k < n; ++k) {
      // Symmetric open grid on (s - delta, s + delta); s itself is skipped
      // when the sample count is even.
      const double t = s + delta * (2.0 * (k + 0.5) / n - 1.0);
      const double v = spec.evaluate(x, t);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    out.lo = lo;
    out.hi = hi;
  }
  if (est.deltas.empty()) out.lo = out.hi = spec.evaluate(x, s);
  return out;
}

double lower_envelope(const Nonlinearity& spec, const Point& x, double s) {
  return envelope(spec, x, s).lo;
}

double upper_envelope(const Nonlinearity& spec, const Point& x, double s) {
  return envelope(spec, x, s).hi;
}

double selection(const Nonlinearity& spec, const Point& x, double s,
                 SelectionRule rule) {
  if (const auto* j = spec.jump_at(x, s)) {
    const double a = j->below(x), b = j->above(x);
    switch (rule) {
      case SelectionRule::lower: return std::min(a, b);
      case SelectionRule::upper: return std::max(a, b);
      case SelectionRule::midpoint: return 0.5 * (a + b);
    }
  }
  return spec.evaluate(x, s);
}

double integrate_rule(const Nonlinearity& spec, const Point& x, double s1,
                      double s2) {
  if (s1 == s2) return 0.0;
  const double sign = s2 > s1 ? 1.0 : -1.0;
  const double lo = std::min(s1, s2), hi = std::max(s1, s2);

  std::vector<double> cuts{lo};
  // Power-type rules are not smooth at s = 0.
  if (lo < 0.0 && hi > 0.0) cuts.push_back(0.0);
  for (const auto& j : spec.jumps()) {
    const double level = j.level(x);
    if (level > lo && level < hi) cuts.push_back(level);
  }
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());

  const auto g = [&](double t) { return spec.evaluate(x, t); };
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
    total += integrate_piece(g, cuts[k], cuts[k + 1]);
  return sign * total;
}

double primitive(const Nonlinearity& spec, const Point& x, double s) {
  return integrate_rule(spec, x, 0.0, s);
}

namespace {

Point sample_point(const SampleBox& box, std::mt19937_64& rng) {
  Point x{};
  for (int c = 0; c < 3; ++c) {
    std::uniform_real_distribution<double> u(box.x_lo[c],
                                             std::max(box.x_lo[c], box.x_hi[c]));
    x[c] = box.x_lo[c] == box.x_hi[c] ? box.x_lo[c] : u(rng);
  }
  return x;
}

}  // namespace

GrowthReport growth_check(const Nonlinearity& spec, const SampleBox& box,
                          std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> us(box.s_lo, box.s_hi);
  GrowthReport rep;
  rep.samples = count;
  const double C = spec.growth_C(), q = spec.growth_q();
  for (std::size_t k = 0; k < count; ++k) {
    const Point x = sample_point(box, rng);
    const double s = us(rng);
    const double f = std::abs(spec.evaluate(x, s));
    const double bound = C * (1.0 + std::pow(std::abs(s), q - 1.0));
    double ratio = 0.0;
    if (bound > 0.0)
      ratio = f / bound;
    else if (f > 0.0)
      ratio = std::numeric_limits<double>::infinity();
    if (k == 0 || ratio > rep.max_ratio) {
      rep.max_ratio = ratio;
      rep.worst_x = x;
      rep.worst_s = s;
    }
  }
  rep.passed = rep.max_ratio <= 1.0;
  return rep;
}

JumpAudit audit_jumps(const Nonlinearity& spec, const SampleBox& box,
                      std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> us(box.s_lo, box.s_hi);
  JumpAudit audit;
  const double window = 1e-3 * std::max(1.0, box.s_hi - box.s_lo);
  for (std::size_t k = 0; k < count; ++k) {
    const Point x = sample_point(box, rng);
    for (const auto& j : spec.jumps())
      if (j.below(x) == j.above(x)) ++audit.redundant_jumps;
    if (!spec.has_jump_metadata()) continue;
    double a = us(rng), b = a + window;
    bool straddles = false;
    for (const auto& j : spec.jumps()) {
      const double level = j.level(x);
      if (level >= a && level <= b) straddles = true;
    }
    if (straddles) continue;
    // Halve towards the larger change; a jump keeps its size, a smooth
    // change shrinks with the width.
    double fa = spec.evaluate(x, a), fb = spec.evaluate(x, b);
    for (int h = 0; h < 30 && fa != fb; ++h) {
      const double m = 0.5 * (a + b), fm = spec.evaluate(x, m);
      if (std::abs(fm - fa) >= std::abs(fb - fm)) {
        b = m;
        fb = fm;
      } else {
        a = m;
        fa = fm;
      }
    }
    if (std::abs(fb - fa) > 1e-2 * (1.0 + std::abs(fa))) ++audit.continuity_violations;
  }
  return audit;
}

namespace catalog {

Nonlinearity constant(double a) {
  return Nonlinearity::with_jumps(
      "constant", [a](const Point&, double) { return a; }, {}, std::abs(a),
      2.0);
}

Nonlinearity neg_sign() {
  return Nonlinearity::with_jumps(
      "neg_sign",
      [](const Point&, double s) {
        return s > 0.0 ? -1.0 : (s < 0.0 ? 1.0 : 0.0);
      },
      {JumpDescriptor{[](const Point&) { return 0.0; },
                      [](const Point&) { return 1.0; },
                      [](const Point&) { return -1.0; }}},
      1.0, 2.0);
}

Nonlinearity step(double a, double b, double s0) {
  std::vector<JumpDescriptor> jumps;
  if (a != b)
    jumps.push_back({[s0](const Point&) { return s0; },
                     [a](const Point&) { return a; },
                     [b](const Point&) { return b; }});
  // Growth with q = 2 needs C (1 + |s|) >= max(|a|, |b|).
  return Nonlinearity::with_jumps(
      "step",
      [a, b, s0](const Point&, double s) {
        return s < s0 ? a : (s > s0 ? b : 0.5 * (a + b));
      },
      std::move(jumps), std::max(std::abs(a), std::abs(b)), 2.0);
}

Nonlinearity heaviside() {
  auto n = step(0.0, 1.0, 0.0);
  return Nonlinearity::with_jumps("heaviside",
                                  [n](const Point& x, double s) {
                                    return n.evaluate(x, s);
                                  },
                                  n.jumps(), 1.0, 2.0);
}

Nonlinearity power(double c, double r) {
  if (!(r > 1.0)) throw std::invalid_argument("power(c, r) needs r > 1");
  return Nonlinearity::with_jumps(
      "power",
      [c, r](const Point&, double s) {
        if (s == 0.0) return 0.0;
        return c * std::pow(std::abs(s), r - 1.0) * (s > 0.0 ? 1.0 : -1.0);
      },
      {}, std::abs(c), r);
}

Nonlinearity by_name(const std::string& name,
                     const std::map<std::string, double>& params) {
  auto get = [&](const std::string& key, std::optional<double> fallback =
                                             std::nullopt) {
    if (auto it = params.find(key); it != params.end()) return it->second;
    if (fallback) return *fallback;
    throw std::invalid_argument("nonlinearity '" + name +
                                "' needs parameter '" + key + "'");
  };
  if (name == "constant") return constant(get("a"));
  if (name == "zero") return constant(0.0);
  if (name == "neg_sign") return neg_sign();
  if (name == "heaviside") return heaviside();
  if (name == "step") return step(get("a"), get("b"), get("s0", 0.0));
  if (name == "power") return power(get("c"), get("r"));
  throw std::invalid_argument("unknown nonlinearity '" + name + "'");
}

}  // namespace catalog

}  // namespace fmc
