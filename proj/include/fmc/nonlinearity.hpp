#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fmc/mesh.hpp"

namespace fmc {

/// Which point of the bracket [lower, upper] to use at a jump level.
enum class SelectionRule { lower, midpoint, upper };

SelectionRule parse_selection_rule(const std::string& name);
std::string to_string(SelectionRule rule);

/// Interval [lo, hi] between the essential lower and upper envelopes of f.
struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
  /// True when produced by the sampling estimator instead of jump metadata.
  bool approximate = false;

  bool contains(double v) const { return lo <= v && v <= hi; }
  double distance(double v) const {
    return v < lo ? lo - v : (v > hi ? v - hi : 0.0);
  }
};

/// One discontinuity surface s = level(x) of f(x, .), with one-sided limits
/// from below and from above the level.
struct JumpDescriptor {
  std::function<double(const Point&)> level;
  std::function<double(const Point&)> below;
  std::function<double(const Point&)> above;
};

/// The measurable right-hand side f(x, s) together with its jump structure
/// and the growth constants (C, q) of |f(x,s)| <= C (1 + |s|^(q-1)).
///
/// A spec built with jump metadata answers envelope queries exactly (an
/// empty jump list declares f continuous in s). A spec built without it is a
/// black box and its envelopes are estimated by sampling.
class Nonlinearity {
 public:
  using Rule = std::function<double(const Point&, double)>;

  /// Black-box rule; envelopes are estimated.
  static Nonlinearity black_box(std::string name, Rule f, double growth_C,
                                double growth_q);
  /// Rule with declared jump levels; envelopes are exact.
  static Nonlinearity with_jumps(std::string name, Rule f,
                                 std::vector<JumpDescriptor> jumps,
                                 double growth_C, double growth_q);

  const std::string& name() const { return name_; }
  double evaluate(const Point& x, double s) const { return f_(x, s); }
  bool has_jump_metadata() const { return exact_; }
  const std::vector<JumpDescriptor>& jumps() const { return jumps_; }
  double growth_C() const { return growth_C_; }
  double growth_q() const { return growth_q_; }

  /// The declared jump whose level at x equals s exactly, if any.
  const JumpDescriptor* jump_at(const Point& x, double s) const;

 private:
  Nonlinearity() = default;

  std::string name_;
  Rule f_;
  std::vector<JumpDescriptor> jumps_;
  bool exact_ = false;
  double growth_C_ = 0.0;
  double growth_q_ = 2.0;
};

/// Sampling parameters for black-box envelopes: for each radius in `deltas`
/// the inf/sup of f over `samples` points with |t - s| < delta; the value at
/// the last radius is reported.
struct EstimatorOptions {
  std::vector<double> deltas{1e-2, 1e-3, 1e-4};
  int samples = 64;
};

Bracket envelope(const Nonlinearity& spec, const Point& x, double s,
                 const EstimatorOptions& est = {});
double lower_envelope(const Nonlinearity& spec, const Point& x, double s);
double upper_envelope(const Nonlinearity& spec, const Point& x, double s);

/// Returns f(x,s) off jump levels; at a declared jump level returns the
/// bracket point chosen by `rule`.
double selection(const Nonlinearity& spec, const Point& x, double s,
                 SelectionRule rule = SelectionRule::midpoint);

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved_tolerance() const { return achieved_; }

 private:
  double achieved_;
};

/// F(x, s) = integral of f(x, .) over [0, s], split at the declared jump
/// levels and integrated piecewise with adaptive 7-point Gauss rules.
double primitive(const Nonlinearity& spec, const Point& x, double s);

/// Integral of f(x, .) over [s1, s2] (negative when s2 < s1).
double integrate_rule(const Nonlinearity& spec, const Point& x, double s1,
                      double s2);

struct SampleBox {
  Point x_lo{0.0, 0.0, 0.0};
  Point x_hi{0.0, 0.0, 0.0};
  double s_lo = -1.0;
  double s_hi = 1.0;
};

struct GrowthReport {
  double max_ratio = 0.0;
  bool passed = true;
  Point worst_x{0.0, 0.0, 0.0};
  double worst_s = 0.0;
  std::size_t samples = 0;
};

/// Samples (x, s) uniformly in the box and reports the largest value of
/// |f| / (C (1 + |s|^(q-1))).
GrowthReport growth_check(const Nonlinearity& spec, const SampleBox& box,
                          std::size_t count, std::uint64_t seed = 0);

/// Spot checks of the declared contract: jumps with equal one-sided limits
/// and visible discontinuities of f between declared levels.
struct JumpAudit {
  std::size_t redundant_jumps = 0;
  std::size_t continuity_violations = 0;
  bool ok() const { return redundant_jumps == 0 && continuity_violations == 0; }
};
JumpAudit audit_jumps(const Nonlinearity& spec, const SampleBox& box,
                      std::size_t count, std::uint64_t seed = 0);

namespace catalog {

/// f(s) = a.
Nonlinearity constant(double a);
/// f(s) = -sign(s).
Nonlinearity neg_sign();
/// f(s) = a for s < s0, b for s > s0.
Nonlinearity step(double a, double b, double s0);
/// step(0, 1, 0).
Nonlinearity heaviside();
/// f(s) = c |s|^(r-1) sign(s), r > 1.
Nonlinearity power(double c, double r);

/// Looks up a catalog entry; parameters are keyed by their names above.
Nonlinearity by_name(const std::string& name,
                     const std::map<std::string, double>& params);

}  // namespace catalog

}  // namespace fmc
