#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "consim/errors.hpp"

namespace consim {

/// Closed interval [f(x-), f(x+)]; degenerate at continuity points.
struct FilippovInterval {
  double lo = 0.0;
  double hi = 0.0;

  bool degenerate() const { return lo == hi; }
  bool contains(double v) const { return lo <= v && v <= hi; }
  double midpoint() const { return 0.5 * (lo + hi); }
};

/// Common part [max lo, min hi], or nullopt when the parts are disjoint.
/// Throws EmptyList on an empty input.
std::optional<FilippovInterval> intersect_intervals(const std::vector<FilippovInterval>& parts);

// Serializable identity of a nonlinearity. Two MonotoneFn are considered
// identical (for the homogeneity test) iff their descriptors compare equal.
struct FnDescriptor {
  std::string kind;  // symmetric | asymmetric | logarithmic | sign | saturation | custom | user
  double delta = 0.0;
  double scale = 0.0;
  std::vector<std::pair<double, double>> breakpoints;
  std::string label;  // identity tag for opaque user functions

  friend bool operator==(const FnDescriptor&, const FnDescriptor&) = default;
};

struct QuantizerParams {
  double delta = 1.0;  // quantization step, > 0
};

// A scalar increasing function with queryable one-sided limits, an exact (or
// quadrature-backed) antiderivative with primitive(0) = 0, and a locator for
// its discontinuity points. Immutable; cheap to copy.
class MonotoneFn {
public:
  struct Impl;

  explicit MonotoneFn(std::shared_ptr<const Impl> impl);

  double evaluate(double x) const;
  double left_limit(double x) const;
  double right_limit(double x) const;
  /// F(x) = integral of evaluate from 0 to x; convex, F(0) = 0.
  double primitive(double x) const;
  /// Discontinuity points inside [lo, hi], ascending. Built-ins are exact;
  /// opaque user functions may return nothing.
  std::vector<double> discontinuities_in(double lo, double hi) const;
  const FnDescriptor& descriptor() const;
  /// Sign condition probed at +-1e6: f(+probe) > 0 and f(-probe) < 0.
  /// Failure is a configuration warning for callers, not an error.
  bool assumption1_ok() const;

private:
  std::shared_ptr<const Impl> impl_;
};

/// q(z) = floor(z/delta + 1/2) * delta; jumps at (k + 1/2) * delta.
MonotoneFn quantizer_symmetric(QuantizerParams p);
/// q(z) = floor(z/delta) * delta; jumps at k * delta.
MonotoneFn quantizer_asymmetric(QuantizerParams p);
/// q(z) = sign(z) exp(q_sym(ln|z|)), q(0) = 0; jumps at +-exp((k + 1/2) delta).
MonotoneFn quantizer_logarithmic(QuantizerParams p);
/// scale * sign(x) with value 0 at the origin.
MonotoneFn sign_fn(double scale);
/// clamp(x, -scale, scale).
MonotoneFn saturation_fn(double scale);
/// Monotone piecewise-linear interpolant through (x, y) knots; a repeated
/// abscissa with increasing ordinates encodes a jump. Constant extension
/// beyond the outermost knots. Descriptor kind "custom".
MonotoneFn piecewise_fn(std::vector<std::pair<double, double>> breakpoints);

struct UserFnOptions {
  std::function<double(double)> left_limit;   // defaults to evaluate
  std::function<double(double)> right_limit;  // defaults to evaluate
  std::function<std::vector<double>(double, double)> discontinuities;  // defaults to none
  std::function<double(double)> primitive;  // defaults to adaptive quadrature, tol 1e-10
};

/// Opaque user-supplied function. Without a discontinuity locator the
/// integrator falls back to chatter detection for this coordinate.
MonotoneFn user_fn(std::string label, std::function<double(double)> evaluate,
                   UserFnOptions options = {});

/// [left_limit(x), right_limit(x)].
FilippovInterval filippov_interval(const MonotoneFn& f, double x);

/// F(x) = integral of f from 0 to x. Throws QuadratureFailure only for
/// quadrature-backed user functions.
double primitive_value(const MonotoneFn& f, double x);

}  // namespace consim
