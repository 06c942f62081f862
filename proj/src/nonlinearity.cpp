#include "consim/nonlinearity.hpp"

#include <algorithm>
#include <cmath>

namespace consim {

namespace {

// Inputs this close to a discontinuity are treated as sitting on it when
// one-sided limits are computed; keeps interval endpoints stable under
// floating rounding.
constexpr double kSnapTol = 1e-12;
constexpr double kAssumptionProbe = 1e6;
// Truncation of the logarithmic quantizer's jump points accumulating at 0.
constexpr double kLogLocatorFloor = 1e-12;

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

struct MonotoneFn::Impl {
  virtual ~Impl() = default;
  virtual double evaluate(double x) const = 0;
  virtual double left_limit(double x) const = 0;
  virtual double right_limit(double x) const = 0;
  virtual double primitive(double x) const = 0;
  virtual std::vector<double> discontinuities_in(double lo, double hi) const = 0;

  FnDescriptor descriptor;
  bool assumption1 = true;

  void probe_assumption1() {
    assumption1 = evaluate(kAssumptionProbe) > 0.0 && evaluate(-kAssumptionProbe) < 0.0;
  }
};

MonotoneFn::MonotoneFn(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
double MonotoneFn::evaluate(double x) const { return impl_->evaluate(x); }
double MonotoneFn::left_limit(double x) const { return impl_->left_limit(x); }
double MonotoneFn::right_limit(double x) const { return impl_->right_limit(x); }
double MonotoneFn::primitive(double x) const { return impl_->primitive(x); }
std::vector<double> MonotoneFn::discontinuities_in(double lo, double hi) const {
  if (!(lo <= hi)) return {};
  return impl_->discontinuities_in(lo, hi);
}
const FnDescriptor& MonotoneFn::descriptor() const { return impl_->descriptor; }
bool MonotoneFn::assumption1_ok() const { return impl_->assumption1; }

std::optional<FilippovInterval> intersect_intervals(const std::vector<FilippovInterval>& parts) {
  if (parts.empty()) raise(ErrorKind::EmptyList, "interval intersection needs at least one interval");
  FilippovInterval acc = parts.front();
  for (size_t i = 1; i < parts.size(); ++i) {
    acc.lo = std::max(acc.lo, parts[i].lo);
    acc.hi = std::min(acc.hi, parts[i].hi);
  }
  if (acc.lo > acc.hi) return std::nullopt;
  return acc;
}

FilippovInterval filippov_interval(const MonotoneFn& f, double x) {
  return {f.left_limit(x), f.right_limit(x)};
}

double primitive_value(const MonotoneFn& f, double x) { return f.primitive(x); }

namespace {

struct SymmetricQuantizer final : MonotoneFn::Impl {
  double delta;

  explicit SymmetricQuantizer(double d) : delta(d) {
    descriptor.kind = "symmetric";
    descriptor.delta = d;
    probe_assumption1();
  }

  // Jump index k such that x is nearest to (k + 1/2) * delta.
  double nearest_jump_index(double x) const { return std::round(x / delta - 0.5); }

  bool at_jump(double x, double& k) const {
    k = nearest_jump_index(x);
    return std::abs(x - (k + 0.5) * delta) <= kSnapTol;
  }

  double evaluate(double x) const override { return std::floor(x / delta + 0.5) * delta; }

  double left_limit(double x) const override {
    double k;
    return at_jump(x, k) ? k * delta : evaluate(x);
  }

  double right_limit(double x) const override {
    double k;
    return at_jump(x, k) ? (k + 1.0) * delta : evaluate(x);
  }

  double primitive(double x) const override {
    // Even function of x: the quantizer is odd off a null set.
    double y = std::abs(x);
    double m = std::floor(y / delta + 0.5);
    if (m <= 0.0) return 0.0;
    return delta * delta * m * (m - 1.0) * 0.5 + m * delta * (y - (m - 0.5) * delta);
  }

  std::vector<double> discontinuities_in(double lo, double hi) const override {
    std::vector<double> out;
    double tol = kSnapTol / delta;
    double k0 = std::ceil(lo / delta - 0.5 - tol);
    double k1 = std::floor(hi / delta - 0.5 + tol);
    for (double k = k0; k <= k1; k += 1.0) out.push_back((k + 0.5) * delta);
    return out;
  }
};

struct AsymmetricQuantizer final : MonotoneFn::Impl {
  double delta;

  explicit AsymmetricQuantizer(double d) : delta(d) {
    descriptor.kind = "asymmetric";
    descriptor.delta = d;
    probe_assumption1();
  }

  bool at_jump(double x, double& k) const {
    k = std::round(x / delta);
    return std::abs(x - k * delta) <= kSnapTol;
  }

  double evaluate(double x) const override { return std::floor(x / delta) * delta; }

  double left_limit(double x) const override {
    double k;
    return at_jump(x, k) ? (k - 1.0) * delta : evaluate(x);
  }

  double right_limit(double x) const override {
    double k;
    return at_jump(x, k) ? k * delta : evaluate(x);
  }

  double primitive(double x) const override {
    if (x >= 0.0) {
      double m = std::floor(x / delta);
      return delta * delta * m * (m - 1.0) * 0.5 + m * delta * (x - m * delta);
    }
    double y = -x;
    double m = std::floor(y / delta);
    return delta * delta * m * (m + 1.0) * 0.5 + (m + 1.0) * delta * (y - m * delta);
  }

  std::vector<double> discontinuities_in(double lo, double hi) const override {
    std::vector<double> out;
    double tol = kSnapTol / delta;
    double k0 = std::ceil(lo / delta - tol);
    double k1 = std::floor(hi / delta + tol);
    for (double k = k0; k <= k1; k += 1.0) out.push_back(k * delta);
    return out;
  }
};

struct LogarithmicQuantizer final : MonotoneFn::Impl {
  double delta;

  explicit LogarithmicQuantizer(double d) : delta(d) {
    descriptor.kind = "logarithmic";
    descriptor.delta = d;
    probe_assumption1();
  }

  // Jump magnitudes are exp((k + 1/2) * delta).
  bool at_jump(double x, double& k, double& mag) const {
    if (x == 0.0) return false;
    double u = std::log(std::abs(x));
    k = std::round(u / delta - 0.5);
    mag = std::exp((k + 0.5) * delta);
    return std::abs(std::abs(x) - mag) <= kSnapTol;
  }

  double evaluate(double x) const override {
    if (x == 0.0) return 0.0;
    return sign_of(x) * std::exp(std::floor(std::log(std::abs(x)) / delta + 0.5) * delta);
  }

  double left_limit(double x) const override {
    double k, mag;
    if (!at_jump(x, k, mag)) return evaluate(x);
    return x > 0.0 ? std::exp(k * delta) : -std::exp((k + 1.0) * delta);
  }

  double right_limit(double x) const override {
    double k, mag;
    if (!at_jump(x, k, mag)) return evaluate(x);
    return x > 0.0 ? std::exp((k + 1.0) * delta) : -std::exp(k * delta);
  }

  double primitive(double x) const override {
    double y = std::abs(x);
    if (y == 0.0) return 0.0;
    // Cell K covers (exp((K-1/2)d), exp((K+1/2)d)) with value exp(Kd); the
    // completed-cells series below it is geometric.
    double K = std::round(std::log(y) / delta);
    double full = (std::exp(0.5 * delta) - std::exp(-0.5 * delta)) *
                  std::exp(2.0 * (K - 1.0) * delta) / (1.0 - std::exp(-2.0 * delta));
    double partial = std::exp(K * delta) * (y - std::exp((K - 0.5) * delta));
    return full + partial;
  }

  std::vector<double> discontinuities_in(double lo, double hi) const override {
    // Jump points accumulate at 0; magnitudes below kLogLocatorFloor carry
    // jumps far under any integration tolerance and are dropped.
    std::vector<double> out;
    auto push_range = [&](double a, double b, bool negative) {
      if (!(a <= b)) return;
      double k0 = std::ceil(std::log(a) / delta - 0.5 - kSnapTol / delta);
      double k1 = std::floor(std::log(b) / delta - 0.5 + kSnapTol / delta);
      for (double k = k0; k <= k1; k += 1.0) {
        double mag = std::exp((k + 0.5) * delta);
        out.push_back(negative ? -mag : mag);
      }
    };
    if (lo < -kLogLocatorFloor)
      push_range(std::max(kLogLocatorFloor, -hi), -lo, true);
    if (hi > kLogLocatorFloor)
      push_range(std::max(kLogLocatorFloor, lo), hi, false);
    std::sort(out.begin(), out.end());
    return out;
  }
};

struct SignFn final : MonotoneFn::Impl {
  double scale;

  explicit SignFn(double s) : scale(s) {
    descriptor.kind = "sign";
    descriptor.scale = s;
    probe_assumption1();
  }

  double evaluate(double x) const override { return scale * sign_of(x); }

  double left_limit(double x) const override {
    if (std::abs(x) <= kSnapTol) return -scale;
    return evaluate(x);
  }

  double right_limit(double x) const override {
    if (std::abs(x) <= kSnapTol) return scale;
    return evaluate(x);
  }

  double primitive(double x) const override { return scale * std::abs(x); }

  std::vector<double> discontinuities_in(double lo, double hi) const override {
    if (lo <= kSnapTol && hi >= -kSnapTol) return {0.0};
    return {};
  }
};

struct SaturationFn final : MonotoneFn::Impl {
  double scale;

  explicit SaturationFn(double s) : scale(s) {
    descriptor.kind = "saturation";
    descriptor.scale = s;
    probe_assumption1();
  }

  double evaluate(double x) const override { return std::clamp(x, -scale, scale); }
  double left_limit(double x) const override { return evaluate(x); }
  double right_limit(double x) const override { return evaluate(x); }

  double primitive(double x) const override {
    double y = std::abs(x);
    if (y <= scale) return 0.5 * x * x;
    return scale * y - 0.5 * scale * scale;
  }

  std::vector<double> discontinuities_in(double, double) const override { return {}; }
};

struct PiecewiseFn final : MonotoneFn::Impl {
  // Distinct abscissae with lower/upper ordinates; y_lo < y_hi encodes a jump.
  std::vector<double> xs, y_lo, y_hi;

  explicit PiecewiseFn(std::vector<std::pair<double, double>> pts) {
    if (pts.empty())
      raise(ErrorKind::ValidationError, "custom nonlinearity needs at least one breakpoint");
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    for (size_t i = 0; i < pts.size(); ++i) {
      if (!std::isfinite(pts[i].first) || !std::isfinite(pts[i].second))
        raise(ErrorKind::ValidationError, "breakpoints must be finite");
      if (i > 0 && pts[i].second < pts[i - 1].second)
        raise(ErrorKind::ValidationError, "breakpoint ordinates must be non-decreasing");
      if (i == 0 || pts[i].first != pts[i - 1].first) {
        xs.push_back(pts[i].first);
        y_lo.push_back(pts[i].second);
        y_hi.push_back(pts[i].second);
      } else {
        y_hi.back() = pts[i].second;
      }
    }
    descriptor.kind = "custom";
    descriptor.breakpoints = std::move(pts);
    probe_assumption1();
  }

  // Value on the open segment right of knot j (constant extension past the end).
  double segment_value(size_t j, double t) const {
    if (j + 1 >= xs.size()) return y_hi.back();
    double slope = (y_lo[j + 1] - y_hi[j]) / (xs[j + 1] - xs[j]);
    return y_hi[j] + slope * (t - xs[j]);
  }

  long knot_at(double t) const {
    auto it = std::lower_bound(xs.begin(), xs.end(), t - kSnapTol);
    if (it != xs.end() && std::abs(*it - t) <= kSnapTol)
      return static_cast<long>(it - xs.begin());
    return -1;
  }

  double evaluate(double t) const override {
    long j = knot_at(t);
    if (j >= 0) return 0.5 * (y_lo[j] + y_hi[j]);
    if (t < xs.front()) return y_lo.front();
    if (t > xs.back()) return y_hi.back();
    size_t seg = std::upper_bound(xs.begin(), xs.end(), t) - xs.begin() - 1;
    return segment_value(seg, t);
  }

  double left_limit(double t) const override {
    long j = knot_at(t);
    if (j >= 0) return y_lo[j];
    return evaluate(t);
  }

  double right_limit(double t) const override {
    long j = knot_at(t);
    if (j >= 0) return y_hi[j];
    return evaluate(t);
  }

  double primitive(double t) const override {
    if (t >= 0.0) return integral(0.0, t);
    return -integral(t, 0.0);
  }

  // Exact integral over [a, b], a <= b: constant tails, trapezoids inside.
  double integral(double a, double b) const {
    double total = 0.0;
    if (a < xs.front()) total += (std::min(b, xs.front()) - a) * y_lo.front();
    for (size_t j = 0; j + 1 < xs.size(); ++j) {
      double c_lo = std::max(a, xs[j]);
      double c_hi = std::min(b, xs[j + 1]);
      if (c_lo < c_hi)
        total += 0.5 * (segment_value(j, c_lo) + segment_value(j, c_hi)) * (c_hi - c_lo);
    }
    if (b > xs.back()) total += (b - std::max(a, xs.back())) * y_hi.back();
    return total;
  }

  std::vector<double> discontinuities_in(double lo, double hi) const override {
    std::vector<double> out;
    for (size_t j = 0; j < xs.size(); ++j)
      if (y_hi[j] > y_lo[j] && xs[j] >= lo - kSnapTol && xs[j] <= hi + kSnapTol)
        out.push_back(xs[j]);
    return out;
  }
};

// Adaptive Simpson with an absolute tolerance; recursion localizes around
// jumps of monotone integrands. The tolerance floor keeps subdivision around
// a jump terminating (the local Simpson error there only shrinks linearly
// with the interval width).
double adaptive_simpson(const std::function<double(double)>& f, double a, double m, double b,
                        double fa, double fm, double fb, double whole, double tol, int depth) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double err = left + right - whole;
  if (std::abs(err) <= 15.0 * tol) return left + right + err / 15.0;
  if (depth <= 0) raise(ErrorKind::QuadratureFailure, "adaptive quadrature did not converge");
  double half = std::max(0.5 * tol, 1e-13);
  return adaptive_simpson(f, a, lm, m, fa, flm, fm, left, half, depth - 1) +
         adaptive_simpson(f, m, rm, b, fm, frm, fb, right, half, depth - 1);
}

double quadrature(const std::function<double(double)>& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  double s = 1.0;
  if (a > b) {
    std::swap(a, b);
    s = -1.0;
  }
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return s * adaptive_simpson(f, a, m, b, fa, fm, fb, whole, tol, 60);
}

struct UserFn final : MonotoneFn::Impl {
  std::function<double(double)> eval_fn, left_fn, right_fn, primitive_fn;
  std::function<std::vector<double>(double, double)> locator_fn;

  UserFn(std::string label, std::function<double(double)> evaluate, UserFnOptions opts)
      : eval_fn(std::move(evaluate)) {
    left_fn = opts.left_limit ? std::move(opts.left_limit) : eval_fn;
    right_fn = opts.right_limit ? std::move(opts.right_limit) : eval_fn;
    locator_fn = std::move(opts.discontinuities);
    primitive_fn = std::move(opts.primitive);
    descriptor.kind = "user";
    descriptor.label = std::move(label);
    probe_assumption1();
  }

  double evaluate(double x) const override { return eval_fn(x); }
  double left_limit(double x) const override { return left_fn(x); }
  double right_limit(double x) const override { return right_fn(x); }

  double primitive(double x) const override {
    if (primitive_fn) return primitive_fn(x);
    return quadrature(eval_fn, 0.0, x, 1e-10);
  }

  std::vector<double> discontinuities_in(double lo, double hi) const override {
    if (!locator_fn) return {};
    return locator_fn(lo, hi);
  }
};

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    raise(ErrorKind::ValidationError, std::string(what) + " must be positive");
}

}  // namespace

MonotoneFn quantizer_symmetric(QuantizerParams p) {
  require_positive(p.delta, "quantizer delta");
  return MonotoneFn(std::make_shared<SymmetricQuantizer>(p.delta));
}

MonotoneFn quantizer_asymmetric(QuantizerParams p) {
  require_positive(p.delta, "quantizer delta");
  return MonotoneFn(std::make_shared<AsymmetricQuantizer>(p.delta));
}

MonotoneFn quantizer_logarithmic(QuantizerParams p) {
  require_positive(p.delta, "quantizer delta");
  return MonotoneFn(std::make_shared<LogarithmicQuantizer>(p.delta));
}

MonotoneFn sign_fn(double scale) {
  require_positive(scale, "sign scale");
  return MonotoneFn(std::make_shared<SignFn>(scale));
}

MonotoneFn saturation_fn(double scale) {
  require_positive(scale, "saturation scale");
  return MonotoneFn(std::make_shared<SaturationFn>(scale));
}

MonotoneFn piecewise_fn(std::vector<std::pair<double, double>> breakpoints) {
  return MonotoneFn(std::make_shared<PiecewiseFn>(std::move(breakpoints)));
}

MonotoneFn user_fn(std::string label, std::function<double(double)> evaluate,
                   UserFnOptions options) {
  if (!evaluate) raise(ErrorKind::ValidationError, "user function needs an evaluate callback");
  return MonotoneFn(std::make_shared<UserFn>(std::move(label), std::move(evaluate), std::move(options)));
}

}  // namespace consim
