#include "consim/integrator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <deque>
#include <ostream>
#include <thread>

namespace consim {

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt))
    raise(ErrorKind::ValidationError, "dt must be positive");
  if (!(t_end > 0.0) || !std::isfinite(t_end))
    raise(ErrorKind::ValidationError, "t_end must be positive");
  if (!(event_tolerance > 0.0) || !(event_tolerance < dt))
    raise(ErrorKind::ValidationError, "event_tolerance must lie in (0, dt)");
  if (chatter_window < 2)
    raise(ErrorKind::ValidationError, "chatter_window must be at least 2");
  if (snap_band < 0.0)
    raise(ErrorKind::ValidationError, "snap_band must be non-negative");
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Crossing: return "crossing";
    case EventKind::SlidingEngage: return "sliding-engage";
    case EventKind::SlidingRelease: return "sliding-release";
  }
  return "event";
}

double suggested_dt(const ConsensusSystem& sys) {
  double min_delta = 0.0;
  for (const MonotoneFn& f : sys.nonlinearities) {
    const auto& d = f.descriptor();
    if (d.delta > 0.0) min_delta = min_delta == 0.0 ? d.delta : std::min(min_delta, d.delta);
  }
  return min_delta > 0.0 ? min_delta / 100.0 : 1e-3;
}

namespace {

int sgn(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

struct ChatterSample {
  double pos;
  int sign;
  double value;
};

struct CoordMode {
  bool sliding = false;
  double pin = 0.0;          // surface the coordinate is pinned to
  bool pin_chatter = false;  // pinned by the chattering fallback
  int bias = 0;              // one-sided value while sitting exactly on bias_point
  double bias_point = 0.0;
};

class Run {
public:
  Run(const ConsensusSystem& sys, const Eigen::VectorXd& x0, const IntegratorConfig& cfg)
      : sys_(sys), cfg_(cfg), n_(sys.dimension()), x_(x0), modes_(n_), history_(n_) {
    if (x0.size() != n_)
      raise(ErrorKind::ValidationError, "initial state dimension mismatch");
    if (!x0.allFinite()) raise(ErrorKind::NonFiniteState, "initial state must be finite");
    snap_band_ = cfg.snap_band > 0.0 ? cfg.snap_band : auto_snap_band(x0);
  }

  Trajectory operator()() {
    SelectionState sel = stable_selection(0.0, /*allow_crossing_events=*/false);
    record(0.0, sel);
    prev_x_ = x_;
    modes_dirty_ = false;

    double t = 0.0;
    double grid = cfg_.dt;
    const double t_stop = cfg_.t_end * (1.0 - 1e-15);
    while (t < t_stop) {
      double target = std::min(grid, cfg_.t_end);
      Eigen::VectorXd v = sel.derivative;
      for (int i = 0; i < n_; ++i)
        if (modes_[i].sliding) v(i) = 0.0;

      // Earliest surface any free coordinate would cross this step.
      double h = target - t;
      double tau = h;
      std::vector<std::pair<int, double>> candidates;  // coordinate -> surface
      for (int i = 0; i < n_; ++i) {
        if (modes_[i].sliding || v(i) == 0.0) continue;
        double reach = x_(i) + v(i) * tau;
        double lo = std::min(x_(i), reach), hi = std::max(x_(i), reach);
        auto ds = sys_.nonlinearities[i].discontinuities_in(lo, hi);
        double d = 0.0;
        bool found = false;
        if (v(i) > 0.0) {
          for (double c : ds)
            if (c > x_(i)) {
              d = c;
              found = true;
              break;
            }
        } else {
          for (auto it = ds.rbegin(); it != ds.rend(); ++it)
            if (*it < x_(i)) {
              d = *it;
              found = true;
              break;
            }
        }
        if (!found) continue;
        candidates.push_back({i, d});
        tau = std::min(tau, (d - x_(i)) / v(i));
      }

      // Advance; snap coordinates landing within tolerance of their surface.
      x_ += tau * v;
      bool grid_hit = (tau == h);
      t = grid_hit ? target : t + tau;
      if (grid_hit && target == grid) grid += cfg_.dt;
      for (int i = 0; i < n_; ++i)
        if (modes_[i].sliding) x_(i) = modes_[i].pin;
      for (auto& [i, d] : candidates)
        if (!modes_[i].sliding && std::abs(x_(i) - d) <= cfg_.event_tolerance) x_(i) = d;
      for (int i = 0; i < n_; ++i)
        if (modes_[i].bias != 0 && x_(i) != modes_[i].bias_point) {
          modes_[i].bias = 0;
          modes_dirty_ = true;
        }

      if (!x_.allFinite())
        raise(ErrorKind::NonFiniteState, "state became non-finite at t=" + std::to_string(t));

      update_chatter(t, v);

      // Selection depends only on (x, modes); frozen phases reuse it.
      if (modes_dirty_ || (x_.array() != prev_x_.array()).any()) {
        sel = stable_selection(t, /*allow_crossing_events=*/true);
        prev_x_ = x_;
        modes_dirty_ = false;
      }
      record(t, sel);
    }
    return std::move(traj_);
  }

private:
  double auto_snap_band(const Eigen::VectorXd& x0) const {
    double box_lo = x0.minCoeff(), box_hi = x0.maxCoeff();
    double sup_f = 0.0;
    for (const MonotoneFn& f : sys_.nonlinearities) {
      sup_f = std::max(sup_f, std::abs(f.left_limit(box_lo)));
      sup_f = std::max(sup_f, std::abs(f.right_limit(box_hi)));
    }
    double max_deg = n_ > 0 ? sys_.lap.in_degrees.maxCoeff() : 0.0;
    double band = cfg_.dt * max_deg * sup_f;
    return band > 0.0 ? band : cfg_.dt;
  }

  std::vector<FilippovInterval> admissible_intervals() const {
    auto intervals = set_valued_rhs(sys_, x_);
    for (int i = 0; i < n_; ++i) {
      if (modes_[i].sliding && modes_[i].pin_chatter) {
        // Chatter pins sit near, not on, a surface; admit the hull of values
        // across the overshoot band.
        intervals[i] = {sys_.nonlinearities[i].left_limit(modes_[i].pin - snap_band_),
                        sys_.nonlinearities[i].right_limit(modes_[i].pin + snap_band_)};
      }
    }
    return intervals;
  }

  Eigen::VectorXd base_values(const std::vector<FilippovInterval>& intervals) const {
    Eigen::VectorXd base(n_);
    for (int i = 0; i < n_; ++i) {
      const auto& m = modes_[i];
      if (!m.sliding && m.bias != 0 && x_(i) == m.bias_point)
        base(i) = m.bias > 0 ? intervals[i].hi : intervals[i].lo;
      else
        base(i) = intervals[i].midpoint();
    }
    return base;
  }

  // Filippov decision for a free coordinate sitting exactly on one of its
  // discontinuity points: cross (one-sided bias) when both one-sided fields
  // push the same way, slide when they point at the surface, and on a
  // repulsive surface let the midpoint field pick a side. Returns true if
  // the coordinate's mode changed.
  bool decide_surface(int i, double t, const std::vector<FilippovInterval>& intervals,
                      const Eigen::VectorXd& base, bool emit_crossing) {
    const FilippovInterval& iv = intervals[i];
    if (sys_.lap.in_degrees(i) == 0.0) return false;  // zero row: coordinate is inert

    Eigen::VectorXd probe = base;
    probe(i) = iv.lo;
    double d_lo = -(sys_.lap.matrix.row(i) * probe)(0);
    probe(i) = iv.hi;
    double d_hi = -(sys_.lap.matrix.row(i) * probe)(0);

    int decision;
    if (d_lo > 0.0 && d_hi > 0.0) {
      decision = +1;
    } else if (d_lo < 0.0 && d_hi < 0.0) {
      decision = -1;
    } else if (d_lo >= 0.0 && d_hi <= 0.0) {
      decision = 0;
    } else {
      probe(i) = iv.midpoint();
      decision = sgn(-(sys_.lap.matrix.row(i) * probe)(0));
    }

    if (decision == 0) {
      if (modes_[i].sliding) return false;
      modes_dirty_ = true;
      modes_[i].sliding = true;
      modes_[i].pin = x_(i);
      modes_[i].pin_chatter = false;
      modes_[i].bias = 0;
      traj_.events.push_back({t, i, x_(i), EventKind::SlidingEngage, false});
      history_[i].clear();
      return true;
    }
    if (!modes_[i].sliding && modes_[i].bias == decision && modes_[i].bias_point == x_(i))
      return false;
    modes_dirty_ = true;
    modes_[i].sliding = false;
    modes_[i].bias = decision;
    modes_[i].bias_point = x_(i);
    if (emit_crossing) traj_.events.push_back({t, i, x_(i), EventKind::Crossing, false});
    history_[i].clear();
    return true;
  }

  // Selection at the current state. Re-runs surface decisions for free
  // coordinates on jumps and releases sliding coordinates whose equivalent
  // control left its interval, until the mode assignment is consistent.
  SelectionState stable_selection(double t, bool allow_crossing_events) {
    const int decide_cap = 4 * n_ + 8;
    int decides = 0;
    for (int guard = 0; guard <= decide_cap + n_ + 2; ++guard) {
      auto intervals = admissible_intervals();
      Eigen::VectorXd base = base_values(intervals);

      if (decides < decide_cap) {
        bool changed = false;
        for (int i = 0; i < n_; ++i) {
          if (modes_[i].sliding || intervals[i].degenerate()) continue;
          if (decide_surface(i, t, intervals, base, allow_crossing_events)) {
            changed = true;
            ++decides;
            break;
          }
        }
        if (changed) continue;
      }

      std::vector<bool> active(n_);
      bool any = false;
      for (int i = 0; i < n_; ++i) {
        active[i] = modes_[i].sliding;
        any = any || active[i];
      }
      SelectionState sel = equivalent_control(sys_.lap, intervals, base, active);
      if (!any) return sel;

      bool released = false;
      for (int i = 0; i < n_; ++i) {
        if (!active[i] || sel.sliding_mask[i]) continue;
        // Clamped: the tangency value left the interval; the flow crosses.
        traj_.events.push_back({t, i, modes_[i].pin, EventKind::SlidingRelease, false});
        modes_dirty_ = true;
        modes_[i].sliding = false;
        if (!modes_[i].pin_chatter) {
          modes_[i].bias = sel.nu(i) == intervals[i].hi ? +1 : -1;
          modes_[i].bias_point = modes_[i].pin;
        } else {
          modes_[i].bias = 0;
        }
        modes_[i].pin_chatter = false;
        history_[i].clear();
        released = true;
      }
      if (!released) return sel;
    }
    // Mode ping-pong hit the guard; accept the current assignment.
    auto intervals = admissible_intervals();
    std::vector<bool> active(n_);
    for (int i = 0; i < n_; ++i) active[i] = modes_[i].sliding;
    return equivalent_control(sys_.lap, intervals, base_values(intervals), active);
  }

  // Fallback for nonlinearities without a discontinuity locator: a
  // derivative sign that keeps alternating inside one overshoot band while
  // the coordinate's own value jumps around is the pointwise scheme
  // chattering across an unseen surface; pin it there. Sign flips caused by
  // neighbors alone (own value constant) are not chattering.
  void update_chatter(double t, const Eigen::VectorXd& v) {
    for (int i = 0; i < n_; ++i) {
      auto& hist = history_[i];
      if (modes_[i].sliding) {
        hist.clear();
        continue;
      }
      hist.push_back({x_(i), sgn(v(i)), sys_.nonlinearities[i].evaluate(x_(i))});
      if (static_cast<int>(hist.size()) > cfg_.chatter_window) hist.pop_front();
      if (static_cast<int>(hist.size()) < cfg_.chatter_window) continue;

      int flips = 0;
      int last = 0;
      double lo = hist.front().pos, hi = lo;
      bool value_varies = false;
      for (const auto& h : hist) {
        lo = std::min(lo, h.pos);
        hi = std::max(hi, h.pos);
        value_varies = value_varies || h.value != hist.front().value;
        if (h.sign != 0) {
          if (last != 0 && h.sign != last) ++flips;
          last = h.sign;
        }
      }
      if (flips < 2 || !value_varies || hi - lo > 2.0 * snap_band_) continue;
      if (!sys_.nonlinearities[i].discontinuities_in(lo, hi).empty())
        continue;  // the event machinery owns located surfaces
      double mid = 0.5 * (lo + hi);
      modes_dirty_ = true;
      modes_[i].sliding = true;
      modes_[i].pin = mid;
      modes_[i].pin_chatter = true;
      modes_[i].bias = 0;
      x_(i) = mid;
      traj_.events.push_back({t, i, mid, EventKind::SlidingEngage, true});
      hist.clear();
    }
  }

  void record(double t, const SelectionState& sel) {
    if (!traj_.times.empty() && t == traj_.times.back()) {
      // Sub-step too small to advance time numerically: keep the post-event
      // state so times stay strictly increasing.
      traj_.states.back() = x_;
      traj_.selections.back() = sel;
      return;
    }
    traj_.times.push_back(t);
    traj_.states.push_back(x_);
    traj_.selections.push_back(sel);
  }

  const ConsensusSystem& sys_;
  const IntegratorConfig& cfg_;
  int n_;
  Eigen::VectorXd x_;
  std::vector<CoordMode> modes_;
  std::vector<std::deque<ChatterSample>> history_;
  double snap_band_ = 0.0;
  Eigen::VectorXd prev_x_;
  bool modes_dirty_ = true;
  Trajectory traj_;
};

}  // namespace

Trajectory integrate(const ConsensusSystem& sys, const Eigen::VectorXd& x0,
                     const IntegratorConfig& cfg) {
  cfg.validate();
  return Run(sys, x0, cfg)();
}

std::vector<Trajectory> batch_integrate(const ConsensusSystem& sys,
                                        const std::vector<Eigen::VectorXd>& x0s,
                                        const IntegratorConfig& cfg) {
  cfg.validate();
  std::vector<Trajectory> out(x0s.size());
  if (x0s.empty()) return out;

  unsigned workers = std::min<unsigned>(std::thread::hardware_concurrency(),
                                        static_cast<unsigned>(x0s.size()));
  if (workers <= 1) {
    for (size_t k = 0; k < x0s.size(); ++k) {
      try {
        out[k] = integrate(sys, x0s[k], cfg);
      } catch (const Error& e) {
        throw Error(e.kind(), "trajectory " + std::to_string(k) + ": " + e.what());
      }
    }
    return out;
  }

  std::atomic<size_t> next{0};
  std::vector<std::exception_ptr> errors(x0s.size());
  auto worker = [&] {
    for (;;) {
      size_t k = next.fetch_add(1);
      if (k >= x0s.size()) return;
      try {
        out[k] = integrate(sys, x0s[k], cfg);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (size_t k = 0; k < errors.size(); ++k) {
    if (!errors[k]) continue;
    try {
      std::rethrow_exception(errors[k]);
    } catch (const Error& e) {
      throw Error(e.kind(), "trajectory " + std::to_string(k) + ": " + e.what());
    }
  }
  return out;
}

namespace {

void append_g17(std::string& row, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  row += buf;
}

}  // namespace

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
  const int n = traj.dimension();
  std::string row = "t";
  for (int i = 0; i < n; ++i) row += ",x" + std::to_string(i);
  for (int i = 0; i < n; ++i) row += ",nu" + std::to_string(i);
  row += "\n";
  os << row;
  for (size_t k = 0; k < traj.size(); ++k) {
    row.clear();
    append_g17(row, traj.times[k]);
    for (int i = 0; i < n; ++i) {
      row += ',';
      append_g17(row, traj.states[k](i));
    }
    for (int i = 0; i < n; ++i) {
      row += ',';
      append_g17(row, traj.selections[k].nu(i));
    }
    row += '\n';
    os << row;
  }
}

void write_events_csv(const Trajectory& traj, std::ostream& os) {
  os << "t,coordinate,point,kind\n";
  std::string row;
  for (const Event& e : traj.events) {
    row.clear();
    append_g17(row, e.time);
    row += ',' + std::to_string(e.coordinate) + ',';
    append_g17(row, e.point);
    row += ',';
    row += to_string(e.kind);
    row += '\n';
    os << row;
  }
}

}  // namespace consim
