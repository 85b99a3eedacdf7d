#pragma once

// Piecewise-linear signals on a closed time domain. Jumps are allowed between
// adjacent segments; evaluation at a jump returns the right limit.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cfhb {

struct Segment {
  double t0 = 0.0;
  double t1 = 0.0;
  double v0 = 0.0;
  double v1 = 0.0;

  double duration() const { return t1 - t0; }
  double at(double t) const {
    const double d = t1 - t0;
    return d > 0.0 ? v0 + (v1 - v0) * (t - t0) / d : v0;
  }
  double integral() const { return duration() * (v0 + v1) / 2.0; }
  double integral_sq() const { return duration() * (v0 * v0 + v0 * v1 + v1 * v1) / 3.0; }

  bool operator==(const Segment&) const = default;
};

enum class Interp { linear, step };

class PiecewiseLinearWaveform {
 public:
  PiecewiseLinearWaveform() = default;

  /// Segments must tile their span in order; zero-length segments are dropped.
  explicit PiecewiseLinearWaveform(std::vector<Segment> segments) {
    segs_.reserve(segments.size());
    for (const Segment& s : segments) {
      if (!(std::isfinite(s.t0) && std::isfinite(s.t1) && std::isfinite(s.v0) &&
            std::isfinite(s.v1))) {
        throw std::invalid_argument("waveform segment has a non-finite value");
      }
      if (s.t1 < s.t0) throw std::invalid_argument("waveform segment runs backwards in time");
      if (!segs_.empty() && s.t0 != segs_.back().t1) {
        throw std::invalid_argument("waveform segments must be contiguous");
      }
      if (s.t1 > s.t0) {
        segs_.push_back(s);
      } else if (segs_.empty()) {
        start_ = s.t0;
      }
    }
    if (segs_.empty()) {
      if (!segments.empty()) {
        // Degenerate span: keep the domain point but no area.
        start_ = end_ = segments.front().t0;
      }
    } else {
      start_ = segs_.front().t0;
      end_ = segs_.back().t1;
    }
  }

  /// Breakpoints (t, v). Linear: straight lines between points. Step: the value
  /// at t_i holds until t_{i+1}.
  static PiecewiseLinearWaveform from_breakpoints(const std::vector<std::pair<double, double>>& pts,
                                                  Interp interp = Interp::linear) {
    if (pts.size() < 2) throw std::invalid_argument("need at least two breakpoints");
    std::vector<Segment> segs;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const auto& [ta, va] = pts[i];
      const auto& [tb, vb] = pts[i + 1];
      if (!(tb > ta)) throw std::invalid_argument("breakpoint times must be strictly increasing");
      segs.push_back({ta, tb, va, interp == Interp::linear ? vb : va});
    }
    return PiecewiseLinearWaveform(std::move(segs));
  }

  static PiecewiseLinearWaveform constant(double t0, double t1, double value) {
    return PiecewiseLinearWaveform({{t0, t1, value, value}});
  }

  bool empty() const { return segs_.empty(); }
  double start() const { return start_; }
  double end() const { return end_; }
  double span() const { return end_ - start_; }
  const std::vector<Segment>& segments() const { return segs_; }

  /// Right limit at t (left limit at the end of the domain).
  double eval(double t) const {
    const Segment& s = segs_[locate(t, false)];
    return t >= s.t1 ? s.v1 : s.at(t);
  }

  /// Left limit at t (right limit at the start of the domain).
  double eval_left(double t) const {
    const Segment& s = segs_[locate(t, true)];
    return t <= s.t0 ? s.v0 : s.at(t);
  }

  /// Sorted segment boundaries, including both ends of the domain.
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    if (segs_.empty()) return out;
    out.reserve(segs_.size() + 1);
    for (const Segment& s : segs_) out.push_back(s.t0);
    out.push_back(end_);
    return out;
  }

  double integral() const {
    double acc = 0.0;
    for (const Segment& s : segs_) acc += s.integral();
    return acc;
  }
  double integral_sq() const {
    double acc = 0.0;
    for (const Segment& s : segs_) acc += s.integral_sq();
    return acc;
  }
  double max_value() const {
    double m = -INFINITY;
    for (const Segment& s : segs_) m = std::max({m, s.v0, s.v1});
    return m;
  }
  double min_value() const {
    double m = INFINITY;
    for (const Segment& s : segs_) m = std::min({m, s.v0, s.v1});
    return m;
  }

  PiecewiseLinearWaveform scaled(double factor) const {
    PiecewiseLinearWaveform w = *this;
    for (Segment& s : w.segs_) {
      s.v0 *= factor;
      s.v1 *= factor;
    }
    return w;
  }

  bool operator==(const PiecewiseLinearWaveform&) const = default;

 private:
  std::size_t locate(double t, bool left) const {
    if (segs_.empty()) throw std::out_of_range("evaluating an empty waveform");
    if (!(t >= start_ && t <= end_)) throw std::out_of_range("time outside the waveform domain");
    if (left) {
      // first segment whose end is >= t
      auto it = std::lower_bound(segs_.begin(), segs_.end(), t,
                                 [](const Segment& s, double x) { return s.t1 < x; });
      return it == segs_.end() ? segs_.size() - 1 : static_cast<std::size_t>(it - segs_.begin());
    }
    // last segment whose start is <= t
    auto it = std::upper_bound(segs_.begin(), segs_.end(), t,
                               [](double x, const Segment& s) { return x < s.t0; });
    return it == segs_.begin() ? 0 : static_cast<std::size_t>(it - segs_.begin()) - 1;
  }

  std::vector<Segment> segs_;
  double start_ = 0.0;
  double end_ = 0.0;
};

namespace detail {

inline std::vector<double> merged_grid(const PiecewiseLinearWaveform& a,
                                       const PiecewiseLinearWaveform& b,
                                       const std::vector<double>& extra = {}) {
  std::vector<double> g = a.breakpoints();
  const auto bb = b.breakpoints();
  g.insert(g.end(), bb.begin(), bb.end());
  for (double t : extra) {
    if (t > a.start() && t < a.end()) g.push_back(t);
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

inline void require_same_domain(const PiecewiseLinearWaveform& a, const PiecewiseLinearWaveform& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty waveform");
  if (a.start() != b.start() || a.end() != b.end()) {
    throw std::invalid_argument("waveforms must share the same domain");
  }
}

}  // namespace detail

/// ca*a + cb*b on the union of both breakpoint sets (exact).
inline PiecewiseLinearWaveform linear_combination(const PiecewiseLinearWaveform& a, double ca,
                                                  const PiecewiseLinearWaveform& b, double cb) {
  detail::require_same_domain(a, b);
  const auto g = detail::merged_grid(a, b);
  std::vector<Segment> out;
  out.reserve(g.size());
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const double t0 = g[i], t1 = g[i + 1];
    out.push_back({t0, t1, ca * a.eval(t0) + cb * b.eval(t0), ca * a.eval_left(t1) + cb * b.eval_left(t1)});
  }
  return PiecewiseLinearWaveform(std::move(out));
}

using Window = std::pair<double, double>;

/// Keeps w inside the half-open windows [from, to) and forces zero elsewhere.
inline PiecewiseLinearWaveform gated(const PiecewiseLinearWaveform& w, const std::vector<Window>& windows) {
  std::vector<double> edges;
  for (const auto& [from, to] : windows) {
    edges.push_back(from);
    edges.push_back(to);
  }
  auto g = w.breakpoints();
  for (double t : edges) {
    if (t > w.start() && t < w.end()) g.push_back(t);
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());

  std::vector<Segment> out;
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const double t0 = g[i], t1 = g[i + 1];
    const double mid = 0.5 * (t0 + t1);
    const bool on = std::any_of(windows.begin(), windows.end(),
                                [mid](const Window& win) { return mid >= win.first && mid < win.second; });
    out.push_back(on ? Segment{t0, t1, w.eval(t0), w.eval_left(t1)} : Segment{t0, t1, 0.0, 0.0});
  }
  return PiecewiseLinearWaveform(std::move(out));
}

/// Exact integral of a(t)*b(t) over the shared domain.
inline double integrate_product(const PiecewiseLinearWaveform& a, const PiecewiseLinearWaveform& b) {
  detail::require_same_domain(a, b);
  const auto g = detail::merged_grid(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const double t0 = g[i], t1 = g[i + 1];
    const double a0 = a.eval(t0), a1 = a.eval_left(t1);
    const double b0 = b.eval(t0), b1 = b.eval_left(t1);
    acc += (t1 - t0) * (2.0 * a0 * b0 + a0 * b1 + a1 * b0 + 2.0 * a1 * b1) / 6.0;
  }
  return acc;
}

}  // namespace cfhb
