#pragma once

// Exact piecewise-linear synthesis of one switching interval.
//
// Interval layout in units of Ts (first half; the second half repeats it from
// Ts/2 with i_lk negated and the boost inductors exchanged):
//
//   stage 1  [0, t1)   S2ag off, L2 current forced into the winding
//   stage 2  [t1, t2)  S2ag on, winding current transferred to S2ag (alpha)
//   stage 3  [t2, t3)  zero-current plateau, absorbs the slack of the half
//   stage 4  [t3, t4)  winding current ramped to i_lk_pk (d2)
//   stage 5  [t4, Ts/2) S1ag body diode, winding current falls to i_L1 (beta)
//
// The text's stage 6 is stage 1 of the mirrored half.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "cfhb/error.hpp"
#include "cfhb/params.hpp"
#include "cfhb/pwl.hpp"

namespace cfhb {

struct StageTimeline {
  // t0 .. t5 of each half, in seconds from the start of the interval.
  std::array<double, 6> first{};
  std::array<double, 6> second{};
  double ts = 0.0;

  double plateau_first() const { return first[3] - first[2]; }
  double plateau_second() const { return second[3] - second[2]; }
  /// Stage index 1..5 of the half containing t, and whether it is the mirrored half.
  std::pair<int, bool> stage_at(double t) const {
    const bool mirrored = t >= second[0];
    const auto& b = mirrored ? second : first;
    int stage = 5;
    for (int i = 1; i <= 4; ++i) {
      if (t < b[i]) {
        stage = i;
        break;
      }
    }
    return {stage, mirrored};
  }
};

inline constexpr double kTimelineTolerance = 1e-9;

inline StageTimeline build_timeline(const IntervalPlan& plan, const DerivedParams& d) {
  const double ts = d.ts;
  const double off = 1.0 - plan.d1;
  const double p1 = 0.5 - off - plan.alpha - plan.d2 - plan.beta;
  const double p2 = 0.5 - off - plan.alpha_mirror - plan.d2 - plan.beta_mirror;
  if (p1 < -kTimelineTolerance || p2 < -kTimelineTolerance) {
    throw InfeasibleError("timing overflow: commutation stages exceed Ts/2 at k=" +
                          std::to_string(plan.k));
  }
  auto half = [&](double base, double alpha, double plateau) {
    std::array<double, 6> t{};
    t[0] = base;
    t[1] = base + off * ts;
    t[2] = t[1] + alpha * ts;
    t[3] = t[2] + std::max(plateau, 0.0) * ts;
    t[4] = t[3] + plan.d2 * ts;
    t[5] = base + 0.5 * ts;
    return t;
  };
  StageTimeline tl;
  tl.ts = ts;
  tl.first = half(0.0, plan.alpha, p1);
  tl.second = half(0.5 * ts, plan.alpha_mirror, p2);
  return tl;
}

struct NodeWaveforms {
  int k = 0;
  SchemeKind scheme = SchemeKind::idcpsm;
  bool negative_half = false;  // quantities already carry the grid polarity
  StageTimeline timeline;

  PiecewiseLinearWaveform i_lk;
  PiecewiseLinearWaveform i_l1;
  PiecewiseLinearWaveform i_l2;
  // ac-side bidirectional switches: total current, signed channel part, body diode magnitude
  PiecewiseLinearWaveform i_s1ag;
  PiecewiseLinearWaveform i_s2ag;
  PiecewiseLinearWaveform i_s1ag_channel;
  PiecewiseLinearWaveform i_s2ag_channel;
  PiecewiseLinearWaveform i_d1ag;
  PiecewiseLinearWaveform i_d2ag;
  // dc-side bridge: channel and body-diode currents per device (>= 0)
  PiecewiseLinearWaveform i_sa, i_sb, i_sc, i_sd;
  PiecewiseLinearWaveform i_da, i_db, i_dc, i_dd;

  PiecewiseLinearWaveform v_pq;
  PiecewiseLinearWaveform v_rs;

  double period() const { return timeline.ts; }
};

namespace detail {

inline PiecewiseLinearWaveform through(std::vector<std::pair<double, double>> pts) {
  std::vector<Segment> segs;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    segs.push_back({pts[i].first, pts[i + 1].first, pts[i].second, pts[i + 1].second});
  }
  return PiecewiseLinearWaveform(std::move(segs));
}

inline PiecewiseLinearWaveform steps(const std::vector<double>& times, const std::vector<double>& values) {
  std::vector<Segment> segs;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    segs.push_back({times[i], times[i + 1], values[i], values[i]});
  }
  return PiecewiseLinearWaveform(std::move(segs));
}

}  // namespace detail

/// Synthesizes every node waveform of interval `plan.k`. SPSM is not synthesized.
inline NodeWaveforms synth_interval(const IntervalPlan& plan, const DerivedParams& d) {
  if (plan.scheme == SchemeKind::spsm) {
    throw InfeasibleError("spsm waveforms are not synthesized; use the closed-form metrics");
  }
  const StageTimeline tl = build_timeline(plan, d);
  const auto& a = tl.first;
  const auto& b = tl.second;
  const double ts = d.ts;
  const double n = d.source.n;
  const double vo = d.source.vo;
  const double ig = plan.grid_current();
  const double pk = plan.i_lk_pk;

  NodeWaveforms w;
  w.k = plan.k;
  w.scheme = plan.scheme;
  w.negative_half = plan.negative_half;
  w.timeline = tl;

  // Winding current, positive-half polarity.
  PiecewiseLinearWaveform lk = detail::through({
      {a[0], plan.i_lk_t0},
      {a[1], plan.i_lk_t1},
      {a[2], 0.0},
      {a[3], 0.0},
      {a[4], pk},
      {b[0], plan.i_lk_t5},
      {b[1], 0.5 * (ig - plan.ripple_l1)},
      {b[2], 0.0},
      {b[3], 0.0},
      {b[4], -pk},
      {ts, plan.i_lk_t0},
  });

  // Boost inductors: L2 falls while S2ag is off in stage 1, L1 during stage 1'.
  const double hi1 = 0.5 * (ig + plan.ripple_l1), lo1 = 0.5 * (ig - plan.ripple_l1);
  const double hi2 = 0.5 * (ig + plan.ripple_l2), lo2 = 0.5 * (ig - plan.ripple_l2);
  const double l1_start = lo1 + plan.ripple_l1 * (plan.d1 - 0.5) / plan.d1;
  PiecewiseLinearWaveform l1 = detail::through({{0.0, l1_start}, {b[0], hi1}, {b[1], lo1}, {ts, l1_start}});
  PiecewiseLinearWaveform l2 = detail::through({{0.0, hi2}, {a[1], lo2}, {ts, hi2}});

  // KCL at the bridge nodes.
  PiecewiseLinearWaveform s1 = linear_combination(l1, 1.0, lk, -1.0);
  PiecewiseLinearWaveform s2 = linear_combination(l2, 1.0, lk, 1.0);
  PiecewiseLinearWaveform s1_ch = gated(s1, {{0.0, a[4]}, {b[1], ts}});
  PiecewiseLinearWaveform s2_ch = gated(s2, {{a[1], b[4]}});
  PiecewiseLinearWaveform d1ag = gated(s1, {{a[4], b[0]}}).scaled(-1.0);
  PiecewiseLinearWaveform d2ag = gated(s2, {{b[4], ts}}).scaled(-1.0);

  // dc side: |i_lk|/n routed through the devices that carry it.
  // i_lk is >= 0 from stage 4 until the plateau of the mirrored half.
  PiecewiseLinearWaveform mag = linear_combination(gated(lk, {{a[3], b[3]}}), 1.0 / n,
                                                   gated(lk, {{0.0, a[3]}, {b[3], ts}}), -1.0 / n);
  PiecewiseLinearWaveform cd_ch, cd_di, ab_ch, ab_di;
  if (plan.scheme == SchemeKind::idcpsm) {
    cd_ch = gated(mag, {{0.0, a[4]}, {b[4], ts}});
    ab_ch = gated(mag, {{a[4], b[4]}});
    cd_di = PiecewiseLinearWaveform::constant(0.0, ts, 0.0);
    ab_di = cd_di;
  } else {
    cd_ch = gated(mag, {{a[3], a[4]}});
    ab_ch = gated(mag, {{b[3], b[4]}});
    cd_di = gated(mag, {{0.0, a[2]}, {b[4], ts}});
    ab_di = gated(mag, {{a[4], b[2]}});
  }

  const double vr = vo / n;
  PiecewiseLinearWaveform vpq = detail::steps({0.0, a[1], b[0], b[1], ts}, {-vr, 0.0, vr, 0.0});
  PiecewiseLinearWaveform vrs = detail::steps({0.0, a[2], a[3], a[4], b[0], b[2], b[3], b[4], ts},
                                              {-vo, 0.0, -vo, vo, vo, 0.0, vo, -vo});

  const double sign = plan.negative_half ? -1.0 : 1.0;
  w.i_lk = lk.scaled(sign);
  w.i_l1 = l1.scaled(sign);
  w.i_l2 = l2.scaled(sign);
  w.i_s1ag = s1.scaled(sign);
  w.i_s2ag = s2.scaled(sign);
  w.i_s1ag_channel = s1_ch.scaled(sign);
  w.i_s2ag_channel = s2_ch.scaled(sign);
  w.i_d1ag = d1ag;
  w.i_d2ag = d2ag;
  w.v_pq = vpq.scaled(sign);
  w.v_rs = vrs.scaled(sign);
  if (plan.negative_half) {
    w.i_sa = cd_ch; w.i_sb = cd_ch; w.i_sc = ab_ch; w.i_sd = ab_ch;
    w.i_da = cd_di; w.i_db = cd_di; w.i_dc = ab_di; w.i_dd = ab_di;
  } else {
    w.i_sa = ab_ch; w.i_sb = ab_ch; w.i_sc = cd_ch; w.i_sd = cd_ch;
    w.i_da = ab_di; w.i_db = ab_di; w.i_dc = cd_di; w.i_dd = cd_di;
  }
  return w;
}

struct ContinuityResiduals {
  double i_l1 = 0.0;
  double i_l2 = 0.0;
  double i_lk = 0.0;
};

/// Jumps at the shared boundary: end of `prev` against the start of `next`.
inline ContinuityResiduals check_continuity(const NodeWaveforms& prev, const NodeWaveforms& next) {
  auto jump = [](const PiecewiseLinearWaveform& p, const PiecewiseLinearWaveform& q) {
    return std::abs(p.eval_left(p.end()) - q.eval(q.start()));
  };
  return {jump(prev.i_l1, next.i_l1), jump(prev.i_l2, next.i_l2), jump(prev.i_lk, next.i_lk)};
}

/// Largest |L*delta_i - integral of v_L| over any sub-interval of constant
/// inductor voltage, for both boost inductors. v_L1 = |vg| - max(v_pq, 0) and
/// v_L2 = |vg| + min(v_pq, 0) in positive-half polarity.
inline double volt_second_residual(const NodeWaveforms& w, const IntervalPlan& plan, const DerivedParams& d) {
  const double sign = w.negative_half ? -1.0 : 1.0;
  const double vg = plan.grid_voltage();
  double worst = 0.0;
  auto check = [&](const PiecewiseLinearWaveform& i_l, double inductance, bool first_leg) {
    auto grid = w.v_pq.breakpoints();
    for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
      const double t0 = grid[j], t1 = grid[j + 1];
      const double vpq = sign * w.v_pq.eval(t0);
      const double v_l = first_leg ? vg - std::max(vpq, 0.0) : vg + std::min(vpq, 0.0);
      const double di = sign * (i_l.eval_left(t1) - i_l.eval(t0));
      worst = std::max(worst, std::abs(inductance * di - v_l * (t1 - t0)));
    }
  };
  check(w.i_l1, d.source.l1, true);
  check(w.i_l2, d.source.l2, false);
  return worst;
}

// ---------------------------------------------------------------------------
// CSV output

/// Fixed 9-significant-digit formatting; negative zero prints as 0.
inline std::string format_number(double v) {
  if (v == 0.0) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::vector<double> sample_times(const NodeWaveforms& w, int samples_per_interval) {
  if (samples_per_interval < 1) throw ConfigError("samples_per_interval must be >= 1");
  const double ts = w.period();
  std::vector<double> t;
  for (int i = 0; i <= samples_per_interval; ++i) t.push_back(ts * i / samples_per_interval);
  for (const auto* wf : {&w.i_lk, &w.i_l1, &w.i_l2, &w.i_s1ag, &w.i_s2ag, &w.i_sa, &w.i_sc, &w.v_pq, &w.v_rs}) {
    const auto bp = wf->breakpoints();
    t.insert(t.end(), bp.begin(), bp.end());
  }
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

inline void write_waveform_csv(std::ostream& os, const NodeWaveforms& w, int samples_per_interval) {
  os << "t_s,i_lk_A,i_L1_A,i_L2_A,i_S1ag_A,i_S2ag_A,i_SA_A,i_SC_A,v_pq_V,v_rs_V\n";
  for (double t : sample_times(w, samples_per_interval)) {
    os << format_number(t);
    for (const auto* wf : {&w.i_lk, &w.i_l1, &w.i_l2, &w.i_s1ag, &w.i_s2ag, &w.i_sa, &w.i_sc, &w.v_pq, &w.v_rs}) {
      os << ',' << format_number(wf->eval(t));
    }
    os << '\n';
  }
}

}  // namespace cfhb
