#pragma once

// Per-interval RMS and average currents: exact integration of synthesized
// waveforms ("numeric") and the closed-form expressions ("analytic").

#include <cmath>
#include <numbers>
#include <string_view>

#include "cfhb/error.hpp"
#include "cfhb/params.hpp"
#include "cfhb/pwl.hpp"
#include "cfhb/waveforms.hpp"

namespace cfhb {

enum class Origin { numeric, analytic };

inline std::string_view to_string(Origin o) { return o == Origin::numeric ? "numeric" : "analytic"; }

struct IntervalMetrics {
  SchemeKind scheme = SchemeKind::idcpsm;
  int k = 0;
  Origin origin = Origin::numeric;
  double ilk_rms = 0.0;   // winding
  double s_ac_rms = 0.0;  // one ac-side switch channel
  double d_ac_avg = 0.0;  // one ac-side body diode, averaged over Ts
  double s_dc_rms = 0.0;  // one dc-side switch channel
  double d_dc_avg = 0.0;  // one dc-side body diode, averaged over Ts
  double i_cir = 0.0;
  bool clamped = false;   // a closed-form radicand came out negative and was clamped to 0
};

inline double rms_of(const PiecewiseLinearWaveform& w, double duration) {
  if (w.empty()) throw std::invalid_argument("rms of an empty waveform");
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
  return std::sqrt(w.integral_sq() / duration);
}

inline double avg_of(const PiecewiseLinearWaveform& w, double duration) {
  if (w.empty()) throw std::invalid_argument("average of an empty waveform");
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
  return w.integral() / duration;
}

/// i_cir = i_lk_pk - ig/2, from the planned peak.
inline double circulating_current(const IntervalPlan& plan) {
  return plan.i_lk_pk - 0.5 * plan.grid_current();
}

inline IntervalMetrics numeric_metrics(const NodeWaveforms& w, const IntervalPlan& plan) {
  const double ts = w.period();
  IntervalMetrics m;
  m.scheme = plan.scheme;
  m.k = plan.k;
  m.origin = Origin::numeric;
  m.ilk_rms = rms_of(w.i_lk, ts);
  m.s_ac_rms = rms_of(w.i_s1ag_channel, ts);
  m.d_ac_avg = avg_of(w.i_d1ag, ts);
  const bool neg = plan.negative_half;
  m.s_dc_rms = rms_of(neg ? w.i_sa : w.i_sc, ts);
  m.d_dc_avg = avg_of(neg ? w.i_da : w.i_dc, ts);
  m.i_cir = circulating_current(plan);
  return m;
}

/// Average power into the dc side over one interval: (1/Ts) * integral of v_rs * i_lk / n.
inline double power_delivered(const NodeWaveforms& w, double n) {
  return integrate_product(w.v_rs, w.i_lk) / (n * w.period());
}

inline IntervalMetrics analytic_metrics(const ModulationScheme& scheme, const IntervalPlan& plan,
                                        const DerivedParams& d) {
  if (scheme.kind() != plan.scheme) throw std::invalid_argument("scheme does not match the plan");
  if (scheme.kind() == SchemeKind::spsm && !scheme.provider()) {
    throw MissingParameterError("spsm needs a per-interval peak provider");
  }
  IntervalMetrics m;
  m.scheme = plan.scheme;
  m.k = plan.k;
  m.origin = Origin::analytic;
  m.i_cir = circulating_current(plan);

  auto root = [&m](double x) {
    if (x < 0.0) {
      m.clamped = true;
      return 0.0;
    }
    return std::sqrt(x);
  };

  const double n = d.source.n;
  const double ig = plan.grid_current();
  const double d1 = plan.d1, d2 = plan.d2, a = plan.alpha, b = plan.beta;
  const double pk = plan.i_lk_pk;

  switch (plan.scheme) {
    case SchemeKind::idcpsm: {
      const double r = 1.0 - d1 + 4.0 * d2 / 3.0 + a / 3.0 + 7.0 * b / 3.0;
      m.ilk_rms = ig / std::numbers::sqrt2 * root(r);
      m.s_ac_rms = ig / 2.0 * root(11.0 / 3.0 - 10.0 * d1 / 3.0 + 4.0 * d2 + 7.0 * a / 3.0 + 17.0 * b / 3.0);
      m.d_ac_avg = ig / 2.0 * b / 2.0;
      m.s_dc_rms = ig / (2.0 * n) * root(r);
      m.d_dc_avg = 0.0;
      break;
    }
    case SchemeKind::dcpsm: {
      m.ilk_rms = root(ig * ig / 2.0 * (1.0 - d1 + a / 3.0 + b / 3.0) +
                       pk * pk * (2.0 * d2 / 3.0 + 2.0 * b / 3.0) + ig * pk * b / 3.0);
      m.s_ac_rms = root(ig * ig / 4.0 * (11.0 / 3.0 - 10.0 * d1 / 3.0 + 4.0 * d2 / 3.0 + 7.0 * a / 3.0 + 5.0 * b / 3.0) +
                        pk * pk * (2.0 * d2 / 3.0 + b / 3.0) + ig * pk * 2.0 * b / 3.0);
      m.d_ac_avg = (pk - ig / 2.0) * b / 2.0;
      m.s_dc_rms = pk / n * root(d2 / 3.0);
      m.d_dc_avg = ig / (2.0 * n) * (1.0 - d1 + a / 2.0 + b / 2.0) + pk / n * b / 2.0;
      break;
    }
    case SchemeKind::spsm: {
      m.ilk_rms = root(ig * ig / 4.0 * (5.0 / 3.0 - 4.0 * d1 / 3.0) + pk * pk * (2.0 * d1 / 3.0 - 1.0 / 3.0) +
                       ig * pk * (1.0 / 6.0 - d1 / 3.0 + 2.0 * b / 3.0));
      m.s_ac_rms = root(ig * ig / 4.0 * (5.0 / 3.0 - 4.0 * d1 / 3.0) +
                        pk * pk * (2.0 * d1 / 3.0 - 1.0 / 3.0 - b / 3.0) +
                        ig * pk * (b / 3.0 - d1 / 3.0 - 1.0 / 6.0));
      m.d_ac_avg = (pk - ig / 2.0) * b / 2.0;
      m.s_dc_rms = root(ig * ig / (4.0 * n * n) * (5.0 / 6.0 - 2.0 * d1 / 3.0) +
                        pk * pk / (n * n) * (d1 / 3.0 - 1.0 / 6.0) +
                        ig * pk / (n * n) * (1.0 / 12.0 - d1 / 6.0 + b / 3.0));
      m.d_dc_avg = 0.0;
      break;
    }
  }
  return m;
}

}  // namespace cfhb
