#pragma once

// Half-grid-cycle sweeps, cycle aggregation, the loss model and scheme comparison.

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cfhb/error.hpp"
#include "cfhb/metrics.hpp"
#include "cfhb/params.hpp"
#include "cfhb/waveforms.hpp"

namespace cfhb {

struct SweepOptions {
  bool analytic_only = false;
};

struct CycleProfile {
  SchemeKind scheme = SchemeKind::idcpsm;
  DerivedParams derived;
  std::vector<IntervalPlan> plans;
  std::vector<std::optional<IntervalMetrics>> numeric;
  std::vector<IntervalMetrics> analytic;
  std::vector<std::optional<double>> power;  // [W], numeric only
  std::vector<bool> masked;
  std::vector<std::string> mask_reason;

  std::size_t size() const { return plans.size(); }
  /// Numeric metrics where synthesized, closed form otherwise.
  const IntervalMetrics& selected(std::size_t k) const {
    return numeric[k] ? *numeric[k] : analytic[k];
  }
  std::size_t unmasked_count() const {
    return static_cast<std::size_t>(std::count(masked.begin(), masked.end(), false));
  }
};

/// Plans every interval of the positive half cycle, synthesizes and measures
/// the non-degenerate ones. SPSM and analytic-only runs use the closed forms.
inline CycleProfile sweep_half_cycle(const DerivedParams& d, const ModulationScheme& scheme,
                                     const SweepOptions& opt = {}) {
  const int k_count = d.intervals_per_half_cycle;
  CycleProfile p;
  p.scheme = scheme.kind();
  p.derived = d;
  p.plans.reserve(k_count);
  for (int k = 0; k < k_count; ++k) {
    IntervalPlan plan = plan_interval(d, scheme, k);
    IntervalMetrics analytic = analytic_metrics(scheme, plan, d);
    std::optional<IntervalMetrics> numeric;
    std::optional<double> power;
    std::string reason;
    if (plan.degenerate()) {
      reason = std::string(to_string(plan.degeneracy));
    } else if (!opt.analytic_only && scheme.kind() != SchemeKind::spsm) {
      const NodeWaveforms w = synth_interval(plan, d);
      numeric = numeric_metrics(w, plan);
      power = power_delivered(w, d.source.n);
    }
    if (reason.empty() && !numeric && analytic.clamped) reason = "negative-radicand";

    p.masked.push_back(!reason.empty());
    p.mask_reason.push_back(std::move(reason));
    p.plans.push_back(plan);
    p.analytic.push_back(analytic);
    p.numeric.push_back(numeric);
    p.power.push_back(power);
  }
  return p;
}

struct CycleMetrics {
  SchemeKind scheme = SchemeKind::idcpsm;
  std::size_t intervals = 0;
  std::size_t used = 0;
  std::size_t numeric_used = 0;
  double ilk_rms = 0.0;
  double s_ac_rms = 0.0;
  double s_dc_rms = 0.0;
  double d_ac_avg = 0.0;
  double d_dc_avg = 0.0;
  double boost_rms = 0.0;  // per boost inductor, ripple included
  double i_lk_peak = 0.0;
  double peak_ratio = 0.0;               // i_lk_pk near 10 deg over i_lk_pk at 90 deg
  double hard_edges_per_interval = 0.0;  // edges without a body-diode interval
  double i_cir_max = 0.0;
  std::optional<double> power_delivered;  // [W]
  double po = 0.0;

  std::optional<double> power_balance_error() const {
    if (!power_delivered) return std::nullopt;
    return (*power_delivered - po) / po;
  }
};

inline CycleMetrics aggregate(const CycleProfile& p) {
  if (p.size() == 0 || p.unmasked_count() == 0) {
    throw Error("every interval of the profile is masked; nothing to aggregate");
  }
  CycleMetrics c;
  c.scheme = p.scheme;
  c.intervals = p.size();
  c.po = p.derived.source.po;
  double ilk2 = 0, sac2 = 0, sdc2 = 0, dac = 0, ddc = 0, boost2 = 0, edges = 0, power = 0;
  std::size_t power_n = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    c.i_lk_peak = std::max(c.i_lk_peak, p.plans[k].i_lk_pk);
    c.i_cir_max = std::max(c.i_cir_max, circulating_current(p.plans[k]));
    if (p.masked[k]) continue;
    const IntervalMetrics& m = p.selected(k);
    const IntervalPlan& plan = p.plans[k];
    ++c.used;
    if (m.origin == Origin::numeric) ++c.numeric_used;
    ilk2 += m.ilk_rms * m.ilk_rms;
    sac2 += m.s_ac_rms * m.s_ac_rms;
    sdc2 += m.s_dc_rms * m.s_dc_rms;
    dac += m.d_ac_avg;
    ddc += m.d_dc_avg;
    const double ig = plan.grid_current();
    boost2 += 0.25 * ig * ig + plan.ripple_l1 * plan.ripple_l1 / 12.0;
    if (!(plan.i_lk_pk > plan.i_lk_t5)) edges += 4.0;
    if (p.power[k]) {
      power += *p.power[k];
      ++power_n;
    }
  }
  const double u = static_cast<double>(c.used);
  c.ilk_rms = std::sqrt(ilk2 / u);
  c.s_ac_rms = std::sqrt(sac2 / u);
  c.s_dc_rms = std::sqrt(sdc2 / u);
  c.d_ac_avg = dac / u;
  c.d_dc_avg = ddc / u;
  c.boost_rms = std::sqrt(boost2 / u);
  c.hard_edges_per_interval = edges / u;
  if (power_n == c.used) c.power_delivered = power / static_cast<double>(power_n);

  const auto& d = p.derived;
  const double at90 = p.plans[static_cast<std::size_t>(nearest_interval(d, 90.0))].i_lk_pk;
  const double at10 = p.plans[static_cast<std::size_t>(nearest_interval(d, 10.0))].i_lk_pk;
  c.peak_ratio = at90 > 0.0 ? at10 / at90 : 0.0;
  return c;
}

struct LossBreakdown {
  double ac_switch_loss = 0.0;
  double dc_switch_loss = 0.0;
  double hft_loss = 0.0;
  double boost_inductor_loss = 0.0;
  double residual_switching_loss = 0.0;
  double efficiency = 0.0;

  double total() const {
    return ac_switch_loss + dc_switch_loss + hft_loss + boost_inductor_loss + residual_switching_loss;
  }
};

/// Conduction losses from cycle RMS/average currents. Four ac-side channels
/// (two switching, two series devices at full leg current) and two body diodes;
/// four dc-side devices.
inline LossBreakdown loss_report(const CycleMetrics& m, const DeviceParams& dev, const DerivedParams& d) {
  const double n = d.source.n;
  LossBreakdown l;
  l.ac_switch_loss = 4.0 * dev.rds_on_ac * m.s_ac_rms * m.s_ac_rms + 2.0 * dev.vf_ac * m.d_ac_avg;
  l.dc_switch_loss = 4.0 * dev.rds_on_dc * m.s_dc_rms * m.s_dc_rms + 4.0 * dev.vf_dc * m.d_dc_avg;
  const double i_dc = m.ilk_rms / n;
  l.hft_loss = dev.r_winding_ac * m.ilk_rms * m.ilk_rms + (dev.r_winding_dc + dev.r_series) * i_dc * i_dc +
               dev.p_core_fixed;
  l.boost_inductor_loss = 2.0 * dev.r_boost * m.boost_rms * m.boost_rms;
  l.residual_switching_loss = dev.e_hard_switch * d.source.fsw * m.hard_edges_per_interval;
  l.efficiency = d.source.po / (d.source.po + l.total());
  return l;
}

// ---------------------------------------------------------------------------
// Closed form against waveform integration

struct Deviation {
  double max_abs = 0.0;  // largest |analytic - numeric| / numeric
  double mean = 0.0;     // signed mean of (analytic - numeric) / numeric
  std::size_t count = 0;
};

struct OracleDeviation {
  Deviation ilk_rms, s_ac_rms, d_ac_avg, s_dc_rms, d_dc_avg;
};

inline OracleDeviation oracle_deviation(const CycleProfile& p) {
  OracleDeviation o;
  auto add = [](Deviation& dv, double analytic, double numeric) {
    if (!(std::abs(numeric) > 1e-12)) return;
    const double rel = (analytic - numeric) / numeric;
    dv.max_abs = std::max(dv.max_abs, std::abs(rel));
    dv.mean += rel;
    ++dv.count;
  };
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p.masked[k] || !p.numeric[k]) continue;
    const IntervalMetrics& a = p.analytic[k];
    const IntervalMetrics& n = *p.numeric[k];
    add(o.ilk_rms, a.ilk_rms, n.ilk_rms);
    add(o.s_ac_rms, a.s_ac_rms, n.s_ac_rms);
    add(o.d_ac_avg, a.d_ac_avg, n.d_ac_avg);
    add(o.s_dc_rms, a.s_dc_rms, n.s_dc_rms);
    add(o.d_dc_avg, a.d_dc_avg, n.d_dc_avg);
  }
  for (Deviation* dv : {&o.ilk_rms, &o.s_ac_rms, &o.d_ac_avg, &o.s_dc_rms, &o.d_dc_avg}) {
    if (dv->count) dv->mean /= static_cast<double>(dv->count);
  }
  return o;
}

// ---------------------------------------------------------------------------
// Comparison

struct SchemeResult {
  ModulationScheme scheme;
  CycleProfile profile;
  CycleMetrics cycle;
  LossBreakdown losses;
};

struct ComparisonReport {
  std::vector<SchemeResult> results;
  bool analytic_only = false;
};

inline ComparisonReport compare(const DerivedParams& d, const std::vector<ModulationScheme>& schemes,
                                const DeviceParams& dev, const SweepOptions& opt = {}) {
  if (schemes.size() < 2) throw ConfigError("compare needs at least two schemes");
  ComparisonReport r;
  r.analytic_only = opt.analytic_only;
  for (const ModulationScheme& s : schemes) {
    CycleProfile profile = sweep_half_cycle(d, s, opt);
    CycleMetrics cycle = aggregate(profile);
    LossBreakdown losses = loss_report(cycle, dev, d);
    r.results.push_back({s, std::move(profile), cycle, losses});
  }
  return r;
}

// ---------------------------------------------------------------------------
// Feasibility over a half cycle

struct ValidationSummary {
  SchemeKind scheme = SchemeKind::idcpsm;
  std::vector<FeasibilityReport> rows;
  std::size_t passed = 0;
  std::size_t failed = 0;      // non-degenerate intervals with a failing verdict
  std::size_t degenerate = 0;  // counted, never failures
  bool ratio_margin = true;
  double minimum_ratio = 0.0;

  bool ok() const { return failed == 0 && ratio_margin; }
};

inline ValidationSummary validate_half_cycle(const DerivedParams& d, const ModulationScheme& s) {
  ValidationSummary v;
  v.scheme = s.kind();
  v.ratio_margin = ratio_margin_ok(s, d);
  v.minimum_ratio = minimum_peak_ratio(d);
  for (int k = 0; k < d.intervals_per_half_cycle; ++k) {
    const FeasibilityReport r = validate_soft_switching(plan_interval(d, s, k));
    if (r.degeneracy != Degeneracy::none) {
      ++v.degenerate;
    } else if (r.passed()) {
      ++v.passed;
    } else {
      ++v.failed;
    }
    v.rows.push_back(r);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Writers

inline void write_sweep_csv(std::ostream& os, const CycleProfile& p) {
  os << "k,omega_tau_deg,vg_V,ig_A,d1,d2,alpha,beta,ilk_pk_A,icir_A,ilk_rms_A,s_ac_rms_A,d_ac_avg_A,"
        "s_dc_rms_A,d_dc_avg_A,origin,scheme\n";
  for (std::size_t k = 0; k < p.size(); ++k) {
    const IntervalPlan& pl = p.plans[k];
    const IntervalMetrics& m = p.selected(k);
    os << pl.k << ',' << format_number(pl.omega_tau_deg()) << ',' << format_number(pl.vg) << ','
       << format_number(pl.ig) << ',' << format_number(pl.d1) << ',' << format_number(pl.d2) << ','
       << format_number(pl.alpha) << ',' << format_number(pl.beta) << ',' << format_number(pl.i_lk_pk) << ','
       << format_number(m.i_cir) << ',' << format_number(m.ilk_rms) << ',' << format_number(m.s_ac_rms) << ','
       << format_number(m.d_ac_avg) << ',' << format_number(m.s_dc_rms) << ',' << format_number(m.d_dc_avg)
       << ',' << to_string(m.origin) << ',' << to_string(pl.scheme) << '\n';
  }
}

inline void write_validation_csv(std::ostream& os, const ValidationSummary& v) {
  os << "k,omega_tau_deg,zcs_margin,circulating,timing,duty,short_off_time,degeneracy,pass\n";
  auto yn = [](bool b) { return b ? "1" : "0"; };
  for (const FeasibilityReport& r : v.rows) {
    os << r.k << ',' << format_number(r.omega_tau * 180.0 / std::numbers::pi) << ',' << yn(r.zcs_margin) << ','
       << yn(r.circulating) << ',' << yn(r.timing) << ',' << yn(r.duty) << ',' << yn(r.short_off_time) << ','
       << to_string(r.degeneracy) << ',' << yn(r.passed()) << '\n';
  }
}

namespace detail {

inline std::string fixed(double v, int precision = 4) {
  if (v == 0.0) v = 0.0;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

inline std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

inline std::string percent(double rel) { return fixed(100.0 * rel, 2) + "%"; }

}  // namespace detail

inline void write_deviation_text(std::ostream& os, const OracleDeviation& o) {
  os << "closed form vs waveform integration (unmasked intervals)\n";
  const std::pair<const char*, const Deviation*> rows[] = {{"ilk_rms", &o.ilk_rms},   {"s_ac_rms", &o.s_ac_rms},
                                                           {"d_ac_avg", &o.d_ac_avg}, {"s_dc_rms", &o.s_dc_rms},
                                                           {"d_dc_avg", &o.d_dc_avg}};
  for (const auto& [name, dv] : rows) {
    os << "  " << detail::pad(name, 9) << "  ";
    if (dv->count == 0) {
      os << "n/a\n";
      continue;
    }
    os << "max |dev| " << detail::pad(detail::percent(dv->max_abs), 8) << "  mean "
       << detail::pad(detail::percent(dv->mean), 8);
    if (std::abs(dv->mean) > 0.02) os << (dv->mean > 0 ? "  (closed form high)" : "  (closed form low)");
    os << '\n';
  }
}

inline void write_comparison_text(std::ostream& os, const ComparisonReport& r) {
  const std::size_t w = 12;
  auto header = [&](const char* title) {
    os << title << '\n' << "  " << std::string(24, ' ');
    for (const auto& s : r.results) os << detail::pad(std::string(s.scheme.name()), w);
    os << '\n';
  };
  auto row = [&](const char* name, auto getter, int precision = 4) {
    os << "  " << name << std::string(24 - std::min<std::size_t>(24, std::string(name).size()), ' ');
    for (const auto& s : r.results) os << detail::pad(detail::fixed(getter(s), precision), w);
    os << '\n';
  };

  header("cycle currents [A]");
  row("ilk_rms", [](const SchemeResult& s) { return s.cycle.ilk_rms; });
  row("s_ac_rms", [](const SchemeResult& s) { return s.cycle.s_ac_rms; });
  row("d_ac_avg", [](const SchemeResult& s) { return s.cycle.d_ac_avg; });
  row("s_dc_rms", [](const SchemeResult& s) { return s.cycle.s_dc_rms; });
  row("d_dc_avg", [](const SchemeResult& s) { return s.cycle.d_dc_avg; });
  row("boost_rms", [](const SchemeResult& s) { return s.cycle.boost_rms; });
  row("i_lk_peak", [](const SchemeResult& s) { return s.cycle.i_lk_peak; });
  row("i_cir_max", [](const SchemeResult& s) { return s.cycle.i_cir_max; });
  row("peak ratio 10/90 deg", [](const SchemeResult& s) { return s.cycle.peak_ratio; });
  row("intervals used", [](const SchemeResult& s) { return static_cast<double>(s.cycle.used); }, 0);

  header("losses [W]");
  row("ac switches", [](const SchemeResult& s) { return s.losses.ac_switch_loss; }, 2);
  row("dc switches", [](const SchemeResult& s) { return s.losses.dc_switch_loss; }, 2);
  row("transformer", [](const SchemeResult& s) { return s.losses.hft_loss; }, 2);
  row("boost inductors", [](const SchemeResult& s) { return s.losses.boost_inductor_loss; }, 2);
  row("hard switching", [](const SchemeResult& s) { return s.losses.residual_switching_loss; }, 2);
  row("total", [](const SchemeResult& s) { return s.losses.total(); }, 2);
  row("efficiency [%] (model)", [](const SchemeResult& s) { return 100.0 * s.losses.efficiency; }, 2);

  os << "power balance (lossless waveform model, unmasked intervals)\n";
  for (const auto& s : r.results) {
    os << "  " << detail::pad(std::string(s.scheme.name()), 8) << "  ";
    if (const auto e = s.cycle.power_balance_error()) {
      os << detail::fixed(*s.cycle.power_delivered, 1) << " W vs " << detail::fixed(s.cycle.po, 1) << " W ("
         << detail::percent(*e) << ")\n";
    } else {
      os << "n/a (closed-form metrics)\n";
    }
  }
  for (const auto& s : r.results) {
    if (s.cycle.numeric_used == 0) continue;
    os << s.scheme.name() << ": ";
    write_deviation_text(os, oracle_deviation(s.profile));
  }
  os << "efficiency is a conduction-loss model estimate, not a prediction of measured efficiency\n";
}

inline void write_comparison_csv(std::ostream& os, const ComparisonReport& r) {
  os << "scheme,origin,intervals_used,ilk_rms_A,s_ac_rms_A,d_ac_avg_A,s_dc_rms_A,d_dc_avg_A,boost_rms_A,"
        "ilk_peak_A,icir_max_A,peak_ratio,ac_switch_loss_W,dc_switch_loss_W,hft_loss_W,boost_inductor_loss_W,"
        "residual_switching_loss_W,total_loss_W,efficiency,power_delivered_W\n";
  for (const auto& s : r.results) {
    const CycleMetrics& c = s.cycle;
    const LossBreakdown& l = s.losses;
    os << s.scheme.name() << ',' << (c.numeric_used == c.used ? "numeric" : "analytic") << ',' << c.used << ','
       << format_number(c.ilk_rms) << ',' << format_number(c.s_ac_rms) << ',' << format_number(c.d_ac_avg) << ','
       << format_number(c.s_dc_rms) << ',' << format_number(c.d_dc_avg) << ',' << format_number(c.boost_rms)
       << ',' << format_number(c.i_lk_peak) << ',' << format_number(c.i_cir_max) << ','
       << format_number(c.peak_ratio) << ',' << format_number(l.ac_switch_loss) << ','
       << format_number(l.dc_switch_loss) << ',' << format_number(l.hft_loss) << ','
       << format_number(l.boost_inductor_loss) << ',' << format_number(l.residual_switching_loss) << ','
       << format_number(l.total()) << ',' << format_number(l.efficiency) << ','
       << (c.power_delivered ? format_number(*c.power_delivered) : std::string()) << '\n';
  }
}

}  // namespace cfhb
