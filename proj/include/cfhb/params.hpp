#pragma once

// Converter configuration, derived quantities and per-interval operating
// points for the current-fed half bridge with secondary-side modulation.
//
// Conventions used throughout the library:
//  * duty ratios and commutation angles (d1, d2, alpha, beta) are fractions of Ts;
//  * the winding current i_lk is positive when it leaves node p towards q;
//  * the first half of every switching interval has S2ag off during stage 1 and
//    S1ag turned off at t4; the second half mirrors it with the legs exchanged.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

#include "cfhb/error.hpp"

namespace cfhb {

struct ConverterParams {
  double vg_rms = 230.0;  // [V]
  double fg = 50.0;       // [Hz]
  double vo = 345.0;      // [V]
  double po = 1500.0;     // [W]
  double fsw = 100e3;     // [Hz]
  double n = 0.38;        // Ns/Np
  double l1 = 740e-6;     // [H]
  double l2 = 740e-6;     // [H]
  double llk = 600e-9;    // [H], referred to the ac side
  double ls = 7.5e-6;     // [H], dc side

  bool operator==(const ConverterParams&) const = default;
};

/// Boost inductance used for the zero-ripple comparisons.
inline constexpr double kZeroRippleInductance = 100e-3;

inline ConverterParams with_zero_ripple(ConverterParams p) {
  p.l1 = kZeroRippleInductance;
  p.l2 = kZeroRippleInductance;
  return p;
}

struct DerivedParams {
  ConverterParams source;
  double vm = 0.0;  // grid peak voltage [V]
  double im = 0.0;  // grid peak current [A]
  double ts = 0.0;  // switching period [s]
  double lt = 0.0;  // total series inductance referred to the ac side [H]
  int intervals_per_half_cycle = 0;

  /// Fraction of Ts the reflected output voltage needs to move the winding
  /// current by one ampere across Lt.
  double transfer_fraction_per_amp() const { return source.n * lt / (source.vo * ts); }
  int intervals_per_cycle() const { return 2 * intervals_per_half_cycle; }
};

inline DerivedParams derive(const ConverterParams& p) {
  const std::pair<const char*, double> fields[] = {
      {"vg_rms", p.vg_rms}, {"fg", p.fg}, {"vo", p.vo}, {"po", p.po}, {"fsw", p.fsw},
      {"n", p.n},           {"l1", p.l1}, {"l2", p.l2}, {"llk", p.llk}, {"ls", p.ls}};
  for (const auto& [name, value] : fields) {
    if (!(std::isfinite(value) && value > 0.0)) {
      throw ConfigError(std::string("converter.") + name + " must be finite and strictly positive");
    }
  }

  const double half = p.fsw / (2.0 * p.fg);
  const double rounded = std::round(half);
  if (rounded < 1.0 || std::abs(half - rounded) > 1e-9 * half) {
    throw ConfigError("fsw/fg must be an even integer >= 2 (integer intervals per half cycle)");
  }

  DerivedParams d;
  d.source = p;
  d.vm = std::numbers::sqrt2 * p.vg_rms;
  d.im = 2.0 * p.po / d.vm;
  d.ts = 1.0 / p.fsw;
  d.lt = p.llk + p.ls / (p.n * p.n);
  d.intervals_per_half_cycle = static_cast<int>(rounded);

  if (!(p.n * d.vm < p.vo / 2.0)) {
    throw ConfigError("d1 <= 0.5 infeasible: n*Vm must stay below Vo/2");
  }
  return d;
}

// ---------------------------------------------------------------------------
// Grid sampling and ac-side duty

struct GridSample {
  double vg = 0.0;
  double ig = 0.0;
};

/// Electrical angle of interval k in radians.
inline double interval_angle(const DerivedParams& d, int k) {
  return std::numbers::pi * static_cast<double>(k) / d.intervals_per_half_cycle;
}

/// Grid voltage and current held constant over interval k (unity power factor).
inline GridSample grid_sample(const DerivedParams& d, int k) {
  if (k < 0 || k >= d.intervals_per_cycle()) {
    throw std::out_of_range("interval index " + std::to_string(k) + " outside the grid cycle");
  }
  const double s = std::sin(interval_angle(d, k));
  return {d.vm * s, d.im * s};
}

/// Nearest interval index for an angle in degrees, wrapped into one grid cycle.
inline int nearest_interval(const DerivedParams& d, double degrees) {
  const int cycle = d.intervals_per_cycle();
  long k = std::lround(degrees / 180.0 * d.intervals_per_half_cycle);
  k %= cycle;
  if (k < 0) k += cycle;
  return static_cast<int>(k);
}

inline double duty_d1(double vg, double vo, double n) {
  const double reflected = n * std::abs(vg);
  if (!(reflected < vo)) {
    throw InfeasibleError("infeasible operating point: n*|vg| must be below Vo");
  }
  const double d1 = (vo - reflected) / vo;
  if (!(d1 > 0.5)) {
    throw InfeasibleError("infeasible operating point: d1 <= 0.5");
  }
  return d1;
}

/// Peak-to-peak boost inductor ripple over one interval.
inline double boost_ripple(double vg, double d1, double ts, double inductance) {
  return std::abs(vg) * d1 * ts / inductance;
}

// ---------------------------------------------------------------------------
// Modulation schemes

enum class SchemeKind { spsm, dcpsm, idcpsm };

inline std::string_view to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::spsm: return "spsm";
    case SchemeKind::dcpsm: return "dcpsm";
    case SchemeKind::idcpsm: return "idcpsm";
  }
  return "unknown";
}

inline std::optional<SchemeKind> parse_scheme(std::string_view name) {
  std::string lower(name);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "spsm") return SchemeKind::spsm;
  if (lower == "dcpsm") return SchemeKind::dcpsm;
  if (lower == "idcpsm") return SchemeKind::idcpsm;
  return std::nullopt;
}

/// Magnitudes seen by one interval; negative-half intervals are folded onto
/// the positive half (switch roles exchanged).
struct OperatingPoint {
  int k = 0;
  double omega_tau = 0.0;  // [rad]
  double vg = 0.0;         // |vg| [V]
  double ig = 0.0;         // |ig| [A]
  double d1 = 1.0;
  double ripple_l1 = 0.0;  // [A] peak-to-peak
  double ripple_l2 = 0.0;  // [A] peak-to-peak
  bool negative_half = false;
};

struct SpsmPoint {
  double i_lk_pk = 0.0;
  std::optional<double> beta;  // falls back to the body-diode interval formula
};

using SpsmProvider = std::function<SpsmPoint(const OperatingPoint&, const DerivedParams&)>;

/// SPSM peak with the whole leg overlap (d1 - 1/2)Ts spent swinging the
/// winding current up from i_lk(t1) and back down to i_lk(t5) at Vo/(n Lt).
/// This is the timing implied by the SPSM winding-current RMS expression.
inline SpsmProvider overlap_limited_spsm() {
  return [](const OperatingPoint& op, const DerivedParams& d) {
    const double c = d.transfer_fraction_per_amp();
    return SpsmPoint{(op.d1 - 0.5) / (2.0 * c) + (op.ripple_l1 + op.ripple_l2) / 4.0, std::nullopt};
  };
}

/// Peak pinned at max(i_max, (ig + ripple)/2).
inline SpsmProvider fixed_peak_spsm(double i_max) {
  return [i_max](const OperatingPoint& op, const DerivedParams&) {
    return SpsmPoint{std::max(i_max, 0.5 * (op.ig + op.ripple_l1)), std::nullopt};
  };
}

class ModulationScheme {
 public:
  static ModulationScheme spsm(SpsmProvider provider, std::string label = "custom") {
    return ModulationScheme(Spsm{std::move(provider), std::move(label)});
  }
  static ModulationScheme dcpsm(double i_max) {
    if (!(std::isfinite(i_max) && i_max > 0.0)) throw ConfigError("dcpsm.i_max must be > 0");
    return ModulationScheme(Dcpsm{i_max});
  }
  /// Ratios at or below 1/2 are accepted here so that the validator can
  /// report on them; check_scheme() rejects them.
  static ModulationScheme idcpsm(double r) {
    if (!(std::isfinite(r) && r > 0.0)) throw ConfigError("idcpsm.r must be > 0");
    return ModulationScheme(Idcpsm{r});
  }

  SchemeKind kind() const {
    return std::visit([](const auto& s) { return s.kind; }, scheme_);
  }
  std::string_view name() const { return to_string(kind()); }

  double i_max() const { return std::get<Dcpsm>(scheme_).i_max; }
  double ratio() const { return std::get<Idcpsm>(scheme_).r; }
  const SpsmProvider& provider() const { return std::get<Spsm>(scheme_).provider; }
  const std::string& provider_label() const { return std::get<Spsm>(scheme_).label; }

 private:
  struct Spsm {
    static constexpr SchemeKind kind = SchemeKind::spsm;
    SpsmProvider provider;
    std::string label;
  };
  struct Dcpsm {
    static constexpr SchemeKind kind = SchemeKind::dcpsm;
    double i_max;
  };
  struct Idcpsm {
    static constexpr SchemeKind kind = SchemeKind::idcpsm;
    double r;
  };

  explicit ModulationScheme(std::variant<Spsm, Dcpsm, Idcpsm> s) : scheme_(std::move(s)) {}

  std::variant<Spsm, Dcpsm, Idcpsm> scheme_;
};

/// Peak-current ratio that makes IDCPSM coincide with a fixed-peak scheme at
/// the grid peak.
inline double rated_peak_ratio(double i_max, const DerivedParams& d) { return i_max / d.im; }

/// Smallest IDCPSM ratio that keeps a body-diode interval when d1 -> 1,
/// including the boost ripple: 1/2 (1 + Vm Ts / (L1 Im)).
inline double minimum_peak_ratio(const DerivedParams& d) {
  return 0.5 * (1.0 + d.vm * d.ts / (d.source.l1 * d.im));
}

inline bool ratio_margin_ok(const ModulationScheme& s, const DerivedParams& d) {
  if (s.kind() != SchemeKind::idcpsm) return true;
  return s.ratio() > 0.5 && s.ratio() > minimum_peak_ratio(d);
}

/// Strict scheme validation applied when a configuration is loaded.
inline void check_scheme(const ModulationScheme& s, const DerivedParams& d) {
  switch (s.kind()) {
    case SchemeKind::spsm:
      if (!s.provider()) throw MissingParameterError("spsm needs a per-interval peak provider");
      break;
    case SchemeKind::dcpsm:
      break;
    case SchemeKind::idcpsm:
      if (!ratio_margin_ok(s, d)) {
        throw ConfigError("idcpsm.r violates the ZCS margin rule: r must exceed " +
                          std::to_string(std::max(0.5, minimum_peak_ratio(d))));
      }
      break;
  }
}

// ---------------------------------------------------------------------------
// Per-interval quantities

/// Peak winding current the scheme commands in this interval.
inline double ilk_peak(const ModulationScheme& s, const OperatingPoint& op, const DerivedParams& d) {
  switch (s.kind()) {
    case SchemeKind::dcpsm: return s.i_max();
    case SchemeKind::idcpsm: return s.ratio() * op.ig;
    case SchemeKind::spsm:
      if (!s.provider()) throw MissingParameterError("spsm needs a per-interval peak provider");
      return s.provider()(op, d).i_lk_pk;
  }
  return 0.0;
}

inline double duty_d2(double i_lk_pk, const DerivedParams& d) {
  if (!(i_lk_pk >= 0.0)) throw InfeasibleError("peak winding current must be non-negative");
  const double d2 = d.transfer_fraction_per_amp() * i_lk_pk;
  if (!(d2 < 0.5)) throw InfeasibleError("d2 exceeds the half-interval timing budget");
  return d2;
}

struct CommutationAngles {
  double alpha = 0.0;
  double beta = 0.0;
  double i_lk_t1 = 0.0;
  double i_lk_t5 = 0.0;
  bool zcs_feasible = false;  // i_lk_pk > i_lk(t5): a body-diode interval exists
};

/// alpha uses the L2 ripple (current handed from S2ag's leg), beta the L1 ripple.
inline CommutationAngles commutation_angles(const OperatingPoint& op, double i_lk_pk,
                                            const DerivedParams& d) {
  const double c = d.transfer_fraction_per_amp();
  CommutationAngles a;
  a.i_lk_t1 = -0.5 * (op.ig - op.ripple_l2);
  a.i_lk_t5 = 0.5 * (op.ig + op.ripple_l1);
  a.alpha = c * std::abs(a.i_lk_t1);
  a.beta = c * std::abs(a.i_lk_t5 - i_lk_pk);
  a.zcs_feasible = i_lk_pk > a.i_lk_t5;
  return a;
}

enum class Degeneracy { none, low_current, ripple_exceeds_current, timing_overflow };

inline std::string_view to_string(Degeneracy g) {
  switch (g) {
    case Degeneracy::none: return "none";
    case Degeneracy::low_current: return "low-current";
    case Degeneracy::ripple_exceeds_current: return "ripple-exceeds-current";
    case Degeneracy::timing_overflow: return "timing-overflow";
  }
  return "unknown";
}

/// Intervals whose grid current is below this fraction of Im are degenerate.
inline constexpr double kLowCurrentFraction = 0.01;

struct IntervalPlan {
  SchemeKind scheme = SchemeKind::idcpsm;
  int k = 0;
  double omega_tau = 0.0;  // [rad]
  double vg = 0.0;         // sampled, signed [V]
  double ig = 0.0;         // sampled, signed [A]
  bool negative_half = false;

  double d1 = 1.0;
  double d2 = 0.0;
  double alpha = 0.0;
  double beta = 0.0;

  double i_lk_pk = 0.0;
  double i_lk_t0 = 0.0;
  double i_lk_t1 = 0.0;
  double i_lk_t5 = 0.0;
  double ripple_l1 = 0.0;
  double ripple_l2 = 0.0;

  // Second half of the interval (boost inductors exchange roles).
  double alpha_mirror = 0.0;
  double beta_mirror = 0.0;

  bool zcs_feasible = false;
  Degeneracy degeneracy = Degeneracy::none;

  bool degenerate() const { return degeneracy != Degeneracy::none; }
  double grid_voltage() const { return std::abs(vg); }
  double grid_current() const { return std::abs(ig); }
  double timing_budget() const {
    return std::max(alpha, alpha_mirror) + d2 + std::max(beta, beta_mirror) + (1.0 - d1);
  }
  double omega_tau_deg() const { return omega_tau * 180.0 / std::numbers::pi; }
};

inline constexpr double kTimingTolerance = 1e-12;

inline IntervalPlan plan_interval(const DerivedParams& d, const ModulationScheme& s, int k) {
  const GridSample g = grid_sample(d, k);
  const ConverterParams& p = d.source;

  OperatingPoint op;
  op.k = k;
  op.omega_tau = interval_angle(d, k);
  op.vg = std::abs(g.vg);
  op.ig = std::abs(g.ig);
  op.negative_half = k >= d.intervals_per_half_cycle;
  op.d1 = duty_d1(op.vg, p.vo, p.n);
  op.ripple_l1 = boost_ripple(op.vg, op.d1, d.ts, p.l1);
  op.ripple_l2 = boost_ripple(op.vg, op.d1, d.ts, p.l2);

  IntervalPlan plan;
  plan.scheme = s.kind();
  plan.k = k;
  plan.omega_tau = op.omega_tau;
  plan.vg = g.vg;
  plan.ig = g.ig;
  plan.negative_half = op.negative_half;
  plan.d1 = op.d1;
  plan.ripple_l1 = op.ripple_l1;
  plan.ripple_l2 = op.ripple_l2;

  std::optional<double> beta_override;
  if (s.kind() == SchemeKind::spsm) {
    if (!s.provider()) throw MissingParameterError("spsm needs a per-interval peak provider");
    const SpsmPoint sp = s.provider()(op, d);
    plan.i_lk_pk = sp.i_lk_pk;
    beta_override = sp.beta;
  } else {
    plan.i_lk_pk = ilk_peak(s, op, d);
  }

  const double c = d.transfer_fraction_per_amp();
  const CommutationAngles a = commutation_angles(op, plan.i_lk_pk, d);
  plan.d2 = c * plan.i_lk_pk;
  plan.alpha = a.alpha;
  plan.beta = beta_override.value_or(a.beta);
  plan.i_lk_t0 = -0.5 * (op.ig + op.ripple_l2);
  plan.i_lk_t1 = a.i_lk_t1;
  plan.i_lk_t5 = a.i_lk_t5;
  plan.zcs_feasible = a.zcs_feasible;
  plan.alpha_mirror = c * 0.5 * std::abs(op.ig - op.ripple_l1);
  plan.beta_mirror = beta_override.value_or(c * std::abs(plan.i_lk_pk - 0.5 * (op.ig + op.ripple_l2)));

  if (op.ig < kLowCurrentFraction * d.im) {
    plan.degeneracy = Degeneracy::low_current;
  } else if (op.ig < std::max(op.ripple_l1, op.ripple_l2)) {
    plan.degeneracy = Degeneracy::ripple_exceeds_current;
  } else if (plan.timing_budget() > 0.5 + kTimingTolerance) {
    plan.degeneracy = Degeneracy::timing_overflow;
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Soft-switching verdicts

struct FeasibilityReport {
  int k = 0;
  double omega_tau = 0.0;
  bool zcs_margin = false;       // (a) i_lk_pk > i_lk(t5)
  bool circulating = false;      // (b) i_cir = i_lk_pk - ig/2 > 0
  bool timing = false;           // (c) alpha + d2 + beta + (1 - d1) within Ts/2
  bool duty = false;             // (d) 0.5 < d1 < 1
  bool short_off_time = false;   // informational: 1 - d1 < 2 (alpha + beta)
  Degeneracy degeneracy = Degeneracy::none;

  bool passed() const { return zcs_margin && circulating && timing && duty; }
};

inline FeasibilityReport validate_soft_switching(const IntervalPlan& plan) {
  FeasibilityReport r;
  r.k = plan.k;
  r.omega_tau = plan.omega_tau;
  r.zcs_margin = plan.i_lk_pk > plan.i_lk_t5;
  r.circulating = plan.i_lk_pk - 0.5 * plan.grid_current() > 0.0;
  r.timing = plan.timing_budget() <= 0.5 + kTimingTolerance;
  r.duty = plan.d1 > 0.5 && plan.d1 < 1.0;
  r.short_off_time = (1.0 - plan.d1) < 2.0 * (plan.alpha + plan.beta);
  r.degeneracy = plan.degeneracy;
  return r;
}

// ---------------------------------------------------------------------------
// Loss-model device parameters

struct DeviceParams {
  double rds_on_ac = 0.080;    // [ohm]
  double rds_on_dc = 0.030;    // [ohm]
  double vf_ac = 3.3;          // [V]
  double vf_dc = 1.5;          // [V]
  double r_winding_ac = 0.05;  // [ohm]
  double r_winding_dc = 0.05;  // [ohm]
  double r_series = 0.05;      // [ohm]
  double r_boost = 0.05;       // [ohm], each boost inductor
  double p_core_fixed = 5.0;   // [W]
  double e_hard_switch = 0.0;  // [J] per hard transition

  bool operator==(const DeviceParams&) const = default;
};

inline void check_device_params(const DeviceParams& dev) {
  const std::pair<const char*, double> fields[] = {
      {"rds_on_ac", dev.rds_on_ac},       {"rds_on_dc", dev.rds_on_dc},
      {"vf_ac", dev.vf_ac},               {"vf_dc", dev.vf_dc},
      {"r_winding_ac", dev.r_winding_ac}, {"r_winding_dc", dev.r_winding_dc},
      {"r_series", dev.r_series},         {"r_boost", dev.r_boost},
      {"p_core_fixed", dev.p_core_fixed}, {"e_hard_switch", dev.e_hard_switch}};
  for (const auto& [name, value] : fields) {
    if (!(std::isfinite(value) && value >= 0.0)) {
      throw ConfigError(std::string("devices.") + name + " must be finite and >= 0");
    }
  }
}

}  // namespace cfhb
