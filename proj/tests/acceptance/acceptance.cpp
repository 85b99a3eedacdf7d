// Acceptance criteria AC1..AC10. Prints one PASS/FAIL line per criterion.
// Usage: acceptance [AC<n> ...]   (no arguments runs all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cfhb/cfhb.hpp"

using namespace cfhb;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const RunConfig kDefaults{};

// Compares closed form against waveform integration at 10..90 deg.
Verdict oracle_check(const DerivedParams& d, double tol_rms, double tol_other, bool report_excess) {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  std::map<std::string, double> mean;
  int points = 0;
  for (const SchemeKind kind : {SchemeKind::dcpsm, SchemeKind::idcpsm}) {
    const ModulationScheme s = RunConfig{kDefaults}.scheme(kind);
    for (int deg = 10; deg <= 90; deg += 10) {
      const IntervalPlan p = plan_interval(d, s, nearest_interval(d, deg));
      const IntervalMetrics n = numeric_metrics(synth_interval(p, d), p);
      const IntervalMetrics a = analytic_metrics(s, p, d);
      ++points;
      const std::pair<const char*, std::pair<double, double>> q[] = {
          {"ilk_rms", {a.ilk_rms, n.ilk_rms}},   {"s_dc_rms", {a.s_dc_rms, n.s_dc_rms}},
          {"s_ac_rms", {a.s_ac_rms, n.s_ac_rms}}, {"d_ac_avg", {a.d_ac_avg, n.d_ac_avg}},
          {"d_dc_avg", {a.d_dc_avg, n.d_dc_avg}}};
      for (const auto& [name, vals] : q) {
        const auto [an, nu] = vals;
        if (nu == 0.0 && an == 0.0) continue;
        const double rel = (an - nu) / nu;
        const std::string key = std::string(to_string(kind)) + "." + name;
        mean[key] += rel / 9.0;
        const double tol = (std::string(name) == "ilk_rms" || std::string(name) == "s_dc_rms") ? tol_rms : tol_other;
        if (std::abs(rel) > tol) {
          v.require(false, key + " " + fmt("%+.2f%%", 100 * rel) + " at " + std::to_string(deg) + " deg");
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  v.require(secs < 5.0, "runtime " + fmt("%.2f s", secs));
  if (report_excess) {
    for (const auto& [key, m] : mean) {
      if (std::abs(m) > 0.02) v.note("systematic " + key + " mean " + fmt("%+.2f%%", 100 * m));
    }
  }
  v.note(std::to_string(points) + " points in " + fmt("%.3f s", secs));
  return v;
}

Verdict ac1() { return oracle_check(derive(with_zero_ripple(kDefaults.converter)), 0.02, 0.05, false); }

Verdict ac2() { return oracle_check(derive(kDefaults.converter), 0.10, 0.10, true); }

Verdict ac3() {
  Verdict v;
  const DerivedParams d = kDefaults.derived();
  const ModulationScheme s = kDefaults.scheme(SchemeKind::dcpsm);
  double lo = INFINITY, hi = -INFINITY;
  int off_peak = 0;
  for (int k = 0; k < d.intervals_per_half_cycle; ++k) {
    const IntervalPlan p = plan_interval(d, s, k);
    const double sdc = analytic_metrics(s, p, d).s_dc_rms;
    lo = std::min(lo, sdc);
    hi = std::max(hi, sdc);
    off_peak += p.i_lk_pk != 10.2;
  }
  const double spread = (hi - lo) / hi;
  v.require(spread < 1e-12, "s_dc_rms spread " + fmt("%.3g", spread));
  v.require(off_peak == 0, std::to_string(off_peak) + " intervals with i_lk_pk != 10.2 A");
  v.note("s_dc_rms " + fmt("%.6f A", hi) + ", spread " + fmt("%.3g", spread));
  return v;
}

Verdict ac4() {
  Verdict v;
  const DerivedParams d = kDefaults.derived();
  const ModulationScheme s = kDefaults.scheme(SchemeKind::idcpsm);
  const double r = s.ratio();
  int peak_off = 0, cir_off = 0;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  const int kn = d.intervals_per_half_cycle;
  for (int k = 0; k < kn; ++k) {
    const IntervalPlan p = plan_interval(d, s, k);
    const double ig = p.grid_current();
    peak_off += p.i_lk_pk != r * ig;
    const double cir = circulating_current(p);
    cir_off += std::abs(cir - (r - 0.5) * ig) > 1e-12 * std::max(1.0, ig);
    const double y = std::sin(p.omega_tau);
    sx += cir; sy += y; sxx += cir * cir; syy += y * y; sxy += cir * y;
  }
  const double n = kn;
  const double corr = (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
  v.require(peak_off == 0, std::to_string(peak_off) + " intervals with i_lk_pk != r*ig");
  v.require(cir_off == 0, std::to_string(cir_off) + " intervals with i_cir != (r-1/2)*ig");
  v.require(corr > 0.999, "corr " + fmt("%.6f", corr));
  v.note("r " + fmt("%.5f", r) + ", corr(i_cir, sin) " + fmt("%.9f", corr));
  return v;
}

Verdict ac5() {
  Verdict v;
  const DerivedParams d = kDefaults.derived();
  const int k = nearest_interval(d, 10.0);
  auto at = [&](SchemeKind kind) {
    const ModulationScheme s = kDefaults.scheme(kind);
    const IntervalPlan p = plan_interval(d, s, k);
    return numeric_metrics(synth_interval(p, d), p);
  };
  const IntervalMetrics dc = at(SchemeKind::dcpsm);
  const IntervalMetrics id = at(SchemeKind::idcpsm);
  v.require(std::abs(dc.i_cir - 9.40) <= 0.01 * 9.40, "DCPSM i_cir " + fmt("%.4f", dc.i_cir));
  v.require(std::abs(id.i_cir - 0.97) <= 0.01 * 0.97, "IDCPSM i_cir " + fmt("%.4f", id.i_cir));
  const double ratio = id.ilk_rms / dc.ilk_rms;
  v.require(ratio < 0.15, "ilk_rms ratio " + fmt("%.4f", ratio));
  v.note("k " + std::to_string(k) + ", i_cir " + fmt("%.4f", dc.i_cir) + " / " + fmt("%.4f A", id.i_cir) +
         ", ilk_rms ratio " + fmt("%.4f", ratio));
  return v;
}

Verdict ac6() {
  Verdict v;
  const DerivedParams d = kDefaults.derived();
  const ComparisonReport r = compare(d,
                                     {kDefaults.scheme(SchemeKind::spsm), kDefaults.scheme(SchemeKind::dcpsm),
                                      kDefaults.scheme(SchemeKind::idcpsm)},
                                     kDefaults.devices);
  const LossBreakdown& sp = r.results[0].losses;
  const LossBreakdown& dc = r.results[1].losses;
  const LossBreakdown& id = r.results[2].losses;
  v.require(sp.total() > dc.total() && dc.total() > id.total(),
            "totals " + fmt("%.2f", sp.total()) + ", " + fmt("%.2f", dc.total()) + ", " + fmt("%.2f W", id.total()));
  const double dc_red = 1.0 - id.dc_switch_loss / dc.dc_switch_loss;
  const double core = kDefaults.devices.p_core_fixed;
  const double cu_red = 1.0 - (id.hft_loss - core) / (dc.hft_loss - core);
  v.require(dc_red >= 0.25, "dc switch reduction " + fmt("%.1f%%", 100 * dc_red));
  v.require(cu_red >= 0.10, "transformer copper reduction " + fmt("%.1f%%", 100 * cu_red));
  v.note("totals spsm " + fmt("%.2f", sp.total()) + " / dcpsm " + fmt("%.2f", dc.total()) + " / idcpsm " +
         fmt("%.2f W", id.total()) + ", dc switch -" + fmt("%.1f%%", 100 * dc_red) + ", copper -" +
         fmt("%.1f%%", 100 * cu_red));
  return v;
}

Verdict ac7() {
  Verdict v;
  const DerivedParams d = kDefaults.derived();
  for (const SchemeKind kind : {SchemeKind::dcpsm, SchemeKind::idcpsm}) {
    const CycleMetrics c = aggregate(sweep_half_cycle(d, kDefaults.scheme(kind)));
    const auto e = c.power_balance_error();
    v.require(e.has_value() && std::abs(*e) < 0.05, std::string(to_string(kind)) + " power balance missing or off");
    if (e) v.note(std::string(to_string(kind)) + " " + fmt("%.1f W", *c.power_delivered) + " (" + fmt("%+.2f%%", 100 * *e) + ")");
  }
  return v;
}

Verdict ac8() {
  Verdict v;
  const auto dir = std::filesystem::temp_directory_path() / "cfhb_acceptance_ac8";
  RunConfig cfg;
  cfg.out_dir = dir.string();
  std::ostringstream out, err;
  const int code = run(cfg, parse_command({"validate", "idcpsm"}), out, err);
  v.require(code == 0, "default validate exit " + std::to_string(code));

  const DerivedParams d = cfg.derived();
  const ValidationSummary ok = validate_half_cycle(d, cfg.scheme(SchemeKind::idcpsm));
  int bad_in_band = 0;
  for (const FeasibilityReport& r : ok.rows) {
    const double deg = r.omega_tau * 180.0 / std::numbers::pi;
    if (deg >= 2.0 && deg <= 178.0 && !(r.passed() && r.degeneracy == Degeneracy::none)) ++bad_in_band;
  }
  v.require(bad_in_band == 0, std::to_string(bad_in_band) + " intervals in [2, 178] deg not passing");

  RunConfig low = parse_config("[idcpsm]\nr = 0.4\n", Validation::lenient);
  low.out_dir = dir.string();
  const int low_code = run(low, parse_command({"validate", "idcpsm"}), out, err);
  v.require(low_code == 2, "r = 0.4 validate exit " + std::to_string(low_code));
  const ValidationSummary lo = validate_half_cycle(d, low.scheme(SchemeKind::idcpsm));
  int nonzero = 0, b_fail = 0;
  for (const FeasibilityReport& r : lo.rows) {
    if (r.k == 0) continue;
    ++nonzero;
    b_fail += !r.circulating;
  }
  v.require(b_fail == nonzero, std::to_string(nonzero - b_fail) + " nonzero intervals pass (b) at r = 0.4");
  v.note("default " + std::to_string(ok.passed) + " pass / " + std::to_string(ok.degenerate) +
         " degenerate, exit " + std::to_string(code) + "; r = 0.4: " + std::to_string(b_fail) + "/" +
         std::to_string(nonzero) + " fail (b), exit " + std::to_string(low_code));
  std::filesystem::remove_all(dir);
  return v;
}

Verdict ac9() {
  Verdict v;
  const DerivedParams d = kDefaults.derived();
  const ModulationScheme s = kDefaults.scheme(SchemeKind::idcpsm);
  const int kn = d.intervals_per_cycle();
  std::vector<NodeWaveforms> w;
  w.reserve(kn);
  for (int k = 0; k < kn; ++k) w.push_back(synth_interval(plan_interval(d, s, k), d));
  double worst = 0.0;
  for (int k = 0; k < kn; ++k) {
    const ContinuityResiduals r = check_continuity(w[k], w[(k + 1) % kn]);
    worst = std::max({worst, r.i_l1, r.i_l2});
  }
  v.require(worst < 0.01 * d.im, "max i_L residual " + fmt("%.4g A", worst));

  const NodeWaveforms same = synth_interval(plan_interval(d, s, 333), d);
  const ContinuityResiduals z = check_continuity(same, same);
  v.require(z.i_l1 == 0.0 && z.i_l2 == 0.0, "constant-vg pair residual not zero");
  v.note("max i_L residual " + fmt("%.4g A", worst) + " (limit " + fmt("%.4g A", 0.01 * d.im) + ")");
  return v;
}

Verdict ac10() {
  Verdict v;
  const auto base = std::filesystem::temp_directory_path() / "cfhb_acceptance_ac10";
  std::string csv[2];
  for (int i = 0; i < 2; ++i) {
    RunConfig cfg;
    cfg.out_dir = (base / std::to_string(i)).string();
    std::ostringstream out, err;
    v.require(run(cfg, parse_command({"sweep", "idcpsm"}), out, err) == 0, "sweep failed: " + err.str());
    std::ifstream in(base / std::to_string(i) / "sweep_idcpsm.csv", std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    csv[i] = s.str();
  }
  v.require(!csv[0].empty() && csv[0] == csv[1], "sweep CSV differs between runs");
  v.note(std::to_string(csv[0].size()) + " bytes identical");
  std::filesystem::remove_all(base);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10}};
  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failures = 0, ran = 0;
  for (const auto& [name, fn] : criteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
    ++ran;
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failures += !v.pass;
    std::cout << name << ' ' << (v.pass ? "PASS" : "FAIL") << ": " << v.detail << std::endl;
  }
  if (ran == 0) {
    std::cerr << "no such criterion\n";
    return 1;
  }
  return failures == 0 ? 0 : 1;
}
