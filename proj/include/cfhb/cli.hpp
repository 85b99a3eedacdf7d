#pragma once

// Command dispatch for the simulator front end. Argument parsing lives in the
// executable; this header maps a loaded configuration and a command to output
// files, a text summary and an exit status.

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cfhb/config.hpp"
#include "cfhb/error.hpp"
#include "cfhb/metrics.hpp"
#include "cfhb/params.hpp"
#include "cfhb/sweep.hpp"
#include "cfhb/waveforms.hpp"

namespace cfhb {

class UsageError : public Error {
 public:
  using Error::Error;
};

enum class CommandKind { simulate, sweep, compare, validate };

struct Command {
  CommandKind kind = CommandKind::sweep;
  std::vector<SchemeKind> schemes;
  double omega_tau_deg = 0.0;  // simulate only
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInfeasible = 2;

inline constexpr std::string_view kUsage =
    "usage: cfhb-sim [options] simulate <scheme> <omega_tau_deg>\n"
    "       cfhb-sim [options] sweep <scheme>\n"
    "       cfhb-sim [options] compare <scheme> <scheme> [...]\n"
    "       cfhb-sim [options] validate <scheme>\n"
    "schemes: spsm, dcpsm, idcpsm\n";

inline SchemeKind scheme_arg(const std::string& word) {
  if (auto s = parse_scheme(word)) return *s;
  throw UsageError("unknown scheme '" + word + "'");
}

inline Command parse_command(const std::vector<std::string>& words) {
  if (words.empty()) throw UsageError("missing command");
  const std::string& verb = words[0];
  Command c;
  auto arity = [&](std::size_t n) {
    if (words.size() != n + 1) throw UsageError(verb + " takes " + std::to_string(n) + " argument(s)");
  };
  if (verb == "simulate") {
    arity(2);
    c.kind = CommandKind::simulate;
    c.schemes = {scheme_arg(words[1])};
    std::size_t used = 0;
    try {
      c.omega_tau_deg = std::stod(words[2], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != words[2].size() || !std::isfinite(c.omega_tau_deg)) {
      throw UsageError("omega_tau_deg must be a number, got '" + words[2] + "'");
    }
  } else if (verb == "sweep" || verb == "validate") {
    arity(1);
    c.kind = verb == "sweep" ? CommandKind::sweep : CommandKind::validate;
    c.schemes = {scheme_arg(words[1])};
  } else if (verb == "compare") {
    c.kind = CommandKind::compare;
    for (std::size_t i = 1; i < words.size(); ++i) c.schemes.push_back(scheme_arg(words[i]));
    if (c.schemes.size() < 2) throw UsageError("compare needs at least two schemes");
  } else {
    throw UsageError("unknown command '" + verb + "'");
  }
  return c;
}

/// `validate` must be able to load a ratio that violates the margin rules.
inline Validation validation_for(const Command& c) {
  return c.kind == CommandKind::validate ? Validation::lenient : Validation::strict;
}

inline RunConfig load_config(const std::filesystem::path& path, Validation mode = Validation::strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), mode);
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw Error("cannot write '" + (dir / name).string() + "'");
  return f;
}

inline int simulate(const RunConfig& cfg, const Command& cmd, std::ostream& out) {
  const DerivedParams d = cfg.derived();
  const ModulationScheme s = cfg.scheme(cmd.schemes.front());
  const int k = nearest_interval(d, cmd.omega_tau_deg);
  const IntervalPlan plan = plan_interval(d, s, k);
  const NodeWaveforms w = synth_interval(plan, d);

  const std::string name = "waveform_" + std::string(s.name()) + "_k" + std::to_string(k) + ".csv";
  auto f = open_output(cfg.out_dir, name);
  write_waveform_csv(f, w, cfg.samples_per_interval);

  const IntervalMetrics num = numeric_metrics(w, plan);
  const IntervalMetrics ana = analytic_metrics(s, plan, d);
  out << "simulate " << s.name() << ": omega_tau " << format_number(cmd.omega_tau_deg) << " deg -> k=" << k
      << " (" << format_number(plan.omega_tau_deg()) << " deg)\n"
      << "  vg " << fixed(plan.vg) << " V, ig " << fixed(plan.ig) << " A, d1 " << fixed(plan.d1, 6) << ", d2 "
      << fixed(plan.d2, 6) << ", alpha " << fixed(plan.alpha, 6) << ", beta " << fixed(plan.beta, 6) << '\n'
      << "  i_lk_pk " << fixed(plan.i_lk_pk) << " A, i_cir " << fixed(num.i_cir) << " A, degeneracy "
      << to_string(plan.degeneracy) << '\n'
      << "                numeric   analytic\n";
  auto line = [&](const char* q, double a, double b) {
    out << "  " << pad(q, 9) << "  " << pad(fixed(a), 9) << "  " << pad(fixed(b), 9) << '\n';
  };
  line("ilk_rms", num.ilk_rms, ana.ilk_rms);
  line("s_ac_rms", num.s_ac_rms, ana.s_ac_rms);
  line("d_ac_avg", num.d_ac_avg, ana.d_ac_avg);
  line("s_dc_rms", num.s_dc_rms, ana.s_dc_rms);
  line("d_dc_avg", num.d_dc_avg, ana.d_dc_avg);
  out << "  power to dc side " << fixed(power_delivered(w, d.source.n), 2) << " W\n"
      << "wrote " << (std::filesystem::path(cfg.out_dir) / name).string() << '\n';
  return kExitOk;
}

inline void mask_summary(std::ostream& out, const CycleProfile& p) {
  std::map<std::string, int> reasons;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p.masked[k]) ++reasons[p.mask_reason[k]];
  }
  out << "  intervals " << p.size() << ", used " << p.unmasked_count();
  for (const auto& [why, count] : reasons) out << ", " << why << ' ' << count;
  out << '\n';
}

inline int sweep(const RunConfig& cfg, const Command& cmd, std::ostream& out) {
  const DerivedParams d = cfg.derived();
  const ModulationScheme s = cfg.scheme(cmd.schemes.front());
  const CycleProfile p = sweep_half_cycle(d, s, {cfg.analytic_only});
  const std::string name = "sweep_" + std::string(s.name()) + ".csv";
  {
    auto f = open_output(cfg.out_dir, name);
    write_sweep_csv(f, p);
  }
  const CycleMetrics c = aggregate(p);
  out << "sweep " << s.name() << '\n';
  mask_summary(out, p);
  out << "  cycle ilk_rms " << fixed(c.ilk_rms) << " A, s_ac_rms " << fixed(c.s_ac_rms) << " A, s_dc_rms "
      << fixed(c.s_dc_rms) << " A\n"
      << "  cycle d_ac_avg " << fixed(c.d_ac_avg) << " A, d_dc_avg " << fixed(c.d_dc_avg) << " A\n"
      << "  i_lk peak " << fixed(c.i_lk_peak) << " A, peak ratio 10/90 deg " << fixed(c.peak_ratio) << '\n';
  if (const auto e = c.power_balance_error()) {
    out << "  power balance " << fixed(*c.power_delivered, 1) << " W vs " << fixed(c.po, 1) << " W ("
        << percent(*e) << ")\n";
  }
  if (c.numeric_used > 0) {
    out << "  ";
    write_deviation_text(out, oracle_deviation(p));
  }
  out << "wrote " << (std::filesystem::path(cfg.out_dir) / name).string() << '\n';
  return kExitOk;
}

inline int compare(const RunConfig& cfg, const Command& cmd, std::ostream& out) {
  const DerivedParams d = cfg.derived();
  std::vector<ModulationScheme> schemes;
  for (SchemeKind k : cmd.schemes) schemes.push_back(cfg.scheme(k));
  const ComparisonReport r = cfhb::compare(d, schemes, cfg.devices, {cfg.analytic_only});
  {
    auto f = open_output(cfg.out_dir, "compare.csv");
    write_comparison_csv(f, r);
  }
  std::ostringstream text;
  write_comparison_text(text, r);
  {
    auto f = open_output(cfg.out_dir, "compare.txt");
    f << text.str();
  }
  out << text.str() << "wrote " << (std::filesystem::path(cfg.out_dir) / "compare.csv").string() << ", "
      << (std::filesystem::path(cfg.out_dir) / "compare.txt").string() << '\n';
  return kExitOk;
}

inline int validate(const RunConfig& cfg, const Command& cmd, std::ostream& out) {
  const DerivedParams d = cfg.derived();
  const ModulationScheme s = cfg.scheme(cmd.schemes.front());
  const ValidationSummary v = validate_half_cycle(d, s);
  const std::string name = "validate_" + std::string(s.name()) + ".csv";
  {
    auto f = open_output(cfg.out_dir, name);
    write_validation_csv(f, v);
  }
  int zcs = 0, cir = 0, timing = 0, duty = 0;
  for (const FeasibilityReport& r : v.rows) {
    if (r.degeneracy != Degeneracy::none) continue;
    zcs += !r.zcs_margin;
    cir += !r.circulating;
    timing += !r.timing;
    duty += !r.duty;
  }
  out << "validate " << s.name() << ": " << v.passed << " pass, " << v.failed << " fail, " << v.degenerate
      << " degenerate (not counted as failures)\n"
      << "  failing verdicts: zcs-margin " << zcs << ", circulating " << cir << ", timing " << timing << ", duty "
      << duty << '\n';
  if (s.kind() == SchemeKind::idcpsm) {
    out << "  ratio r " << fixed(s.ratio(), 5) << (v.ratio_margin ? " > " : " <= ") << "margin "
        << fixed(std::max(0.5, v.minimum_ratio), 5) << '\n';
  }
  out << (v.ok() ? "PASS" : "FAIL") << '\n'
      << "wrote " << (std::filesystem::path(cfg.out_dir) / name).string() << '\n';
  return v.ok() ? kExitOk : kExitInfeasible;
}

}  // namespace detail

/// Runs one command. Errors are reported on `err` and mapped to exit status 1.
inline int run(const RunConfig& cfg, const Command& cmd, std::ostream& out, std::ostream& err) {
  try {
    switch (cmd.kind) {
      case CommandKind::simulate: return detail::simulate(cfg, cmd, out);
      case CommandKind::sweep: return detail::sweep(cfg, cmd, out);
      case CommandKind::compare: return detail::compare(cfg, cmd, out);
      case CommandKind::validate: return detail::validate(cfg, cmd, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n' << kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitError;
}

}  // namespace cfhb
