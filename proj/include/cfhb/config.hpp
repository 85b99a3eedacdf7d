#pragma once

// TOML run configuration. Omitted keys take the rated-prototype defaults;
// unknown sections and keys are rejected.

#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include <toml++/toml.hpp>

#include "cfhb/error.hpp"
#include "cfhb/params.hpp"

namespace cfhb {

inline constexpr double kDefaultIMax = 10.2;

struct RunConfig {
  ConverterParams converter;
  DeviceParams devices;
  double dcpsm_i_max = kDefaultIMax;
  std::optional<double> idcpsm_r;  // defaults to i_max / Im
  std::string spsm_provider = "overlap-limited";
  std::optional<double> spsm_i_max;  // fixed-peak provider only; defaults to dcpsm_i_max
  std::string out_dir = "out";
  int samples_per_interval = 200;
  bool zero_ripple = false;
  bool analytic_only = false;

  bool operator==(const RunConfig&) const = default;

  ConverterParams effective_converter() const {
    return zero_ripple ? with_zero_ripple(converter) : converter;
  }
  DerivedParams derived() const { return derive(effective_converter()); }

  ModulationScheme scheme(SchemeKind kind) const {
    const DerivedParams d = derived();
    switch (kind) {
      case SchemeKind::dcpsm:
        return ModulationScheme::dcpsm(dcpsm_i_max);
      case SchemeKind::idcpsm:
        return ModulationScheme::idcpsm(idcpsm_r.value_or(rated_peak_ratio(dcpsm_i_max, d)));
      case SchemeKind::spsm:
        if (spsm_provider == "overlap-limited") return ModulationScheme::spsm(overlap_limited_spsm(), spsm_provider);
        if (spsm_provider == "fixed-peak") {
          return ModulationScheme::spsm(fixed_peak_spsm(spsm_i_max.value_or(dcpsm_i_max)), spsm_provider);
        }
        throw ConfigError("spsm.provider must be \"overlap-limited\" or \"fixed-peak\"");
    }
    throw ConfigError("unknown scheme");
  }
};

enum class Validation { strict, lenient };

namespace detail {

inline std::string at_line(const toml::node& n) {
  const auto line = n.source().begin.line;
  return line ? " (line " + std::to_string(line) + ")" : std::string();
}

class TableReader {
 public:
  TableReader(const toml::table& t, std::string section) : t_(t), section_(std::move(section)) {}

  void number(std::string_view key, double& out) {
    if (const toml::node* n = take(key)) {
      if (auto v = n->value<double>(); v && (n->is_floating_point() || n->is_integer())) {
        out = *v;
      } else {
        throw ConfigError(where(key) + " must be a number" + at_line(*n));
      }
    }
  }
  void number(std::string_view key, std::optional<double>& out) {
    if (t_.contains(key)) {
      double v = 0.0;
      number(key, v);
      out = v;
    }
  }
  void integer(std::string_view key, int& out) {
    if (const toml::node* n = take(key)) {
      auto v = n->value_exact<std::int64_t>();
      if (!v || *v < 1 || *v > 1'000'000) {
        throw ConfigError(where(key) + " must be an integer in [1, 1000000]" + at_line(*n));
      }
      out = static_cast<int>(*v);
    }
  }
  void boolean(std::string_view key, bool& out) {
    if (const toml::node* n = take(key)) {
      auto v = n->value_exact<bool>();
      if (!v) throw ConfigError(where(key) + " must be true or false" + at_line(*n));
      out = *v;
    }
  }
  void string(std::string_view key, std::string& out) {
    if (const toml::node* n = take(key)) {
      auto v = n->value_exact<std::string>();
      if (!v) throw ConfigError(where(key) + " must be a string" + at_line(*n));
      out = *v;
    }
  }

  /// Any key not consumed by now is unknown.
  void finish() const {
    for (const auto& [k, n] : t_) {
      if (!seen_.contains(std::string(k.str()))) {
        throw ConfigError("unknown key '" + where(k.str()) + "'" + at_line(n));
      }
    }
  }

 private:
  const toml::node* take(std::string_view key) {
    seen_.emplace(key);
    return t_.get(key);
  }
  std::string where(std::string_view key) const { return section_ + "." + std::string(key); }

  const toml::table& t_;
  std::string section_;
  std::set<std::string, std::less<>> seen_;
};

}  // namespace detail

/// Parses and validates a TOML document. Lenient validation skips the
/// IDCPSM ratio rules so that a marginal ratio can still be analysed.
inline RunConfig parse_config(std::string_view text, Validation mode = Validation::strict) {
  toml::table doc;
  try {
    doc = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw ConfigError("TOML parse error at line " + std::to_string(e.source().begin.line) + ", column " +
                      std::to_string(e.source().begin.column) + ": " + std::string(e.description()));
  }

  RunConfig c;
  const toml::table empty;
  auto section = [&](std::string_view name) -> const toml::table& {
    const toml::node* n = doc.get(name);
    if (!n) return empty;
    if (!n->is_table()) throw ConfigError("'" + std::string(name) + "' must be a table" + detail::at_line(*n));
    return *n->as_table();
  };

  for (const auto& [k, n] : doc) {
    const std::string_view name = k.str();
    if (name != "converter" && name != "devices" && name != "dcpsm" && name != "idcpsm" && name != "spsm" &&
        name != "output") {
      throw ConfigError("unknown key '" + std::string(name) + "'" + detail::at_line(n));
    }
  }

  {
    detail::TableReader r(section("converter"), "converter");
    ConverterParams& p = c.converter;
    r.number("vg_rms", p.vg_rms);
    r.number("fg", p.fg);
    r.number("vo", p.vo);
    r.number("po", p.po);
    r.number("fsw", p.fsw);
    r.number("n", p.n);
    r.number("l1", p.l1);
    r.number("l2", p.l2);
    r.number("llk", p.llk);
    r.number("ls", p.ls);
    r.finish();
  }
  {
    detail::TableReader r(section("devices"), "devices");
    DeviceParams& dv = c.devices;
    r.number("rds_on_ac", dv.rds_on_ac);
    r.number("rds_on_dc", dv.rds_on_dc);
    r.number("vf_ac", dv.vf_ac);
    r.number("vf_dc", dv.vf_dc);
    r.number("r_winding_ac", dv.r_winding_ac);
    r.number("r_winding_dc", dv.r_winding_dc);
    r.number("r_series", dv.r_series);
    r.number("r_boost", dv.r_boost);
    r.number("p_core_fixed", dv.p_core_fixed);
    r.number("e_hard_switch", dv.e_hard_switch);
    r.finish();
  }
  {
    detail::TableReader r(section("dcpsm"), "dcpsm");
    r.number("i_max", c.dcpsm_i_max);
    r.finish();
  }
  {
    detail::TableReader r(section("idcpsm"), "idcpsm");
    r.number("r", c.idcpsm_r);
    r.finish();
  }
  {
    detail::TableReader r(section("spsm"), "spsm");
    r.string("provider", c.spsm_provider);
    r.number("i_max", c.spsm_i_max);
    r.finish();
  }
  {
    detail::TableReader r(section("output"), "output");
    r.string("dir", c.out_dir);
    r.integer("samples_per_interval", c.samples_per_interval);
    r.boolean("zero_ripple", c.zero_ripple);
    r.boolean("analytic_only", c.analytic_only);
    r.finish();
  }

  if (c.out_dir.empty()) throw ConfigError("output.dir must not be empty");
  const DerivedParams d = c.derived();
  check_device_params(c.devices);
  if (c.spsm_i_max && !(*c.spsm_i_max > 0.0)) throw ConfigError("spsm.i_max must be > 0");
  for (SchemeKind kind : {SchemeKind::spsm, SchemeKind::dcpsm, SchemeKind::idcpsm}) {
    const ModulationScheme s = c.scheme(kind);
    if (mode == Validation::strict || kind != SchemeKind::idcpsm) check_scheme(s, d);
  }
  return c;
}

/// TOML text that parses back to an identical configuration.
inline std::string serialize_config(const RunConfig& c) {
  const ConverterParams& p = c.converter;
  const DeviceParams& dv = c.devices;
  toml::table converter{{"vg_rms", p.vg_rms}, {"fg", p.fg},   {"vo", p.vo},   {"po", p.po},   {"fsw", p.fsw},
                        {"n", p.n},           {"l1", p.l1},   {"l2", p.l2},   {"llk", p.llk}, {"ls", p.ls}};
  toml::table devices{{"rds_on_ac", dv.rds_on_ac},       {"rds_on_dc", dv.rds_on_dc},
                      {"vf_ac", dv.vf_ac},               {"vf_dc", dv.vf_dc},
                      {"r_winding_ac", dv.r_winding_ac}, {"r_winding_dc", dv.r_winding_dc},
                      {"r_series", dv.r_series},         {"r_boost", dv.r_boost},
                      {"p_core_fixed", dv.p_core_fixed}, {"e_hard_switch", dv.e_hard_switch}};
  toml::table idcpsm;
  if (c.idcpsm_r) idcpsm.insert("r", *c.idcpsm_r);
  toml::table spsm{{"provider", c.spsm_provider}};
  if (c.spsm_i_max) spsm.insert("i_max", *c.spsm_i_max);
  toml::table output{{"dir", c.out_dir},
                     {"samples_per_interval", static_cast<std::int64_t>(c.samples_per_interval)},
                     {"zero_ripple", c.zero_ripple},
                     {"analytic_only", c.analytic_only}};
  toml::table doc{{"converter", converter}, {"devices", devices}, {"dcpsm", toml::table{{"i_max", c.dcpsm_i_max}}},
                  {"idcpsm", idcpsm},       {"spsm", spsm},       {"output", output}};
  std::ostringstream os;
  os << doc << '\n';
  return os.str();
}

}  // namespace cfhb
