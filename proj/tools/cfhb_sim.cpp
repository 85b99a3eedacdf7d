#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cfhb/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Secondary-side modulation simulator for an isolated current-fed half-bridge ac-dc converter"};
  app.usage(std::string(cfhb::kUsage));

  std::optional<std::string> config_path;
  std::optional<std::string> out_dir;
  std::optional<int> samples;
  bool zero_ripple = false;
  bool analytic_only = false;
  std::vector<std::string> words;

  app.add_option("--config", config_path, "TOML configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--zero-ripple", zero_ripple, "replace L1 and L2 with 100 mH");
  app.add_flag("--analytic-only", analytic_only, "use closed-form metrics only");
  app.add_option("--samples-per-interval", samples, "uniform samples per interval in waveform CSV (default 200)")
      ->check(CLI::Range(1, 1'000'000));
  app.add_option("command", words, "simulate | sweep | compare | validate, then arguments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cfhb::kExitOk : cfhb::kExitError;
  }

  try {
    const cfhb::Command cmd = cfhb::parse_command(words);
    cfhb::RunConfig cfg =
        config_path ? cfhb::load_config(*config_path, cfhb::validation_for(cmd)) : cfhb::parse_config("", cfhb::validation_for(cmd));
    if (out_dir) cfg.out_dir = *out_dir;
    if (samples) cfg.samples_per_interval = *samples;
    cfg.zero_ripple = cfg.zero_ripple || zero_ripple;
    cfg.analytic_only = cfg.analytic_only || analytic_only;
    return cfhb::run(cfg, cmd, std::cout, std::cerr);
  } catch (const cfhb::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n' << cfhb::kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return cfhb::kExitError;
}
