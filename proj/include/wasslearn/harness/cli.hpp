#pragma once

// Command-line front end. Exit codes: 0 success, 1 config error,
// 2 invariant violation detected by an audit, 3 I/O error.

#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wasslearn/harness/config.hpp"
#include "wasslearn/harness/experiments.hpp"
#include "wasslearn/harness/report.hpp"

namespace wasslearn::harness {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitViolation = 2, kExitIo = 3 };

using Runner = std::function<Report(const ExperimentConfig&)>;

inline const std::map<std::string, Runner>& subcommands() {
  static const std::map<std::string, Runner> table{
      {"audit-contraction", run_contraction_audit},
      {"concentration", run_concentration_experiment},
      {"asem", run_asem_experiment},
      {"relative", run_relative_experiment},
      {"scaling", run_scaling_experiment},
      {"bounds", run_bounds},
      {"poisson-check", run_poisson_check},
      {"lemma-check", run_lemma_check},
  };
  return table;
}

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string format;
};

/// Builds the effective configuration: file (or defaults), then flag overrides.
inline ExperimentConfig effective_config(const std::string& name, const CommonOptions& opt) {
  ExperimentConfig cfg;
  if (!opt.config_path.empty()) cfg = load_config(opt.config_path);
  if (cfg.experiment.empty()) cfg.experiment = name;
  if (cfg.experiment != name) {
    throw ConfigError("config is for experiment '" + cfg.experiment + "', not '" + name + "'");
  }
  if (opt.seed) cfg.seed = *opt.seed;
  if (!opt.out_path.empty()) cfg.out_path = opt.out_path;
  if (!opt.format.empty()) cfg.format = opt.format;
  validate(cfg);
  return cfg;
}

inline int exit_code(const Report& report) { return report.violations.empty() ? kExitOk : kExitViolation; }

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"wasslearn experiment harness"};
  app.require_subcommand(1);
  CommonOptions opt;
  std::string chosen;
  for (const auto& [name, runner] : subcommands()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config_path, "JSON experiment configuration");
    sub->add_option("--seed", opt.seed, "master seed (overrides the config)");
    sub->add_option("--out", opt.out_path, "output path (default: stdout)");
    sub->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->callback([&chosen, n = name] { chosen = n; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    const ExperimentConfig cfg = effective_config(chosen, opt);
    const Report report = subcommands().at(chosen)(cfg);
    if (cfg.out_path.empty()) {
      out << serialize(report, cfg.format);
    } else {
      write_report(report, cfg.out_path, cfg.format);
    }
    for (const auto& w : report.warnings) err << "warning: " << w << '\n';
    for (const auto& v : report.violations) err << "violation: " << v << '\n';
    return exit_code(report);
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace wasslearn::harness
