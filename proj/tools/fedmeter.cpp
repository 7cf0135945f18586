// Copyright 2026 The FedMeter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line experiment runner.
//
//   fedmeter run --config <path> [--key value ...]
//   fedmeter run --preset <name> [--key value ...]
//   fedmeter validate --config <path> [--key value ...]
//   fedmeter presets list
//
// Exit codes: 0 success, 1 runtime failure, 2 invalid config or usage.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fedmeter/config.hpp"
#include "fedmeter/runner.hpp"
#include "fedmeter/util.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Turns the unparsed remainder into config overrides: pairs of --key value.
void apply_overrides(fedmeter::ExperimentConfig& cfg,
                     const std::vector<std::string>& extras) {
  for (std::size_t i = 0; i < extras.size(); i += 2) {
    const std::string& flag = extras[i];
    if (flag.size() < 3 || flag.rfind("--", 0) != 0) {
      throw std::invalid_argument("expected --key, got '" + flag + "'");
    }
    if (i + 1 >= extras.size()) {
      throw std::invalid_argument("override '" + flag + "' is missing a value");
    }
    cfg.apply(flag.substr(2), extras[i + 1]);
  }
}

fedmeter::ExperimentConfig build_config(const std::string& config_path,
                                        const std::string& preset_name,
                                        const std::vector<std::string>& extras) {
  if (config_path.empty() == preset_name.empty()) {
    throw std::invalid_argument("give exactly one of --config or --preset");
  }
  fedmeter::ExperimentConfig cfg =
      preset_name.empty() ? fedmeter::load_config_file(config_path)
                          : fedmeter::ExperimentConfig::preset(preset_name);
  apply_overrides(cfg, extras);
  cfg.finalize();
  return cfg;
}

int report_diagnostics(const std::vector<fedmeter::Diagnostic>& diags) {
  for (const fedmeter::Diagnostic& d : diags) {
    std::cerr << "invalid config: " << d.key << ": " << d.message << '\n';
  }
  return diags.empty() ? 0 : kExitUsage;
}

int do_run(const fedmeter::ExperimentConfig& cfg) {
  if (const int rc = report_diagnostics(cfg.validate()); rc != 0) return rc;
  const std::vector<fedmeter::ClientDataset> datasets =
      fedmeter::build_datasets(cfg);
  const fedmeter::SweepResult sweep = fedmeter::run_sweep(
      cfg, datasets,
      [](const fedmeter::SweepPoint& point, int index, int total) {
        std::cout << "[" << index + 1 << "/" << total << "] " << point.tag()
                  << std::endl;
      });
  const std::vector<std::string> written = fedmeter::write_artifacts(cfg, sweep);
  for (const fedmeter::TableRow& row : sweep.table) {
    std::cout << row.method << " n_c=" << fedmeter::format_double(row.dropout_ratio)
              << " eps=" << fedmeter::format_double(row.epsilon)
              << " mean_nrmse=" << fedmeter::format_double(row.mean) << '\n';
  }
  std::cout << "wrote " << written.size() << " files under " << cfg.output_dir
            << '\n';
  return 0;
}

int do_validate(const fedmeter::ExperimentConfig& cfg) {
  const std::vector<fedmeter::Diagnostic> diags = cfg.validate();
  if (diags.empty()) {
    std::cout << "config ok\n";
    return 0;
  }
  for (const fedmeter::Diagnostic& d : diags) {
    std::cout << d.key << ": " << d.message << '\n';
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated solar-estimation experiment runner"};
  app.require_subcommand(1);

  std::string run_config, run_preset;
  CLI::App* run = app.add_subcommand("run", "Execute an experiment sweep");
  run->add_option("--config", run_config, "Config file (key=value lines)");
  run->add_option("--preset", run_preset, "Built-in experiment preset");
  run->allow_extras();

  std::string val_config, val_preset;
  CLI::App* validate =
      app.add_subcommand("validate", "Check a config and list problems");
  validate->add_option("--config", val_config, "Config file (key=value lines)");
  validate->add_option("--preset", val_preset, "Built-in experiment preset");
  validate->allow_extras();

  CLI::App* presets = app.add_subcommand("presets", "Preset utilities");
  CLI::App* presets_list =
      presets->add_subcommand("list", "List built-in presets");
  presets->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (run->parsed()) {
      return do_run(build_config(run_config, run_preset, run->remaining()));
    }
    if (validate->parsed()) {
      return do_validate(
          build_config(val_config, val_preset, validate->remaining()));
    }
    if (presets_list->parsed()) {
      for (const std::string& name : fedmeter::ExperimentConfig::preset_names()) {
        std::cout << name << '\n';
      }
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
