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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedmeter/fl.hpp"

namespace fedmeter {

enum class DataSource { synthetic, csv_dir };

/// How the per-round budget reacts to failed uploads. `automatic` picks
/// dynamic for the dynamic-budget method and fixed for everything else.
enum class BudgetChoice { automatic, fixed, dynamic };

/// One validation finding: which key is wrong and why.
struct Diagnostic {
  std::string key;
  std::string message;
  bool operator==(const Diagnostic&) const = default;
};

/// Full experiment description: data construction, the training
/// hyperparameters, and the sweep axes (methods x dropout ratio x budget x
/// regularization x local epochs). All of it reads and writes as flat
/// `key=value` text.
struct ExperimentConfig {
  // Data.
  DataSource data_source = DataSource::synthetic;
  std::string csv_dir;  // one CSV per community; required iff data_source=csv_dir
  int num_communities = 4;
  int samples_per_community = 2000;

  // Artifacts.
  std::string output_dir = "out";
  bool dump_similarity = false;  // also write similarity_matrix.csv per point

  // Training (single-point values; the sweep lists below override per axis).
  int rounds = 60;
  int epochs_personalized = 5;
  int epochs_local = 10;
  double lr_personalized = 0.01;
  double lr_local = 0.01;
  double reg_factor = 5e-4;
  int batch_size = 2;
  Method method = Method::A4;
  bool dp_enabled = false;
  double clip_threshold = 1.0;
  double epsilon_initial = 0.1;
  double dropout_ratio = 0.0;
  DropoutMode dropout_mode = DropoutMode::uniform_count;
  BudgetChoice budget_strategy = BudgetChoice::automatic;
  std::uint64_t master_seed = 1;

  // Sweep axes. Empty means "just the single value above"; finalize() fills
  // them in.
  std::vector<Method> methods;
  std::vector<double> sweep_dropout_ratio;
  std::vector<double> sweep_epsilon;
  std::vector<double> sweep_reg_factor;
  std::vector<int> sweep_epochs_local;

  bool operator==(const ExperimentConfig&) const = default;

  /// Sets one key from its text value. Throws std::invalid_argument on an
  /// unknown key or an unparsable value.
  void apply(const std::string& key, const std::string& value);

  /// Fills empty sweep lists from the single values and applies the
  /// FEDMETER_SEED environment override (which beats every other source).
  void finalize();

  /// Every violated invariant, keyed by config key. Empty means valid.
  std::vector<Diagnostic> validate() const;

  /// The effective config as sorted `key=value` lines. Feeding the text
  /// back through parse_config_text() reproduces this struct exactly.
  std::string resolve_to_text() const;

  /// The training configuration of one sweep point.
  TrainConfig train_config(Method m, double n_c, double epsilon, double mu,
                           int epochs) const;

  static ExperimentConfig preset(const std::string& name);  // throws on unknown
  static const std::vector<std::string>& preset_names();
};

const char* data_source_name(DataSource s);
const char* dropout_mode_name(DropoutMode m);
const char* budget_choice_name(BudgetChoice c);

/// Parses `key=value` lines; '#' starts a comment; blank lines are ignored.
ExperimentConfig parse_config_text(const std::string& text);

/// parse_config_text over a file's contents. Throws std::runtime_error if
/// the file cannot be read.
ExperimentConfig load_config_file(const std::string& path);

}  // namespace fedmeter
