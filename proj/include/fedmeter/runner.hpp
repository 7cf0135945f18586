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

#include <functional>
#include <string>
#include <vector>

#include "fedmeter/config.hpp"
#include "fedmeter/dataset.hpp"
#include "fedmeter/fl.hpp"
#include "fedmeter/metrics.hpp"

namespace fedmeter {

/// One cell of the sweep cross-product
/// methods x dropout_ratio x epsilon x reg_factor x epochs_local.
struct SweepPoint {
  Method method = Method::A4;
  double dropout_ratio = 0.0;
  double epsilon = 0.0;
  double reg_factor = 0.0;
  int epochs_local = 0;

  /// Filesystem-safe name, e.g. "fedavg_nc0.5_eps0.1_mu5e-04_e10".
  std::string tag() const;
};

struct PointResult {
  SweepPoint point;
  ExperimentResult result;
  std::string similarity_csv;  // nonempty only when requested and applicable
};

struct SweepResult {
  std::vector<PointResult> points;
  std::vector<TableRow> table;
};

/// The network used by every experiment: one input per feature column,
/// 40 hidden ReLU units, one linear output.
MLPShape experiment_shape();

/// The cross-product in deterministic order (axes in the order listed above,
/// each in config order). Call finalize() on the config first.
std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg);

/// Constructs and normalizes the per-community datasets, either synthetic
/// (from master_seed) or from csv_dir. Shared by every sweep point, so
/// method comparisons see identical data.
std::vector<ClientDataset> build_datasets(const ExperimentConfig& cfg);

using SweepProgress =
    std::function<void(const SweepPoint& point, int index, int total)>;

/// Runs every sweep point sequentially and assembles the comparison table
/// from the final per-community errors. Points do not share mutable state;
/// all randomness is derived from (master_seed, purpose, round, client).
/// `progress`, if given, fires before each point starts.
SweepResult run_sweep(const ExperimentConfig& cfg,
                      const std::vector<ClientDataset>& datasets,
                      const SweepProgress& progress = nullptr);

/// Writes output_dir/config_resolved.txt, output_dir/summary.json and the
/// per-round metrics: a single sweep point lands in output_dir/metrics.csv,
/// several points in output_dir/runs/<tag>/metrics.csv. All writes are
/// atomic (temp file + rename). Returns the paths written.
std::vector<std::string> write_artifacts(const ExperimentConfig& cfg,
                                         const SweepResult& sweep);

}  // namespace fedmeter
