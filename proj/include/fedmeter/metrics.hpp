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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedmeter/dataset.hpp"
#include "fedmeter/nn.hpp"
#include "fedmeter/similarity.hpp"

namespace fedmeter {

/// Root-mean-square error divided by the truth's range (max - min).
/// Throws if the truth vector is constant or the lengths differ.
double nrmse(std::span<const double> predicted, std::span<const double> truth);

/// nrmse of the model's predictions over the dataset's test split.
double evaluate_client(const ParamVector& model, const MLPShape& shape,
                       const ClientDataset& ds);

struct ClientRoundRecord {
  bool available = true;
  Provenance provenance = Provenance::uploaded;
  double test_nrmse = 0.0;
  double train_loss = 0.0;
  std::optional<double> epsilon_used;  // empty when no budget was spent
};

/// Per-round ledger behind the training curves: one record per client plus
/// the mean test error across clients.
struct RoundReport {
  int round = 0;  // 1-based
  std::vector<ClientRoundRecord> clients;
  double global_test_nrmse_mean = 0.0;
};

/// `round,client,available,provenance,test_nrmse,train_loss,epsilon` with one
/// row per (round, client); the epsilon cell is empty when none was spent.
std::string metrics_csv(std::span<const RoundReport> rounds);

/// One final measurement feeding the cross-method comparison table.
/// A run without noise carries epsilon = +infinity.
struct TableEntry {
  std::string method;
  double dropout_ratio = 0.0;
  double epsilon = 0.0;
  double mu = 0.0;
  int epochs_local = 0;
  int community = 0;
  double nrmse = 0.0;
};

/// One comparison row: a (method, dropout, epsilon, mu, epochs) cell with
/// the per-community errors in community order and their mean.
struct TableRow {
  std::string method;
  double dropout_ratio = 0.0;
  double epsilon = 0.0;
  double mu = 0.0;
  int epochs_local = 0;
  std::vector<int> communities;
  std::vector<double> community_nrmse;
  double mean = 0.0;
};

/// Groups entries by (method, dropout, epsilon, mu, epochs) and emits rows
/// sorted by that key with communities ascending. Output is independent of
/// input order.
std::vector<TableRow> comparison_table(std::vector<TableEntry> entries);

/// JSON document {"rows": [...]} for summary.json; epsilon is rendered as a
/// string so the infinite (no-noise) case survives serialization.
std::string table_json(std::span<const TableRow> rows);

}  // namespace fedmeter
