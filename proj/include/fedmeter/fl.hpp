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
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fedmeter/availability.hpp"
#include "fedmeter/dataset.hpp"
#include "fedmeter/metrics.hpp"
#include "fedmeter/nn.hpp"
#include "fedmeter/privacy.hpp"
#include "fedmeter/similarity.hpp"

namespace fedmeter {

/// A1: each community trains alone, nothing crosses the network.
/// A2: single global model, sample-weighted federated averaging.
/// A3: multi-task FL + substitution for dropped clients + noise under a
///     fixed per-round budget.
/// A4: as A3 but a failed round's budget is respread over later rounds.
enum class Method { A1, A2, A3, A4 };

const char* method_name(Method m);
Method parse_method(const std::string& name);

struct TrainConfig {
  int rounds = 60;
  int epochs_personalized = 5;   // per-round epochs on the personalized task
  int epochs_local = 10;         // per-round epochs on the global-model task
  double lr_personalized = 0.01;
  double lr_local = 0.01;
  double reg_factor = 5e-4;      // pull of the personalized model toward the global one
  int batch_size = 2;
  Method method = Method::A4;
  bool dp_enabled = false;
  double clip_threshold = 1.0;
  double epsilon_initial = 0.1;  // per-round budget; +inf means no noise
  double dropout_ratio = 0.0;    // n_c
  DropoutMode dropout_mode = DropoutMode::uniform_count;
  BudgetStrategy budget_strategy = BudgetStrategy::dynamic;
  std::uint64_t master_seed = 1;

  void validate() const;  // throws std::invalid_argument on the first violation
};

struct ClientState {
  ClientDataset dataset;
  ParamVector personalized;  // v_i; doubles as the purely local model under A1
  std::optional<PrivacyAccountant> accountant;

  int sample_count() const { return static_cast<int>(dataset.train.size()); }
};

struct ServerState {
  ParamVector global;
  SimilarityMatrix similarity;
  int round_index = 0;  // completed rounds so far
};

/// Runs the personalized task for one client: SGD from the stored model,
/// epochs_personalized epochs at lr_personalized on the proximally
/// regularized objective against `w_global`. Replaces and returns the
/// client's stored model.
ParamVector local_personalized_update(ClientState& client,
                                      const ParamVector& w_global,
                                      const MLPShape& shape,
                                      const TrainConfig& cfg, Rng& rng);

/// Runs the global-model task for one client: SGD from the broadcast
/// parameters, epochs_local epochs at lr_local on the plain loss. Returns
/// the update (trained parameters minus broadcast parameters).
ParamVector local_global_update(const ParamVector& w_global,
                                const ClientState& client,
                                const MLPShape& shape, const TrainConfig& cfg,
                                Rng& rng);

struct AggregateEntry {
  int client_id = 0;
  ParamVector delta;
  long sample_count = 0;
};

/// Sample-count-weighted update of the global model:
/// w + sum_i (count_i / total_count) * delta_i over the entries given.
/// Weights renormalize over exactly the clients included.
ParamVector aggregate(const ParamVector& w_global,
                      const std::vector<AggregateEntry>& deltas);

/// One communication round. Every client runs the personalized task (a
/// failed uplink does not stop local training); available clients train and
/// upload their update (clipped and noised when privacy is on); unavailable
/// clients keep that round's budget; the server folds received updates into
/// the similarity averages, substitutes for unavailable clients from their
/// most similar peer, and aggregates. Clients with no usable stand-in are
/// left out and the weights renormalize. With nothing received at all the
/// global model is unchanged.
RoundReport run_round(ServerState& server, std::vector<ClientState>& clients,
                      const MLPShape& shape, const TrainConfig& cfg,
                      const std::set<int>& unavailable);

struct ExperimentResult {
  std::vector<RoundReport> rounds;
  std::vector<ParamVector> final_models;  // evaluation model per client
  std::vector<double> final_nrmse;
};

using RoundObserver =
    std::function<void(int round, const SimilarityMatrix& similarity)>;

/// Full run over cfg.rounds rounds. Datasets are used as given (normalize
/// first). The evaluation model is the local model for A1, the global model
/// for A2 and the personalized model for A3/A4. Deterministic: every
/// stochastic step draws from a stream derived from
/// (master_seed, purpose, round, client).
ExperimentResult run_experiment(const TrainConfig& cfg, const MLPShape& shape,
                                const std::vector<ClientDataset>& datasets,
                                const RoundObserver& observer = nullptr);

}  // namespace fedmeter
