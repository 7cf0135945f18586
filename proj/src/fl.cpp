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

#include "fedmeter/fl.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

namespace fedmeter {
namespace {

GradFn plain_grad(const MLPShape& shape) {
  return [&shape](const ParamVector& p, std::span<const Sample> batch) {
    return grad_mse(p, shape, batch);
  };
}

GradFn regularized_grad(const MLPShape& shape, const ParamVector& w_global,
                        double reg_factor) {
  return [&shape, &w_global, reg_factor](const ParamVector& p,
                                         std::span<const Sample> batch) {
    return grad_ditto(p, w_global, shape, batch, reg_factor);
  };
}

void check_finite(const ParamVector& p, const char* what) {
  if (!p.all_finite()) {
    throw std::runtime_error(std::string(what) +
                             ": parameters diverged (non-finite values); "
                             "lower the learning rate");
  }
}

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::A1:
      return "localized";
    case Method::A2:
      return "fedavg";
    case Method::A3:
      return "multitask_fixed";
    case Method::A4:
      return "multitask_dynamic";
  }
  throw std::invalid_argument("method_name: unknown method");
}

Method parse_method(const std::string& name) {
  if (name == "localized" || name == "A1") return Method::A1;
  if (name == "fedavg" || name == "A2") return Method::A2;
  if (name == "multitask_fixed" || name == "A3") return Method::A3;
  if (name == "multitask_dynamic" || name == "A4") return Method::A4;
  throw std::invalid_argument("parse_method: unknown method '" + name + "'");
}

void TrainConfig::validate() const {
  if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  if (epochs_personalized < 1) {
    throw std::invalid_argument("epochs_personalized must be >= 1");
  }
  if (epochs_local < 1) throw std::invalid_argument("epochs_local must be >= 1");
  if (!(lr_personalized > 0.0) || !std::isfinite(lr_personalized)) {
    throw std::invalid_argument("lr_personalized must be finite and > 0");
  }
  if (!(lr_local > 0.0) || !std::isfinite(lr_local)) {
    throw std::invalid_argument("lr_local must be finite and > 0");
  }
  if (!(reg_factor >= 0.0) || !std::isfinite(reg_factor)) {
    throw std::invalid_argument("reg_factor must be finite and >= 0");
  }
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(dropout_ratio >= 0.0 && dropout_ratio <= 1.0)) {
    throw std::invalid_argument("dropout_ratio must be in [0, 1]");
  }
  if (dp_enabled) {
    if (!(clip_threshold > 0.0) || !std::isfinite(clip_threshold)) {
      throw std::invalid_argument("clip_threshold must be finite and > 0");
    }
    if (!(epsilon_initial > 0.0)) {
      throw std::invalid_argument("epsilon_initial must be > 0");
    }
  }
}

ParamVector local_personalized_update(ClientState& client,
                                      const ParamVector& w_global,
                                      const MLPShape& shape,
                                      const TrainConfig& cfg, Rng& rng) {
  client.personalized = sgd_epochs(
      client.personalized, shape, client.dataset.train,
      cfg.epochs_personalized, cfg.batch_size, cfg.lr_personalized,
      regularized_grad(shape, w_global, cfg.reg_factor), rng);
  check_finite(client.personalized, "personalized task");
  return client.personalized;
}

ParamVector local_global_update(const ParamVector& w_global,
                                const ClientState& client,
                                const MLPShape& shape, const TrainConfig& cfg,
                                Rng& rng) {
  ParamVector trained =
      sgd_epochs(w_global, shape, client.dataset.train, cfg.epochs_local,
                 cfg.batch_size, cfg.lr_local, plain_grad(shape), rng);
  check_finite(trained, "global-model task");
  return subtract(trained, w_global);
}

ParamVector aggregate(const ParamVector& w_global,
                      const std::vector<AggregateEntry>& deltas) {
  if (deltas.empty()) {
    throw std::invalid_argument("aggregate: no updates to aggregate");
  }
  long total = 0;
  for (const AggregateEntry& e : deltas) {
    if (e.sample_count <= 0) {
      throw std::invalid_argument("aggregate: sample_count must be positive");
    }
    if (e.delta.size() != w_global.size()) {
      throw std::invalid_argument("aggregate: update size mismatch");
    }
    total += e.sample_count;
  }
  ParamVector next = w_global;
  for (const AggregateEntry& e : deltas) {
    const double weight =
        static_cast<double>(e.sample_count) / static_cast<double>(total);
    axpy(next, weight, e.delta);
  }
  return next;
}

RoundReport run_round(ServerState& server, std::vector<ClientState>& clients,
                      const MLPShape& shape, const TrainConfig& cfg,
                      const std::set<int>& unavailable) {
  const int n = static_cast<int>(clients.size());
  if (n == 0) throw std::invalid_argument("run_round: no clients");
  if (server.round_index >= cfg.rounds) {
    throw std::logic_error("run_round: all rounds already run");
  }
  for (int id : unavailable) {
    if (id < 0 || id >= n) {
      throw std::invalid_argument("run_round: unavailable id out of range");
    }
  }
  const int r = server.round_index;
  const bool multitask = cfg.method == Method::A3 || cfg.method == Method::A4;
  const ParamVector broadcast = server.global;  // snapshot before any update

  std::set<int> available;
  for (int i = 0; i < n; ++i) {
    if (unavailable.count(i) == 0) available.insert(i);
  }

  // Client side. The personalized task never depends on the uplink: a
  // client that cannot reach the server still trains its own model.
  std::map<int, ParamVector> received;
  std::vector<std::optional<double>> epsilon_used(n);
  for (int i = 0; i < n; ++i) {
    ClientState& client = clients[i];
    if (cfg.method == Method::A1) {
      // No communication at all: keep refining the stored model on the
      // plain local objective.
      Rng rng = derive_rng(cfg.master_seed, "local", static_cast<std::uint64_t>(r),
                           static_cast<std::uint64_t>(i));
      client.personalized =
          sgd_epochs(client.personalized, shape, client.dataset.train,
                     cfg.epochs_local, cfg.batch_size, cfg.lr_local,
                     plain_grad(shape), rng);
      check_finite(client.personalized, "local-only training");
      continue;
    }
    if (multitask) {
      Rng rng = derive_rng(cfg.master_seed, "personalized",
                           static_cast<std::uint64_t>(r),
                           static_cast<std::uint64_t>(i));
      local_personalized_update(client, broadcast, shape, cfg, rng);
    }
    const bool uploads = available.count(i) > 0;
    if (!uploads) {
      if (client.accountant) client.accountant->consume(false);
      continue;
    }
    Rng rng = derive_rng(cfg.master_seed, "local", static_cast<std::uint64_t>(r),
                         static_cast<std::uint64_t>(i));
    ParamVector delta = local_global_update(broadcast, client, shape, cfg, rng);
    if (cfg.dp_enabled) {
      if (!client.accountant) {
        throw std::logic_error("run_round: privacy on but no accountant");
      }
      const double eps = client.accountant->epsilon_current();
      const NoiseParams np = NoiseParams::make(
          cfg.clip_threshold, client.sample_count(), eps);
      delta = clip(delta, cfg.clip_threshold);
      Rng noise_rng = derive_rng(cfg.master_seed, "noise",
                                 static_cast<std::uint64_t>(r),
                                 static_cast<std::uint64_t>(i));
      delta = add_noise(delta, np, noise_rng);
      client.accountant->consume(true);
      epsilon_used[i] = eps;
    }
    received.emplace(i, std::move(delta));
  }

  // Server side.
  std::vector<Provenance> provenance(n, Provenance::uploaded);
  if (cfg.method != Method::A1) {
    std::vector<AggregateEntry> entries;
    entries.reserve(n);
    for (int i : available) {
      entries.push_back({i, received.at(i), clients[i].sample_count()});
    }
    if (multitask) {
      // Similarity sees exactly what the server received this round, then
      // unavailable clients borrow the update of their closest peer. The
      // borrowed update is weighted by the absent client's own data size.
      server.similarity.update(available, received);
      const std::map<int, Substitution> subs =
          server.similarity.substitute(unavailable, available);
      for (const auto& [id, sub] : subs) {
        provenance[id] = sub.provenance();
        if (sub.source) {
          entries.push_back(
              {id, received.at(*sub.source), clients[id].sample_count()});
        }
      }
    } else {
      for (int id : unavailable) provenance[id] = Provenance::excluded;
    }
    if (!entries.empty()) {
      server.global = aggregate(server.global, entries);
      check_finite(server.global, "aggregation");
    }
  }
  server.round_index = r + 1;

  RoundReport report;
  report.round = r + 1;
  report.clients.reserve(n);
  double nrmse_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const ParamVector& model =
        cfg.method == Method::A2 ? server.global : clients[i].personalized;
    ClientRoundRecord rec;
    rec.available = cfg.method == Method::A1 || available.count(i) > 0;
    rec.provenance = provenance[i];
    rec.test_nrmse = evaluate_client(model, shape, clients[i].dataset);
    rec.train_loss = mse_loss(model, shape, clients[i].dataset.train);
    rec.epsilon_used = epsilon_used[i];
    nrmse_sum += rec.test_nrmse;
    report.clients.push_back(std::move(rec));
  }
  report.global_test_nrmse_mean = nrmse_sum / static_cast<double>(n);
  return report;
}

ExperimentResult run_experiment(const TrainConfig& cfg, const MLPShape& shape,
                                const std::vector<ClientDataset>& datasets,
                                const RoundObserver& observer) {
  cfg.validate();
  shape.validate();
  if (datasets.empty()) {
    throw std::invalid_argument("run_experiment: no client datasets");
  }
  const int n = static_cast<int>(datasets.size());
  for (const ClientDataset& ds : datasets) {
    if (ds.train.empty() || ds.test.empty()) {
      throw std::invalid_argument("run_experiment: empty train or test split");
    }
  }

  std::vector<ClientState> clients;
  clients.reserve(n);
  for (int i = 0; i < n; ++i) {
    ClientState c;
    c.dataset = datasets[i];
    Rng init = derive_rng(cfg.master_seed, "init_personal",
                          static_cast<std::uint64_t>(i));
    c.personalized = init_params(shape, init);
    if (cfg.dp_enabled) {
      c.accountant.emplace(cfg.epsilon_initial, cfg.rounds,
                           cfg.budget_strategy);
    }
    clients.push_back(std::move(c));
  }

  ServerState server{ParamVector{}, SimilarityMatrix(n), 0};
  {
    Rng init = derive_rng(cfg.master_seed, "init_global");
    server.global = init_params(shape, init);
  }

  // The unavailability draw depends only on (seed, round), so every method
  // at the same seed sees the same outages.
  const bool use_dropout = cfg.method != Method::A1 && cfg.dropout_ratio > 0.0;
  AvailabilityPlan plan;
  if (use_dropout) {
    plan = AvailabilityPlan::build(cfg.master_seed, cfg.rounds, n,
                                   cfg.dropout_ratio, cfg.dropout_mode);
  }

  ExperimentResult result;
  result.rounds.reserve(cfg.rounds);
  const std::set<int> none;
  for (int r = 0; r < cfg.rounds; ++r) {
    const std::set<int>& unavailable = use_dropout ? plan.unavailable_in(r) : none;
    result.rounds.push_back(run_round(server, clients, shape, cfg, unavailable));
    if (observer) observer(r + 1, server.similarity);
  }

  result.final_models.reserve(n);
  result.final_nrmse.reserve(n);
  for (int i = 0; i < n; ++i) {
    const ParamVector& model =
        cfg.method == Method::A2 ? server.global : clients[i].personalized;
    result.final_models.push_back(model);
    result.final_nrmse.push_back(evaluate_client(model, shape, clients[i].dataset));
  }
  return result;
}

}  // namespace fedmeter
