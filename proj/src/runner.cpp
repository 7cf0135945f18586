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

#include "fedmeter/runner.hpp"

#include <filesystem>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fedmeter/util.hpp"

namespace fedmeter {

MLPShape experiment_shape() { return MLPShape{kFeatureCount, 40, 1}; }

std::string SweepPoint::tag() const {
  std::string out = method_name(method);
  out += "_nc" + format_double(dropout_ratio);
  out += "_eps" + format_double(epsilon);
  out += "_mu" + format_double(reg_factor);
  out += "_e" + std::to_string(epochs_local);
  return out;
}

std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg) {
  if (cfg.methods.empty() || cfg.sweep_dropout_ratio.empty() ||
      cfg.sweep_epsilon.empty() || cfg.sweep_reg_factor.empty() ||
      cfg.sweep_epochs_local.empty()) {
    throw std::logic_error("sweep_points: config not finalized");
  }
  std::vector<SweepPoint> out;
  for (Method m : cfg.methods) {
    for (double n_c : cfg.sweep_dropout_ratio) {
      for (double eps : cfg.sweep_epsilon) {
        for (double mu : cfg.sweep_reg_factor) {
          for (int epochs : cfg.sweep_epochs_local) {
            // Without privacy noise the budget value is meaningless; pin it
            // to infinity so run tags and summary rows say what actually ran.
            const double effective_eps =
                cfg.dp_enabled ? eps : std::numeric_limits<double>::infinity();
            out.push_back({m, n_c, effective_eps, mu, epochs});
          }
        }
      }
    }
  }
  return out;
}

std::vector<ClientDataset> build_datasets(const ExperimentConfig& cfg) {
  std::vector<ClientDataset> datasets;
  if (cfg.data_source == DataSource::synthetic) {
    datasets = generate_synthetic(cfg.num_communities, cfg.samples_per_community,
                                  cfg.master_seed);
  } else {
    datasets = load_community_dir(cfg.csv_dir);
  }
  for (ClientDataset& ds : datasets) ds = normalize(std::move(ds));
  return datasets;
}

SweepResult run_sweep(const ExperimentConfig& cfg,
                      const std::vector<ClientDataset>& datasets,
                      const SweepProgress& progress) {
  SweepResult sweep;
  std::vector<TableEntry> entries;
  const std::vector<SweepPoint> points = sweep_points(cfg);
  int index = 0;
  for (const SweepPoint& point : points) {
    if (progress) progress(point, index, static_cast<int>(points.size()));
    ++index;
    const TrainConfig train =
        cfg.train_config(point.method, point.dropout_ratio, point.epsilon,
                         point.reg_factor, point.epochs_local);
    PointResult pr;
    pr.point = point;
    RoundObserver observer;
    const bool multitask =
        point.method == Method::A3 || point.method == Method::A4;
    if (cfg.dump_similarity && multitask) {
      std::string* dest = &pr.similarity_csv;
      const int last = cfg.rounds;
      observer = [dest, last](int round, const SimilarityMatrix& sim) {
        if (round != last) return;
        std::ostringstream csv;
        sim.write_csv(csv);
        *dest = csv.str();
      };
    }
    pr.result = run_experiment(train, experiment_shape(), datasets, observer);

    const double table_epsilon =
        cfg.dp_enabled ? point.epsilon : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < datasets.size(); ++i) {
      TableEntry entry;
      entry.method = method_name(point.method);
      entry.dropout_ratio = point.dropout_ratio;
      entry.epsilon = table_epsilon;
      entry.mu = point.reg_factor;
      entry.epochs_local = point.epochs_local;
      entry.community = datasets[i].community_id;
      entry.nrmse = pr.result.final_nrmse[i];
      entries.push_back(std::move(entry));
    }
    sweep.points.push_back(std::move(pr));
  }
  sweep.table = comparison_table(std::move(entries));
  return sweep;
}

std::vector<std::string> write_artifacts(const ExperimentConfig& cfg,
                                         const SweepResult& sweep) {
  namespace fs = std::filesystem;
  std::vector<std::string> written;
  const fs::path root = cfg.output_dir;
  fs::create_directories(root);

  const auto emit = [&written](const fs::path& path, const std::string& text) {
    write_file_atomic(path.string(), text);
    written.push_back(path.string());
  };

  emit(root / "config_resolved.txt", cfg.resolve_to_text());
  emit(root / "summary.json", table_json(sweep.table));

  const bool single = sweep.points.size() == 1;
  for (const PointResult& pr : sweep.points) {
    fs::path dir = root;
    if (!single) {
      dir = root / "runs" / pr.point.tag();
      fs::create_directories(dir);
    }
    emit(dir / "metrics.csv", metrics_csv(pr.result.rounds));
    if (!pr.similarity_csv.empty()) {
      emit(dir / "similarity_matrix.csv", pr.similarity_csv);
    }
  }
  return written;
}

}  // namespace fedmeter
