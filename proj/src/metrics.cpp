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

#include "fedmeter/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "fedmeter/util.hpp"
#include "json.hpp"

namespace fedmeter {

double nrmse(std::span<const double> predicted, std::span<const double> truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("nrmse: length mismatch");
  }
  if (truth.empty()) throw std::invalid_argument("nrmse: empty input");
  double lo = truth[0];
  double hi = truth[0];
  double acc = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    lo = std::min(lo, truth[i]);
    hi = std::max(hi, truth[i]);
    const double r = predicted[i] - truth[i];
    acc += r * r;
  }
  if (!(hi > lo)) {
    throw std::invalid_argument("nrmse: truth range is zero (constant vector)");
  }
  return std::sqrt(acc / static_cast<double>(truth.size())) / (hi - lo);
}

double evaluate_client(const ParamVector& model, const MLPShape& shape,
                       const ClientDataset& ds) {
  if (ds.test.empty()) {
    throw std::invalid_argument("evaluate_client: empty test split");
  }
  std::vector<double> predicted;
  std::vector<double> truth;
  predicted.reserve(ds.test.size());
  truth.reserve(ds.test.size());
  for (const Sample& s : ds.test) {
    predicted.push_back(forward(model, shape, s.features));
    truth.push_back(s.target);
  }
  return nrmse(predicted, truth);
}

std::string metrics_csv(std::span<const RoundReport> rounds) {
  std::ostringstream out;
  out << "round,client,available,provenance,test_nrmse,train_loss,epsilon\n";
  for (const RoundReport& r : rounds) {
    for (std::size_t c = 0; c < r.clients.size(); ++c) {
      const ClientRoundRecord& rec = r.clients[c];
      out << r.round << ',' << c << ',' << (rec.available ? 1 : 0) << ','
          << provenance_name(rec.provenance) << ','
          << format_double(rec.test_nrmse) << ','
          << format_double(rec.train_loss) << ',';
      if (rec.epsilon_used) out << format_double(*rec.epsilon_used);
      out << '\n';
    }
  }
  return out.str();
}

std::vector<TableRow> comparison_table(std::vector<TableEntry> entries) {
  auto key = [](const TableEntry& e) {
    return std::make_tuple(e.method, e.dropout_ratio, e.epsilon, e.mu,
                           e.epochs_local, e.community);
  };
  std::sort(entries.begin(), entries.end(),
            [&key](const TableEntry& a, const TableEntry& b) {
              return key(a) < key(b);
            });
  std::vector<TableRow> rows;
  for (const TableEntry& e : entries) {
    const bool fresh =
        rows.empty() || std::make_tuple(rows.back().method,
                                        rows.back().dropout_ratio,
                                        rows.back().epsilon, rows.back().mu,
                                        rows.back().epochs_local) !=
            std::make_tuple(e.method, e.dropout_ratio, e.epsilon, e.mu,
                            e.epochs_local);
    if (fresh) {
      TableRow row;
      row.method = e.method;
      row.dropout_ratio = e.dropout_ratio;
      row.epsilon = e.epsilon;
      row.mu = e.mu;
      row.epochs_local = e.epochs_local;
      rows.push_back(std::move(row));
    }
    rows.back().communities.push_back(e.community);
    rows.back().community_nrmse.push_back(e.nrmse);
  }
  for (TableRow& row : rows) {
    double acc = 0.0;
    for (double v : row.community_nrmse) acc += v;
    row.mean = acc / static_cast<double>(row.community_nrmse.size());
  }
  return rows;
}

std::string table_json(std::span<const TableRow> rows) {
  nlohmann::json doc;
  doc["rows"] = nlohmann::json::array();
  for (const TableRow& row : rows) {
    nlohmann::json r;
    r["method"] = row.method;
    r["n_c"] = row.dropout_ratio;
    r["epsilon"] = format_double(row.epsilon);
    r["mu"] = row.mu;
    r["epochs_local"] = row.epochs_local;
    r["communities"] = row.communities;
    r["nrmse"] = row.community_nrmse;
    r["mean"] = row.mean;
    doc["rows"].push_back(std::move(r));
  }
  return doc.dump(2) + "\n";
}

}  // namespace fedmeter
