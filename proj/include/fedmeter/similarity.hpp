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
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <vector>

#include "fedmeter/nn.hpp"

namespace fedmeter {

/// How a client's contribution entered this round's aggregation.
enum class Provenance { uploaded, substituted, excluded };

const char* provenance_name(Provenance p);

/// Direction similarity of two update vectors mapped to [0, 1]:
/// 1 = same direction, 1/2 = orthogonal, 0 = opposite. Degenerate inputs
/// (either norm below 1e-12) score the uninformative midpoint 1/2.
double cosine_score(const ParamVector& a, const ParamVector& b);

struct Substitution {
  // Source client whose update stands in; empty means no available client
  // has any shared history, so the client is left out of aggregation.
  std::optional<int> source;
  Provenance provenance() const {
    return source ? Provenance::substituted : Provenance::excluded;
  }
};

/// Pairwise running-average similarity between clients, together with the
/// number of rounds each pair was co-available. Owned by the server;
/// symmetric by construction; the diagonal is never consulted.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  explicit SimilarityMatrix(int num_clients);

  int size() const { return n_; }
  double score(int i, int j) const;
  std::uint64_t pair_count(int i, int j) const;

  /// Folds this round's pairwise scores into the running averages, for every
  /// pair of clients that both uploaded. `deltas` must hold exactly the
  /// uploads of `available`. Other pairs are untouched.
  void update(const std::set<int>& available,
              const std::map<int, ParamVector>& deltas);

  /// For each unavailable client, picks the available client with the
  /// highest average similarity among pairs with upload history (ties break
  /// to the lowest client id).
  std::map<int, Substitution> substitute(
      const std::set<int>& unavailable, const std::set<int>& available) const;

  void write_csv(std::ostream& out) const;

 private:
  std::size_t at(int i, int j) const;
  int n_ = 0;
  std::vector<double> score_;
  std::vector<std::uint64_t> count_;
};

}  // namespace fedmeter
