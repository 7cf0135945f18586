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
#include <set>
#include <vector>

#include "fedmeter/rng.hpp"

namespace fedmeter {

/// How many clients fail per round: a count drawn uniformly from
/// {0..max_unavailable}, or always exactly max_unavailable.
enum class DropoutMode { uniform_count, fixed_count };

/// Upper bound on failures per round: round(dropout_ratio * num_clients).
int max_unavailable(int num_clients, double dropout_ratio);

/// The set of clients whose upload fails in `round`. Pure function of
/// (seed, round); sampling is uniform without replacement.
std::set<int> draw_unavailable(std::uint64_t seed, int round, int num_clients,
                               double dropout_ratio, DropoutMode mode);

/// Precomputed failure sets for a whole run.
class AvailabilityPlan {
 public:
  static AvailabilityPlan build(std::uint64_t seed, int rounds,
                                int num_clients, double dropout_ratio,
                                DropoutMode mode);

  const std::set<int>& unavailable_in(int round) const;
  std::set<int> available_in(int round) const;
  int rounds() const { return static_cast<int>(unavailable_.size()); }
  int num_clients() const { return num_clients_; }

 private:
  std::vector<std::set<int>> unavailable_;
  int num_clients_ = 0;
};

}  // namespace fedmeter
