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

#include "fedmeter/availability.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fedmeter {

int max_unavailable(int num_clients, double dropout_ratio) {
  if (num_clients < 1) {
    throw std::invalid_argument("availability: num_clients must be >= 1");
  }
  if (!(dropout_ratio >= 0.0 && dropout_ratio <= 1.0)) {
    throw std::invalid_argument("availability: dropout_ratio must be in [0, 1]");
  }
  return static_cast<int>(std::llround(dropout_ratio * num_clients));
}

std::set<int> draw_unavailable(std::uint64_t seed, int round, int num_clients,
                               double dropout_ratio, DropoutMode mode) {
  const int cap = max_unavailable(num_clients, dropout_ratio);
  Rng rng = derive_rng(seed, "availability", static_cast<std::uint64_t>(round));
  const int k = mode == DropoutMode::fixed_count
                    ? cap
                    : static_cast<int>(rng.below(static_cast<std::uint64_t>(cap) + 1));
  // Partial Fisher-Yates: first k entries are a uniform sample without
  // replacement.
  std::vector<int> ids(static_cast<std::size_t>(num_clients));
  std::iota(ids.begin(), ids.end(), 0);
  std::set<int> out;
  for (int i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(
                            rng.below(static_cast<std::uint64_t>(num_clients - i)));
    std::swap(ids[static_cast<std::size_t>(i)], ids[j]);
    out.insert(ids[static_cast<std::size_t>(i)]);
  }
  return out;
}

AvailabilityPlan AvailabilityPlan::build(std::uint64_t seed, int rounds,
                                         int num_clients, double dropout_ratio,
                                         DropoutMode mode) {
  if (rounds < 0) throw std::invalid_argument("availability: rounds must be >= 0");
  AvailabilityPlan plan;
  plan.num_clients_ = num_clients;
  plan.unavailable_.reserve(static_cast<std::size_t>(rounds));
  for (int r = 0; r < rounds; ++r) {
    plan.unavailable_.push_back(
        draw_unavailable(seed, r, num_clients, dropout_ratio, mode));
  }
  return plan;
}

const std::set<int>& AvailabilityPlan::unavailable_in(int round) const {
  return unavailable_.at(static_cast<std::size_t>(round));
}

std::set<int> AvailabilityPlan::available_in(int round) const {
  const std::set<int>& down = unavailable_in(round);
  std::set<int> up;
  for (int i = 0; i < num_clients_; ++i) {
    if (!down.count(i)) up.insert(i);
  }
  return up;
}

}  // namespace fedmeter
