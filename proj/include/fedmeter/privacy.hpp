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

#include "fedmeter/nn.hpp"
#include "fedmeter/rng.hpp"

namespace fedmeter {

enum class BudgetStrategy { fixed, dynamic };

const char* budget_strategy_name(BudgetStrategy s);

/// Per-client privacy ledger under sequential composition: the total budget
/// is rounds * epsilon0 and every successful upload spends the current
/// per-round allowance. Under the dynamic strategy a failed round's unspent
/// allowance is respread over the remaining rounds, so with no failure in
/// the last round the full budget is consumed; under the fixed strategy a
/// failed round's allowance is simply forfeited. Either way consumption
/// never exceeds the total.
class PrivacyAccountant {
 public:
  PrivacyAccountant(double epsilon0, int rounds_total, BudgetStrategy strategy);

  double epsilon_current() const { return epsilon_current_; }
  double consumed() const { return consumed_; }
  double total_budget() const { return total_budget_; }
  int rounds_total() const { return rounds_total_; }
  int rounds_elapsed() const { return rounds_elapsed_; }
  BudgetStrategy strategy() const { return strategy_; }

  /// Advances one round. uploaded=true spends the current allowance;
  /// uploaded=false saves it (dynamic respreads, fixed forfeits).
  void consume(bool uploaded);

  /// Respreads a failed round's allowance over the rounds after
  /// `failed_round` (1-based). A failure in the very last round has no
  /// remaining rounds to respread into, so the allowance stays unspent.
  /// Only meaningful under the dynamic strategy.
  void reallocate_on_failure(int failed_round);

 private:
  double epsilon_current_;
  int rounds_total_;
  int rounds_elapsed_ = 0;
  double consumed_ = 0.0;
  double total_budget_;
  BudgetStrategy strategy_;
};

/// Scale of the per-coordinate Laplace noise applied to a clipped update.
struct NoiseParams {
  double clip_threshold = 0.0;  // C
  double sensitivity = 0.0;     // 2C / dataset_size
  double scale = 0.0;           // sensitivity / epsilon

  static NoiseParams make(double clip_threshold, int dataset_size,
                          double epsilon);
};

/// Norm clipping: delta / max(1, ||delta||_2 / threshold). The result's
/// L2 norm never exceeds the threshold.
ParamVector clip(const ParamVector& delta, double clip_threshold);

/// 2 * clip_threshold / dataset_size.
double sensitivity(double clip_threshold, int dataset_size);

/// Single Laplace(0, b) draw by inverse CDF on one uniform, so for a fixed
/// stream the sample is exactly proportional to b.
double sample_laplace(double b, Rng& rng);

/// Adds i.i.d. Laplace(0, scale) noise to every coordinate. scale == 0
/// (the infinite-budget limit) returns the input bit-for-bit while still
/// consuming the same stream draws.
ParamVector add_noise(const ParamVector& delta, const NoiseParams& np,
                      Rng& rng);

}  // namespace fedmeter
