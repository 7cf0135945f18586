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

#include "fedmeter/privacy.hpp"

#include <cmath>
#include <stdexcept>

namespace fedmeter {

const char* budget_strategy_name(BudgetStrategy s) {
  return s == BudgetStrategy::fixed ? "fixed" : "dynamic";
}

PrivacyAccountant::PrivacyAccountant(double epsilon0, int rounds_total,
                                     BudgetStrategy strategy)
    : epsilon_current_(epsilon0),
      rounds_total_(rounds_total),
      total_budget_(epsilon0 * rounds_total),
      strategy_(strategy) {
  if (!(epsilon0 > 0.0)) {
    throw std::invalid_argument("PrivacyAccountant: epsilon0 must be > 0");
  }
  if (rounds_total < 1) {
    throw std::invalid_argument("PrivacyAccountant: rounds_total must be >= 1");
  }
}

void PrivacyAccountant::consume(bool uploaded) {
  if (rounds_elapsed_ >= rounds_total_) {
    throw std::logic_error("PrivacyAccountant: all rounds already consumed");
  }
  if (uploaded) {
    consumed_ += epsilon_current_;
  } else if (strategy_ == BudgetStrategy::dynamic) {
    reallocate_on_failure(rounds_elapsed_ + 1);
  }
  // Fixed strategy on failure: allowance forfeited, nothing to book.
  ++rounds_elapsed_;
}

void PrivacyAccountant::reallocate_on_failure(int failed_round) {
  if (strategy_ != BudgetStrategy::dynamic) {
    throw std::logic_error(
        "PrivacyAccountant: reallocation requires the dynamic strategy");
  }
  if (failed_round < 1 || failed_round > rounds_total_) {
    throw std::invalid_argument("PrivacyAccountant: failed_round " +
                                std::to_string(failed_round) +
                                " outside [1, " +
                                std::to_string(rounds_total_) + "]");
  }
  if (failed_round == rounds_total_) return;  // nothing left to respread into
  epsilon_current_ *= static_cast<double>(rounds_total_ - failed_round + 1) /
                      static_cast<double>(rounds_total_ - failed_round);
}

NoiseParams NoiseParams::make(double clip_threshold, int dataset_size,
                              double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("NoiseParams: epsilon must be > 0");
  }
  NoiseParams np;
  np.clip_threshold = clip_threshold;
  np.sensitivity = fedmeter::sensitivity(clip_threshold, dataset_size);
  np.scale = np.sensitivity / epsilon;  // 0 when epsilon is infinite
  return np;
}

ParamVector clip(const ParamVector& delta, double clip_threshold) {
  if (!(clip_threshold > 0.0)) {
    throw std::invalid_argument("clip: threshold must be > 0");
  }
  const double factor = std::max(1.0, l2_norm(delta) / clip_threshold);
  ParamVector out(delta.size());
  for (std::size_t i = 0; i < delta.size(); ++i) out[i] = delta[i] / factor;
  return out;
}

double sensitivity(double clip_threshold, int dataset_size) {
  if (!(clip_threshold > 0.0)) {
    throw std::invalid_argument("sensitivity: clip threshold must be > 0");
  }
  if (dataset_size < 1) {
    throw std::invalid_argument("sensitivity: dataset_size must be >= 1");
  }
  return 2.0 * clip_threshold / static_cast<double>(dataset_size);
}

double sample_laplace(double b, Rng& rng) {
  if (b < 0.0) throw std::invalid_argument("sample_laplace: b must be >= 0");
  const double x = rng.uniform01() - 0.5;  // in (-1/2, 1/2), endpoints excluded
  const double sign = x < 0.0 ? -1.0 : 1.0;
  return -b * sign * std::log(1.0 - 2.0 * std::fabs(x));
}

ParamVector add_noise(const ParamVector& delta, const NoiseParams& np,
                      Rng& rng) {
  ParamVector out(delta.size());
  for (std::size_t i = 0; i < delta.size(); ++i) {
    out[i] = delta[i] + sample_laplace(np.scale, rng);
  }
  return out;
}

}  // namespace fedmeter
