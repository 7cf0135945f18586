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
#include <filesystem>
#include <string>
#include <vector>

#include "fedmeter/nn.hpp"
#include "fedmeter/rng.hpp"

namespace fedmeter {

inline constexpr int kFeatureCount = 5;
inline constexpr const char* kFeatureNames[kFeatureCount] = {
    "net_load", "irradiance", "temperature", "humidity", "wind_speed"};

/// Nominal clear-sky peak irradiance of the generator's solar model, W/m^2.
inline constexpr double kIrradianceMax = 1000.0;

/// Knobs that make one synthetic community unlike another: panel capacity,
/// thermal derating, local sky clarity, demand level, metering noise.
struct CommunityProfile {
  int community_id = 0;
  double pv_capacity = 5.0;       // kW
  double temp_coefficient = 0.004;  // 1/degC derating above 25 degC
  double irradiance_scale = 1.0;  // in (0, 2]
  double load_scale = 3.0;        // kW
  double noise_std = 0.1;         // kW, metering noise on pv

  void validate() const;
};

struct FeatureRange {
  double min = 0.0;
  double max = 0.0;
};

/// One community's data: time-ordered train/test splits plus the per-feature
/// min/max ranges fitted on train (empty until normalize() runs). Targets are
/// never scaled. Timestamps are carried for inspection only.
struct ClientDataset {
  int community_id = 0;
  std::vector<Sample> train;
  std::vector<Sample> test;
  std::vector<FeatureRange> normalization;
  std::vector<std::string> train_timestamps;
  std::vector<std::string> test_timestamps;
};

/// Draws a profile for one community from its own derived stream.
CommunityProfile sample_profile(int community_id, Rng& rng);

/// Synthesizes `samples` two-hour readings for one community and splits
/// them 70/30 by time order. Daily irradiance arc with per-day cloud
/// attenuation, seasonal drift in both irradiance and temperature,
/// periodic load. pv is capacity x clamped relative irradiance x thermal
/// derating plus Gaussian metering noise; net_load is exactly load - pv.
ClientDataset generate_community(const CommunityProfile& profile, int samples,
                                 Rng& rng);

/// Generates `num_communities` pairwise-distinct communities. Each community
/// uses a sub-stream derived from (seed, community_id), so results do not
/// depend on generation order. samples_per_community must be >= 20.
std::vector<ClientDataset> generate_synthetic(int num_communities,
                                              int samples_per_community,
                                              std::uint64_t seed);

/// Loads one community from a CSV with header
/// timestamp,net_load,irradiance,temperature,humidity,wind_speed,pv
/// (any column order, all columns required) and splits 70/30 by row order.
/// Parse and schema problems throw std::runtime_error naming the column or
/// 1-based data row.
ClientDataset load_csv(const std::filesystem::path& path);

/// Loads every *.csv under `dir` (sorted by filename) and assigns community
/// ids 0..k-1 in that order.
std::vector<ClientDataset> load_community_dir(const std::filesystem::path& dir);

/// Writes one community back out in the load_csv schema (train rows then
/// test rows, time order preserved).
void write_csv(const ClientDataset& ds, const std::filesystem::path& path);

/// Min-max scaling fitted on train and applied to train and test. Constant
/// features map to 0. Targets are left alone; the evaluation metric already
/// normalizes by target range.
ClientDataset normalize(ClientDataset ds);

}  // namespace fedmeter
