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

#include "fedmeter/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "fedmeter/util.hpp"

namespace fedmeter {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kStepsPerDay = 12;  // two-hour readings: a fixed sample budget
                                  // then spans several months, so train and
                                  // test windows sit in different seasons

std::string iso_timestamp(int day_offset, int step) {
  using namespace std::chrono;
  sys_days base = sys_days(year{2025} / January / 1);
  sys_days day = base + days{day_offset + step / kStepsPerDay};
  year_month_day ymd{day};
  int minutes_of_day = (step % kStepsPerDay) * (1440 / kStepsPerDay);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:00",
                static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), minutes_of_day / 60,
                minutes_of_day % 60);
  return std::string(buf);
}

// train gets floor(70%) of the rows but both halves stay nonempty.
std::size_t train_count(std::size_t n) {
  auto t = static_cast<std::size_t>(std::floor(0.7 * static_cast<double>(n)));
  if (t == 0) t = 1;
  if (t >= n) t = n - 1;
  return t;
}

ClientDataset split_by_order(int community_id, std::vector<Sample> rows,
                             std::vector<std::string> stamps) {
  if (rows.size() < 2) {
    throw std::runtime_error(
        "dataset: need at least 2 rows to form train and test splits, got " +
        std::to_string(rows.size()));
  }
  ClientDataset ds;
  ds.community_id = community_id;
  std::size_t t = train_count(rows.size());
  ds.train.assign(rows.begin(), rows.begin() + static_cast<long>(t));
  ds.test.assign(rows.begin() + static_cast<long>(t), rows.end());
  if (!stamps.empty()) {
    ds.train_timestamps.assign(stamps.begin(),
                               stamps.begin() + static_cast<long>(t));
    ds.test_timestamps.assign(stamps.begin() + static_cast<long>(t),
                              stamps.end());
  }
  return ds;
}

}  // namespace

void CommunityProfile::validate() const {
  if (pv_capacity <= 0.0)
    throw std::invalid_argument("CommunityProfile: pv_capacity must be > 0");
  if (noise_std < 0.0)
    throw std::invalid_argument("CommunityProfile: noise_std must be >= 0");
  if (!(irradiance_scale > 0.0 && irradiance_scale <= 2.0))
    throw std::invalid_argument(
        "CommunityProfile: irradiance_scale must be in (0, 2]");
}

CommunityProfile sample_profile(int community_id, Rng& rng) {
  CommunityProfile p;
  p.community_id = community_id;
  p.pv_capacity = rng.uniform(4.0, 6.0);
  p.temp_coefficient = rng.uniform(0.004, 0.008);
  p.irradiance_scale = rng.uniform(0.80, 1.20);
  p.load_scale = rng.uniform(2.5, 5.5);
  p.noise_std = rng.uniform(0.12, 0.20) * p.pv_capacity;
  return p;
}

ClientDataset generate_community(const CommunityProfile& profile, int samples,
                                 Rng& rng) {
  profile.validate();
  if (samples < 20) {
    throw std::invalid_argument(
        "generate_community: need at least 20 samples, got " +
        std::to_string(samples));
  }
  // Communities start at different points of the season cycle, so each one
  // trains on a weather window the others have not seen.
  const int day_offset = static_cast<int>(rng.below(365));

  std::vector<Sample> rows;
  std::vector<std::string> stamps;
  rows.reserve(static_cast<std::size_t>(samples));
  stamps.reserve(static_cast<std::size_t>(samples));

  // Generation error has two components of equal share: slow day-to-day
  // drift (soiling, inverter state) and fast per-reading jitter. Their sum
  // is marginally Gaussian(0, ~noise_std).
  const double day_noise_std = 0.7 * profile.noise_std;
  const double fast_noise_std = 0.7 * profile.noise_std;

  double cloud = 0.6;       // per-day sky clarity, persistent within a day
  double day_noise = 0.0;   // per-day generation drift
  double occupancy = 0.0;   // per-day consumption level
  for (int k = 0; k < samples; ++k) {
    const int day = k / kStepsPerDay;
    const double tau = static_cast<double>(k % kStepsPerDay) / kStepsPerDay;
    const double season_phase = 2.0 * kPi * (day_offset + day) / 365.0;
    if (k % kStepsPerDay == 0) {
      // Sky regimes are bimodal (clear vs. overcast days) and seasonal:
      // clear days are common near the sunny part of the year and rare
      // half a year later. A community whose recorded window sits in the
      // cloudy season therefore contains few clear-sky days at all.
      const double clear_prob = 0.5 + 0.25 * std::sin(season_phase);
      const double clarity = rng.uniform01() < clear_prob
                                 ? rng.uniform(0.75, 1.05)
                                 : rng.uniform(0.15, 0.50);
      cloud = std::clamp(0.35 * cloud + 0.65 * clarity, 0.15, 1.0);
      day_noise = rng.gaussian(0.0, day_noise_std);
      occupancy = rng.uniform(-0.15, 0.15);
    }
    const double season_irr = 0.7 + 0.3 * std::sin(season_phase);
    const double season_temp = 18.0 + 14.0 * std::sin(season_phase - kPi / 2.0);

    double elevation = 0.0;
    if (tau >= 0.25 && tau <= 0.75) {
      elevation = std::sin(kPi * (tau - 0.25) / 0.5);
    }
    const double flicker = std::clamp(1.0 + 0.12 * rng.gaussian(), 0.55, 1.25);
    const double irradiance = std::max(
        0.0, kIrradianceMax * profile.irradiance_scale * season_irr *
                 elevation * cloud * flicker);

    const double temperature = season_temp +
                               7.0 * std::sin(2.0 * kPi * (tau - 0.375)) +
                               0.004 * irradiance + rng.gaussian(0.0, 0.7);
    const double humidity = std::clamp(
        60.0 + 25.0 * std::sin(2.0 * kPi * (tau + 0.15)) - 0.02 * irradiance +
            rng.gaussian(0.0, 5.0),
        5.0, 100.0);
    const double wind = std::max(
        0.0, 3.0 + 1.5 * std::sin(2.0 * kPi * (tau - 0.5)) + rng.gaussian(0.0, 1.0));

    const double derating =
        1.0 - profile.temp_coefficient * std::max(0.0, temperature - 25.0);
    // Panels never export negative power; clamping also keeps each
    // community's target range anchored at zero, so per-client
    // normalization stays comparable across communities.
    const double pv = std::max(
        0.0, profile.pv_capacity *
                     std::clamp(irradiance / kIrradianceMax, 0.0, 1.0) *
                     derating +
                 day_noise + rng.gaussian(0.0, fast_noise_std));

    // Household consumption: periodic base shape, a day-persistent
    // occupancy level, and sizable appliance jitter. The unpredictable
    // parts keep the net-load channel from revealing pv exactly:
    // load - net_load recovers pv only up to load's own noise.
    const double load =
        profile.load_scale *
        (0.55 + 0.22 * std::sin(2.0 * kPi * (tau - 0.79)) +
         0.08 * std::sin(4.0 * kPi * tau + 0.9) + occupancy +
         0.25 * rng.uniform01());

    Sample s;
    s.features = {load - pv, irradiance, temperature, humidity, wind};
    s.target = pv;
    rows.push_back(std::move(s));
    stamps.push_back(iso_timestamp(day_offset, k));
  }
  return split_by_order(profile.community_id, std::move(rows),
                        std::move(stamps));
}

std::vector<ClientDataset> generate_synthetic(int num_communities,
                                              int samples_per_community,
                                              std::uint64_t seed) {
  if (num_communities < 1) {
    throw std::invalid_argument("generate_synthetic: num_communities must be >= 1");
  }
  if (samples_per_community < 20) {
    throw std::invalid_argument(
        "generate_synthetic: samples_per_community must be >= 20");
  }
  std::vector<ClientDataset> out;
  out.reserve(static_cast<std::size_t>(num_communities));
  for (int i = 0; i < num_communities; ++i) {
    Rng rng = derive_rng(seed, "community", static_cast<std::uint64_t>(i));
    CommunityProfile profile = sample_profile(i, rng);
    out.push_back(generate_community(profile, samples_per_community, rng));
  }
  return out;
}

namespace {

const std::vector<std::string> kCsvColumns = {
    "timestamp", "net_load",   "irradiance", "temperature",
    "humidity",  "wind_speed", "pv"};

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.erase(f.begin());
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.pop_back();
  }
  return out;
}

double parse_number(const std::string& field, std::size_t row,
                    const std::string& column) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw std::runtime_error("csv: row " + std::to_string(row) +
                             ", column '" + column +
                             "': cannot parse number from '" + field + "'");
  }
  return value;
}

}  // namespace

ClientDataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("csv: cannot open '" + path.string() + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("csv: '" + path.string() + "' is empty");
  }
  std::vector<std::string> header = split_fields(line);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (std::find(kCsvColumns.begin(), kCsvColumns.end(), header[i]) ==
        kCsvColumns.end()) {
      throw std::runtime_error("csv: unknown column '" + header[i] + "'");
    }
    if (!index.emplace(header[i], i).second) {
      throw std::runtime_error("csv: duplicate column '" + header[i] + "'");
    }
  }
  for (const auto& col : kCsvColumns) {
    if (!index.count(col)) {
      throw std::runtime_error("csv: missing column '" + col + "'");
    }
  }

  std::vector<Sample> rows;
  std::vector<std::string> stamps;
  std::size_t row_number = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row_number;
    std::vector<std::string> fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error("csv: row " + std::to_string(row_number) +
                               ": expected " + std::to_string(header.size()) +
                               " fields, got " + std::to_string(fields.size()));
    }
    Sample s;
    s.features.resize(kFeatureCount);
    for (int f = 0; f < kFeatureCount; ++f) {
      const std::string& col = kFeatureNames[f];
      s.features[f] = parse_number(fields[index.at(col)], row_number, col);
    }
    s.target = parse_number(fields[index.at("pv")], row_number, "pv");
    stamps.push_back(fields[index.at("timestamp")]);
    rows.push_back(std::move(s));
  }
  if (rows.empty()) {
    throw std::runtime_error("csv: '" + path.string() + "' has no data rows");
  }
  return split_by_order(0, std::move(rows), std::move(stamps));
}

std::vector<ClientDataset> load_community_dir(
    const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) {
    throw std::runtime_error("csv: no *.csv files under '" + dir.string() + "'");
  }
  std::sort(files.begin(), files.end());
  std::vector<ClientDataset> out;
  for (std::size_t i = 0; i < files.size(); ++i) {
    ClientDataset ds = load_csv(files[i]);
    ds.community_id = static_cast<int>(i);
    out.push_back(std::move(ds));
  }
  return out;
}

void write_csv(const ClientDataset& ds, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "timestamp,net_load,irradiance,temperature,humidity,wind_speed,pv\n";
  auto emit = [&out](const std::vector<Sample>& part,
                     const std::vector<std::string>& stamps) {
    for (std::size_t i = 0; i < part.size(); ++i) {
      out << (i < stamps.size() ? stamps[i] : "");
      for (double f : part[i].features) out << ',' << format_double(f);
      out << ',' << format_double(part[i].target) << '\n';
    }
  };
  emit(ds.train, ds.train_timestamps);
  emit(ds.test, ds.test_timestamps);
  write_file_atomic(path, out.str());
}

ClientDataset normalize(ClientDataset ds) {
  if (ds.train.empty()) {
    throw std::invalid_argument("normalize: train split is empty");
  }
  const std::size_t width = ds.train.front().features.size();
  std::vector<FeatureRange> ranges(width);
  for (std::size_t f = 0; f < width; ++f) {
    double lo = ds.train.front().features[f];
    double hi = lo;
    for (const Sample& s : ds.train) {
      lo = std::min(lo, s.features[f]);
      hi = std::max(hi, s.features[f]);
    }
    ranges[f] = {lo, hi};
  }
  auto apply = [&ranges, width](std::vector<Sample>& part) {
    for (Sample& s : part) {
      for (std::size_t f = 0; f < width; ++f) {
        const auto& r = ranges[f];
        s.features[f] = r.min < r.max ? (s.features[f] - r.min) / (r.max - r.min)
                                      : 0.0;
      }
    }
  };
  apply(ds.train);
  apply(ds.test);
  ds.normalization = std::move(ranges);
  return ds;
}

}  // namespace fedmeter
