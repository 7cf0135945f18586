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

#include "fedmeter/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fedmeter/util.hpp"

namespace fedmeter {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) parts.push_back(trim(item));
  if (!value.empty() && value.back() == ',') parts.push_back("");
  return parts;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
  throw std::invalid_argument("config key '" + key + "': cannot parse '" +
                              value + "' (" + expected + ")");
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value, "expected true or false");
}

long long parse_ll(const std::string& key, const std::string& value) {
  long long out = 0;
  const char* first = value.data();
  const char* last = first + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) bad_value(key, value, "expected an integer");
  return out;
}

int parse_int(const std::string& key, const std::string& value) {
  return static_cast<int>(parse_ll(key, value));
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const char* first = value.data();
  const char* last = first + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) {
    bad_value(key, value, "expected an unsigned integer");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* first = value.data();
  const char* last = first + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) {
    bad_value(key, value, "expected a number ('inf' allowed)");
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& key,
                                      const std::string& value) {
  std::vector<double> out;
  for (const std::string& item : split_list(value)) {
    out.push_back(parse_double(key, item));
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& key,
                                const std::string& value) {
  std::vector<int> out;
  for (const std::string& item : split_list(value)) {
    out.push_back(parse_int(key, item));
  }
  return out;
}

DataSource parse_data_source(const std::string& key, const std::string& value) {
  if (value == "synthetic") return DataSource::synthetic;
  if (value == "csv_dir") return DataSource::csv_dir;
  bad_value(key, value, "expected synthetic or csv_dir");
}

DropoutMode parse_dropout_mode(const std::string& key,
                               const std::string& value) {
  if (value == "uniform_count") return DropoutMode::uniform_count;
  if (value == "fixed_count") return DropoutMode::fixed_count;
  bad_value(key, value, "expected uniform_count or fixed_count");
}

BudgetChoice parse_budget_choice(const std::string& key,
                                 const std::string& value) {
  if (value == "auto") return BudgetChoice::automatic;
  if (value == "fixed") return BudgetChoice::fixed;
  if (value == "dynamic") return BudgetChoice::dynamic;
  bad_value(key, value, "expected auto, fixed or dynamic");
}

std::string join_doubles(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += format_double(values[i]);
  }
  return out;
}

std::string join_ints(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::string join_methods(const std::vector<Method>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += method_name(values[i]);
  }
  return out;
}

}  // namespace

const char* data_source_name(DataSource s) {
  switch (s) {
    case DataSource::synthetic:
      return "synthetic";
    case DataSource::csv_dir:
      return "csv_dir";
  }
  throw std::invalid_argument("data_source_name: unknown value");
}

const char* dropout_mode_name(DropoutMode m) {
  switch (m) {
    case DropoutMode::uniform_count:
      return "uniform_count";
    case DropoutMode::fixed_count:
      return "fixed_count";
  }
  throw std::invalid_argument("dropout_mode_name: unknown value");
}

const char* budget_choice_name(BudgetChoice c) {
  switch (c) {
    case BudgetChoice::automatic:
      return "auto";
    case BudgetChoice::fixed:
      return "fixed";
    case BudgetChoice::dynamic:
      return "dynamic";
  }
  throw std::invalid_argument("budget_choice_name: unknown value");
}

void ExperimentConfig::apply(const std::string& key, const std::string& value) {
  if (key == "batch_size") {
    batch_size = parse_int(key, value);
  } else if (key == "budget_strategy") {
    budget_strategy = parse_budget_choice(key, value);
  } else if (key == "clip_threshold") {
    clip_threshold = parse_double(key, value);
  } else if (key == "csv_dir") {
    csv_dir = value;
  } else if (key == "data_source") {
    data_source = parse_data_source(key, value);
  } else if (key == "dp_enabled") {
    dp_enabled = parse_bool(key, value);
  } else if (key == "dropout_mode") {
    dropout_mode = parse_dropout_mode(key, value);
  } else if (key == "dropout_ratio") {
    dropout_ratio = parse_double(key, value);
  } else if (key == "dump_similarity") {
    dump_similarity = parse_bool(key, value);
  } else if (key == "epochs_local") {
    epochs_local = parse_int(key, value);
  } else if (key == "epochs_personalized") {
    epochs_personalized = parse_int(key, value);
  } else if (key == "epsilon_initial") {
    epsilon_initial = parse_double(key, value);
  } else if (key == "lr_local") {
    lr_local = parse_double(key, value);
  } else if (key == "lr_personalized") {
    lr_personalized = parse_double(key, value);
  } else if (key == "master_seed") {
    master_seed = parse_u64(key, value);
  } else if (key == "method") {
    method = parse_method(value);
  } else if (key == "methods") {
    methods.clear();
    for (const std::string& item : split_list(value)) {
      methods.push_back(parse_method(item));
    }
  } else if (key == "num_communities") {
    num_communities = parse_int(key, value);
  } else if (key == "output_dir") {
    output_dir = value;
  } else if (key == "reg_factor") {
    reg_factor = parse_double(key, value);
  } else if (key == "rounds") {
    rounds = parse_int(key, value);
  } else if (key == "samples_per_community") {
    samples_per_community = parse_int(key, value);
  } else if (key == "sweep_dropout_ratio") {
    sweep_dropout_ratio = parse_double_list(key, value);
  } else if (key == "sweep_epochs_local") {
    sweep_epochs_local = parse_int_list(key, value);
  } else if (key == "sweep_epsilon") {
    sweep_epsilon = parse_double_list(key, value);
  } else if (key == "sweep_reg_factor") {
    sweep_reg_factor = parse_double_list(key, value);
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

void ExperimentConfig::finalize() {
  if (methods.empty()) methods = {method};
  if (sweep_dropout_ratio.empty()) sweep_dropout_ratio = {dropout_ratio};
  if (sweep_epsilon.empty()) sweep_epsilon = {epsilon_initial};
  if (sweep_reg_factor.empty()) sweep_reg_factor = {reg_factor};
  if (sweep_epochs_local.empty()) sweep_epochs_local = {epochs_local};
  if (const char* env = std::getenv("FEDMETER_SEED")) {
    master_seed = parse_u64("FEDMETER_SEED", env);
  }
}

std::vector<Diagnostic> ExperimentConfig::validate() const {
  std::vector<Diagnostic> out;
  const auto add = [&out](const std::string& key, const std::string& message) {
    out.push_back({key, message});
  };

  if (num_communities < 1) add("num_communities", "must be >= 1");
  if (data_source == DataSource::synthetic && samples_per_community < 2) {
    add("samples_per_community", "must be >= 2 (train and test both need data)");
  }
  if (data_source == DataSource::csv_dir && csv_dir.empty()) {
    add("csv_dir", "required when data_source=csv_dir");
  }
  if (data_source == DataSource::synthetic && !csv_dir.empty()) {
    add("csv_dir", "set but unused; data_source is synthetic");
  }
  if (output_dir.empty()) add("output_dir", "must not be empty");

  if (rounds < 1) add("rounds", "must be >= 1");
  if (epochs_personalized < 1) add("epochs_personalized", "must be >= 1");
  if (epochs_local < 1) add("epochs_local", "must be >= 1");
  if (!(lr_personalized > 0.0) || !std::isfinite(lr_personalized)) {
    add("lr_personalized", "must be finite and > 0");
  }
  if (!(lr_local > 0.0) || !std::isfinite(lr_local)) {
    add("lr_local", "must be finite and > 0");
  }
  if (!(reg_factor >= 0.0) || !std::isfinite(reg_factor)) {
    add("reg_factor", "must be finite and >= 0");
  }
  if (batch_size < 1) add("batch_size", "must be >= 1");
  if (!(dropout_ratio >= 0.0 && dropout_ratio <= 1.0)) {
    add("dropout_ratio", "must be in [0, 1]");
  }
  if (dp_enabled) {
    if (!(clip_threshold > 0.0) || !std::isfinite(clip_threshold)) {
      add("clip_threshold", "must be finite and > 0 when dp_enabled");
    }
    if (!(epsilon_initial > 0.0)) {
      add("epsilon_initial", "must be > 0 when dp_enabled");
    }
  }

  for (std::size_t i = 0; i < sweep_dropout_ratio.size(); ++i) {
    const double v = sweep_dropout_ratio[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      add("sweep_dropout_ratio",
          "value " + std::to_string(i + 1) + " must be in [0, 1]");
    }
  }
  if (dp_enabled) {
    for (std::size_t i = 0; i < sweep_epsilon.size(); ++i) {
      if (!(sweep_epsilon[i] > 0.0)) {
        add("sweep_epsilon", "value " + std::to_string(i + 1) + " must be > 0");
      }
    }
  }
  for (std::size_t i = 0; i < sweep_reg_factor.size(); ++i) {
    const double v = sweep_reg_factor[i];
    if (!(v >= 0.0) || !std::isfinite(v)) {
      add("sweep_reg_factor",
          "value " + std::to_string(i + 1) + " must be finite and >= 0");
    }
  }
  for (std::size_t i = 0; i < sweep_epochs_local.size(); ++i) {
    if (sweep_epochs_local[i] < 1) {
      add("sweep_epochs_local",
          "value " + std::to_string(i + 1) + " must be >= 1");
    }
  }
  return out;
}

std::string ExperimentConfig::resolve_to_text() const {
  std::ostringstream out;
  out << "batch_size=" << batch_size << '\n';
  out << "budget_strategy=" << budget_choice_name(budget_strategy) << '\n';
  out << "clip_threshold=" << format_double(clip_threshold) << '\n';
  out << "csv_dir=" << csv_dir << '\n';
  out << "data_source=" << data_source_name(data_source) << '\n';
  out << "dp_enabled=" << (dp_enabled ? "true" : "false") << '\n';
  out << "dropout_mode=" << dropout_mode_name(dropout_mode) << '\n';
  out << "dropout_ratio=" << format_double(dropout_ratio) << '\n';
  out << "dump_similarity=" << (dump_similarity ? "true" : "false") << '\n';
  out << "epochs_local=" << epochs_local << '\n';
  out << "epochs_personalized=" << epochs_personalized << '\n';
  out << "epsilon_initial=" << format_double(epsilon_initial) << '\n';
  out << "lr_local=" << format_double(lr_local) << '\n';
  out << "lr_personalized=" << format_double(lr_personalized) << '\n';
  out << "master_seed=" << master_seed << '\n';
  out << "method=" << method_name(method) << '\n';
  out << "methods=" << join_methods(methods) << '\n';
  out << "num_communities=" << num_communities << '\n';
  out << "output_dir=" << output_dir << '\n';
  out << "reg_factor=" << format_double(reg_factor) << '\n';
  out << "rounds=" << rounds << '\n';
  out << "samples_per_community=" << samples_per_community << '\n';
  out << "sweep_dropout_ratio=" << join_doubles(sweep_dropout_ratio) << '\n';
  out << "sweep_epochs_local=" << join_ints(sweep_epochs_local) << '\n';
  out << "sweep_epsilon=" << join_doubles(sweep_epsilon) << '\n';
  out << "sweep_reg_factor=" << join_doubles(sweep_reg_factor) << '\n';
  return out.str();
}

TrainConfig ExperimentConfig::train_config(Method m, double n_c, double epsilon,
                                           double mu, int epochs) const {
  TrainConfig t;
  t.rounds = rounds;
  t.epochs_personalized = epochs_personalized;
  t.epochs_local = epochs;
  t.lr_personalized = lr_personalized;
  t.lr_local = lr_local;
  t.reg_factor = mu;
  t.batch_size = batch_size;
  t.method = m;
  t.dp_enabled = dp_enabled;
  t.clip_threshold = clip_threshold;
  t.epsilon_initial = epsilon;
  t.dropout_ratio = n_c;
  t.dropout_mode = dropout_mode;
  switch (budget_strategy) {
    case BudgetChoice::automatic:
      t.budget_strategy = m == Method::A4 ? BudgetStrategy::dynamic
                                          : BudgetStrategy::fixed;
      break;
    case BudgetChoice::fixed:
      t.budget_strategy = BudgetStrategy::fixed;
      break;
    case BudgetChoice::dynamic:
      t.budget_strategy = BudgetStrategy::dynamic;
      break;
  }
  t.master_seed = master_seed;
  return t;
}

ExperimentConfig ExperimentConfig::preset(const std::string& name) {
  ExperimentConfig cfg;
  if (name == "heterogeneity") {
    // Four unlike communities, full availability: personalization vs. one
    // shared model vs. no sharing at all.
    cfg.num_communities = 4;
    cfg.samples_per_community = 2000;
    cfg.methods = {Method::A1, Method::A2, Method::A4};
    cfg.dropout_ratio = 0.0;
    cfg.dp_enabled = false;
    cfg.output_dir = "out/heterogeneity";
  } else if (name == "dropout") {
    // Many communities under increasingly frequent upload failures. The
    // failure count is held at the ratio's full value each round so the
    // three ratios probe genuinely different participation levels.
    cfg.num_communities = 16;
    cfg.samples_per_community = 2000;
    cfg.methods = {Method::A2, Method::A4};
    cfg.sweep_dropout_ratio = {0.25, 0.5, 0.75};
    cfg.dropout_mode = DropoutMode::fixed_count;
    cfg.dp_enabled = false;
    cfg.output_dir = "out/dropout";
  } else if (name == "privacy") {
    // Fixed vs. dynamic budget under failures at several budget levels.
    cfg.num_communities = 8;
    cfg.samples_per_community = 1500;
    cfg.methods = {Method::A3, Method::A4};
    cfg.dropout_ratio = 0.5;
    cfg.dp_enabled = true;
    cfg.clip_threshold = 1.0;
    cfg.sweep_epsilon = {0.1, 0.5, 1.0};
    cfg.output_dir = "out/privacy";
  } else if (name == "budget_sweep") {
    // Noise level from none to overwhelming, no failures. Small datasets
    // raise the per-record sensitivity, so each budget step moves the
    // noise scale by a clearly visible amount.
    cfg.num_communities = 4;
    cfg.samples_per_community = 400;
    cfg.methods = {Method::A4};
    cfg.dropout_ratio = 0.0;
    cfg.dp_enabled = true;
    cfg.clip_threshold = 3.0;
    cfg.sweep_epsilon = {std::numeric_limits<double>::infinity(), 1.0, 0.1,
                         0.01, 0.001};
    cfg.output_dir = "out/budget_sweep";
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  return cfg;
}

const std::vector<std::string>& ExperimentConfig::preset_names() {
  static const std::vector<std::string> names = {"budget_sweep", "dropout",
                                                 "heterogeneity", "privacy"};
  return names;
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key=value, got '" + line + "'");
    }
    cfg.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace fedmeter
