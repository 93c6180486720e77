// Copyright (c) 2026 The sampar Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sampar/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cstdio>
#include <functional>
#include <fstream>
#include <sstream>
#include <type_traits>

#include "sampar/errors.hpp"

namespace sampar {

std::string to_string(DataTask task) {
  switch (task) {
    case DataTask::series: return "series";
    case DataTask::csv: return "csv";
    case DataTask::images: return "images";
  }
  return "?";
}

DataTask parse_data_task(const std::string& text) {
  for (DataTask t : {DataTask::series, DataTask::csv, DataTask::images}) {
    if (to_string(t) == text) return t;
  }
  throw ConfigError("unknown data task '" + text + "' (expected series|csv|images)");
}

void ExperimentConfig::validate() const {
  train.validate();
  if (!(timeout_seconds > 0.0)) throw ConfigError("run.timeout_seconds must be positive");
  if (data.task == DataTask::images && !train.loss.classification()) {
    throw ConfigError("the images task needs a classification loss");
  }
  if (data.task != DataTask::images && train.loss.classification()) {
    throw ConfigError("series and csv tasks need a regression loss");
  }
  if (data.task == DataTask::csv && data.csv_path.empty()) throw ConfigError("data.csv_path is required for task csv");
  for (int p : bench.workers) {
    if (p < 1) throw ConfigError("bench.workers entries must be >= 1");
  }
  if (bench.repeats < 1 || bench.epochs < 1) throw ConfigError("bench.repeats and bench.epochs must be >= 1");
}

// ---------------------------------------------------------------------------
// Value codecs

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
T parse_integer(const std::string& key, const std::string& text) {
  T value{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + text + "'");
  }
  return value;
}

double parse_real(const std::string& key, const std::string& text) {
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + text + "'");
  }
  return value;
}

bool parse_flag(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("config key '" + key + "': expected true|false, got '" + text + "'");
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    out.push_back(first == std::string::npos ? std::string{} : item.substr(first, last - first + 1));
  }
  return out;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  for (const std::string& item : split(text, ',')) {
    if constexpr (std::is_floating_point_v<T>) {
      out.push_back(parse_real(key, item));
    } else {
      out.push_back(parse_integer<T>(key, item));
    }
  }
  return out;
}

template <class T>
std::string format_list(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

// amplitude:period:phase,amplitude:period:phase,...
std::vector<SeriesComponent> parse_components(const std::string& key, const std::string& text) {
  std::vector<SeriesComponent> out;
  for (const std::string& item : split(text, ',')) {
    const auto f = split(item, ':');
    if (f.size() != 3) {
      throw ConfigError("config key '" + key + "': expected amplitude:period:phase, got '" + item + "'");
    }
    out.push_back({parse_real(key, f[0]), parse_real(key, f[1]), parse_real(key, f[2])});
  }
  return out;
}

std::string format_components(const std::vector<SeriesComponent>& components) {
  std::string out;
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (i) out += ",";
    out += format_double(components[i].amplitude) + ":" + format_double(components[i].period) + ":" +
           format_double(components[i].phase);
  }
  return out;
}

char parse_delimiter(const std::string& key, const std::string& text) {
  if (text == "tab") return '\t';
  if (text.size() != 1) throw ConfigError("config key '" + key + "': expected one character or 'tab'");
  return text[0];
}

std::string format_delimiter(char c) { return c == '\t' ? "tab" : std::string(1, c); }

struct Key {
  std::string name;
  bool train_field;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

// Type-directed codecs for the typed_key factory.
template <class T>
T decode(const std::string& key, const std::string& text) {
  if constexpr (std::is_same_v<T, bool>) {
    return parse_flag(key, text);
  } else if constexpr (std::is_same_v<T, std::string>) {
    return text;
  } else if constexpr (std::is_same_v<T, char>) {
    return parse_delimiter(key, text);
  } else if constexpr (std::is_same_v<T, std::vector<SeriesComponent>>) {
    return parse_components(key, text);
  } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
    return parse_list<std::size_t>(key, text);
  } else if constexpr (std::is_same_v<T, std::vector<double>>) {
    return parse_list<double>(key, text);
  } else if constexpr (std::is_same_v<T, std::vector<int>>) {
    return parse_list<int>(key, text);
  } else if constexpr (std::is_floating_point_v<T>) {
    return parse_real(key, text);
  } else {
    return parse_integer<T>(key, text);
  }
}

template <class T>
std::string encode(const T& value) {
  if constexpr (std::is_same_v<T, bool>) {
    return value ? "true" : "false";
  } else if constexpr (std::is_same_v<T, std::string>) {
    return value;
  } else if constexpr (std::is_same_v<T, char>) {
    return format_delimiter(value);
  } else if constexpr (std::is_same_v<T, std::vector<SeriesComponent>>) {
    return format_components(value);
  } else if constexpr (std::is_same_v<T, std::vector<std::size_t>> || std::is_same_v<T, std::vector<double>> ||
                       std::is_same_v<T, std::vector<int>>) {
    return format_list(value);
  } else if constexpr (std::is_floating_point_v<T>) {
    return format_double(value);
  } else {
    return std::to_string(value);
  }
}

// `access` maps a config to a reference to the field.
template <class Access>
Key typed_key(std::string name, bool train, Access access) {
  using T = std::remove_reference_t<decltype(access(std::declval<ExperimentConfig&>()))>;
  return {name, train,
          [access](const ExperimentConfig& c) { return encode<T>(access(const_cast<ExperimentConfig&>(c))); },
          [access, name](ExperimentConfig& c, const std::string& v) { access(c) = decode<T>(name, v); }};
}

template <class Access, class Parse>
Key enum_key(std::string name, bool train, Access access, Parse parse) {
  return {name, train, [access](const ExperimentConfig& c) { return to_string(access(const_cast<ExperimentConfig&>(c))); },
          [access, parse](ExperimentConfig& c, const std::string& v) { access(c) = parse(v); }};
}

#define SAMPAR_FIELD(expr) [](ExperimentConfig& c) -> auto& { return c.expr; }

const std::vector<Key>& schema() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> t;
    // [run]
    t.push_back(enum_key("run.strategy", true, SAMPAR_FIELD(train.strategy), parse_strategy));
    t.push_back(typed_key("run.world_size", true, SAMPAR_FIELD(train.world_size)));
    t.push_back(typed_key("run.samples", true, SAMPAR_FIELD(train.samples)));
    t.push_back(typed_key("run.sample_groups", true, SAMPAR_FIELD(train.sample_groups)));
    t.push_back(typed_key("run.data_groups", true, SAMPAR_FIELD(train.data_groups)));
    t.push_back(typed_key("run.global_batch_size", true, SAMPAR_FIELD(train.global_batch_size)));
    t.push_back(typed_key("run.local_batch_size", true, SAMPAR_FIELD(train.local_batch_size)));
    t.push_back(enum_key("run.batch_mode", true, SAMPAR_FIELD(train.batch_mode), parse_batch_mode));
    t.push_back(typed_key("run.epochs", true, SAMPAR_FIELD(train.epochs)));
    t.push_back(typed_key("run.max_steps", true, SAMPAR_FIELD(train.max_steps)));
    t.push_back(typed_key("run.base_seed", true, SAMPAR_FIELD(train.base_seed)));
    t.push_back(enum_key("run.augmentation_mode", true, SAMPAR_FIELD(train.augmentation_mode),
                         parse_augmentation_mode));
    t.push_back(typed_key("run.eval_samples", true, SAMPAR_FIELD(train.eval_samples)));
    t.push_back(typed_key("run.check_consistency", true, SAMPAR_FIELD(train.check_consistency)));
    t.push_back(enum_key("run.transport", false, SAMPAR_FIELD(transport), parse_transport_kind));
    t.push_back(typed_key("run.port", false, SAMPAR_FIELD(port)));
    t.push_back(typed_key("run.timeout_seconds", false, SAMPAR_FIELD(timeout_seconds)));
    // [model]
    t.push_back(typed_key("model.input_dim", true, SAMPAR_FIELD(train.model.input_dim)));
    t.push_back(typed_key("model.output_dim", true, SAMPAR_FIELD(train.model.output_dim)));
    t.push_back(typed_key("model.hidden", true, SAMPAR_FIELD(train.model.hidden)));
    t.push_back(enum_key("model.activation", true, SAMPAR_FIELD(train.model.activation), parse_activation));
    t.push_back(enum_key("model.method", true, SAMPAR_FIELD(train.model.method), parse_inference_method));
    t.push_back(typed_key("model.sigma_scale", true, SAMPAR_FIELD(train.model.sigma_scale)));
    t.push_back(typed_key("model.dropout_p", true, SAMPAR_FIELD(train.model.dropout_p)));
    t.push_back(typed_key("model.dropout_per_layer", true, SAMPAR_FIELD(train.model.dropout_per_layer)));
    // [loss]
    t.push_back(enum_key("loss.kind", true, SAMPAR_FIELD(train.loss.kind), parse_loss_kind));
    t.push_back(enum_key("loss.aggregation", true, SAMPAR_FIELD(train.loss.aggregation), parse_aggregation));
    t.push_back(enum_key("loss.per_sample", true, SAMPAR_FIELD(train.loss.per_sample), parse_per_sample_loss));
    t.push_back(typed_key("loss.dataset_size", true, SAMPAR_FIELD(train.loss.dataset_size)));
    t.push_back(typed_key("loss.variance_floor", true, SAMPAR_FIELD(train.loss.variance_floor)));
    t.push_back(typed_key("loss.kl_weight", true, SAMPAR_FIELD(train.loss.kl_weight)));
    // [optimizer]
    t.push_back(enum_key("optimizer.kind", true, SAMPAR_FIELD(train.optimizer.kind), parse_optimizer_kind));
    t.push_back(typed_key("optimizer.learning_rate", true, SAMPAR_FIELD(train.optimizer.learning_rate)));
    t.push_back(typed_key("optimizer.beta1", true, SAMPAR_FIELD(train.optimizer.beta1)));
    t.push_back(typed_key("optimizer.beta2", true, SAMPAR_FIELD(train.optimizer.beta2)));
    t.push_back(typed_key("optimizer.epsilon", true, SAMPAR_FIELD(train.optimizer.epsilon)));
    t.push_back(typed_key("optimizer.momentum", true, SAMPAR_FIELD(train.optimizer.momentum)));
    // [augment]
    t.push_back(enum_key("augment.kind", true, SAMPAR_FIELD(train.augmentation.kind), parse_augment_kind));
    t.push_back(typed_key("augment.jitter_scale", true, SAMPAR_FIELD(train.augmentation.jitter_scale)));
    t.push_back(typed_key("augment.max_shift", true, SAMPAR_FIELD(train.augmentation.max_shift)));
    t.push_back(typed_key("augment.flip_prob", true, SAMPAR_FIELD(train.augmentation.flip_prob)));
    t.push_back(typed_key("augment.crop_pad", true, SAMPAR_FIELD(train.augmentation.crop_pad)));
    t.push_back(typed_key("augment.image_side", true, SAMPAR_FIELD(train.augmentation.image_side)));
    // [data]
    t.push_back(enum_key("data.task", false, SAMPAR_FIELD(data.task), parse_data_task));
    t.push_back(typed_key("data.seed", false, SAMPAR_FIELD(data.seed)));
    t.push_back(typed_key("data.length", false, SAMPAR_FIELD(data.length)));
    t.push_back(typed_key("data.components", false, SAMPAR_FIELD(data.components)));
    t.push_back(typed_key("data.noise_std", false, SAMPAR_FIELD(data.noise_std)));
    t.push_back(typed_key("data.csv_path", false, SAMPAR_FIELD(data.csv_path)));
    t.push_back(typed_key("data.csv_column", false, SAMPAR_FIELD(data.csv_column)));
    t.push_back(typed_key("data.csv_delimiter", false, SAMPAR_FIELD(data.csv_delimiter)));
    t.push_back(typed_key("data.history", false, SAMPAR_FIELD(data.window.history)));
    t.push_back(typed_key("data.horizon", false, SAMPAR_FIELD(data.window.horizon)));
    t.push_back(typed_key("data.stride", false, SAMPAR_FIELD(data.window.stride)));
    t.push_back(typed_key("data.validation_fraction", false, SAMPAR_FIELD(data.validation_fraction)));
    t.push_back(typed_key("data.image_side", false, SAMPAR_FIELD(data.images.side)));
    t.push_back(typed_key("data.image_train_count", false, SAMPAR_FIELD(data.images.train_count)));
    t.push_back(typed_key("data.image_validation_count", false, SAMPAR_FIELD(data.images.validation_count)));
    t.push_back(typed_key("data.image_noise_std", false, SAMPAR_FIELD(data.images.noise_std)));
    // [bench]
    t.push_back(typed_key("bench.workers", false, SAMPAR_FIELD(bench.workers)));
    t.push_back(typed_key("bench.samples", false, SAMPAR_FIELD(bench.samples)));
    t.push_back(typed_key("bench.s_per_worker", false, SAMPAR_FIELD(bench.s_per_worker)));
    t.push_back(typed_key("bench.repeats", false, SAMPAR_FIELD(bench.repeats)));
    t.push_back(typed_key("bench.epochs", false, SAMPAR_FIELD(bench.epochs)));
    t.push_back(typed_key("bench.max_steps", false, SAMPAR_FIELD(bench.max_steps)));
    return t;
  }();
  return keys;
}

#undef SAMPAR_FIELD

const Key& find_key(const std::string& name) {
  for (const Key& k : schema()) {
    if (k.name == name) return k;
  }
  throw ConfigError("unknown config key '" + name + "'");
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const Key& k : schema()) out.push_back(k.name);
  return out;
}

std::vector<std::string> train_config_keys() {
  std::vector<std::string> out;
  for (const Key& k : schema()) {
    if (k.train_field) out.push_back(k.name);
  }
  return out;
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  find_key(key).set(cfg, trim(value));
}

std::string get_config_value(const ExperimentConfig& cfg, const std::string& key) { return find_key(key).get(cfg); }

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not of the form key=value");
  set_config_value(cfg, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

ExperimentConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  ExperimentConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("config key '" + section + "' is outside any [section]");
    }
    // Provenance sections written into manifests; not configuration.
    if (section == "engine" || section == "seed_recipe") continue;
    for (const auto& [key, value] : body) set_config_value(cfg, section + "." + key, value.data());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string to_ini(const ExperimentConfig& cfg) {
  std::ostringstream out;
  std::string section;
  for (const Key& k : schema()) {
    const auto dot = k.name.find('.');
    const std::string sec = k.name.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out << "\n";
      out << "[" << sec << "]\n";
      section = sec;
    }
    out << k.name.substr(dot + 1) << " = " << k.get(cfg) << "\n";
  }
  return out.str();
}

}  // namespace sampar
