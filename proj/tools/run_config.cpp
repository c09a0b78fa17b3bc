/*
 * Copyright 2026 The CausalNet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <type_traits>

#include "causalnet/error.hpp"

namespace causalnet::cli {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Reads typed values out of one JSON object and remembers which keys it saw.
class SectionReader {
 public:
  SectionReader(const json& doc, std::string section) : section_(std::move(section)) {
    if (!doc.contains(section_)) return;
    obj_ = &doc.at(section_);
    if (!obj_->is_object()) fail("", "must be an object");
  }

  void read(const char* key, std::size_t& dst) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) fail(key, "must be a non-negative integer");
      dst = v->get<std::size_t>();
    }
  }
  void read(const char* key, double& dst) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(key, "must be a number");
      dst = v->get<double>();
    }
  }
  void read(const char* key, bool& dst) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(key, "must be true or false");
      dst = v->get<bool>();
    }
  }
  void read(const char* key, std::string& dst) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(key, "must be a string");
      dst = v->get<std::string>();
    }
  }
  void read(const char* key, std::array<std::size_t, kScaleCount>& dst) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != kScaleCount) fail(key, "must be an array of 4 non-negative integers");
      for (std::size_t i = 0; i < kScaleCount; ++i) {
        if (!(*v)[i].is_number_unsigned()) fail(key, "must be an array of 4 non-negative integers");
        dst[i] = (*v)[i].get<std::size_t>();
      }
    }
  }
  void read(const char* key, Variant& dst) {
    std::string name = variant_name(dst);
    read(key, name);
    dst = variant_from_name(name);
  }
  void read(const char* key, std::vector<Variant>& dst) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(key, "must be an array of variant names");
      dst.clear();
      for (const auto& item : *v) {
        if (!item.is_string()) fail(key, "must be an array of variant names");
        dst.push_back(variant_from_name(item.get<std::string>()));
      }
    }
  }

  // Rejects keys that no read() call asked for.
  void finish() const {
    if (!obj_) return;
    for (const auto& [key, value] : obj_->items()) {
      if (!seen_.count(key)) throw_error(ErrorKind::Config, "unknown config key '" + section_ + "." + key + "'");
    }
  }

 private:
  const json* find(const char* key) {
    seen_.insert(key);
    if (!obj_ || !obj_->contains(key)) return nullptr;
    return &obj_->at(key);
  }
  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw_error(ErrorKind::Config, "config key '" + section_ + (key.empty() ? "" : "." + key) + "' " + what);
  }

  std::string section_;
  const json* obj_ = nullptr;
  std::set<std::string> seen_;
};

static_assert(std::is_same_v<std::uint64_t, std::size_t>, "seeds are read through the size_t overload");

const std::set<std::string> kSections{"granger", "model", "train", "synth", "data", "paths"};

}  // namespace

void RunConfig::validate() const {
  granger.validate();
  ModelConfig m = model;
  if (m.airports == 0) m.airports = 1;
  m.validate();
  train.validate();
  synth.validate();
  if (repetitions < 1) throw_error(ErrorKind::Config, "train.repetitions must be at least 1");
  if (variants.empty()) throw_error(ErrorKind::Config, "train.variants must not be empty");
  if (!(data.cancellation_minutes >= 0.0) || !std::isfinite(data.cancellation_minutes)) {
    throw_error(ErrorKind::Config, "data.cancellation_minutes must be finite and >= 0");
  }
  if (!(data.outlier_quantile > 0.0 && data.outlier_quantile < 1.0)) {
    throw_error(ErrorKind::Config, "data.outlier_quantile must lie in (0, 1)");
  }
  const SplitFractions& s = data.split;
  if (!(s.train > 0.0 && s.validation > 0.0 && s.test > 0.0) ||
      std::fabs(s.train + s.validation + s.test - 1.0) > 1e-9) {
    throw_error(ErrorKind::Config, "data split fractions must be positive and sum to 1");
  }
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  ordered_json doc;
  doc["granger"] = {{"lag", c.granger.lag},
                    {"significance", c.granger.significance},
                    {"window_hours", c.granger.window_hours},
                    {"difference_interval", c.granger.difference_interval},
                    {"cadence_hours", c.granger.cadence_hours},
                    {"threads", c.granger.threads}};
  doc["model"] = {{"airports", c.model.airports},   {"input_dim", c.model.input_dim},
                  {"hidden", c.model.hidden},       {"embedding", c.model.embedding},
                  {"hops", c.model.hops},           {"input_steps", c.model.input_steps},
                  {"horizon", c.model.horizon},     {"alpha", c.model.alpha},
                  {"beta", c.model.beta},           {"variant", variant_name(c.model.variant)}};
  std::vector<std::string> variants;
  for (Variant v : c.variants) variants.emplace_back(variant_name(v));
  doc["train"] = {{"learning_rate", c.train.learning_rate},
                  {"decay", c.train.decay},
                  {"decay_every", c.train.decay_every},
                  {"max_epochs", c.train.max_epochs},
                  {"batch_size", c.train.batch_size},
                  {"micro_batch", c.train.micro_batch},
                  {"patience", c.train.patience},
                  {"seed", c.train.seed},
                  {"repetitions", c.repetitions},
                  {"variants", variants}};
  const SynthConfig& s = c.synth;
  doc["synth"] = {{"airports", s.airports},
                  {"hours", s.hours},
                  {"edge_density", s.edge_density},
                  {"weight_min", s.weight_min},
                  {"weight_max", s.weight_max},
                  {"lag_min", s.lag_min},
                  {"lag_max", s.lag_max},
                  {"base_min", s.base_min},
                  {"base_max", s.base_max},
                  {"daily_amplitude", s.daily_amplitude},
                  {"weekly_amplitude", s.weekly_amplitude},
                  {"noise_std", s.noise_std},
                  {"spike_rate", s.spike_rate},
                  {"spike_magnitude", s.spike_magnitude},
                  {"receivers", s.receivers},
                  {"auto_scale", s.auto_scale},
                  {"burn_in", s.burn_in},
                  {"seed", s.seed}};
  doc["data"] = {{"cancellation_minutes", c.data.cancellation_minutes},
                 {"outlier_quantile", c.data.outlier_quantile},
                 {"train_fraction", c.data.split.train},
                 {"validation_fraction", c.data.split.validation},
                 {"test_fraction", c.data.split.test},
                 {"geo_sigma_km", c.data.geo_sigma_km},
                 {"geo_cutoff_km", c.data.geo_cutoff_km}};
  const PathsConfig& p = c.paths;
  doc["paths"] = {{"flights", p.flights},         {"delays", p.delays},
                  {"mask", p.mask},               {"coordinates", p.coordinates},
                  {"ground_truth", p.ground_truth}, {"checkpoint", p.checkpoint},
                  {"predictions", p.predictions}, {"truth", p.truth},
                  {"out_dir", p.out_dir}};
  return doc;
}

RunConfig from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw_error(ErrorKind::Config, "config document must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!kSections.count(key)) throw_error(ErrorKind::Config, "unknown config section '" + key + "'");
  }
  RunConfig c;
  {
    SectionReader r(doc, "granger");
    r.read("lag", c.granger.lag);
    r.read("significance", c.granger.significance);
    r.read("window_hours", c.granger.window_hours);
    r.read("difference_interval", c.granger.difference_interval);
    r.read("cadence_hours", c.granger.cadence_hours);
    r.read("threads", c.granger.threads);
    r.finish();
  }
  {
    SectionReader r(doc, "model");
    r.read("airports", c.model.airports);
    r.read("input_dim", c.model.input_dim);
    r.read("hidden", c.model.hidden);
    r.read("embedding", c.model.embedding);
    r.read("hops", c.model.hops);
    r.read("input_steps", c.model.input_steps);
    r.read("horizon", c.model.horizon);
    r.read("alpha", c.model.alpha);
    r.read("beta", c.model.beta);
    r.read("variant", c.model.variant);
    r.finish();
  }
  {
    SectionReader r(doc, "train");
    r.read("learning_rate", c.train.learning_rate);
    r.read("decay", c.train.decay);
    r.read("decay_every", c.train.decay_every);
    r.read("max_epochs", c.train.max_epochs);
    r.read("batch_size", c.train.batch_size);
    r.read("micro_batch", c.train.micro_batch);
    r.read("patience", c.train.patience);
    r.read("seed", c.train.seed);
    r.read("repetitions", c.repetitions);
    r.read("variants", c.variants);
    r.finish();
  }
  {
    SynthConfig& s = c.synth;
    SectionReader r(doc, "synth");
    r.read("airports", s.airports);
    r.read("hours", s.hours);
    r.read("edge_density", s.edge_density);
    r.read("weight_min", s.weight_min);
    r.read("weight_max", s.weight_max);
    r.read("lag_min", s.lag_min);
    r.read("lag_max", s.lag_max);
    r.read("base_min", s.base_min);
    r.read("base_max", s.base_max);
    r.read("daily_amplitude", s.daily_amplitude);
    r.read("weekly_amplitude", s.weekly_amplitude);
    r.read("noise_std", s.noise_std);
    r.read("spike_rate", s.spike_rate);
    r.read("spike_magnitude", s.spike_magnitude);
    r.read("receivers", s.receivers);
    r.read("auto_scale", s.auto_scale);
    r.read("burn_in", s.burn_in);
    r.read("seed", s.seed);
    r.finish();
  }
  {
    SectionReader r(doc, "data");
    r.read("cancellation_minutes", c.data.cancellation_minutes);
    r.read("outlier_quantile", c.data.outlier_quantile);
    r.read("train_fraction", c.data.split.train);
    r.read("validation_fraction", c.data.split.validation);
    r.read("test_fraction", c.data.split.test);
    r.read("geo_sigma_km", c.data.geo_sigma_km);
    r.read("geo_cutoff_km", c.data.geo_cutoff_km);
    r.finish();
  }
  {
    PathsConfig& p = c.paths;
    SectionReader r(doc, "paths");
    r.read("flights", p.flights);
    r.read("delays", p.delays);
    r.read("mask", p.mask);
    r.read("coordinates", p.coordinates);
    r.read("ground_truth", p.ground_truth);
    r.read("checkpoint", p.checkpoint);
    r.read("predictions", p.predictions);
    r.read("truth", p.truth);
    r.read("out_dir", p.out_dir);
    r.finish();
  }
  c.validate();
  return c;
}

nlohmann::json read_config_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorKind::Io, "cannot open config file: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw_error(ErrorKind::Config, "malformed config file " + path + ": " + e.what());
  }
}

void apply_override(nlohmann::json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq || dot == 0 || dot + 1 == eq) {
    throw_error(ErrorKind::Config, "override must look like section.key=value, got '" + std::string(assignment) + "'");
  }
  const std::string section(assignment.substr(0, dot));
  const std::string key(assignment.substr(dot + 1, eq - dot - 1));
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  if (!doc.is_object()) doc = json::object();
  if (!doc.contains(section)) doc[section] = json::object();
  if (!doc[section].is_object()) throw_error(ErrorKind::Config, "config section '" + section + "' is not an object");
  doc[section][key] = std::move(value);
}

}  // namespace causalnet::cli
