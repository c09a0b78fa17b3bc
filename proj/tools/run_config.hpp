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


#ifndef CAUSALNET_TOOLS_RUN_CONFIG_HPP
#define CAUSALNET_TOOLS_RUN_CONFIG_HPP

#include <string>
#include <string_view>
#include <vector>

#include "causalnet/delay_ingest.hpp"
#include "causalnet/granger.hpp"
#include "causalnet/model.hpp"
#include "causalnet/synthdata.hpp"
#include "causalnet/trainer.hpp"
#include "json.hpp"

namespace causalnet::cli {

struct DataConfig {
  double cancellation_minutes = kDefaultCancellationMinutes;
  double outlier_quantile = kDefaultOutlierQuantile;
  SplitFractions split;
  double geo_sigma_km = 0.0;   // <= 0: standard deviation of pairwise distances
  double geo_cutoff_km = 0.0;  // <= 0: no cutoff
};

struct PathsConfig {
  std::string flights;
  std::string delays;
  std::string mask;
  std::string coordinates;
  std::string ground_truth;
  std::string checkpoint;
  std::string predictions;
  std::string truth;
  std::string out_dir = "run";
};

struct RunConfig {
  GrangerConfig granger;
  ModelConfig model;  // model.airports = 0 takes the airport count from the data
  TrainConfig train;
  std::size_t repetitions = 5;  // seeds train.seed, train.seed + 1, ...
  std::vector<Variant> variants{Variant::Full, Variant::NoCausal, Variant::NoCorrection, Variant::GruCell,
                                Variant::NoFusion};
  SynthConfig synth;
  DataConfig data;
  PathsConfig paths;

  void validate() const;
};

nlohmann::ordered_json to_json(const RunConfig& cfg);
// Missing keys keep their defaults; unknown keys and mistyped values are errors.
RunConfig from_json(const nlohmann::json& doc);

nlohmann::json read_config_document(const std::string& path);
// Applies `section.key=value`; the value is parsed as JSON, falling back to a string.
void apply_override(nlohmann::json& doc, std::string_view assignment);

}  // namespace causalnet::cli

#endif  // CAUSALNET_TOOLS_RUN_CONFIG_HPP
