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


#ifndef CAUSALNET_CHECKPOINT_HPP
#define CAUSALNET_CHECKPOINT_HPP

#include <filesystem>

#include "causalnet/model.hpp"

namespace causalnet {

struct Checkpoint {
  ModelConfig config;
  ParamSet params;
};

// Binary little-endian file: magic "CAUSALNT", format version, the model
// configuration, then each parameter as name, shape and row-major float64.
void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config, const ParamSet& params);

// Validates names and shapes against the stored configuration.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace causalnet

#endif  // CAUSALNET_CHECKPOINT_HPP
