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


#ifndef CAUSALNET_TOOLS_COMMANDS_HPP
#define CAUSALNET_TOOLS_COMMANDS_HPP

#include <cstdint>
#include <ostream>

#include "run_config.hpp"

namespace causalnet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitInput = 4;
inline constexpr int kExitNumeric = 5;
inline constexpr int kExitGradCheck = 6;

struct GradCheckOptions {
  std::size_t airports = 3;
  std::size_t input_steps = 2;
  std::size_t horizon = 2;
  std::size_t hidden = 8;
  std::size_t batch = 1;
  double eps = 1e-6;
  double tolerance = 1e-4;
  std::uint64_t seed = 1;
};

// Each command writes its artifacts under cfg.paths.out_dir, prints one JSON
// summary line to `out`, and returns the process exit code.
int cmd_defaults(std::ostream& out);
int cmd_synth(const RunConfig& cfg, std::ostream& out);
int cmd_ingest(const RunConfig& cfg, std::ostream& out);
int cmd_graphs(const RunConfig& cfg, std::ostream& out);
int cmd_train(const RunConfig& cfg, std::ostream& out);
int cmd_eval(const RunConfig& cfg, std::ostream& out);
int cmd_ablate(const RunConfig& cfg, std::ostream& out);
int cmd_gradcheck(const RunConfig& cfg, const GradCheckOptions& opt, std::ostream& out);
int cmd_analyze(const RunConfig& cfg, std::ostream& out);

}  // namespace causalnet::cli

#endif  // CAUSALNET_TOOLS_COMMANDS_HPP
