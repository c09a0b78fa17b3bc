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


#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "causalnet/error.hpp"
#include "commands.hpp"

namespace {

using namespace causalnet;
using namespace causalnet::cli;

struct CommonOptions {
  std::string config;
  std::vector<std::string> overrides;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("-c,--config", opt.config, "JSON run configuration (defaults when omitted)");
  cmd->add_option("--set", opt.overrides, "Override a config key: section.key=value (repeatable)");
  cmd->add_option("-o,--out", opt.out_dir, "Output directory (overrides paths.out_dir)");
}

RunConfig load(const CommonOptions& opt) {
  nlohmann::json doc = opt.config.empty() ? nlohmann::json::object() : read_config_document(opt.config);
  for (const auto& o : opt.overrides) apply_override(doc, o);
  if (!opt.out_dir.empty()) apply_override(doc, "paths.out_dir=" + nlohmann::json(opt.out_dir).dump());
  return from_json(doc);
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return kExitUsage;
    case ErrorKind::Io: return kExitIo;
    case ErrorKind::Input:
    case ErrorKind::Shape: return kExitInput;
    case ErrorKind::Numeric: return kExitNumeric;
  }
  return kExitInput;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CausalNet flight-delay forecasting pipeline"};
  app.require_subcommand(1);
  CommonOptions common;

  app.add_subcommand("defaults", "Print the default configuration");
  const std::vector<std::pair<const char*, const char*>> commands{
      {"synth", "Generate a synthetic delay dataset with planted propagation"},
      {"ingest", "Bin flight records into an hourly delay matrix"},
      {"graphs", "Build multi-scale Granger causality graphs"},
      {"train", "Train one model and evaluate it on the test split"},
      {"eval", "Evaluate a checkpoint, or a predictions file against truth"},
      {"ablate", "Train every configured variant over several seeds"},
      {"gradcheck", "Finite-difference check of the model gradient"},
      {"analyze", "Correction distances and adaptive-weight scores"}};
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), common);

  GradCheckOptions grad;
  CLI::App* gc = app.get_subcommand("gradcheck");
  gc->add_option("--airports", grad.airports, "Airports in the toy model");
  gc->add_option("--input-steps", grad.input_steps, "Encoder steps r");
  gc->add_option("--horizon", grad.horizon, "Decoder steps m");
  gc->add_option("--hidden", grad.hidden, "Hidden width W");
  gc->add_option("--batch", grad.batch, "Samples in the toy batch");
  gc->add_option("--eps", grad.eps, "Finite-difference step");
  gc->add_option("--tolerance", grad.tolerance, "Largest accepted relative error");
  gc->add_option("--seed", grad.seed, "Seed for inputs and parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "defaults") return cmd_defaults(std::cout);
    const RunConfig cfg = load(common);
    if (name == "synth") return cmd_synth(cfg, std::cout);
    if (name == "ingest") return cmd_ingest(cfg, std::cout);
    if (name == "graphs") return cmd_graphs(cfg, std::cout);
    if (name == "train") return cmd_train(cfg, std::cout);
    if (name == "eval") return cmd_eval(cfg, std::cout);
    if (name == "ablate") return cmd_ablate(cfg, std::cout);
    if (name == "gradcheck") return cmd_gradcheck(cfg, grad, std::cout);
    if (name == "analyze") return cmd_analyze(cfg, std::cout);
  } catch (const Error& e) {
    std::cerr << "error[" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error[input]: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error[io]: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}
