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


#ifndef CAUSALNET_TRAINER_HPP
#define CAUSALNET_TRAINER_HPP

#include <Eigen/Core>
#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "causalnet/delay_ingest.hpp"
#include "causalnet/granger.hpp"
#include "causalnet/model.hpp"

namespace causalnet {

struct TrainConfig {
  double learning_rate = 1e-4;
  double decay = 0.6;
  std::size_t decay_every = 5;  // epochs
  std::size_t max_epochs = 150;
  std::size_t batch_size = 64;
  // Samples per forward/backward pass; gradients of a batch are accumulated
  // over its micro-batches in order, so results do not depend on this value
  // beyond floating-point summation order.
  std::size_t micro_batch = 16;
  std::size_t patience = 15;
  std::uint64_t seed = 1;

  void validate() const;
  double lr_at(std::size_t epoch) const;  // lr0 * decay^floor(epoch / decay_every)
};

// Standardized series, sample windows and graphs consumed by training and
// evaluation. Only anchors whose first encoder hour has a graph set are kept.
struct PreparedData {
  std::vector<std::string> airports;
  std::int64_t start_hour = 0;
  Eigen::MatrixXd minutes;   // N x T, clipped delays
  Eigen::MatrixXd z;         // N x T, standardized; unobserved hours are 0
  MaskMatrix mask;
  ZScoreParams zscore;       // fitted on the training segment only
  WindowSplit split;
  GraphSchedule schedule;
  Eigen::MatrixXd geo;       // N x N geographic weights

  std::size_t airport_count() const noexcept { return airports.size(); }
};

PreparedData prepare_data(const DelayMatrix& delays, const Eigen::MatrixXd& geo, const GrangerConfig& granger,
                          std::size_t input_steps, std::size_t horizon, const SplitFractions& fractions = {});

// Same as above with a graph schedule computed elsewhere.
PreparedData prepare_data(const DelayMatrix& delays, const Eigen::MatrixXd& geo, GraphSchedule schedule,
                          std::size_t input_steps, std::size_t horizon, const SplitFractions& fractions = {});

struct Batch {
  ForwardInputs inputs;
  std::vector<Tensor> targets;  // m tensors [B,N], standardized
  std::vector<Tensor> masks;    // m tensors [B,N] of 0/1
  double observed = 0.0;        // number of unmasked targets
};

Batch make_batch(const PreparedData& data, std::span<const std::size_t> anchors, std::size_t input_steps,
                 std::size_t horizon);

using GradientBuffers = std::vector<std::vector<double>>;

struct AdamState {
  GradientBuffers m;
  GradientBuffers v;
  std::size_t step = 0;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

// Bias-corrected Adam update of every trainable parameter.
void adam_step(ParamSet& params, const GradientBuffers& grads, AdamState& state, double lr);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // standardized MAE over the epoch
  double val_mae = 0.0;     // minutes, averaged over horizons
  double lr = 0.0;
};

struct TrainResult {
  ParamSet params;  // best on validation
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_mae = 0.0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

TrainResult train(const CausalNet& model, const PreparedData& data, const TrainConfig& cfg, ParamSet init,
                  const EpochCallback& on_epoch = {});

struct HorizonMetrics {
  double mae = 0.0;
  double rmse = 0.0;
};

// Masked MAE and RMSE; throws when no entry is observed.
HorizonMetrics evaluate(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& truth, const MaskMatrix& mask);

// Predictions and truth in minutes, one N x S matrix per horizon step.
struct ForecastResult {
  std::vector<std::size_t> anchors;
  std::vector<Eigen::MatrixXd> predictions;
  std::vector<Eigen::MatrixXd> truth;
  std::vector<MaskMatrix> masks;
  std::vector<HorizonMetrics> metrics;

  double mean_mae() const;
};

ForecastResult predict(const CausalNet& model, const PreparedData& data, const ParamSet& params,
                       std::span<const std::size_t> anchors, std::size_t batch_size = 64);

// y(t+h) predicted as y(t); unobserved y(t) falls back to the training mean.
ForecastResult persistence_baseline(const PreparedData& data, std::span<const std::size_t> anchors,
                                    std::size_t horizon);

struct RunResult {
  Variant variant = Variant::Full;
  std::uint64_t seed = 0;
  TrainResult training;
  ForecastResult test;
};

// Initializes parameters from cfg.seed, trains, and evaluates on the test segment.
RunResult run_experiment(const ModelConfig& model_cfg, const PreparedData& data, const TrainConfig& cfg,
                         const EpochCallback& on_epoch = {});

// run_experiment with the variant replaced and everything else unchanged.
RunResult ablate(Variant variant, const ModelConfig& model_cfg, const PreparedData& data, const TrainConfig& cfg,
                 const EpochCallback& on_epoch = {});

using MatrixQuad = std::array<Eigen::MatrixXd, kScaleCount>;

// Per scale, the mean Frobenius distance between corrected and raw graphs.
std::array<double, kScaleCount> analyze_correction(std::span<const MatrixQuad> raw,
                                                   std::span<const MatrixQuad> corrected);

struct CorrectionSamples {
  std::vector<MatrixQuad> raw;
  std::vector<MatrixQuad> corrected;
};

// Raw and corrected graphs at the last encoder step of every anchor.
CorrectionSamples collect_correction(const CausalNet& model, const PreparedData& data, const ParamSet& params,
                                     std::span<const std::size_t> anchors, std::size_t batch_size = 64);

// Per airport: FIT1 averaged over channels and over every gate block.
std::vector<double> report_adaptive_weights(const CausalNet& model, const ParamSet& params);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);
double median(std::vector<double> values);

// One `metrics.csv` block: a model variant (or baseline label) and seed.
struct MetricsRow {
  std::string variant;
  std::uint64_t seed = 0;
  std::vector<HorizonMetrics> metrics;
};

MetricsRow metrics_row(const RunResult& run);
void write_metrics_csv(const std::string& path, std::span<const MetricsRow> rows);
void write_history_csv(const std::string& path, std::span<const EpochRecord> history);

}  // namespace causalnet

#endif  // CAUSALNET_TRAINER_HPP
