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


#include "causalnet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "causalnet/error.hpp"

namespace causalnet {
namespace {

void fill_graphs(std::vector<std::vector<double>>& buffers, std::size_t slot, const CausalGraphSet& set,
                 std::size_t n) {
  for (std::size_t s = 0; s < kScaleCount; ++s) {
    const Eigen::MatrixXd& g = set.graphs[s];
    double* out = buffers[s].data() + slot * n * n;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] = g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
}

const CausalGraphSet& graph_for(const PreparedData& data, std::size_t hour) {
  const CausalGraphSet* set = data.schedule.latest_at_or_before(hour);
  if (!set) throw_error(ErrorKind::Input, "no causal graph set available at hour " + std::to_string(hour));
  return *set;
}

void check_compatible(const CausalNet& model, const PreparedData& data) {
  const ModelConfig& mc = model.config();
  if (mc.airports != data.airport_count()) {
    throw_error(ErrorKind::Config, "model expects " + std::to_string(mc.airports) + " airports, data has " +
                                       std::to_string(data.airport_count()));
  }
  if (mc.input_dim != 1) throw_error(ErrorKind::Config, "delay data provides one input feature; model.input_dim must be 1");
  if (mc.input_steps != data.split.input_steps || mc.horizon != data.split.horizon) {
    throw_error(ErrorKind::Config, "model window (r=" + std::to_string(mc.input_steps) + ", m=" +
                                       std::to_string(mc.horizon) + ") differs from the prepared data (r=" +
                                       std::to_string(data.split.input_steps) + ", m=" +
                                       std::to_string(data.split.horizon) + ")");
  }
}

double observed_targets(const PreparedData& data, std::span<const std::size_t> anchors, std::size_t horizon) {
  double count = 0.0;
  for (std::size_t t : anchors) {
    for (std::size_t h = 1; h <= horizon; ++h) count += static_cast<double>(data.mask.col(static_cast<Eigen::Index>(t + h)).count());
  }
  return count;
}

void filter_anchors(Segment& seg, const GraphSchedule& schedule, std::size_t input_steps) {
  std::erase_if(seg.anchors, [&](std::size_t t) { return schedule.latest_at_or_before(t - input_steps) == nullptr; });
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw_error(ErrorKind::Config, "train.learning_rate must be finite and >= 0");
  }
  if (!(decay > 0.0) || !std::isfinite(decay)) throw_error(ErrorKind::Config, "train.decay must be positive");
  if (decay_every < 1) throw_error(ErrorKind::Config, "train.decay_every must be at least 1");
  if (max_epochs < 1) throw_error(ErrorKind::Config, "train.max_epochs must be at least 1");
  if (batch_size < 1) throw_error(ErrorKind::Config, "train.batch_size must be at least 1");
  if (micro_batch < 1) throw_error(ErrorKind::Config, "train.micro_batch must be at least 1");
  if (patience < 1) throw_error(ErrorKind::Config, "train.patience must be at least 1");
}

double TrainConfig::lr_at(std::size_t epoch) const {
  return learning_rate * std::pow(decay, static_cast<double>(epoch / decay_every));
}

PreparedData prepare_data(const DelayMatrix& delays, const Eigen::MatrixXd& geo, const GrangerConfig& granger,
                          std::size_t input_steps, std::size_t horizon, const SplitFractions& fractions) {
  return prepare_data(delays, geo, GraphSchedule::build(delays.values, granger), input_steps, horizon, fractions);
}

PreparedData prepare_data(const DelayMatrix& delays, const Eigen::MatrixXd& geo, GraphSchedule schedule,
                          std::size_t input_steps, std::size_t horizon, const SplitFractions& fractions) {
  const std::size_t n = delays.airport_count();
  if (geo.rows() != static_cast<Eigen::Index>(n) || geo.cols() != static_cast<Eigen::Index>(n)) {
    throw_error(ErrorKind::Shape, "geographic graph must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  PreparedData d;
  d.airports = delays.airports;
  d.start_hour = delays.start_hour;
  d.minutes = delays.values;
  d.mask = delays.mask;
  d.geo = geo;
  d.split = split_windows(delays, fractions, input_steps, horizon);
  const auto train_end = static_cast<Eigen::Index>(d.split.train.end);
  d.zscore = zscore_fit(delays.values.leftCols(train_end), delays.mask.leftCols(train_end));
  d.z = zscore_apply(d.zscore, delays.values);
  d.z = d.mask.select(d.z, 0.0);
  d.schedule = std::move(schedule);
  for (Segment* seg : {&d.split.train, &d.split.validation, &d.split.test}) {
    filter_anchors(*seg, d.schedule, input_steps);
  }
  return d;
}

Batch make_batch(const PreparedData& data, std::span<const std::size_t> anchors, std::size_t input_steps,
                 std::size_t horizon) {
  const std::size_t n = data.airport_count();
  const std::size_t b = anchors.size();
  if (b == 0) throw_error(ErrorKind::Input, "make_batch: no anchors");
  const auto hours = static_cast<std::size_t>(data.z.cols());
  for (std::size_t t : anchors) {
    if (t < input_steps || t + horizon >= hours) {
      throw_error(ErrorKind::Input, "make_batch: anchor " + std::to_string(t) + " outside the series");
    }
  }
  Batch batch;
  for (std::size_t i = 0; i <= input_steps; ++i) {
    std::vector<double> x(b * n);
    std::vector<std::vector<double>> g(kScaleCount, std::vector<double>(b * n * n));
    GraphQuad quad;
    for (std::size_t k = 0; k < b; ++k) {
      const std::size_t hour = anchors[k] - input_steps + i;
      for (std::size_t a = 0; a < n; ++a) x[k * n + a] = data.z(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(hour));
      fill_graphs(g, k, graph_for(data, hour), n);
    }
    batch.inputs.features.emplace_back(Shape{b, n, 1}, std::move(x));
    for (std::size_t s = 0; s < kScaleCount; ++s) quad[s] = Tensor({b, n, n}, std::move(g[s]));
    batch.inputs.graphs.push_back(std::move(quad));
  }
  {
    std::vector<std::vector<double>> g(kScaleCount, std::vector<double>(b * n * n));
    for (std::size_t k = 0; k < b; ++k) fill_graphs(g, k, graph_for(data, anchors[k]), n);
    for (std::size_t s = 0; s < kScaleCount; ++s) batch.inputs.decoder_graphs[s] = Tensor({b, n, n}, std::move(g[s]));
  }
  for (std::size_t h = 1; h <= horizon; ++h) {
    std::vector<double> y(b * n), m(b * n);
    for (std::size_t k = 0; k < b; ++k) {
      const auto col = static_cast<Eigen::Index>(anchors[k] + h);
      for (std::size_t a = 0; a < n; ++a) {
        const auto row = static_cast<Eigen::Index>(a);
        const bool seen = data.mask(row, col);
        y[k * n + a] = seen ? data.z(row, col) : 0.0;
        m[k * n + a] = seen ? 1.0 : 0.0;
        batch.observed += seen ? 1.0 : 0.0;
      }
    }
    batch.targets.emplace_back(Shape{b, n}, std::move(y));
    batch.masks.emplace_back(Shape{b, n}, std::move(m));
  }
  return batch;
}

void adam_step(ParamSet& params, const GradientBuffers& grads, AdamState& state, double lr) {
  if (grads.size() != params.size()) {
    throw_error(ErrorKind::Shape, "adam_step: " + std::to_string(grads.size()) + " gradients for " +
                                      std::to_string(params.size()) + " parameters");
  }
  if (state.m.empty()) {
    state.m.resize(params.size());
    state.v.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i].assign(params.value(i).size(), 0.0);
      state.v[i].assign(params.value(i).size(), 0.0);
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params.trainable(i)) continue;
    if (grads[i].size() != params.value(i).size()) {
      throw_error(ErrorKind::Shape, "adam_step: gradient size mismatch for '" + params.name(i) + "'");
    }
    for (double g : grads[i]) {
      if (!std::isfinite(g)) throw_error(ErrorKind::Numeric, "non-finite gradient for parameter '" + params.name(i) + "'");
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(kAdamBeta1, t);
  const double c2 = 1.0 - std::pow(kAdamBeta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params.trainable(i)) continue;
    const auto current = params.value(i).values();
    std::vector<double> next(current.begin(), current.end());
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < next.size(); ++j) {
      const double g = grads[i][j];
      m[j] = kAdamBeta1 * m[j] + (1.0 - kAdamBeta1) * g;
      v[j] = kAdamBeta2 * v[j] + (1.0 - kAdamBeta2) * g * g;
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      next[j] -= lr * m_hat / (std::sqrt(v_hat) + kAdamEpsilon);
    }
    params.set(i, Tensor(params.value(i).shape(), std::move(next)));
  }
}

TrainResult train(const CausalNet& model, const PreparedData& data, const TrainConfig& cfg, ParamSet init,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  model.check_params(init);
  check_compatible(model, data);
  const ModelConfig& mc = model.config();
  if (data.split.train.anchors.empty()) throw_error(ErrorKind::Input, "no training samples");
  if (data.split.validation.anchors.empty()) throw_error(ErrorKind::Input, "no validation samples");

  const GeoOperators geo = make_geo_operators(data.geo);
  std::vector<std::size_t> order = data.split.train.anchors;
  std::mt19937_64 rng(cfg.seed);

  TrainResult result;
  ParamSet params = std::move(init);
  AdamState state;
  result.params = params;
  result.best_val_mae = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const double lr = cfg.lr_at(epoch);
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    double observed_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size, ++batch_index) {
      const std::span<const std::size_t> anchors(order.data() + begin, std::min(cfg.batch_size, order.size() - begin));
      const double observed = observed_targets(data, anchors, mc.horizon);
      if (observed == 0.0) continue;
      GradientBuffers grads(params.size());
      for (std::size_t i = 0; i < params.size(); ++i) grads[i].assign(params.value(i).size(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t mb = 0; mb < anchors.size(); mb += cfg.micro_batch) {
        const Batch batch = make_batch(data, anchors.subspan(mb, std::min(cfg.micro_batch, anchors.size() - mb)),
                                       mc.input_steps, mc.horizon);
        Tape tape;
        std::vector<Tensor> bound;
        bound.reserve(params.size());
        for (const auto& p : params.values()) bound.push_back(tape.variable(p));
        const std::vector<Tensor> preds = model.forward(batch.inputs, geo, bound);
        const Tensor loss = masked_mae(preds, batch.targets, batch.masks, observed);
        if (!std::isfinite(loss.item())) {
          throw_error(ErrorKind::Numeric, "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                              std::to_string(batch_index));
        }
        batch_loss += loss.item();
        const Gradients g = tape.backward(loss);
        for (std::size_t i = 0; i < params.size(); ++i) {
          if (!params.trainable(i) || !g.reached(bound[i])) continue;
          const Tensor gi = g.of(bound[i]);
          for (std::size_t j = 0; j < gi.size(); ++j) grads[i][j] += gi[j];
        }
      }
      adam_step(params, grads, state, lr);
      loss_sum += batch_loss * observed;
      observed_sum += observed;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train_loss = observed_sum > 0.0 ? loss_sum / observed_sum : 0.0;
    rec.val_mae = predict(model, data, params, data.split.validation.anchors).mean_mae();
    if (!std::isfinite(rec.val_mae)) {
      throw_error(ErrorKind::Numeric, "non-finite validation MAE at epoch " + std::to_string(epoch));
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (rec.val_mae < result.best_val_mae) {
      result.best_val_mae = rec.val_mae;
      result.best_epoch = epoch;
      result.params = params;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  return result;
}

double ForecastResult::mean_mae() const {
  if (metrics.empty()) return 0.0;
  double s = 0.0;
  for (const auto& m : metrics) s += m.mae;
  return s / static_cast<double>(metrics.size());
}

ForecastResult predict(const CausalNet& model, const PreparedData& data, const ParamSet& params,
                       std::span<const std::size_t> anchors, std::size_t batch_size) {
  model.check_params(params);
  check_compatible(model, data);
  if (anchors.empty()) throw_error(ErrorKind::Input, "predict: no samples");
  if (batch_size == 0) batch_size = 1;
  const ModelConfig& mc = model.config();
  const std::size_t n = mc.airports;
  const auto s_count = static_cast<Eigen::Index>(anchors.size());
  const GeoOperators geo = make_geo_operators(data.geo);

  ForecastResult out;
  out.anchors.assign(anchors.begin(), anchors.end());
  for (std::size_t h = 0; h < mc.horizon; ++h) {
    out.predictions.emplace_back(static_cast<Eigen::Index>(n), s_count);
    out.truth.emplace_back(static_cast<Eigen::Index>(n), s_count);
    out.masks.emplace_back(static_cast<Eigen::Index>(n), s_count);
  }
  for (std::size_t begin = 0; begin < anchors.size(); begin += batch_size) {
    const auto chunk = anchors.subspan(begin, std::min(batch_size, anchors.size() - begin));
    const Batch batch = make_batch(data, chunk, mc.input_steps, mc.horizon);
    const std::vector<Tensor> preds = model.forward(batch.inputs, geo, params.values());
    for (std::size_t h = 0; h < mc.horizon; ++h) {
      for (std::size_t k = 0; k < chunk.size(); ++k) {
        const auto col = static_cast<Eigen::Index>(begin + k);
        const auto hour = static_cast<Eigen::Index>(chunk[k] + h + 1);
        for (std::size_t a = 0; a < n; ++a) {
          const auto row = static_cast<Eigen::Index>(a);
          out.predictions[h](row, col) = preds[h][k * n + a] * data.zscore.std + data.zscore.mean;
          out.truth[h](row, col) = data.minutes(row, hour);
          out.masks[h](row, col) = data.mask(row, hour);
        }
      }
    }
  }
  for (std::size_t h = 0; h < mc.horizon; ++h) out.metrics.push_back(evaluate(out.predictions[h], out.truth[h], out.masks[h]));
  return out;
}

ForecastResult persistence_baseline(const PreparedData& data, std::span<const std::size_t> anchors,
                                    std::size_t horizon) {
  if (anchors.empty()) throw_error(ErrorKind::Input, "persistence_baseline: no samples");
  const auto n = static_cast<Eigen::Index>(data.airport_count());
  const auto s_count = static_cast<Eigen::Index>(anchors.size());
  const auto hours = static_cast<std::size_t>(data.minutes.cols());
  ForecastResult out;
  out.anchors.assign(anchors.begin(), anchors.end());
  for (std::size_t h = 1; h <= horizon; ++h) {
    Eigen::MatrixXd pred(n, s_count), truth(n, s_count);
    MaskMatrix mask(n, s_count);
    for (Eigen::Index k = 0; k < s_count; ++k) {
      const std::size_t t = anchors[static_cast<std::size_t>(k)];
      if (t + h >= hours) throw_error(ErrorKind::Input, "persistence_baseline: anchor beyond the series");
      const auto now = static_cast<Eigen::Index>(t);
      const auto later = static_cast<Eigen::Index>(t + h);
      for (Eigen::Index a = 0; a < n; ++a) {
        pred(a, k) = data.mask(a, now) ? data.minutes(a, now) : data.zscore.mean;
        truth(a, k) = data.minutes(a, later);
        mask(a, k) = data.mask(a, later);
      }
    }
    out.metrics.push_back(evaluate(pred, truth, mask));
    out.predictions.push_back(std::move(pred));
    out.truth.push_back(std::move(truth));
    out.masks.push_back(std::move(mask));
  }
  return out;
}

RunResult run_experiment(const ModelConfig& model_cfg, const PreparedData& data, const TrainConfig& cfg,
                         const EpochCallback& on_epoch) {
  const CausalNet model(model_cfg);
  RunResult run;
  run.variant = model_cfg.variant;
  run.seed = cfg.seed;
  run.training = train(model, data, cfg, model.init_params(cfg.seed), on_epoch);
  if (data.split.test.anchors.empty()) throw_error(ErrorKind::Input, "no test samples");
  run.test = predict(model, data, run.training.params, data.split.test.anchors);
  return run;
}

RunResult ablate(Variant variant, const ModelConfig& model_cfg, const PreparedData& data, const TrainConfig& cfg,
                 const EpochCallback& on_epoch) {
  ModelConfig mc = model_cfg;
  mc.variant = variant;
  return run_experiment(mc, data, cfg, on_epoch);
}

std::array<double, kScaleCount> analyze_correction(std::span<const MatrixQuad> raw,
                                                   std::span<const MatrixQuad> corrected) {
  if (raw.size() != corrected.size()) {
    throw_error(ErrorKind::Input, "analyze_correction: " + std::to_string(raw.size()) + " raw sets vs " +
                                      std::to_string(corrected.size()) + " corrected sets");
  }
  if (raw.empty()) throw_error(ErrorKind::Input, "analyze_correction: no graph sets");
  std::array<double, kScaleCount> out{};
  for (std::size_t i = 0; i < raw.size(); ++i) {
    for (std::size_t s = 0; s < kScaleCount; ++s) {
      if (raw[i][s].rows() != corrected[i][s].rows() || raw[i][s].cols() != corrected[i][s].cols()) {
        throw_error(ErrorKind::Shape, "analyze_correction: graph shapes differ");
      }
      out[s] += (corrected[i][s] - raw[i][s]).norm();
    }
  }
  for (auto& v : out) v /= static_cast<double>(raw.size());
  return out;
}

CorrectionSamples collect_correction(const CausalNet& model, const PreparedData& data, const ParamSet& params,
                                     std::span<const std::size_t> anchors, std::size_t batch_size) {
  model.check_params(params);
  check_compatible(model, data);
  if (batch_size == 0) batch_size = 1;
  const std::size_t n = model.config().airports;
  const GeoOperators geo = make_geo_operators(data.geo);
  CorrectionSamples out;
  const auto to_quads = [&](const GraphQuad& quad, std::size_t k) {
    MatrixQuad m;
    for (std::size_t s = 0; s < kScaleCount; ++s) {
      m[s].resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          m[s](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = quad[s][(k * n + i) * n + j];
        }
      }
    }
    return m;
  };
  for (std::size_t begin = 0; begin < anchors.size(); begin += batch_size) {
    const auto chunk = anchors.subspan(begin, std::min(batch_size, anchors.size() - begin));
    const Batch batch = make_batch(data, chunk, model.config().input_steps, model.config().horizon);
    ForwardTrace trace;
    model.forward(batch.inputs, geo, params.values(), &trace);
    for (std::size_t k = 0; k < chunk.size(); ++k) {
      out.raw.push_back(to_quads(trace.raw.back(), k));
      out.corrected.push_back(to_quads(trace.corrected.back(), k));
    }
  }
  return out;
}

std::vector<double> report_adaptive_weights(const CausalNet& model, const ParamSet& params) {
  model.check_params(params);
  const std::size_t n = model.config().airports;
  const std::size_t f = model.config().width();
  std::vector<double> scores(n, 0.0);
  const auto& blocks = model.layout().cell;
  for (const auto& block : blocks) {
    const Tensor& fit1 = params.value(block.fit1);
    for (std::size_t a = 0; a < n; ++a) {
      double s = 0.0;
      for (std::size_t c = 0; c < f; ++c) s += fit1[a * f + c];
      scores[a] += s / static_cast<double>(f);
    }
  }
  for (auto& s : scores) s /= static_cast<double>(blocks.size());
  return scores;
}

}  // namespace causalnet
