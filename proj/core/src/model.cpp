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


#include <random>

#include "causalnet/error.hpp"
#include "causalnet/model.hpp"

namespace causalnet {
namespace {

using namespace ad;

void expect_shape(const Tensor& t, const Shape& shape, const char* what) {
  if (t.shape() != shape) {
    throw_error(ErrorKind::Shape, std::string(what) + ": expected shape " + shape_string(shape) + ", got " +
                                      shape_string(t.shape()));
  }
}

Tensor identity(std::size_t n) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  return Tensor({n, n}, std::move(v));
}

}  // namespace

Tensor to_tensor(const Eigen::MatrixXd& m) {
  const auto rows = static_cast<std::size_t>(m.rows());
  const auto cols = static_cast<std::size_t>(m.cols());
  std::vector<double> v(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) v[r * cols + c] = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }
  return Tensor({rows, cols}, std::move(v));
}

Eigen::MatrixXd to_matrix(const Tensor& t) {
  if (t.rank() != 2) throw_error(ErrorKind::Shape, "to_matrix: expected rank 2, got " + shape_string(t.shape()));
  Eigen::MatrixXd m(t.dim(0), t.dim(1));
  for (std::size_t r = 0; r < t.dim(0); ++r) {
    for (std::size_t c = 0; c < t.dim(1); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = t.at(r, c);
  }
  return m;
}

Tensor normalize_causal(const Tensor& ca) {
  if (ca.rank() < 2 || ca.dim(ca.rank() - 1) != ca.dim(ca.rank() - 2)) {
    throw_error(ErrorKind::Shape, "normalize_causal: expected square matrices, got " + shape_string(ca.shape()));
  }
  const std::size_t n = ca.dim(ca.rank() - 1);
  const Tensor inv_degree = reciprocal(add_scalar(sum_last(ca), 1.0));
  return multiply(add(ca, identity(n)), inv_degree);
}

Eigen::MatrixXd normalize_geo(const Eigen::MatrixXd& a) {
  Eigen::MatrixXd out = a;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double s = a.row(i).sum();
    if (s > 0.0) out.row(i) /= s;
  }
  return out;
}

GeoOperators make_geo_operators(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw_error(ErrorKind::Shape, "geographic graph must be square");
  const Eigen::MatrixXd n = normalize_geo(a);
  return {to_tensor(n), to_tensor(n.transpose())};
}

NormalizedGraphs normalize_graphs(const Tensor& ca, const Eigen::MatrixXd& a) {
  return {normalize_causal(ca), normalize_geo(a)};
}

Tensor correction_mask(const Tensor& rho1, const Tensor& rho2) {
  const Tensor pre = subtract(matmul(rho1, transpose(rho2)), matmul(rho2, transpose(rho1)));
  return relu(ad::tanh(pre));
}

GraphQuad CausalNet::self_causal_correction(const Tensor& x, const Tensor& h_prev, const GraphQuad& c,
                                            std::span<const Tensor> p, GraphQuad* mask_out) const {
  const std::size_t batch = x.rank() == 3 ? x.dim(0) : 0;
  expect_shape(x, {batch, cfg_.airports, cfg_.input_dim}, "self_causal_correction features");
  expect_shape(h_prev, {batch, cfg_.airports, cfg_.hidden}, "self_causal_correction hidden state");
  const CorrectionBlock& blk = layout_.correction;
  const Tensor z = concat(x, h_prev);
  GraphQuad out;
  for (std::size_t s = 0; s < kScaleCount; ++s) {
    expect_shape(c[s], {batch, cfg_.airports, cfg_.airports}, "self_causal_correction graph");
    const Tensor propagated = matmul(matmul(normalize_causal(c[s]), z), p[blk.theta[s]]);
    const Tensor hc = add(scale(z, cfg_.alpha), scale(propagated, cfg_.beta));
    const Tensor f = affine(hc, p[blk.fc_weight], p[blk.fc_bias]);
    const Tensor rho1 = ad::tanh(multiply(f, p[blk.e1]));
    const Tensor rho2 = ad::tanh(multiply(f, p[blk.e2]));
    const Tensor cm = correction_mask(rho1, rho2);
    if (mask_out) (*mask_out)[s] = cm;
    out[s] = add(c[s], cm);
  }
  return out;
}

PropagationGraphs CausalNet::propagation_graphs(const GraphQuad& ca, const GeoOperators& geo) const {
  expect_shape(geo.forward, {cfg_.airports, cfg_.airports}, "geographic operator");
  expect_shape(geo.backward, {cfg_.airports, cfg_.airports}, "geographic operator");
  PropagationGraphs g;
  for (std::size_t s = 0; s < kScaleCount; ++s) {
    g.causal[0][s] = normalize_causal(ca[s]);
    g.causal[1][s] = transpose(g.causal[0][s]);
  }
  g.geo = {geo.forward, geo.backward};
  return g;
}

Tensor CausalNet::khop_gcn(const Tensor& h_in, const PropagationGraphs& g, const KhopBlock& blk,
                           std::span<const Tensor> p) const {
  if (h_in.rank() != 3 || h_in.dim(1) != cfg_.airports || h_in.dim(2) != cfg_.width()) {
    throw_error(ErrorKind::Shape, "khop_gcn: expected input [B," + std::to_string(cfg_.airports) + "," +
                                      std::to_string(cfg_.width()) + "], got " + shape_string(h_in.shape()));
  }
  const Tensor& fit1 = p[blk.fit1];
  const Tensor& fit2 = p[blk.fit2];
  Tensor result;
  for (std::size_t d = 0; d < 2; ++d) {
    const Tensor skip = multiply(p[blk.omega_in[d]], h_in);
    Tensor h = h_in;
    Tensor out;
    for (std::size_t k = 0; k < cfg_.hops; ++k) {
      Tensor fc = skip;
      for (std::size_t s = 0; s < kScaleCount; ++s) {
        const Tensor prop = matmul(matmul(g.causal[d][s], h), p[blk.theta_causal[d][s]]);
        fc = add(fc, multiply(p[blk.omega_causal[d][s]], prop));
      }
      const Tensor fa = multiply(p[blk.omega_geo[d]], matmul(matmul(g.geo[d], h), p[blk.theta_geo[d]]));
      h = add(multiply(fit1, fc), multiply(fit2, fa));
      const Tensor term = matmul(h, p[blk.hop_out[d][k]]);
      out = k == 0 ? term : add(out, term);
    }
    result = d == 0 ? out : add(result, out);
  }
  return add(result, p[blk.bias]);
}

Tensor CausalNet::lgru_cell(const Tensor& x, const Tensor& h_prev, const PropagationGraphs& g,
                            std::span<const Tensor> p) const {
  if (layout_.cell.size() != 4) throw_error(ErrorKind::Config, "lgru_cell requires an LGRU parameter layout");
  const Tensor z = concat(x, h_prev);
  const Tensor reset = sigmoid(khop_gcn(z, g, layout_.cell[0], p));
  const Tensor update = sigmoid(khop_gcn(z, g, layout_.cell[1], p));
  const Tensor output = sigmoid(khop_gcn(z, g, layout_.cell[2], p));
  const Tensor memory = ad::tanh(khop_gcn(z, g, layout_.cell[3], p));
  return multiply(output, ad::tanh(add(multiply(update, h_prev), multiply(reset, memory))));
}

Tensor CausalNet::gru_cell(const Tensor& x, const Tensor& h_prev, const PropagationGraphs& g,
                           std::span<const Tensor> p) const {
  if (layout_.cell.size() != 3) throw_error(ErrorKind::Config, "gru_cell requires a GRU parameter layout");
  const Tensor z = concat(x, h_prev);
  const Tensor reset = sigmoid(khop_gcn(z, g, layout_.cell[0], p));
  const Tensor update = sigmoid(khop_gcn(z, g, layout_.cell[1], p));
  const Tensor candidate = ad::tanh(khop_gcn(concat(x, multiply(reset, h_prev)), g, layout_.cell[2], p));
  return add(multiply(update, h_prev), multiply(add_scalar(scale(update, -1.0), 1.0), candidate));
}

Tensor CausalNet::cell(const Tensor& x, const Tensor& h, const PropagationGraphs& g,
                       std::span<const Tensor> p) const {
  return cfg_.variant == Variant::GruCell ? gru_cell(x, h, g, p) : lgru_cell(x, h, g, p);
}

GraphQuad CausalNet::step_graphs(const Tensor& x, const Tensor& h, const GraphQuad& c,
                                 std::span<const Tensor> p) const {
  switch (cfg_.variant) {
    case Variant::NoCausal: {
      GraphQuad zero;
      for (auto& z : zero) z = Tensor::zeros({x.dim(0), cfg_.airports, cfg_.airports});
      return zero;
    }
    case Variant::NoCorrection:
      return c;
    default:
      return self_causal_correction(x, h, c, p);
  }
}

std::vector<Tensor> CausalNet::forward(const ForwardInputs& in, const GeoOperators& geo, std::span<const Tensor> p,
                                       ForwardTrace* trace) const {
  const std::size_t steps = cfg_.input_steps + 1;
  if (in.features.size() != steps) {
    throw_error(ErrorKind::Shape, "forward: expected " + std::to_string(steps) + " encoder inputs, got " +
                                      std::to_string(in.features.size()));
  }
  if (in.graphs.size() != steps) {
    throw_error(ErrorKind::Input, "forward: expected " + std::to_string(steps) + " graph sets, got " +
                                      std::to_string(in.graphs.size()));
  }
  if (p.size() != shapes_.size()) {
    throw_error(ErrorKind::Shape, "forward: expected " + std::to_string(shapes_.size()) + " parameters, got " +
                                      std::to_string(p.size()));
  }
  if (in.features[0].rank() != 3) {
    throw_error(ErrorKind::Shape, "forward: features must be [B,N,D], got " + shape_string(in.features[0].shape()));
  }
  const std::size_t batch = in.features[0].dim(0);
  const Shape graph_shape{batch, cfg_.airports, cfg_.airports};
  for (std::size_t i = 0; i < steps; ++i) {
    expect_shape(in.features[i], {batch, cfg_.airports, cfg_.input_dim}, "forward features");
    for (const auto& g : in.graphs[i]) expect_shape(g, graph_shape, "forward graph set");
  }
  for (const auto& g : in.decoder_graphs) expect_shape(g, graph_shape, "forward decoder graph set");

  Tensor h = Tensor::zeros({batch, cfg_.airports, cfg_.hidden});
  for (std::size_t i = 0; i < steps; ++i) {
    const GraphQuad ca = step_graphs(in.features[i], h, in.graphs[i], p);
    if (trace) {
      GraphQuad raw, corrected;
      for (std::size_t s = 0; s < kScaleCount; ++s) {
        raw[s] = in.graphs[i][s].detach();
        corrected[s] = ca[s].detach();
      }
      trace->raw.push_back(std::move(raw));
      trace->corrected.push_back(std::move(corrected));
    }
    h = cell(in.features[i], h, propagation_graphs(ca, geo), p);
  }

  const Tensor blank = Tensor::zeros({batch, cfg_.airports, cfg_.input_dim});
  std::vector<Tensor> predictions;
  predictions.reserve(cfg_.horizon);
  for (std::size_t j = 0; j < cfg_.horizon; ++j) {
    const GraphQuad ca = step_graphs(blank, h, in.decoder_graphs, p);
    h = cell(blank, h, propagation_graphs(ca, geo), p);
    const Tensor y = affine(h, p[layout_.out_weight], p[layout_.out_bias]);
    predictions.push_back(reshape(y, {batch, cfg_.airports}));
  }
  return predictions;
}

Tensor masked_mae(std::span<const Tensor> predictions, std::span<const Tensor> targets,
                  std::span<const Tensor> masks, double normalizer) {
  if (predictions.size() != targets.size() || predictions.size() != masks.size() || predictions.empty()) {
    throw_error(ErrorKind::Shape, "masked_mae: predictions, targets and masks must have equal nonzero length");
  }
  if (!(normalizer > 0.0)) throw_error(ErrorKind::Input, "masked_mae: no observed targets");
  Tensor total;
  for (std::size_t h = 0; h < predictions.size(); ++h) {
    const Tensor err = sum(multiply(masks[h], ad::abs(subtract(predictions[h], targets[h]))));
    total = h == 0 ? err : add(total, err);
  }
  return scale(total, 1.0 / normalizer);
}

ModelGradCheck model_gradient_check(const ModelConfig& cfg, std::size_t batch, std::uint64_t seed, double eps) {
  const CausalNet model(cfg);
  const std::size_t n = cfg.airports;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto random_tensor = [&](Shape shape) {
    std::vector<double> v(shape_size(shape));
    for (auto& x : v) x = normal(rng);
    return Tensor(std::move(shape), std::move(v));
  };
  const auto random_graph = [&]() {
    std::vector<double> v(batch * n * n, 0.0);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (i != j && unit(rng) < 0.4) v[(b * n + i) * n + j] = 1.0;
        }
      }
    }
    return Tensor({batch, n, n}, std::move(v));
  };

  ForwardInputs in;
  for (std::size_t i = 0; i <= cfg.input_steps; ++i) {
    in.features.push_back(random_tensor({batch, n, cfg.input_dim}));
    GraphQuad q;
    for (auto& g : q) g = random_graph();
    in.graphs.push_back(q);
  }
  in.decoder_graphs = in.graphs.back();

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < a.cols(); ++j) a(i, j) = a(j, i) = unit(rng);
  }
  const GeoOperators geo = make_geo_operators(a);

  std::vector<Tensor> targets, masks;
  for (std::size_t h = 0; h < cfg.horizon; ++h) {
    targets.push_back(random_tensor({batch, n}));
    masks.push_back(Tensor::ones({batch, n}));
  }
  const double count = static_cast<double>(batch * n * cfg.horizon);

  const ParamSet params = model.init_params(seed);
  const ScalarFunction loss = [&](Tape&, std::span<const Tensor> p) {
    const std::vector<Tensor> preds = model.forward(in, geo, p);
    return masked_mae(preds, targets, masks, count);
  };
  ModelGradCheck out;
  out.parameters = params.scalar_count();
  out.report = grad_check(loss, params.values(), eps);
  return out;
}

}  // namespace causalnet
