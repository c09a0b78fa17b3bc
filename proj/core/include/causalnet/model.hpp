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

#ifndef CAUSALNET_MODEL_HPP
#define CAUSALNET_MODEL_HPP

#include <Eigen/Core>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "causalnet/grad_check.hpp"
#include "causalnet/granger.hpp"
#include "causalnet/tensor.hpp"

namespace causalnet {

// Model variants used for ablation.
//   Full         causal graphs + self-correction + LGRU + adaptive fusion
//   NoCausal     geographic graph only (causal graphs replaced by zeros)
//   NoCorrection raw Granger graphs, no correction mask
//   GruCell      LGRU swapped for a graph-convolutional GRU
//   NoFusion     FIT1/FIT2 frozen at ones
enum class Variant { Full, NoCausal, NoCorrection, GruCell, NoFusion };

const char* variant_name(Variant v) noexcept;  // full, NC, NMC, GRU, NF
Variant variant_from_name(std::string_view name);

struct ModelConfig {
  std::size_t airports = 0;
  std::size_t input_dim = 1;
  std::size_t hidden = 64;
  std::size_t embedding = 40;
  std::size_t hops = 2;
  std::size_t input_steps = 5;  // r: the encoder sees steps t-r .. t
  std::size_t horizon = 3;      // m
  double alpha = 0.5;
  double beta = 0.5;
  Variant variant = Variant::Full;

  std::size_t width() const noexcept { return input_dim + hidden; }
  void validate() const;
};

// Ordered, named parameter tensors.
class ParamSet {
 public:
  std::size_t add(std::string name, Tensor value, bool trainable = true);

  std::size_t size() const noexcept { return values_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const Tensor& value(std::size_t i) const { return values_.at(i); }
  bool trainable(std::size_t i) const { return trainable_.at(i); }
  void set(std::size_t i, Tensor value);
  void set_trainable(std::size_t i, bool trainable) { trainable_.at(i) = trainable; }
  std::optional<std::size_t> find(std::string_view name) const;
  std::span<const Tensor> values() const noexcept { return values_; }
  std::size_t scalar_count() const noexcept;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::vector<bool> trainable_;
};

// Parameter indices of one two-way K-hop graph convolution. Direction 0 uses
// the normalized graphs, direction 1 their transposes.
struct KhopBlock {
  std::array<std::array<std::size_t, kScaleCount>, 2> theta_causal{};  // F x F
  std::array<std::size_t, 2> theta_geo{};                               // F x F
  std::array<std::size_t, 2> omega_in{};                                // scalars
  std::array<std::array<std::size_t, kScaleCount>, 2> omega_causal{};
  std::array<std::size_t, 2> omega_geo{};
  std::array<std::vector<std::size_t>, 2> hop_out;  // K matrices F x W
  std::size_t bias = 0;                             // W
  std::size_t fit1 = 0;                             // N x F, shared by both directions
  std::size_t fit2 = 0;
};

struct CorrectionBlock {
  std::array<std::size_t, kScaleCount> theta{};  // F x F single-hop GCN kernel per scale
  std::size_t fc_weight = 0;                      // F x d_emb, shared by scales
  std::size_t fc_bias = 0;
  std::size_t e1 = 0;  // N x d_emb
  std::size_t e2 = 0;
};

struct ModelLayout {
  CorrectionBlock correction;
  // LGRU: reset, update, output, long-term memory. GRU: reset, update, candidate.
  std::vector<KhopBlock> cell;
  std::size_t out_weight = 0;  // W x 1
  std::size_t out_bias = 0;
};

using GraphQuad = std::array<Tensor, kScaleCount>;

// Normalized propagation operators for one step, both directions.
struct PropagationGraphs {
  std::array<GraphQuad, 2> causal;
  std::array<Tensor, 2> geo;
};

// Row-normalized geographic operator and its transpose, shared by every step.
struct GeoOperators {
  Tensor forward;
  Tensor backward;
};

// D^-1 (CA + I) with D = 1 + row sums; works on [N,N] or [B,N,N].
Tensor normalize_causal(const Tensor& ca);
// D^-1 A with D = row sums; all-zero rows stay zero.
Eigen::MatrixXd normalize_geo(const Eigen::MatrixXd& a);
GeoOperators make_geo_operators(const Eigen::MatrixXd& a);

struct NormalizedGraphs {
  Tensor causal;
  Eigen::MatrixXd geo;
};
NormalizedGraphs normalize_graphs(const Tensor& ca, const Eigen::MatrixXd& a);

// relu(tanh(rho1 rho2^T - rho2 rho1^T)).
Tensor correction_mask(const Tensor& rho1, const Tensor& rho2);

struct ForwardInputs {
  std::vector<Tensor> features;    // r+1 tensors [B,N,D], oldest first
  std::vector<GraphQuad> graphs;   // r+1 Granger graph sets [B,N,N]
  GraphQuad decoder_graphs;        // used for every decoder step
};

// Per encoder step: raw graphs C and corrected graphs CA (values only).
struct ForwardTrace {
  std::vector<GraphQuad> raw;
  std::vector<GraphQuad> corrected;
};

class CausalNet {
 public:
  explicit CausalNet(ModelConfig cfg);

  const ModelConfig& config() const noexcept { return cfg_; }
  const ModelLayout& layout() const noexcept { return layout_; }

  // Kaiming-uniform kernels and biases; omega and FIT weights start at one.
  // FIT1/FIT2 are untrainable for the NoFusion variant.
  ParamSet init_params(std::uint64_t seed) const;
  // Every parameter zero, same names and shapes.
  ParamSet zero_params() const;
  // Throws when names or shapes differ from this model's layout.
  void check_params(const ParamSet& params) const;

  // Corrected graph set CA = C + CM for one step. x: [B,N,D], h_prev: [B,N,W].
  GraphQuad self_causal_correction(const Tensor& x, const Tensor& h_prev, const GraphQuad& c,
                                   std::span<const Tensor> p, GraphQuad* mask_out = nullptr) const;

  PropagationGraphs propagation_graphs(const GraphQuad& ca, const GeoOperators& geo) const;

  // Two-way K-hop fusion of causal and geographic propagation. h_in: [B,N,F] -> [B,N,W].
  Tensor khop_gcn(const Tensor& h_in, const PropagationGraphs& g, const KhopBlock& block,
                  std::span<const Tensor> p) const;

  Tensor lgru_cell(const Tensor& x, const Tensor& h_prev, const PropagationGraphs& g,
                   std::span<const Tensor> p) const;
  Tensor gru_cell(const Tensor& x, const Tensor& h_prev, const PropagationGraphs& g,
                  std::span<const Tensor> p) const;

  // Encoder over r+1 steps, decoder over m steps with zero features.
  // Returns m predictions [B,N] in standardized units.
  std::vector<Tensor> forward(const ForwardInputs& in, const GeoOperators& geo, std::span<const Tensor> p,
                              ForwardTrace* trace = nullptr) const;

 private:
  GraphQuad step_graphs(const Tensor& x, const Tensor& h, const GraphQuad& c, std::span<const Tensor> p) const;
  Tensor cell(const Tensor& x, const Tensor& h, const PropagationGraphs& g, std::span<const Tensor> p) const;

  ModelConfig cfg_;
  ModelLayout layout_;
  ParamSet shapes_;  // zero-valued template with names, shapes and trainability
};

// Masked mean absolute error over all horizons; mask entries are 0/1 and the
// sum is divided by `normalizer` (the number of observed targets).
Tensor masked_mae(std::span<const Tensor> predictions, std::span<const Tensor> targets,
                  std::span<const Tensor> masks, double normalizer);

Tensor to_tensor(const Eigen::MatrixXd& m);
Eigen::MatrixXd to_matrix(const Tensor& t);  // rank-2 tensors only

struct ModelGradCheck {
  GradCheckReport report;
  std::size_t parameters = 0;
};

// Finite-difference check of the full training loss on a random sample with
// random graphs, geography and parameters.
ModelGradCheck model_gradient_check(const ModelConfig& cfg, std::size_t batch, std::uint64_t seed, double eps);

}  // namespace causalnet

#endif  // CAUSALNET_MODEL_HPP
