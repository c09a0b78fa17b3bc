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


#include <cmath>
#include <random>
#include <algorithm>

#include "causalnet/error.hpp"
#include "causalnet/model.hpp"

namespace causalnet {
namespace {

constexpr std::array<const char*, 4> kLgruGates{"reset", "update", "output", "memory"};
constexpr std::array<const char*, 3> kGruGates{"reset", "update", "candidate"};

std::string scale_key(std::size_t s) { return scale_name(kScales[s]); }

// Records each parameter's role so init_params can pick the distribution.
enum class Role { Kernel, Bias, One };

struct Builder {
  ParamSet set;
  std::vector<Role> roles;
  std::vector<std::size_t> fan_in;

  std::size_t add(const std::string& name, Shape shape, Role role, std::size_t fan) {
    roles.push_back(role);
    fan_in.push_back(fan);
    return set.add(name, Tensor::zeros(std::move(shape)));
  }
};

KhopBlock build_khop(Builder& b, const std::string& prefix, const ModelConfig& cfg) {
  const std::size_t f = cfg.width();
  const std::size_t w = cfg.hidden;
  KhopBlock block;
  for (std::size_t d = 0; d < 2; ++d) {
    const std::string dir = prefix + ".dir" + std::to_string(d);
    for (std::size_t s = 0; s < kScaleCount; ++s) {
      block.theta_causal[d][s] = b.add(dir + ".theta." + scale_key(s), {f, f}, Role::Kernel, f);
    }
    block.theta_geo[d] = b.add(dir + ".theta.geo", {f, f}, Role::Kernel, f);
    block.omega_in[d] = b.add(dir + ".omega.in", {1}, Role::One, 1);
    for (std::size_t s = 0; s < kScaleCount; ++s) {
      block.omega_causal[d][s] = b.add(dir + ".omega." + scale_key(s), {1}, Role::One, 1);
    }
    block.omega_geo[d] = b.add(dir + ".omega.geo", {1}, Role::One, 1);
    for (std::size_t k = 0; k < cfg.hops; ++k) {
      block.hop_out[d].push_back(b.add(dir + ".hop" + std::to_string(k) + ".weight", {f, w}, Role::Kernel, f));
    }
  }
  block.bias = b.add(prefix + ".bias", {w}, Role::Bias, f);
  block.fit1 = b.add(prefix + ".fit1", {cfg.airports, f}, Role::One, 1);
  block.fit2 = b.add(prefix + ".fit2", {cfg.airports, f}, Role::One, 1);
  return block;
}

}  // namespace

const char* variant_name(Variant v) noexcept {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::NoCausal: return "NC";
    case Variant::NoCorrection: return "NMC";
    case Variant::GruCell: return "GRU";
    case Variant::NoFusion: return "NF";
  }
  return "full";
}

Variant variant_from_name(std::string_view name) {
  for (Variant v : {Variant::Full, Variant::NoCausal, Variant::NoCorrection, Variant::GruCell, Variant::NoFusion}) {
    if (name == variant_name(v)) return v;
  }
  throw_error(ErrorKind::Config, "unknown model variant '" + std::string(name) + "' (expected full, NC, NMC, GRU or NF)");
}

void ModelConfig::validate() const {
  const auto positive = [](std::size_t v, const char* what) {
    if (v < 1) throw_error(ErrorKind::Config, std::string("model.") + what + " must be at least 1");
  };
  positive(airports, "airports");
  positive(input_dim, "input_dim");
  positive(hidden, "hidden");
  positive(embedding, "embedding");
  positive(hops, "hops");
  positive(input_steps, "input_steps");
  positive(horizon, "horizon");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw_error(ErrorKind::Config, "model.alpha must be finite and >= 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw_error(ErrorKind::Config, "model.beta must be finite and >= 0");
}

std::size_t ParamSet::add(std::string name, Tensor value, bool trainable) {
  if (find(name)) throw_error(ErrorKind::Config, "duplicate parameter name '" + name + "'");
  names_.push_back(std::move(name));
  values_.push_back(value.detach());
  trainable_.push_back(trainable);
  return values_.size() - 1;
}

void ParamSet::set(std::size_t i, Tensor value) {
  if (value.shape() != values_.at(i).shape()) {
    throw_error(ErrorKind::Shape, "parameter '" + names_[i] + "' expects shape " +
                                      shape_string(values_[i].shape()) + ", got " + shape_string(value.shape()));
  }
  values_[i] = value.detach();
}

std::optional<std::size_t> ParamSet::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t ParamSet::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

namespace {

struct Template {
  ModelLayout layout;
  Builder builder;
};

Template build_template(const ModelConfig& cfg) {
  Template t;
  Builder& b = t.builder;
  const std::size_t f = cfg.width();
  for (std::size_t s = 0; s < kScaleCount; ++s) {
    t.layout.correction.theta[s] = b.add("correction.theta." + scale_key(s), {f, f}, Role::Kernel, f);
  }
  t.layout.correction.fc_weight = b.add("correction.fc.weight", {f, cfg.embedding}, Role::Kernel, f);
  t.layout.correction.fc_bias = b.add("correction.fc.bias", {cfg.embedding}, Role::Bias, f);
  t.layout.correction.e1 = b.add("correction.e1", {cfg.airports, cfg.embedding}, Role::Kernel, cfg.embedding);
  t.layout.correction.e2 = b.add("correction.e2", {cfg.airports, cfg.embedding}, Role::Kernel, cfg.embedding);

  if (cfg.variant == Variant::GruCell) {
    for (const char* g : kGruGates) t.layout.cell.push_back(build_khop(b, std::string("cell.") + g, cfg));
  } else {
    for (const char* g : kLgruGates) t.layout.cell.push_back(build_khop(b, std::string("cell.") + g, cfg));
  }
  t.layout.out_weight = b.add("output.weight", {cfg.hidden, 1}, Role::Kernel, cfg.hidden);
  t.layout.out_bias = b.add("output.bias", {1}, Role::Bias, cfg.hidden);

  if (cfg.variant == Variant::NoFusion) {
    for (const auto& block : t.layout.cell) {
      b.set.set_trainable(block.fit1, false);
      b.set.set_trainable(block.fit2, false);
    }
  }
  return t;
}

}  // namespace

CausalNet::CausalNet(ModelConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  Template t = build_template(cfg_);
  layout_ = std::move(t.layout);
  shapes_ = std::move(t.builder.set);
}

ParamSet CausalNet::zero_params() const { return shapes_; }

ParamSet CausalNet::init_params(std::uint64_t seed) const {
  Template t = build_template(cfg_);
  ParamSet params = std::move(t.builder.set);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Shape& shape = params.value(i).shape();
    std::vector<double> values(shape_size(shape));
    if (t.builder.roles[i] == Role::One) {
      std::fill(values.begin(), values.end(), 1.0);
    } else {
      // Kaiming uniform with a = sqrt(5): bound = 1 / sqrt(fan_in).
      const double bound = 1.0 / std::sqrt(static_cast<double>(t.builder.fan_in[i]));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (auto& v : values) v = dist(rng);
    }
    params.set(i, Tensor(shape, std::move(values)));
  }
  return params;
}

void CausalNet::check_params(const ParamSet& params) const {
  if (params.size() != shapes_.size()) {
    throw_error(ErrorKind::Shape, "expected " + std::to_string(shapes_.size()) + " parameters, got " +
                                      std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params.name(i) != shapes_.name(i)) {
      throw_error(ErrorKind::Shape, "parameter " + std::to_string(i) + " is '" + params.name(i) + "', expected '" +
                                        shapes_.name(i) + "'");
    }
    if (params.value(i).shape() != shapes_.value(i).shape()) {
      throw_error(ErrorKind::Shape, "parameter '" + params.name(i) + "' has shape " +
                                        shape_string(params.value(i).shape()) + ", expected " +
                                        shape_string(shapes_.value(i).shape()));
    }
  }
}

}  // namespace causalnet
