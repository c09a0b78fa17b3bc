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


#include "causalnet/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "causalnet/error.hpp"

namespace causalnet {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr std::array<char, 8> kMagic{'C', 'A', 'U', 'S', 'A', 'L', 'N', 'T'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
    if (!out_) throw_error(ErrorKind::Io, "cannot open checkpoint for writing: " + path.string());
  }
  template <typename T>
  void put(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void bytes(const char* data, std::size_t n) { out_.write(data, static_cast<std::streamsize>(n)); }
  void finish() {
    out_.flush();
    if (!out_) throw_error(ErrorKind::Io, "failed writing checkpoint: " + path_.string());
  }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw_error(ErrorKind::Io, "cannot open checkpoint: " + path.string());
  }
  template <typename T>
  T get() {
    T v{};
    bytes(reinterpret_cast<char*>(&v), sizeof v);
    return v;
  }
  void bytes(char* data, std::size_t n) {
    in_.read(data, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw_error(ErrorKind::Input, "truncated checkpoint: " + path_.string());
    }
  }
  bool at_end() { return in_.peek() == std::ifstream::traits_type::eof(); }

 private:
  std::ifstream in_;
  std::filesystem::path path_;
};

std::uint32_t variant_code(Variant v) { return static_cast<std::uint32_t>(v); }

Variant variant_of(std::uint32_t code) {
  if (code > static_cast<std::uint32_t>(Variant::NoFusion)) {
    throw_error(ErrorKind::Input, "checkpoint names unknown variant code " + std::to_string(code));
  }
  return static_cast<Variant>(code);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config, const ParamSet& params) {
  CausalNet(config).check_params(params);
  Writer w(path);
  w.bytes(kMagic.data(), kMagic.size());
  w.put<std::uint32_t>(kVersion);
  for (std::size_t v : {config.airports, config.input_dim, config.hidden, config.embedding, config.hops,
                        config.input_steps, config.horizon}) {
    w.put<std::uint64_t>(v);
  }
  w.put<double>(config.alpha);
  w.put<double>(config.beta);
  w.put<std::uint32_t>(variant_code(config.variant));
  w.put<std::uint64_t>(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string& name = params.name(i);
    const Tensor& t = params.value(i);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) w.put<std::uint64_t>(d);
    const auto values = t.values();
    w.bytes(reinterpret_cast<const char*>(values.data()), values.size() * sizeof(double));
  }
  w.finish();
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  Reader r(path);
  std::array<char, 8> magic{};
  r.bytes(magic.data(), magic.size());
  if (magic != kMagic) throw_error(ErrorKind::Input, "not a CausalNet checkpoint: " + path.string());
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) {
    throw_error(ErrorKind::Input, "unsupported checkpoint version " + std::to_string(version));
  }
  ModelConfig cfg;
  for (std::size_t* field : {&cfg.airports, &cfg.input_dim, &cfg.hidden, &cfg.embedding, &cfg.hops,
                             &cfg.input_steps, &cfg.horizon}) {
    *field = static_cast<std::size_t>(r.get<std::uint64_t>());
  }
  cfg.alpha = r.get<double>();
  cfg.beta = r.get<double>();
  cfg.variant = variant_of(r.get<std::uint32_t>());
  cfg.validate();

  const CausalNet model(cfg);
  ParamSet params = model.zero_params();
  const auto count = r.get<std::uint64_t>();
  if (count != params.size()) {
    throw_error(ErrorKind::Input, "checkpoint holds " + std::to_string(count) + " parameters, model expects " +
                                      std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto name_len = r.get<std::uint32_t>();
    if (name_len > 4096) throw_error(ErrorKind::Input, "corrupt checkpoint: parameter name too long");
    std::string name(name_len, '\0');
    r.bytes(name.data(), name_len);
    if (name != params.name(i)) {
      throw_error(ErrorKind::Input, "checkpoint parameter " + std::to_string(i) + " is '" + name + "', expected '" +
                                        params.name(i) + "'");
    }
    const auto rank = r.get<std::uint32_t>();
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(r.get<std::uint64_t>());
    if (shape != params.value(i).shape()) {
      throw_error(ErrorKind::Input, "checkpoint parameter '" + name + "' has shape " + shape_string(shape) +
                                        ", expected " + shape_string(params.value(i).shape()));
    }
    std::vector<double> values(shape_size(shape));
    r.bytes(reinterpret_cast<char*>(values.data()), values.size() * sizeof(double));
    params.set(i, Tensor(shape, std::move(values)));
  }
  if (!r.at_end()) throw_error(ErrorKind::Input, "trailing bytes in checkpoint: " + path.string());
  return {cfg, std::move(params)};
}

}  // namespace causalnet
