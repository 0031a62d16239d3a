// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0
//
// Named parameter sets, their initialization, and checkpoint conversion.

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pcclean/autodiff/checkpoint.hpp"
#include "pcclean/autodiff/init.hpp"
#include "pcclean/autodiff/tensor.hpp"
#include "pcclean/network/config.hpp"

namespace pcclean {

/// Ordered, uniquely named collection of trainable tensors.
class ModelParams {
 public:
  void add(std::string name, ad::Tensor t) {
    if (index_.contains(name)) throw InvalidArgument("ModelParams: duplicate parameter '" + name + "'");
    index_.emplace(name, entries_.size());
    entries_.emplace_back(std::move(name), std::move(t));
  }

  [[nodiscard]] const ad::Tensor& at(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw InvalidArgument("ModelParams: no parameter '" + std::string(name) + "'");
    return entries_[it->second].second;
  }
  [[nodiscard]] ad::Tensor& at(std::string_view name) {
    return const_cast<ad::Tensor&>(std::as_const(*this).at(name));
  }
  [[nodiscard]] bool contains(std::string_view name) const { return index_.contains(std::string(name)); }

  [[nodiscard]] const std::vector<std::pair<std::string, ad::Tensor>>& entries() const { return entries_; }
  [[nodiscard]] std::vector<std::pair<std::string, ad::Tensor>>& entries() { return entries_; }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }

  [[nodiscard]] std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& [_, t] : entries_) n += t.size();
    return n;
  }

  void zero_grad() {
    for (auto& [_, t] : entries_) t.zero_grad();
  }

  /// Deep copy; the clone shares no storage with this set.
  [[nodiscard]] ModelParams clone() const {
    ModelParams p;
    for (const auto& [name, t] : entries_) p.add(name, t.clone());
    return p;
  }

 private:
  std::vector<std::pair<std::string, ad::Tensor>> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

enum class InitScheme {
  He,       ///< N(0, 2/fan_in) weights
  Uniform,  ///< U(-0.001, 0.001) weights
};

inline constexpr double kUniformInitBound = 0.001;

struct Model {
  ModelKind kind = ModelKind::Detector;
  ModelConfig config;
  ModelParams params;
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t ordinal) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (ordinal + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

struct ParamBuilder {
  ModelParams& params;
  InitScheme scheme;
  std::uint64_t seed;
  std::uint64_t ordinal = 0;

  void dense(const std::string& name, std::size_t in, std::size_t out) {
    const std::uint64_t s = mix_seed(seed, ordinal++);
    params.add(name + ".w", scheme == InitScheme::He
                                ? ad::init_he({in, out}, s)
                                : ad::init_uniform({in, out}, -kUniformInitBound, kUniformInitBound, s));
    params.add(name + ".b", ad::Tensor::zeros({out}, true));
  }

  // Small-noise weights with a chosen bias: the layer starts near a known output.
  void near_constant(const std::string& name, std::size_t in, std::vector<double> bias) {
    const std::uint64_t s = mix_seed(seed, ordinal++);
    const std::size_t out = bias.size();
    params.add(name + ".w", ad::init_uniform({in, out}, -kUniformInitBound, kUniformInitBound, s));
    params.add(name + ".b", ad::Tensor({out}, std::move(bias), true));
  }
};

}  // namespace detail

/// Fresh parameters for `kind` under `config`. Biases start at zero; the
/// QSTN output starts at the identity quaternion and the denoiser output
/// layer starts near zero displacement.
[[nodiscard]] inline Model make_model(ModelKind kind, ModelConfig config, InitScheme scheme, std::uint64_t seed) {
  config.output_dim = kind == ModelKind::Detector ? 1 : 3;
  config.validate();
  Model m{kind, config, {}};
  detail::ParamBuilder b{m.params, scheme, seed};

  b.dense("qstn.conv0", 3, config.qstn_widths[0]);
  b.dense("qstn.conv1", config.qstn_widths[0], config.qstn_widths[1]);
  b.dense("qstn.fc0", config.qstn_widths[1], config.qstn_hidden);
  b.near_constant("qstn.out", config.qstn_hidden, {1.0, 0.0, 0.0, 0.0});

  std::size_t in = 3;
  std::size_t concat = 0;
  for (std::size_t l = 0; l < 4; ++l) {
    b.dense("gconv.lfn" + std::to_string(l), 2 * in, config.local_widths[l]);
    in = config.local_widths[l];
    concat += in;
  }
  b.dense("global", concat, config.global_width);

  b.dense("head.fc0", config.global_width, config.head_widths[0]);
  b.dense("head.res0.a", config.head_widths[0], config.head_widths[0]);
  b.dense("head.res0.b", config.head_widths[0], config.head_widths[0]);
  b.dense("head.fc1", config.head_widths[0], config.head_widths[1]);
  b.dense("head.res1.a", config.head_widths[1], config.head_widths[1]);
  b.dense("head.res1.b", config.head_widths[1], config.head_widths[1]);
  if (kind == ModelKind::Denoiser) {
    b.near_constant("head.out", config.head_widths[1], {0.0, 0.0, 0.0});
  } else {
    b.dense("head.out", config.head_widths[1], 1);
  }
  return m;
}

[[nodiscard]] inline ad::Checkpoint to_checkpoint(const Model& model) {
  ad::Checkpoint c;
  c.kind = to_string(model.kind);
  c.metadata = model.config.to_metadata();
  for (const auto& [name, t] : model.params.entries()) {
    c.tensors.push_back({name, t.shape(), t.value_vector()});
  }
  return c;
}

/// Rebuilds a model and checks every tensor against the architecture that
/// its embedded config implies.
[[nodiscard]] inline Model from_checkpoint(const ad::Checkpoint& c) {
  const ModelKind kind = [&] {
    try {
      return parse_model_kind(c.kind);
    } catch (const InvalidArgument& e) {
      throw DataError(std::string("checkpoint: ") + e.what());
    }
  }();
  const ModelConfig config = ModelConfig::from_metadata([&](const char* key) { return c.find_meta(key); });
  Model reference = make_model(kind, config, InitScheme::Uniform, 0);
  if (reference.params.size() != c.tensors.size()) {
    throw DataError("checkpoint: expected " + std::to_string(reference.params.size()) + " tensors, found " +
                    std::to_string(c.tensors.size()));
  }
  Model m{kind, reference.config, {}};
  for (std::size_t i = 0; i < c.tensors.size(); ++i) {
    const auto& [ref_name, ref_t] = reference.params.entries()[i];
    const ad::NamedTensor& t = c.tensors[i];
    if (t.name != ref_name || t.shape != ref_t.shape()) {
      throw DataError("checkpoint: tensor " + std::to_string(i) + " is '" + t.name + "' " + ad::shape_string(t.shape) +
                      ", expected '" + ref_name + "' " + ad::shape_string(ref_t.shape()));
    }
    m.params.add(t.name, ad::Tensor(t.shape, t.values, true));
  }
  return m;
}

inline void save_model(const Model& model, const std::string& path) { ad::save_checkpoint(to_checkpoint(model), path); }

[[nodiscard]] inline Model load_model(const std::string& path) { return from_checkpoint(ad::load_checkpoint(path)); }

}  // namespace pcclean
