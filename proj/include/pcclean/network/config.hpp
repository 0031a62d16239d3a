// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pcclean/errors.hpp"

namespace pcclean {

/// How the graph convolutional layer obtains its neighbor graphs.
enum class GraphConvVariant {
  Dynamic,      ///< "ours1": kNN recomputed in feature space before every local feature network
  FixedLowDim,  ///< "ours2": kNN computed once on 3-D coordinates and reused
};

enum class ModelKind { Detector, Denoiser };

[[nodiscard]] inline std::string to_string(GraphConvVariant v) {
  return v == GraphConvVariant::Dynamic ? "ours1" : "ours2";
}

[[nodiscard]] inline GraphConvVariant parse_variant(std::string_view s) {
  if (s == "ours1" || s == "dynamic") return GraphConvVariant::Dynamic;
  if (s == "ours2" || s == "fixed") return GraphConvVariant::FixedLowDim;
  throw InvalidArgument("unknown graph-conv variant '" + std::string(s) + "' (expected ours1 or ours2)");
}

[[nodiscard]] inline std::string to_string(ModelKind k) { return k == ModelKind::Detector ? "detector" : "denoiser"; }

[[nodiscard]] inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "detector") return ModelKind::Detector;
  if (s == "denoiser") return ModelKind::Denoiser;
  throw InvalidArgument("unknown model kind '" + std::string(s) + "'");
}

struct ModelConfig {
  std::size_t k = 16;
  GraphConvVariant variant = GraphConvVariant::Dynamic;
  std::array<std::size_t, 4> local_widths{64, 64, 128, 256};
  std::size_t global_width = 1024;
  std::array<std::size_t, 2> head_widths{512, 256};
  std::size_t output_dim = 1;
  std::array<std::size_t, 2> qstn_widths{64, 128};
  std::size_t qstn_hidden = 64;

  [[nodiscard]] static ModelConfig for_kind(ModelKind kind) {
    ModelConfig c;
    c.output_dim = kind == ModelKind::Detector ? 1 : 3;
    return c;
  }

  void validate() const {
    detail::require(k >= 1, "ModelConfig: k must be at least 1");
    for (std::size_t w : local_widths) detail::require(w >= 1, "ModelConfig: local feature widths must be >= 1");
    for (std::size_t w : head_widths) detail::require(w >= 1, "ModelConfig: head widths must be >= 1");
    for (std::size_t w : qstn_widths) detail::require(w >= 1, "ModelConfig: QSTN widths must be >= 1");
    detail::require(global_width >= 1 && qstn_hidden >= 1, "ModelConfig: widths must be >= 1");
    detail::require(output_dim == 1 || output_dim == 3, "ModelConfig: output_dim must be 1 or 3");
  }

  /// Flat key/value form stored in checkpoints.
  [[nodiscard]] std::vector<std::pair<std::string, std::string>> to_metadata() const {
    auto join = [](const auto& arr) {
      std::string s;
      for (std::size_t i = 0; i < arr.size(); ++i) s += (i ? "," : "") + std::to_string(arr[i]);
      return s;
    };
    return {{"k", std::to_string(k)},
            {"variant", to_string(variant)},
            {"local_widths", join(local_widths)},
            {"global_width", std::to_string(global_width)},
            {"head_widths", join(head_widths)},
            {"output_dim", std::to_string(output_dim)},
            {"qstn_widths", join(qstn_widths)},
            {"qstn_hidden", std::to_string(qstn_hidden)}};
  }

  template <typename Lookup>
  [[nodiscard]] static ModelConfig from_metadata(Lookup&& lookup) {
    auto get = [&](const char* key) -> std::string {
      const std::string* v = lookup(key);
      if (!v) throw DataError(std::string("checkpoint: missing config field '") + key + "'");
      return *v;
    };
    auto num = [](const std::string& s) -> std::size_t {
      try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) throw DataError("checkpoint: bad integer '" + s + "'");
        return static_cast<std::size_t>(v);
      } catch (const std::logic_error&) {
        throw DataError("checkpoint: bad integer '" + s + "'");
      }
    };
    auto list = [&](const std::string& s, auto& arr) {
      std::size_t i = 0;
      std::size_t start = 0;
      while (start <= s.size()) {
        const std::size_t end = std::min(s.find(',', start), s.size());
        if (i >= arr.size()) throw DataError("checkpoint: too many entries in '" + s + "'");
        arr[i++] = num(s.substr(start, end - start));
        start = end + 1;
      }
      if (i != arr.size()) throw DataError("checkpoint: too few entries in '" + s + "'");
    };
    ModelConfig c;
    c.k = num(get("k"));
    c.variant = parse_variant(get("variant"));
    list(get("local_widths"), c.local_widths);
    c.global_width = num(get("global_width"));
    list(get("head_widths"), c.head_widths);
    c.output_dim = num(get("output_dim"));
    list(get("qstn_widths"), c.qstn_widths);
    c.qstn_hidden = num(get("qstn_hidden"));
    c.validate();
    return c;
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

}  // namespace pcclean
