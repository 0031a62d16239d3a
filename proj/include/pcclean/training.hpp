// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0
//
// Minibatch SGD shared by the detector and denoiser trainers.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "pcclean/autodiff/ops.hpp"
#include "pcclean/network/params.hpp"
#include "pcclean/rng.hpp"

namespace pcclean {

struct TrainHyper {
  std::size_t batch = 16;
  double lr = 1e-4;
  std::size_t epochs = 50;
  std::uint64_t seed = 0;
  InitScheme init = InitScheme::He;  ///< used when training starts from scratch
};

struct EpochLoss {
  std::size_t epoch = 0;  ///< 1-based
  double mean_loss = 0.0;
  friend bool operator==(const EpochLoss&, const EpochLoss&) = default;
};

using EpochCallback = std::function<void(const EpochLoss&)>;

/// One line per epoch: "epoch,mean_loss".
inline void write_loss_log(std::ostream& out, const std::vector<EpochLoss>& log) {
  char buf[64];
  for (const EpochLoss& e : log) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", e.epoch, e.mean_loss);
    out << buf;
  }
}

/// Plain SGD over `n_samples` samples. `sample_loss(tape, i)` must return the
/// scalar loss of sample i computed from `model.params`. The reported epoch
/// loss is the mean per-sample loss seen during that epoch.
template <typename SampleLoss>
std::vector<EpochLoss> sgd_train(Model& model, std::size_t n_samples, const TrainHyper& hyper, SampleLoss&& sample_loss,
                                 const EpochCallback& on_epoch = {}) {
  detail::require(hyper.batch >= 1, "train: batch size must be at least 1");
  detail::require(hyper.lr >= 0.0 && std::isfinite(hyper.lr), "train: learning rate must be finite and >= 0");
  if (n_samples == 0) throw DataError("train: dataset is empty");

  std::vector<std::size_t> order(n_samples);
  std::vector<EpochLoss> log;
  model.params.zero_grad();
  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = make_rng(hyper.seed, epoch);
    std::shuffle(order.begin(), order.end(), rng);

    double total = 0.0;
    for (std::size_t start = 0; start < n_samples; start += hyper.batch) {
      const std::size_t end = std::min(n_samples, start + hyper.batch);
      ad::Tape tape;
      std::vector<ad::Tensor> losses;
      losses.reserve(end - start);
      for (std::size_t s = start; s < end; ++s) {
        losses.push_back(sample_loss(tape, order[s]));
        total += losses.back().item();
      }
      const ad::Tensor batch_loss =
          ad::scale(tape, ad::add_n(tape, losses), 1.0 / static_cast<double>(end - start));
      tape.backward(batch_loss);
      for (auto& [_, w] : model.params.entries()) {
        auto v = w.mutable_values();
        const auto g = w.grad();
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= hyper.lr * g[i];
        w.zero_grad();
      }
    }
    log.push_back({epoch, total / static_cast<double>(n_samples)});
    if (on_epoch) on_epoch(log.back());
  }
  return log;
}

}  // namespace pcclean
