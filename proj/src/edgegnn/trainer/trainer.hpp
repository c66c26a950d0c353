// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgegnn/gnn/model.hpp"
#include "edgegnn/scenario/scenario.hpp"
#include "edgegnn/trainer/rmsprop.hpp"

namespace edgegnn {

struct TrainConfig {
  double learning_rate = 5e-4;
  int epochs = 50;
  int minibatches_per_epoch = 20;
  int batch_size = 64;
  double rmsprop_decay = 0.99;
  double rmsprop_epsilon = 1e-8;
  double clip_norm = 10.0;  ///< <= 0 disables clipping
  int M_train = 3;
  int K_train = 2;
  std::uint64_t seed = 0;
  int jobs = 1;
  /// 0: fresh instances every minibatch. Otherwise a pool of this many
  /// instances is drawn once and cycled through.
  int fixed_dataset = 0;
  ModelConfig model;
  ScenarioOptions scenario;

  void validate() const;
  RmsPropConfig optimizer() const;
};

nlohmann::json to_json(const TrainConfig& cfg);

struct EpochRecord {
  int epoch = 0;  ///< 1-based, continues across resumes
  double mean_sum_rate = 0.0;
  double loss = 0.0;
  double wall_time = 0.0;
};

nlohmann::json to_json(const EpochRecord& r);

struct BatchResult {
  double loss = 0.0;           ///< -(1/B) sum of sum rates
  double mean_sum_rate = 0.0;
};

/// Loss over a batch and its gradient with respect to every parameter.
/// Samples run on up to `jobs` threads; per-sample gradients are summed in
/// sample order, so the result does not depend on `jobs`.
template <class T>
BatchResult batch_loss(const ModelParams<T>& params, const std::vector<ProblemInstance>& batch,
                       ModelParams<T>* grads, int jobs = 1, const ForwardOptions& options = {});

struct TrainState {
  ModelParams<float> params;
  OptState<float> opt;
  int epochs_done = 0;
};

struct TrainResult {
  TrainState state;
  std::vector<EpochRecord> log;
  /// Set when a non-finite loss stopped training; `state` then holds the
  /// parameters from before the offending step.
  std::optional<std::string> failure;
};

using EpochCallback = std::function<void(const EpochRecord&, const TrainState&)>;

/// Fresh parameters and zeroed optimizer state for cfg.
TrainState initial_state(const TrainConfig& cfg);

/// Runs cfg.epochs epochs starting after `start.epochs_done`. Training data for
/// (epoch, minibatch, sample) is seeded from cfg.seed alone, so a resumed run
/// matches an uninterrupted one.
TrainResult train(const TrainConfig& cfg, TrainState start, const EpochCallback& on_epoch = {});

/// Seed of training sample i in a minibatch.
std::uint64_t training_sample_seed(const TrainConfig& cfg, int epoch, int minibatch, int sample);

}  // namespace edgegnn
