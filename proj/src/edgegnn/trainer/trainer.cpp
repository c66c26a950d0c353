// SPDX-License-Identifier: Apache-2.0
#include "edgegnn/trainer/trainer.hpp"

#include <chrono>
#include <cmath>

#include "edgegnn/errors.hpp"
#include "edgegnn/util/parallel.hpp"
#include "edgegnn/util/seeds.hpp"

namespace edgegnn {

void TrainConfig::validate() const {
  model.validate();
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ArgumentError("learning_rate must be >= 0");
  if (epochs < 0) throw ArgumentError("epochs must be >= 0");
  if (minibatches_per_epoch < 1) throw ArgumentError("minibatches_per_epoch must be >= 1");
  if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
  if (!(rmsprop_decay >= 0.0 && rmsprop_decay < 1.0)) throw ArgumentError("rmsprop_decay must lie in [0, 1)");
  if (!(rmsprop_epsilon >= 0.0)) throw ArgumentError("rmsprop_epsilon must be >= 0");
  if (M_train < 1 || K_train < 1) throw ArgumentError("M_train and K_train must be >= 1");
  if (jobs < 1) throw ArgumentError("jobs must be >= 1");
  if (fixed_dataset < 0) throw ArgumentError("fixed_dataset must be >= 0");
}

RmsPropConfig TrainConfig::optimizer() const {
  return {learning_rate, rmsprop_decay, rmsprop_epsilon, clip_norm};
}

nlohmann::json to_json(const TrainConfig& cfg) {
  return {{"learning_rate", cfg.learning_rate},
          {"epochs", cfg.epochs},
          {"minibatches_per_epoch", cfg.minibatches_per_epoch},
          {"batch_size", cfg.batch_size},
          {"rmsprop_decay", cfg.rmsprop_decay},
          {"rmsprop_epsilon", cfg.rmsprop_epsilon},
          {"clip_norm", cfg.clip_norm},
          {"M_train", cfg.M_train},
          {"K_train", cfg.K_train},
          {"seed", cfg.seed},
          {"fixed_dataset", cfg.fixed_dataset},
          {"model", to_json(cfg.model)}};
}

nlohmann::json to_json(const EpochRecord& r) {
  return {{"epoch", r.epoch}, {"mean_sum_rate", r.mean_sum_rate}, {"loss", r.loss}, {"wall_time", r.wall_time}};
}

namespace {

constexpr std::size_t kChunk = 8;

template <class T>
double sample_rate(const ModelParams<T>& params, const TransposedWeights<T>& transposed, const ProblemInstance& inst,
                   ModelParams<T>* grad, const ForwardOptions& options) {
  ad::Tape<T> tape;
  tape.set_grad_enabled(grad != nullptr);
  const InstanceConstants<T> c = place_instance(tape, inst);
  const BoundParams<T> bound = bind_params(tape, params, &transposed);
  const Topology topo = Topology::full(inst.M, inst.K);
  ad::Var<T> rate = sum_rate(c, forward(c, topo, bound, options));
  const double value = rate.value()[0];
  if (grad && std::isfinite(value)) {
    tape.backward(rate);
    std::vector<ad::Var<T>> leaves;
    for_each_param(static_cast<const ParamSet<ad::Var<T>>&>(bound),
                   [&](const std::string&, const ad::Var<T>& v) { leaves.push_back(v); });
    std::size_t i = 0;
    for_each_param(*grad, [&](const std::string&, ad::Tensor<T>& g) { g = tape.grad(leaves[i++]); });
  }
  return value;
}

template <class T>
void add_into(ModelParams<T>& acc, const ModelParams<T>& x) {
  std::vector<const ad::Tensor<T>*> src;
  for_each_param(x, [&](const std::string&, const ad::Tensor<T>& t) { src.push_back(&t); });
  std::size_t i = 0;
  for_each_param(acc, [&](const std::string&, ad::Tensor<T>& t) {
    const auto& s = *src[i++];
    for (std::size_t j = 0; j < t.size(); ++j) t[j] += s[j];
  });
}

template <class T>
ModelParams<T> zeros_like(const ModelParams<T>& p) {
  ModelParams<T> z = p;
  for_each_param(z, [](const std::string&, ad::Tensor<T>& t) { t.fill(T{0}); });
  return z;
}

}  // namespace

template <class T>
BatchResult batch_loss(const ModelParams<T>& params, const std::vector<ProblemInstance>& batch, ModelParams<T>* grads,
                       int jobs, const ForwardOptions& options) {
  if (batch.empty()) throw ArgumentError("batch_loss: empty batch");
  const TransposedWeights<T> transposed = transpose_weights(params);
  const std::size_t B = batch.size();
  std::vector<double> rates(B, 0.0);
  if (grads) *grads = zeros_like(params);
  std::vector<ModelParams<T>> slots(grads ? std::min(B, kChunk) : 0, grads ? *grads : ModelParams<T>{});

  for (std::size_t start = 0; start < B; start += kChunk) {
    const std::size_t n = std::min(kChunk, B - start);
    parallel_for(n, jobs, [&](std::size_t i) {
      rates[start + i] = sample_rate(params, transposed, batch[start + i], grads ? &slots[i] : nullptr, options);
    });
    if (grads)
      for (std::size_t i = 0; i < n; ++i)
        if (std::isfinite(rates[start + i])) add_into(*grads, slots[i]);
  }

  double total = 0.0;
  for (double r : rates) total += r;
  BatchResult out;
  out.mean_sum_rate = total / static_cast<double>(B);
  out.loss = -out.mean_sum_rate;
  if (grads) {
    const T scale = static_cast<T>(-1.0 / static_cast<double>(B));
    for_each_param(*grads, [&](const std::string&, ad::Tensor<T>& g) {
      for (auto& x : g.data()) x *= scale;
    });
  }
  return out;
}

template BatchResult batch_loss<float>(const ModelParams<float>&, const std::vector<ProblemInstance>&,
                                       ModelParams<float>*, int, const ForwardOptions&);
template BatchResult batch_loss<double>(const ModelParams<double>&, const std::vector<ProblemInstance>&,
                                        ModelParams<double>*, int, const ForwardOptions&);

std::uint64_t training_sample_seed(const TrainConfig& cfg, int epoch, int minibatch, int sample) {
  if (cfg.fixed_dataset > 0) {
    const std::uint64_t flat =
        (static_cast<std::uint64_t>(epoch - 1) * cfg.minibatches_per_epoch + minibatch) * cfg.batch_size + sample;
    return derive_seed(cfg.seed, {2, flat % static_cast<std::uint64_t>(cfg.fixed_dataset)});
  }
  return derive_seed(cfg.seed, {1, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(minibatch),
                                static_cast<std::uint64_t>(sample)});
}

TrainState initial_state(const TrainConfig& cfg) {
  cfg.validate();
  TrainState s;
  s.params = init_params<float>(cfg.model, derive_seed(cfg.seed, {0}));
  s.opt = zero_params<float>(cfg.model);
  return s;
}

TrainResult train(const TrainConfig& cfg, TrainState start, const EpochCallback& on_epoch) {
  cfg.validate();
  TrainResult result;
  result.state = std::move(start);
  TrainState& st = result.state;
  const RmsPropConfig opt = cfg.optimizer();
  ModelParams<float> grads;

  for (int epoch = st.epochs_done + 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    double rate_sum = 0.0;
    for (int b = 0; b < cfg.minibatches_per_epoch; ++b) {
      std::vector<ProblemInstance> batch;
      batch.reserve(cfg.batch_size);
      for (int i = 0; i < cfg.batch_size; ++i)
        batch.push_back(
            sample_instance(cfg.M_train, cfg.K_train, cfg.model.N, training_sample_seed(cfg, epoch, b, i), cfg.scenario));
      const BatchResult br = batch_loss(st.params, batch, &grads, cfg.jobs);
      const double norm = global_norm(grads);
      if (!std::isfinite(br.loss) || !std::isfinite(norm)) {
        result.failure = "non-finite " + std::string(std::isfinite(br.loss) ? "gradient" : "loss") + " at epoch " +
                         std::to_string(epoch) + ", minibatch " + std::to_string(b + 1);
        return result;
      }
      rmsprop_step(st.params, grads, st.opt, opt);
      rate_sum += br.mean_sum_rate;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.mean_sum_rate = rate_sum / cfg.minibatches_per_epoch;
    rec.loss = -rec.mean_sum_rate;
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    st.epochs_done = epoch;
    result.log.push_back(rec);
    if (on_epoch) on_epoch(rec, st);
  }
  return result;
}

}  // namespace edgegnn
