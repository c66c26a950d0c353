// SPDX-License-Identifier: Apache-2.0
#include "edgegnn/edgegnn.h"

#include <cstring>
#include <string>

#include "edgegnn/baselines/baselines.hpp"
#include "edgegnn/errors.hpp"
#include "edgegnn/experiments/commands.hpp"
#include "edgegnn/gnn/checkpoint.hpp"
#include "edgegnn/gnn/model.hpp"
#include "edgegnn/scenario/instance_io.hpp"
#include "edgegnn/scenario/scenario.hpp"

struct egnn_instance {
  edgegnn::ProblemInstance rep;
};

struct egnn_model {
  edgegnn::InferenceModel<float> rep;
};

namespace {

thread_local std::string last_error;

egnn_status fail(egnn_status s, const std::string& message) {
  last_error = message;
  return s;
}

template <class Fn>
egnn_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    return fn();
  } catch (const std::exception& e) {
    return fail(static_cast<egnn_status>(edgegnn::exit_code_for(e)), e.what());
  } catch (...) {
    return fail(EGNN_ERR_INTERNAL, "unknown exception");
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::size_t beamformer_len(const edgegnn::ProblemInstance& inst) {
  return 2 * static_cast<std::size_t>(inst.M) * inst.K * inst.N;
}

egnn_status export_beamformer(const edgegnn::Beamformer& V, double* out, std::size_t len) {
  if (len != 2 * V.weights.size())
    return fail(EGNN_ERR_ARGUMENT, "beamformer buffer needs " + std::to_string(2 * V.weights.size()) + " doubles");
  for (std::size_t i = 0; i < V.weights.size(); ++i) {
    out[2 * i] = V.weights[i].real();
    out[2 * i + 1] = V.weights[i].imag();
  }
  return EGNN_OK;
}

nlohmann::json parse_object(const char* text, const char* what) {
  if (!text || !*text) return nlohmann::json::object();
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw edgegnn::ArgumentError(std::string(what) + " is not a JSON object");
  return j;
}

}  // namespace

extern "C" {

const char* egnn_last_error(void) { return last_error.c_str(); }

const char* egnn_version(void) { return "0.1.0"; }

void egnn_string_free(char* s) { delete[] s; }

egnn_status egnn_instance_sample(int M, int K, int N, uint64_t seed, egnn_instance** out) {
  if (!out) return fail(EGNN_ERR_NULL, "out is NULL");
  *out = nullptr;
  return guarded([&] {
    if (M < 1 || K < 1 || N < 1) throw edgegnn::ArgumentError("M, K and N must be >= 1");
    *out = new egnn_instance{edgegnn::sample_instance(M, K, N, seed)};
    return EGNN_OK;
  });
}

egnn_status egnn_instance_load(const char* path, size_t index, egnn_instance** out) {
  if (!path || !out) return fail(EGNN_ERR_NULL, "path or out is NULL");
  *out = nullptr;
  return guarded([&] {
    edgegnn::InstanceBatch batch = edgegnn::read_instance_batch(path);
    if (index >= batch.instances.size())
      throw edgegnn::ArgumentError("index " + std::to_string(index) + " out of range (file holds " +
                                   std::to_string(batch.instances.size()) + " instances)");
    *out = new egnn_instance{std::move(batch.instances[index])};
    return EGNN_OK;
  });
}

egnn_status egnn_instance_dims(const egnn_instance* inst, int* M, int* K, int* N) {
  if (!inst) return fail(EGNN_ERR_NULL, "instance is NULL");
  if (M) *M = inst->rep.M;
  if (K) *K = inst->rep.K;
  if (N) *N = inst->rep.N;
  return EGNN_OK;
}

void egnn_instance_free(egnn_instance* inst) { delete inst; }

egnn_status egnn_sum_rate(const egnn_instance* inst, const double* v, size_t len, double* rate) {
  if (!inst || !v || !rate) return fail(EGNN_ERR_NULL, "instance, v or rate is NULL");
  return guarded([&] {
    const auto& p = inst->rep;
    if (len != beamformer_len(p))
      return fail(EGNN_ERR_ARGUMENT, "beamformer buffer needs " + std::to_string(beamformer_len(p)) + " doubles");
    edgegnn::Beamformer V(p.M, p.K, p.N);
    for (std::size_t i = 0; i < V.weights.size(); ++i) V.weights[i] = {v[2 * i], v[2 * i + 1]};
    *rate = edgegnn::sum_rate(p, V);
    return EGNN_OK;
  });
}

egnn_status egnn_model_load(const char* checkpoint_path, egnn_model** out) {
  if (!checkpoint_path || !out) return fail(EGNN_ERR_NULL, "path or out is NULL");
  *out = nullptr;
  return guarded([&] {
    *out = new egnn_model{edgegnn::InferenceModel<float>(edgegnn::load_checkpoint(checkpoint_path).params)};
    return EGNN_OK;
  });
}

egnn_status egnn_model_random(int L, int d, int N, uint64_t seed, egnn_model** out) {
  if (!out) return fail(EGNN_ERR_NULL, "out is NULL");
  *out = nullptr;
  return guarded([&] {
    edgegnn::ModelConfig cfg;
    cfg.L = L;
    cfg.d = d;
    cfg.N = N;
    cfg.validate();
    *out = new egnn_model{edgegnn::InferenceModel<float>(edgegnn::init_params<float>(cfg, seed))};
    return EGNN_OK;
  });
}

egnn_status egnn_model_infer(const egnn_model* model, const egnn_instance* inst, double* v_out, size_t len) {
  if (!model || !inst || !v_out) return fail(EGNN_ERR_NULL, "model, instance or v_out is NULL");
  return guarded([&] { return export_beamformer(model->rep.infer(inst->rep), v_out, len); });
}

egnn_status egnn_model_parameter_count(const egnn_model* model, size_t* count) {
  if (!model || !count) return fail(EGNN_ERR_NULL, "model or count is NULL");
  *count = edgegnn::parameter_count(model->rep.params());
  return EGNN_OK;
}

void egnn_model_free(egnn_model* model) { delete model; }

egnn_status egnn_solve(const egnn_instance* inst, const char* solver, int max_iters, double* v_out, size_t len,
                       double* rate, int* converged) {
  if (!inst || !solver || !v_out) return fail(EGNN_ERR_NULL, "instance, solver or v_out is NULL");
  return guarded([&] {
    edgegnn::SolverRunOptions o;
    o.max_iters = max_iters;
    const edgegnn::SolverRun run = edgegnn::run_solver(solver, {inst->rep}, o);
    const edgegnn::SolverReport& r = run.reports.front();
    if (!run.failures.empty()) return fail(EGNN_ERR_NUMERIC, r.note);
    if (rate) *rate = r.final_rate();
    if (converged) *converged = r.converged ? 1 : 0;
    return export_beamformer(r.V, v_out, len);
  });
}

egnn_status egnn_cmd_defaults(const char* command, char** defaults_json) {
  if (!command || !defaults_json) return fail(EGNN_ERR_NULL, "command or defaults_json is NULL");
  *defaults_json = nullptr;
  return guarded([&] {
    *defaults_json = dup_string(edgegnn::default_spec(command).dump());
    return EGNN_OK;
  });
}

egnn_status egnn_cmd_run(const char* command, const char* config_json, const char* flags_json, egnn_log_fn log,
                         void* user, char** summary_json) {
  if (summary_json) *summary_json = nullptr;
  if (!command) return fail(EGNN_ERR_NULL, "command is NULL");
  return guarded([&] {
    const nlohmann::json config = parse_object(config_json, "config");
    const nlohmann::json flags = parse_object(flags_json, "flags");
    edgegnn::LogSink sink;
    if (log) sink = [&](const std::string& line) { log(line.c_str(), user); };
    const edgegnn::CommandResult result = edgegnn::run_command(command, config, flags, sink);
    if (summary_json) *summary_json = dup_string(result.summary.dump());
    if (result.exit_code == EGNN_ERR_PROPERTY) last_error = "property check failed";
    return static_cast<egnn_status>(result.exit_code);
  });
}

}  // extern "C"
