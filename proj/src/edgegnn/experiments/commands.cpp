// SPDX-License-Identifier: Apache-2.0
#include "edgegnn/experiments/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "edgegnn/errors.hpp"
#include "edgegnn/experiments/properties.hpp"
#include "edgegnn/gnn/checkpoint.hpp"
#include "edgegnn/scenario/instance_io.hpp"
#include "edgegnn/trainer/evaluate.hpp"
#include "edgegnn/util/parallel.hpp"
#include "edgegnn/util/seeds.hpp"
#include "edgegnn/util/timing.hpp"

namespace edgegnn {
namespace {

using nlohmann::json;

void emit(const LogSink& log, const std::string& line) {
  if (log) log(line);
}

std::string fixed(double x, int digits = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << x;
  return s.str();
}

/// Writes `text` to `path`, or hands it to the log when no path is set.
void deliver(const std::string& path, const std::string& text, const LogSink& log) {
  if (path.empty())
    emit(log, text);
  else
    write_text_file(path, text);
}

json spec_echo(const ExperimentSpec& spec) { return spec.to_json(); }

Checkpoint load_model(const std::string& path) {
  if (path.empty()) throw ArgumentError("a checkpoint path is required");
  return load_checkpoint(path);
}

/// Antenna count for a command reading a checkpoint: the spec value must match
/// the checkpoint when it is given.
int resolve_antennas(const ExperimentSpec& spec, const ModelConfig& cfg) {
  const int requested = spec.get<int>("N");
  if (requested != 0 && requested != cfg.N)
    throw ArgumentError("checkpoint was trained with N = " + std::to_string(cfg.N) + " antennas but N = " +
                        std::to_string(requested) + " was requested");
  return cfg.N;
}

// Training state <-> checkpoint.

Checkpoint state_checkpoint(const TrainConfig& cfg, const TrainState& st, const ExperimentSpec& spec) {
  Checkpoint ck;
  ck.config = cfg.model;
  ck.params = st.params;
  OptState<float> opt = st.opt;
  for_each_param(opt, [&](const std::string& name, ad::Tensor<float>& t) { ck.extra["opt." + name] = t; });
  ck.metadata = {{"spec", spec_echo(spec)},
                 {"train_config", to_json(cfg)},
                 {"epochs_done", st.epochs_done},
                 {"params_fingerprint", params_fingerprint(st.params)}};
  return ck;
}

TrainState state_from_checkpoint(const Checkpoint& ck, const TrainConfig& cfg) {
  if (to_json(ck.config) != to_json(cfg.model))
    throw ArgumentError("resume checkpoint model " + to_json(ck.config).dump() + " differs from the requested " +
                        to_json(cfg.model).dump());
  TrainState st;
  st.params = ck.params;
  st.opt = zero_params<float>(cfg.model);
  for_each_param(st.opt, [&](const std::string& name, ad::Tensor<float>& t) {
    auto it = ck.extra.find("opt." + name);
    if (it == ck.extra.end()) throw IoError("resume checkpoint lacks optimizer state for " + name);
    if (it->second.shape() != t.shape()) throw IoError("optimizer state shape mismatch for " + name);
    t = it->second;
  });
  st.epochs_done = ck.metadata.value("epochs_done", 0);
  return st;
}

/// Keeps the log lines of epochs up to `epochs_done`, dropping any written
/// after the checkpoint being resumed.
std::string surviving_log(const std::string& path, int epochs_done) {
  std::ifstream in(path);
  if (!in) return {};
  std::string out, line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.contains("epoch")) continue;
    if (rec["epoch"].get<int>() <= epochs_done) out += line + "\n";
  }
  return out;
}

std::vector<double> flat_real(const Beamformer& V, bool imag) {
  std::vector<double> out;
  out.reserve(V.weights.size());
  for (const auto& w : V.weights) out.push_back(imag ? w.imag() : w.real());
  return out;
}

double mean_of(const std::vector<double>& xs) { return mean_std(xs).first; }

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ArgumentError*>(&e)) return kExitArgument;
  if (dynamic_cast<const NumericError*>(&e)) return kExitNumeric;
  if (dynamic_cast<const SolverError*>(&e)) return kExitNumeric;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const std::invalid_argument*>(&e)) return kExitArgument;
  return kExitInternal;
}

std::string sibling_path(const std::string& path, const std::string& suffix) {
  const std::string ext = ".json";
  if (path.size() > ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0)
    return path.substr(0, path.size() - ext.size()) + suffix;
  return path + suffix;
}

json to_json(const SolverReport& r) {
  return {{"instance_id", r.instance_id},
          {"solver", r.solver},
          {"final_rate", r.final_rate()},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"feasible", r.feasible},
          {"note", r.note},
          {"wall_time", r.wall_time},
          {"objective_trace", r.objective_trace},
          {"m", r.V.M},
          {"k", r.V.K},
          {"n", r.V.N},
          {"v_re", flat_real(r.V, false)},
          {"v_im", flat_real(r.V, true)}};
}

SolverReport solver_report_from_json(const json& j) {
  try {
    SolverReport r;
    r.instance_id = j.at("instance_id").get<int>();
    r.solver = j.at("solver").get<std::string>();
    r.iterations = j.at("iterations").get<int>();
    r.converged = j.at("converged").get<bool>();
    r.feasible = j.at("feasible").get<bool>();
    r.note = j.value("note", "");
    r.wall_time = j.value("wall_time", 0.0);
    r.objective_trace = j.at("objective_trace").get<std::vector<double>>();
    r.V = Beamformer(j.at("m").get<int>(), j.at("k").get<int>(), j.at("n").get<int>());
    const auto re = j.at("v_re").get<std::vector<double>>();
    const auto im = j.at("v_im").get<std::vector<double>>();
    if (re.size() != r.V.weights.size() || im.size() != r.V.weights.size())
      throw IoError("solver report beamformer has the wrong length");
    for (std::size_t i = 0; i < re.size(); ++i) r.V.weights[i] = cdouble(re[i], im[i]);
    return r;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed solver report: ") + e.what());
  }
}

SolverRun run_solver(const std::string& solver, const std::vector<ProblemInstance>& instances,
                     const SolverRunOptions& o) {
  if (solver != "wmmse" && solver != "gp") throw ArgumentError("unknown solver '" + solver + "'");
  auto solve = [&](const ProblemInstance& inst) {
    if (solver == "wmmse") {
      WmmseOptions w;
      if (o.max_iters > 0) w.max_iters = o.max_iters;
      w.tol = o.tol;
      return wmmse_solve(inst, w);
    }
    GpOptions g;
    if (o.max_iters > 0) g.max_iters = o.max_iters;
    g.tol = o.tol;
    return gp_solve(inst, g);
  };

  SolverRun run;
  const std::size_t n = instances.size();
  run.reports.resize(n);
  run.times.assign(n, 0.0);
  std::vector<char> failed(n, 0);
  auto one = [&](std::size_t i) {
    try {
      run.reports[i] = solve(instances[i]);
      run.times[i] = run.reports[i].wall_time;
    } catch (const Error& e) {
      SolverReport r;
      r.solver = solver;
      r.note = e.what();
      run.reports[i] = std::move(r);
      failed[i] = 1;
    }
    run.reports[i].instance_id = static_cast<int>(i);
  };
  // Timed runs stay on one thread so wall times are not inflated by contention.
  parallel_for(n, o.timing_repeats > 0 ? 1 : o.jobs, one);
  if (o.timing_repeats > 1)
    for (std::size_t i = 0; i < n; ++i) {
      if (failed[i]) continue;
      std::vector<double> t{run.times[i]};
      for (int r = 1; r < o.timing_repeats; ++r) t.push_back(solve(instances[i]).wall_time);
      run.times[i] = median(std::move(t));
    }
  for (std::size_t i = 0; i < n; ++i)
    if (failed[i]) run.failures.push_back(static_cast<int>(i));
  return run;
}

std::vector<ProblemInstance> test_instances(int M, int K, int N, int count, std::uint64_t seed,
                                            const ScenarioOptions& scenario) {
  std::vector<ProblemInstance> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i)
    out.push_back(sample_instance(M, K, N,
                                  derive_seed(seed, {3, std::uint64_t(M), std::uint64_t(K), std::uint64_t(i)}),
                                  scenario));
  return out;
}

CommandResult cmd_generate(const ExperimentSpec& spec, const LogSink& log) {
  const int M = spec.get<int>("M"), K = spec.get<int>("K"), N = spec.get<int>("N");
  const int count = spec.get<int>("count");
  const auto seed = spec.get<std::uint64_t>("seed");
  const ScenarioOptions scenario = scenario_from_spec(spec);

  InstanceBatch batch;
  batch.spec = spec_echo(spec);
  batch.instances.resize(count);
  parallel_for(count, spec.get<int>("jobs"), [&](std::size_t i) {
    batch.instances[i] = sample_instance(M, K, N, derive_seed(seed, {4, i}), scenario);
  });

  const std::string out = spec.get<std::string>("out");
  if (out.empty()) throw ArgumentError("generate needs --out");
  write_instance_batch(out, batch);
  emit(log, "wrote " + std::to_string(count) + " instances (M=" + std::to_string(M) + ", K=" + std::to_string(K) +
                ", N=" + std::to_string(N) + ") to " + out);
  CommandResult r;
  r.summary = {{"command", "generate"}, {"out", out}, {"count", count}};
  return r;
}

CommandResult cmd_train(const ExperimentSpec& spec, const LogSink& log) {
  const TrainConfig cfg = train_config_from_spec(spec);
  const std::string out = spec.get<std::string>("out");
  if (out.empty()) throw ArgumentError("train needs --out for the checkpoint");
  const std::string log_path =
      spec.get<std::string>("log").empty() ? sibling_path(out, ".log.jsonl") : spec.get<std::string>("log");
  const std::string resume = spec.get<std::string>("resume");
  const int every = spec.get<int>("checkpoint_every");

  TrainState start = initial_state(cfg);
  std::string kept_log;
  if (!resume.empty()) {
    start = state_from_checkpoint(load_checkpoint(resume), cfg);
    kept_log = surviving_log(log_path, start.epochs_done);
    emit(log, "resuming after epoch " + std::to_string(start.epochs_done) + " from " + resume);
  }
  write_text_file(log_path, kept_log);
  std::ofstream log_file(log_path, std::ios::app);
  if (!log_file) throw IoError("cannot open " + log_path);

  auto on_epoch = [&](const EpochRecord& rec, const TrainState& st) {
    log_file << to_json(rec).dump() << "\n";
    log_file.flush();
    emit(log, "epoch " + std::to_string(rec.epoch) + "  mean_sum_rate " + fixed(rec.mean_sum_rate) + "  loss " +
                  fixed(rec.loss) + "  " + fixed(rec.wall_time, 2) + " s");
    if (every > 0 && rec.epoch % every == 0 && rec.epoch < cfg.epochs)
      save_checkpoint(out, state_checkpoint(cfg, st, spec));
  };
  TrainResult res = train(cfg, std::move(start), on_epoch);

  if (res.failure) {
    Checkpoint diag = state_checkpoint(cfg, res.state, spec);
    diag.metadata["failure"] = *res.failure;
    const std::string diag_path = sibling_path(out, ".diagnostic.json");
    save_checkpoint(diag_path, diag);
    throw NumericError(*res.failure + " (diagnostic checkpoint: " + diag_path + ")");
  }
  save_checkpoint(out, state_checkpoint(cfg, res.state, spec));

  CommandResult r;
  r.summary = {{"command", "train"},
               {"checkpoint", out},
               {"log", log_path},
               {"epochs_done", res.state.epochs_done},
               {"params_fingerprint", params_fingerprint(res.state.params)}};
  if (!res.log.empty()) r.summary["final_mean_sum_rate"] = res.log.back().mean_sum_rate;
  return r;
}

CommandResult cmd_baseline(const ExperimentSpec& spec, const LogSink& log) {
  const InstanceBatch batch = read_instance_batch(spec.get<std::string>("instances"));
  const std::string solver = spec.get<std::string>("solver");
  SolverRunOptions o;
  o.max_iters = spec.get<int>("max_iters");
  o.tol = spec.get<double>("tol");
  o.jobs = spec.get<int>("jobs");
  const SolverRun run = run_solver(solver, batch.instances, o);

  json reports = json::array();
  std::vector<double> rates, times;
  for (std::size_t i = 0; i < run.reports.size(); ++i) {
    json j = to_json(run.reports[i]);
    const bool failed = std::find(run.failures.begin(), run.failures.end(), static_cast<int>(i)) != run.failures.end();
    j["failed"] = failed;
    reports.push_back(std::move(j));
    if (failed) continue;
    rates.push_back(run.reports[i].final_rate());
    times.push_back(run.times[i]);
  }
  const json summary = {{"solver", solver},
                        {"count", run.reports.size()},
                        {"failures", run.failures},
                        {"mean_rate", mean_of(rates)},
                        {"mean_wall_time", mean_of(times)}};
  const json payload = {{"spec", spec_echo(spec)}, {"instance_spec", batch.spec}, {"summary", summary}, {"reports", reports}};
  deliver(spec.get<std::string>("out"), payload.dump(1) + "\n", log);
  for (int id : run.failures) emit(log, "instance " + std::to_string(id) + " failed: " + run.reports[id].note);
  emit(log, solver + ": " + std::to_string(run.reports.size()) + " instances, mean rate " + fixed(mean_of(rates)) +
                ", mean wall time " + fixed(mean_of(times), 6) + " s, " + std::to_string(run.failures.size()) +
                " failures");
  CommandResult r;
  r.summary = summary;
  r.summary["command"] = "baseline";
  return r;
}

CommandResult cmd_sweep(const ExperimentSpec& spec, const LogSink& log) {
  const Checkpoint ck = load_model(spec.get<std::string>("checkpoint"));
  const int N = resolve_antennas(spec, ck.config);
  const InferenceModel<float> model(ck.params);
  const auto seed = spec.get<std::uint64_t>("seed");
  const int count = spec.get<int>("count");
  const int repeats = spec.get<int>("timing_repeats");
  const auto baselines = spec.get<std::vector<std::string>>("baselines");
  const ScenarioOptions scenario = scenario_from_spec(spec);

  std::vector<std::pair<int, int>> points;
  auto add_point = [&](int M, int K) {
    if (std::find(points.begin(), points.end(), std::make_pair(M, K)) == points.end()) points.emplace_back(M, K);
  };
  for (int K : spec.get<std::vector<int>>("sweep_k")) add_point(spec.get<int>("M"), K);
  for (int M : spec.get<std::vector<int>>("sweep_m")) add_point(M, spec.get<int>("K"));

  std::ostringstream csv;
  csv << "# spec: " << spec_echo(spec).dump() << "\n";
  csv << "size,method,mean_rate,std_rate,mean_time_s\n";
  auto row = [&](const std::string& size, const std::string& method, double mean, double sd, double t) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%.17g,%.9g\n", size.c_str(), method.c_str(), mean, sd, t);
    csv << buf;
  };

  json summary_points = json::array();
  for (const auto& [M, K] : points) {
    const std::string size = "M" + std::to_string(M) + "K" + std::to_string(K);
    const std::vector<ProblemInstance> test = test_instances(M, K, N, count, seed, scenario);
    EvaluateOptions eo;
    eo.timing_repeats = repeats;
    eo.jobs = spec.get<int>("jobs");
    const EvaluationReport gnn = evaluate(model, test, eo);
    row(size, "edge_gnn", gnn.mean_rate, gnn.std_rate, gnn.mean_time_s);
    json point = {{"size", size}, {"edge_gnn", gnn.mean_rate}};

    for (const auto& solver : baselines) {
      SolverRunOptions o;
      o.max_iters = spec.get<int>(solver == "wmmse" ? "wmmse_iters" : "gp_iters");
      o.jobs = spec.get<int>("jobs");
      o.timing_repeats = repeats;
      const SolverRun run = run_solver(solver, test, o);
      std::vector<double> rates;
      for (const auto& rep : run.reports) rates.push_back(rep.final_rate());
      const auto [mean, sd] = mean_std(rates);
      row(size, solver, mean, sd, mean_of(run.times));
      point[solver] = mean;
      if (!run.failures.empty())
        emit(log, size + " " + solver + ": " + std::to_string(run.failures.size()) + " instances failed");
    }
    emit(log, size + "  " + point.dump());
    summary_points.push_back(point);
  }
  deliver(spec.get<std::string>("out"), csv.str(), log);

  CommandResult r;
  r.summary = {{"command", "sweep"}, {"points", summary_points}};
  return r;
}

CommandResult cmd_verify(const ExperimentSpec& spec, const LogSink& log) {
  const auto seed = spec.get<std::uint64_t>("seed");
  ModelParams<float> params;
  ModelConfig config = model_from_spec(spec);
  std::string source;
  if (spec.has("checkpoint") && !spec.get<std::string>("checkpoint").empty()) {
    const Checkpoint ck = load_checkpoint(spec.get<std::string>("checkpoint"));
    params = ck.params;
    config = ck.config;
    source = spec.get<std::string>("checkpoint");
  } else {
    params = init_params<float>(config, derive_seed(seed, {0}));
    source = "random parameters";
  }

  VerifyOptions o;
  o.equivariance.trials = spec.get<int>("trials");
  o.equivariance.seed = seed;
  o.equivariance.N = config.N;
  o.equivariance.forward.fault = fault_from_string(spec.get<std::string>("fault"));
  o.gradient.d = spec.get<int>("grad_check_d");
  o.gradient.seed = seed;
  o.solvers.monotone_instances = spec.get<int>("solver_instances");
  o.solvers.seed = seed;
  o.solvers.jobs = spec.get<int>("jobs");
  o.scale_trials = spec.get<int>("trials");

  emit(log, "verifying " + source + " (fault: " + spec.get<std::string>("fault") + ")");
  const PropertyReport report = run_verify(params, o);
  for (const auto& p : report.results) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-30s value %.3e  threshold %.3e  margin %+.3e", p.name.c_str(), p.value,
                  p.threshold, p.margin());
    emit(log, std::string(p.passed ? "PASS " : "FAIL ") + buf + "  " + p.detail);
  }

  const std::string out = spec.get<std::string>("out");
  if (!out.empty()) write_text_file(out, json{{"spec", spec_echo(spec)}, {"report", to_json(report)}}.dump(1) + "\n");

  CommandResult r;
  r.summary = to_json(report);
  r.summary["command"] = "verify";
  r.exit_code = report.all_passed() ? kExitOk : kExitPropertyFailure;
  if (!report.all_passed()) {
    std::string names;
    for (const auto& f : report.failures()) names += (names.empty() ? "" : ", ") + f;
    emit(log, "failing properties: " + names);
  }
  return r;
}

CommandResult cmd_evaluate(const ExperimentSpec& spec, const LogSink& log) {
  const std::string ckpt_path = spec.get<std::string>("checkpoint");
  const Checkpoint ck = load_model(ckpt_path);
  const int N = resolve_antennas(spec, ck.config);
  const std::uint64_t before = params_fingerprint(ck.params);

  std::vector<ProblemInstance> instances;
  json instance_source;
  if (!spec.get<std::string>("instances").empty()) {
    InstanceBatch batch = read_instance_batch(spec.get<std::string>("instances"));
    instances = std::move(batch.instances);
    instance_source = spec.get<std::string>("instances");
  } else {
    instances = test_instances(spec.get<int>("M"), spec.get<int>("K"), N, spec.get<int>("count"),
                               spec.get<std::uint64_t>("seed"), scenario_from_spec(spec));
    instance_source = "generated";
  }
  for (const auto& inst : instances)
    if (inst.N != N)
      throw ArgumentError("instance has N = " + std::to_string(inst.N) + " but the checkpoint expects N = " +
                          std::to_string(N));

  std::vector<BaselineSet> baselines;
  for (const auto& solver : spec.get<std::vector<std::string>>("baselines")) {
    SolverRunOptions o;
    o.max_iters = spec.get<int>(solver == "wmmse" ? "wmmse_iters" : "gp_iters");
    o.jobs = spec.get<int>("jobs");
    baselines.emplace_back(solver, run_solver(solver, instances, o).reports);
  }
  for (const auto& path : spec.get<std::vector<std::string>>("reports")) {
    const json j = json::parse(read_text_file(path), nullptr, false);
    if (j.is_discarded() || !j.contains("reports")) throw IoError(path + " is not a baseline report file");
    std::vector<SolverReport> reps;
    for (const auto& rj : j["reports"]) reps.push_back(solver_report_from_json(rj));
    baselines.emplace_back(j["summary"].value("solver", path), std::move(reps));
  }

  const InferenceModel<float> model(ck.params);
  EvaluateOptions eo;
  eo.timing_repeats = spec.get<int>("timing_repeats");
  eo.jobs = spec.get<int>("jobs");
  const EvaluationReport report = evaluate(model, instances, eo, baselines);
  const std::uint64_t after = params_fingerprint(model.params());
  if (after != before) throw Error("evaluation modified the model parameters");

  const json payload = {{"spec", spec_echo(spec)},
                        {"instances", instance_source},
                        {"params_fingerprint", before},
                        {"report", to_json(report)}};
  deliver(spec.get<std::string>("out"), payload.dump(1) + "\n", log);
  emit(log, "mean sum rate " + fixed(report.mean_rate) + " (std " + fixed(report.std_rate) + "), median time " +
                fixed(report.median_time_s * 1e3, 3) + " ms, " + std::to_string(report.feasibility_violations) +
                " feasibility violations");
  for (const auto& b : report.baselines)
    emit(log, "  vs " + b.solver + ": mean " + fixed(b.mean_rate) + ", ratio " + fixed(b.rate_ratio) + " over " +
                  std::to_string(b.joined) + " instances");

  CommandResult r;
  r.summary = {{"command", "evaluate"},
               {"mean_rate", report.mean_rate},
               {"std_rate", report.std_rate},
               {"feasibility_violations", report.feasibility_violations}};
  return r;
}

CommandResult run_command(const std::string& command, const json& config, const json& flags, const LogSink& log) {
  const ExperimentSpec spec = resolve_spec(command, config, flags);
  if (command == "generate") return cmd_generate(spec, log);
  if (command == "train") return cmd_train(spec, log);
  if (command == "baseline") return cmd_baseline(spec, log);
  if (command == "sweep") return cmd_sweep(spec, log);
  if (command == "verify") return cmd_verify(spec, log);
  if (command == "evaluate") return cmd_evaluate(spec, log);
  throw ArgumentError("unknown command '" + command + "'");
}

}  // namespace edgegnn
