// SPDX-License-Identifier: Apache-2.0
#include "edgegnn/experiments/spec.hpp"

#include <set>

#include "edgegnn/errors.hpp"

namespace edgegnn {
namespace {

using nlohmann::json;

json scenario_defaults() {
  const ScenarioOptions s;
  return {{"area_side_m", s.area_side_m},
          {"min_bs_distance_m", s.min_bs_distance_m},
          {"power_budget_dbm", s.power_budget_dbm},
          {"noise_dbm", s.noise_dbm}};
}

json model_defaults() {
  const ModelConfig m;
  return {{"L", m.L}, {"d", m.d}};
}

json merged(std::initializer_list<json> parts) {
  json out = json::object();
  for (const auto& p : parts) out.update(p);
  return out;
}

json defaults_for(const std::string& command) {
  const json common = {{"seed", 0}, {"jobs", 1}, {"out", ""}};
  const json sizes = {{"M", 3}, {"K", 2}, {"N", 2}};
  const TrainConfig t;
  if (command == "generate") return merged({common, sizes, scenario_defaults(), {{"count", 100}}});
  if (command == "train")
    return merged({common, sizes, scenario_defaults(), model_defaults(),
                   {{"epochs", t.epochs},
                    {"minibatches", t.minibatches_per_epoch},
                    {"batch_size", t.batch_size},
                    {"learning_rate", t.learning_rate},
                    {"rmsprop_decay", t.rmsprop_decay},
                    {"rmsprop_epsilon", t.rmsprop_epsilon},
                    {"clip_norm", t.clip_norm},
                    {"fixed_dataset", t.fixed_dataset},
                    {"checkpoint_every", 0},
                    {"resume", ""},
                    {"log", ""}}});
  if (command == "baseline")
    return merged({common, {{"instances", ""}, {"solver", "wmmse"}, {"max_iters", 0}, {"tol", 1e-5}}});
  if (command == "sweep")
    return merged({common, scenario_defaults(),
                   {{"checkpoint", ""},
                    {"N", 0},
                    {"M", 3},
                    {"K", 2},
                    {"sweep_k", {2, 3, 4, 5, 6}},
                    {"sweep_m", {3, 4, 5, 6}},
                    {"count", 100},
                    {"baselines", {"wmmse"}},
                    {"wmmse_iters", 100},
                    {"gp_iters", 500},
                    {"timing_repeats", 5}}});
  if (command == "verify")
    return merged({common, model_defaults(),
                   {{"checkpoint", ""},
                    {"N", 2},
                    {"trials", 100},
                    {"fault", "none"},
                    {"grad_check_d", 8},
                    {"solver_instances", 100}}});
  if (command == "evaluate")
    return merged({common, sizes, scenario_defaults(),
                   {{"checkpoint", ""},
                    {"N", 0},
                    {"instances", ""},
                    {"count", 100},
                    {"baselines", json::array()},
                    {"reports", json::array()},
                    {"wmmse_iters", 100},
                    {"gp_iters", 500},
                    {"timing_repeats", 5}}});
  throw ArgumentError("unknown command '" + command + "'");
}

bool same_kind(const json& def, const json& v) {
  if (def.is_number_integer()) return v.is_number_integer();
  if (def.is_number()) return v.is_number();
  if (def.is_string()) return v.is_string();
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_array()) return v.is_array();
  return true;
}

void apply(json& values, const json& layer, const std::string& source, bool strict, const std::set<std::string>& all) {
  if (!layer.is_object()) throw ArgumentError(source + " must be a JSON object");
  for (const auto& [key, v] : layer.items()) {
    if (!values.contains(key)) {
      if (strict || !all.count(key)) throw ArgumentError(source + ": unknown key '" + key + "'");
      continue;
    }
    if (!same_kind(values[key], v))
      throw ArgumentError(source + ": key '" + key + "' expects " + std::string(values[key].type_name()) + ", got " +
                          v.type_name());
    values[key] = v;
  }
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ArgumentError(message);
}

void validate(const std::string& command, const json& v) {
  // N = 0 means "take the antenna count from the checkpoint".
  const bool n_from_checkpoint = (command == "sweep" || command == "evaluate") && v.value("N", 1) == 0;
  auto positive_int = [&](const char* key) {
    if (n_from_checkpoint && std::string(key) == "N") return;
    if (v.contains(key)) require(v[key].get<long long>() >= 1, std::string(key) + " must be >= 1");
  };
  for (const char* key : {"M", "K", "N", "count", "jobs", "epochs", "minibatches", "batch_size", "L", "d", "trials",
                          "grad_check_d", "wmmse_iters", "gp_iters", "solver_instances"})
    positive_int(key);
  if (v.contains("seed")) require(v["seed"].get<long long>() >= 0, "seed must be >= 0");
  for (const char* key : {"learning_rate", "rmsprop_epsilon", "tol", "timing_repeats", "fixed_dataset",
                          "checkpoint_every", "max_iters"})
    if (v.contains(key)) require(v[key].get<double>() >= 0, std::string(key) + " must be >= 0");
  if (v.contains("rmsprop_decay")) {
    const double r = v["rmsprop_decay"].get<double>();
    require(r >= 0.0 && r < 1.0, "rmsprop_decay must lie in [0, 1)");
  }
  if (v.contains("area_side_m")) require(v["area_side_m"].get<double>() > 0, "area_side_m must be > 0");
  if (v.contains("min_bs_distance_m")) require(v["min_bs_distance_m"].get<double>() >= 0, "min_bs_distance_m must be >= 0");
  auto check_solver = [&](const std::string& s) {
    require(s == "wmmse" || s == "gp", "unknown solver '" + s + "' (expected wmmse or gp)");
  };
  if (v.contains("solver")) check_solver(v["solver"].get<std::string>());
  if (v.contains("baselines"))
    for (const auto& s : v["baselines"]) {
      require(s.is_string(), "baselines must be solver names");
      check_solver(s.get<std::string>());
    }
  if (v.contains("reports"))
    for (const auto& s : v["reports"]) require(s.is_string(), "reports must be file paths");
  for (const char* key : {"sweep_k", "sweep_m"})
    if (v.contains(key))
      for (const auto& s : v[key]) require(s.is_number_integer() && s.get<int>() >= 1, std::string(key) + " entries must be >= 1");
  if (v.contains("fault")) {
    const std::string f = v["fault"].get<std::string>();
    require(f == "none" || f == "tie-mlp56" || f == "ue-indexed-mlp1", "unknown fault '" + f + "'");
  }
  if (command == "baseline") require(!v["instances"].get<std::string>().empty(), "baseline needs --instances");
  if (command == "sweep") require(!v["checkpoint"].get<std::string>().empty(), "sweep needs --checkpoint");
  if (command == "evaluate") require(!v["checkpoint"].get<std::string>().empty(), "evaluate needs --checkpoint");
}

}  // namespace

const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> cmds = {"generate", "train", "baseline", "sweep", "verify", "evaluate"};
  return cmds;
}

json default_spec(const std::string& command) { return defaults_for(command); }

ExperimentSpec resolve_spec(const std::string& command, const json& config, const json& flags) {
  ExperimentSpec spec;
  spec.command = command;
  spec.values = defaults_for(command);
  std::set<std::string> all;
  for (const auto& c : known_commands()) {
    const json defaults = defaults_for(c);
    for (const auto& [key, _] : defaults.items()) all.insert(key);
  }
  apply(spec.values, config.is_null() ? json::object() : config, "config file", false, all);
  apply(spec.values, flags.is_null() ? json::object() : flags, "flags", true, all);
  try {
    validate(command, spec.values);
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("invalid spec: ") + e.what());
  }
  return spec;
}

ScenarioOptions scenario_from_spec(const ExperimentSpec& spec) {
  ScenarioOptions s;
  s.area_side_m = spec.values.value("area_side_m", s.area_side_m);
  s.min_bs_distance_m = spec.values.value("min_bs_distance_m", s.min_bs_distance_m);
  s.power_budget_dbm = spec.values.value("power_budget_dbm", s.power_budget_dbm);
  s.noise_dbm = spec.values.value("noise_dbm", s.noise_dbm);
  return s;
}

ModelConfig model_from_spec(const ExperimentSpec& spec) {
  ModelConfig m;
  m.L = spec.values.value("L", m.L);
  m.d = spec.values.value("d", m.d);
  m.N = spec.values.value("N", m.N);
  m.validate();
  return m;
}

TrainConfig train_config_from_spec(const ExperimentSpec& spec) {
  TrainConfig t;
  const json& v = spec.values;
  t.learning_rate = v.at("learning_rate").get<double>();
  t.epochs = v.at("epochs").get<int>();
  t.minibatches_per_epoch = v.at("minibatches").get<int>();
  t.batch_size = v.at("batch_size").get<int>();
  t.rmsprop_decay = v.at("rmsprop_decay").get<double>();
  t.rmsprop_epsilon = v.at("rmsprop_epsilon").get<double>();
  t.clip_norm = v.at("clip_norm").get<double>();
  t.M_train = v.at("M").get<int>();
  t.K_train = v.at("K").get<int>();
  t.seed = v.at("seed").get<std::uint64_t>();
  t.jobs = v.at("jobs").get<int>();
  t.fixed_dataset = v.at("fixed_dataset").get<int>();
  t.model = model_from_spec(spec);
  t.scenario = scenario_from_spec(spec);
  t.validate();
  return t;
}

}  // namespace edgegnn
