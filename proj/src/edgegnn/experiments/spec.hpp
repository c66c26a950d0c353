// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "edgegnn/gnn/params.hpp"
#include "edgegnn/scenario/scenario.hpp"
#include "edgegnn/trainer/trainer.hpp"

namespace edgegnn {

/// Fully resolved parameters of one command. `values` holds every key the
/// command understands, so it can be echoed into outputs as provenance.
struct ExperimentSpec {
  std::string command;
  nlohmann::json values;

  template <class V>
  V get(const std::string& key) const {
    try {
      return values.at(key).get<V>();
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("spec key '" + key + "': " + e.what());
    }
  }
  bool has(const std::string& key) const { return values.contains(key) && !values.at(key).is_null(); }
  nlohmann::json to_json() const { return {{"command", command}, {"values", values}}; }
};

const std::vector<std::string>& known_commands();

/// Defaults for a command. Throws ArgumentError for unknown commands.
nlohmann::json default_spec(const std::string& command);

/// defaults <- config file <- flags. Config files may carry keys of other
/// commands (ignored); flags must belong to this command. Types follow the
/// defaults; values are range-checked.
ExperimentSpec resolve_spec(const std::string& command, const nlohmann::json& config = nlohmann::json::object(),
                            const nlohmann::json& flags = nlohmann::json::object());

ScenarioOptions scenario_from_spec(const ExperimentSpec& spec);
ModelConfig model_from_spec(const ExperimentSpec& spec);
TrainConfig train_config_from_spec(const ExperimentSpec& spec);

}  // namespace edgegnn
