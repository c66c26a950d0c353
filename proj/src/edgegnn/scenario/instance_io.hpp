// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "edgegnn/scenario/instance.hpp"

namespace edgegnn {

/// Instance batch file: {"spec": {...}, "instances": [record, ...]} where each
/// record is {id, scenario_seed, channel_seed, m, k, n, scale_alpha,
/// heterogeneous_noise, f_bs[], f_ue[], e_re[m][k][n], e_im[m][k][n]}.
struct InstanceBatch {
  nlohmann::json spec = nlohmann::json::object();
  std::vector<ProblemInstance> instances;
};

nlohmann::json instance_to_json(const ProblemInstance& inst, std::size_t id);
ProblemInstance instance_from_json(const nlohmann::json& record);

void write_instance_batch(const std::string& path, const InstanceBatch& batch);
InstanceBatch read_instance_batch(const std::string& path);

/// Writes text to path, throwing IoError on failure.
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace edgegnn
