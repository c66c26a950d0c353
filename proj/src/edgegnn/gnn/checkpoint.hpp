// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "edgegnn/gnn/params.hpp"

namespace edgegnn {

/// Model weights plus optional named side tensors (optimizer state is stored
/// under "opt.<param name>") and free-form metadata.
struct Checkpoint {
  ModelConfig config;
  ModelParams<float> params;
  std::map<std::string, ad::Tensor<float>> extra;
  nlohmann::json metadata = nlohmann::json::object();
};

/// Blob path that accompanies a manifest: "x.json" -> "x.bin", otherwise "<path>.bin".
std::string checkpoint_blob_path(const std::string& manifest_path);

/// Writes a JSON manifest {format, version, config, metadata, blob, tensors:
/// name -> {shape, offset}} and a little-endian float32 blob.
void save_checkpoint(const std::string& manifest_path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& manifest_path);

}  // namespace edgegnn
