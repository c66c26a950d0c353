// SPDX-License-Identifier: Apache-2.0
#include "edgegnn/gnn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "edgegnn/errors.hpp"
#include "edgegnn/scenario/instance_io.hpp"

namespace edgegnn {
namespace {

constexpr const char* kFormat = "edgegnn-checkpoint";
constexpr int kVersion = 1;

void append_le(std::string& blob, const ad::Tensor<float>& t) {
  for (float x : t.data()) {
    const auto bits = std::bit_cast<std::uint32_t>(x);
    for (int b = 0; b < 4; ++b) blob.push_back(static_cast<char>((bits >> (8 * b)) & 0xFFu));
  }
}

void read_le(const std::string& blob, std::size_t offset, ad::Tensor<float>& t) {
  if (offset + 4 * t.size() > blob.size()) throw IoError("checkpoint blob is truncated");
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b)
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(blob[offset + 4 * i + b])) << (8 * b);
    t[i] = std::bit_cast<float>(bits);
  }
}

std::string read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

std::string checkpoint_blob_path(const std::string& manifest_path) {
  std::filesystem::path p(manifest_path);
  if (p.extension() == ".json") return p.replace_extension(".bin").string();
  return manifest_path + ".bin";
}

void save_checkpoint(const std::string& manifest_path, const Checkpoint& ckpt) {
  ckpt.config.validate();
  std::string blob;
  nlohmann::json index = nlohmann::json::object();
  auto add = [&](const std::string& name, const ad::Tensor<float>& t) {
    index[name] = {{"shape", t.shape()}, {"offset", blob.size()}};
    append_le(blob, t);
  };
  for_each_param(ckpt.params, [&](const std::string& name, const ad::Tensor<float>& t) { add(name, t); });
  for (const auto& [name, t] : ckpt.extra) {
    if (index.contains(name)) throw ArgumentError("checkpoint: duplicate tensor name " + name);
    add(name, t);
  }

  const std::string blob_path = checkpoint_blob_path(manifest_path);
  nlohmann::json manifest = {
      {"format", kFormat},
      {"version", kVersion},
      {"config", to_json(ckpt.config)},
      {"metadata", ckpt.metadata},
      {"blob", std::filesystem::path(blob_path).filename().string()},
      {"blob_bytes", blob.size()},
      {"tensors", index},
  };
  std::ofstream out(blob_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + blob_path);
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw IoError("failed writing " + blob_path);
  out.close();
  write_text_file(manifest_path, manifest.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::string& manifest_path) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_text_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("checkpoint manifest " + manifest_path + " is not valid JSON: " + e.what());
  }
  if (manifest.value("format", "") != kFormat || manifest.value("version", 0) != kVersion)
    throw IoError(manifest_path + " is not a version 1 edgegnn checkpoint");

  Checkpoint ckpt;
  ckpt.config = model_config_from_json(manifest.at("config"));
  ckpt.metadata = manifest.value("metadata", nlohmann::json::object());
  ckpt.params = zero_params<float>(ckpt.config);

  const std::string blob_path =
      (std::filesystem::path(manifest_path).parent_path() / manifest.at("blob").get<std::string>()).string();
  const std::string blob = read_binary(blob_path);
  if (blob.size() != manifest.at("blob_bytes").get<std::size_t>()) throw IoError("checkpoint blob size mismatch");

  const nlohmann::json& index = manifest.at("tensors");
  auto load = [&](const std::string& name, ad::Tensor<float>& t) {
    if (!index.contains(name)) throw IoError("checkpoint is missing tensor " + name);
    const auto& entry = index.at(name);
    if (entry.at("shape").get<ad::Shape>() != t.shape())
      throw IoError("checkpoint tensor " + name + " has shape " + ad::to_string(entry.at("shape").get<ad::Shape>()) +
                    ", expected " + ad::to_string(t.shape()));
    read_le(blob, entry.at("offset").get<std::size_t>(), t);
  };
  std::size_t param_tensors = 0;
  for_each_param(ckpt.params, [&](const std::string& name, ad::Tensor<float>& t) {
    load(name, t);
    ++param_tensors;
  });
  if (index.size() > param_tensors) {
    std::map<std::string, bool> is_param;
    for_each_param(ckpt.params, [&](const std::string& name, const ad::Tensor<float>&) { is_param[name] = true; });
    for (const auto& [name, entry] : index.items()) {
      if (is_param.count(name)) continue;
      ad::Tensor<float> t(entry.at("shape").get<ad::Shape>());
      read_le(blob, entry.at("offset").get<std::size_t>(), t);
      ckpt.extra.emplace(name, std::move(t));
    }
  }
  return ckpt;
}

}  // namespace edgegnn
