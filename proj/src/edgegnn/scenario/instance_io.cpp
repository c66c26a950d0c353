// SPDX-License-Identifier: Apache-2.0
#include "edgegnn/scenario/instance_io.hpp"

#include <fstream>
#include <sstream>

#include "edgegnn/errors.hpp"

namespace edgegnn {

using nlohmann::json;

json instance_to_json(const ProblemInstance& inst, std::size_t id) {
  json re = json::array(), im = json::array();
  for (int m = 0; m < inst.M; ++m) {
    json re_m = json::array(), im_m = json::array();
    for (int k = 0; k < inst.K; ++k) {
      json re_mk = json::array(), im_mk = json::array();
      for (int n = 0; n < inst.N; ++n) {
        re_mk.push_back(inst.h(m, k, n).real());
        im_mk.push_back(inst.h(m, k, n).imag());
      }
      re_m.push_back(std::move(re_mk));
      im_m.push_back(std::move(im_mk));
    }
    re.push_back(std::move(re_m));
    im.push_back(std::move(im_m));
  }
  return json{{"id", id},
              {"scenario_seed", inst.scenario_seed},
              {"channel_seed", inst.channel_seed},
              {"m", inst.M},
              {"k", inst.K},
              {"n", inst.N},
              {"scale_alpha", inst.scale_alpha},
              {"heterogeneous_noise", inst.heterogeneous_noise},
              {"f_bs", inst.power_budget},
              {"f_ue", inst.noise_power},
              {"e_re", std::move(re)},
              {"e_im", std::move(im)}};
}

ProblemInstance instance_from_json(const json& r) {
  try {
    ProblemInstance inst(r.at("m").get<int>(), r.at("k").get<int>(), r.at("n").get<int>());
    if (inst.M < 1 || inst.K < 1 || inst.N < 1) throw ArgumentError("instance record has non-positive sizes");
    inst.scale_alpha = r.value("scale_alpha", 1.0);
    inst.heterogeneous_noise = r.value("heterogeneous_noise", false);
    inst.scenario_seed = r.value("scenario_seed", std::uint64_t{0});
    inst.channel_seed = r.value("channel_seed", std::uint64_t{0});
    inst.power_budget = r.at("f_bs").get<std::vector<double>>();
    inst.noise_power = r.at("f_ue").get<std::vector<double>>();
    const json& re = r.at("e_re");
    const json& im = r.at("e_im");
    if (re.size() != static_cast<std::size_t>(inst.M) || im.size() != static_cast<std::size_t>(inst.M))
      throw DimensionError("channel arrays do not have m rows");
    for (int m = 0; m < inst.M; ++m) {
      if (re[m].size() != static_cast<std::size_t>(inst.K) || im[m].size() != static_cast<std::size_t>(inst.K))
        throw DimensionError("channel arrays do not have k columns");
      for (int k = 0; k < inst.K; ++k) {
        if (re[m][k].size() != static_cast<std::size_t>(inst.N) || im[m][k].size() != static_cast<std::size_t>(inst.N))
          throw DimensionError("channel arrays do not have n antennas");
        for (int n = 0; n < inst.N; ++n)
          inst.h(m, k, n) = cdouble(re[m][k][n].get<double>(), im[m][k][n].get<double>());
      }
    }
    inst.validate();
    return inst;
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("malformed instance record: ") + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_instance_batch(const std::string& path, const InstanceBatch& batch) {
  json doc;
  doc["spec"] = batch.spec;
  json records = json::array();
  for (std::size_t i = 0; i < batch.instances.size(); ++i) records.push_back(instance_to_json(batch.instances[i], i));
  doc["instances"] = std::move(records);
  write_text_file(path, doc.dump() + "\n");
}

InstanceBatch read_instance_batch(const std::string& path) {
  const std::string text = read_text_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ArgumentError("'" + path + "' is not valid JSON: " + e.what());
  }
  InstanceBatch batch;
  if (doc.contains("spec")) batch.spec = doc["spec"];
  if (!doc.contains("instances") || !doc["instances"].is_array())
    throw ArgumentError("'" + path + "' has no instances array");
  for (const json& r : doc["instances"]) batch.instances.push_back(instance_from_json(r));
  return batch;
}

}  // namespace edgegnn
