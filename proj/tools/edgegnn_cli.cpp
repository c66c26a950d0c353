// SPDX-License-Identifier: Apache-2.0
// Command-line front end. Each subcommand's flags are generated from the
// library's default spec, so every spec key is also a flag (underscores
// become dashes: learning_rate -> --learning-rate).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "edgegnn/edgegnn.h"

namespace {

using nlohmann::json;

struct FlagSlot {
  std::string key;
  json::value_t kind;
  bool int_list = false;
  long long i = 0;
  double d = 0.0;
  std::string s;
  std::vector<long long> il;
  std::vector<std::string> sl;
  CLI::Option* option = nullptr;
};

struct Subcommand {
  CLI::App* app = nullptr;
  std::string config_path;
  std::vector<std::unique_ptr<FlagSlot>> slots;
};

std::string flag_name(std::string key) {
  for (char& c : key)
    if (c == '_') c = '-';
  return "--" + key;
}

json defaults_for(const std::string& command) {
  char* text = nullptr;
  if (egnn_cmd_defaults(command.c_str(), &text) != EGNN_OK) {
    std::cerr << "error: " << egnn_last_error() << "\n";
    std::exit(EGNN_ERR_INTERNAL);
  }
  json j = json::parse(text);
  egnn_string_free(text);
  return j;
}

void add_flags(Subcommand& sub, const json& defaults) {
  sub.app->add_option("--config", sub.config_path, "JSON config file; flags override its values");
  for (const auto& [key, value] : defaults.items()) {
    auto slot = std::make_unique<FlagSlot>();
    slot->key = key;
    slot->kind = value.type();
    const std::string name = flag_name(key);
    const std::string help = "default: " + value.dump();
    FlagSlot& s = *slot;
    if (value.is_number_integer()) {
      s.option = sub.app->add_option(name, s.i, help);
    } else if (value.is_number()) {
      s.option = sub.app->add_option(name, s.d, help);
    } else if (value.is_string()) {
      s.option = sub.app->add_option(name, s.s, help);
    } else if (value.is_array()) {
      s.int_list = !value.empty() && value.front().is_number_integer();
      s.option = s.int_list ? sub.app->add_option(name, s.il, help) : sub.app->add_option(name, s.sl, help);
    } else {
      continue;
    }
    sub.slots.push_back(std::move(slot));
  }
}

json collect_flags(const Subcommand& sub) {
  json flags = json::object();
  for (const auto& s : sub.slots) {
    if (s->option->count() == 0) continue;
    switch (s->kind) {
      case json::value_t::number_integer:
      case json::value_t::number_unsigned:
        flags[s->key] = s->i;
        break;
      case json::value_t::number_float:
        flags[s->key] = s->d;
        break;
      case json::value_t::string:
        flags[s->key] = s->s;
        break;
      default:
        flags[s->key] = s->int_list ? json(s->il) : json(s->sl);
    }
  }
  return flags;
}

void print_line(const char* line, void*) {
  std::fputs(line, stdout);
  std::fputc('\n', stdout);
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge-GNN cooperative beamforming lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", egnn_version());

  const std::map<std::string, std::string> descriptions = {
      {"generate", "write a batch of random problem instances"},
      {"train", "train an Edge-GNN and write a checkpoint plus JSON-lines log"},
      {"baseline", "solve an instance file with WMMSE or gradient projection"},
      {"sweep", "evaluate a checkpoint and baselines over a range of sizes (CSV)"},
      {"verify", "run the equivariance, gradient, feasibility and solver checks"},
      {"evaluate", "evaluate a checkpoint on a test set"},
  };
  std::map<std::string, Subcommand> subs;
  for (const auto& [name, text] : descriptions) {
    Subcommand& sub = subs[name];
    sub.app = app.add_subcommand(name, text);
    add_flags(sub, defaults_for(name));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : EGNN_ERR_ARGUMENT;
  }

  for (auto& [name, sub] : subs) {
    if (!sub.app->parsed()) continue;
    std::string config_text;
    if (!sub.config_path.empty()) {
      std::ifstream in(sub.config_path);
      if (!in) {
        std::cerr << "error: cannot read config file " << sub.config_path << "\n";
        return EGNN_ERR_IO;
      }
      std::ostringstream ss;
      ss << in.rdbuf();
      config_text = ss.str();
    }
    const std::string flags = collect_flags(sub).dump();
    const egnn_status status = egnn_cmd_run(name.c_str(), config_text.c_str(), flags.c_str(), print_line, nullptr,
                                            nullptr);
    if (status != EGNN_OK) std::cerr << "error: " << egnn_last_error() << "\n";
    return status;
  }
  return EGNN_ERR_ARGUMENT;
}
