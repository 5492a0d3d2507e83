// Copyright 2026 The tagsurv Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// tagsurv command-line front end. Links only the C API.

#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tagsurv/tagsurv.h"

namespace {

struct ConfigDeleter {
  void operator()(tagsurv_config* c) const { tagsurv_config_destroy(c); }
};
using ConfigPtr = std::unique_ptr<tagsurv_config, ConfigDeleter>;

void print_line(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

int report(tagsurv_status s) {
  std::fprintf(stderr, "tagsurv: %s\n", tagsurv_last_error());
  return s == TAGSURV_ERR_IO ? 2 : 1;
}

struct Subcommand {
  CLI::App* app = nullptr;
  std::string name;
  std::string config_file;
  std::string threads;
  std::map<std::string, std::string> values;  // key -> flag value
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regional food-tweet surveillance pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tagsurv_version());

  std::vector<std::unique_ptr<Subcommand>> subs;
  for (std::size_t s = 0; s < tagsurv_stage_count(); ++s) {
    tagsurv_stage_info stage{};
    tagsurv_stage_info_at(s, &stage);
    auto sub = std::make_unique<Subcommand>();
    sub->name = stage.name;
    sub->app = app.add_subcommand(stage.name, stage.help);
    sub->app->add_option("--config", sub->config_file, "flat key = value config file");
    sub->app->add_option("--threads", sub->threads, "worker threads; 1 is fully deterministic");
    for (std::size_t k = 0; k < tagsurv_config_key_count(); ++k) {
      tagsurv_key_info key{};
      tagsurv_config_key_info(k, &key);
      const std::string name = key.name;
      if (name == "threads") continue;
      if (stage.bit != 0 && (key.stages & stage.bit) == 0) continue;
      std::string help = key.help;
      if (*key.default_value) help += " [" + std::string(key.default_value) + "]";
      sub->app->add_option("--" + name, sub->values[name], help)->group("Config keys");
    }
    subs.push_back(std::move(sub));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "tagsurv: %s\n", e.what());
    return 1;
  }

  for (const auto& sub : subs) {
    if (!sub->app->parsed()) continue;
    tagsurv_config* raw = nullptr;
    if (auto s = tagsurv_config_create(&raw); s != TAGSURV_OK) return report(s);
    ConfigPtr config(raw);
    if (!sub->config_file.empty())
      if (auto s = tagsurv_config_load(config.get(), sub->config_file.c_str()); s != TAGSURV_OK) return report(s);
    for (const auto& [key, value] : sub->values) {
      if (sub->app->count("--" + key) == 0) continue;
      if (auto s = tagsurv_config_set(config.get(), key.c_str(), value.c_str()); s != TAGSURV_OK) return report(s);
    }
    if (sub->app->count("--threads") > 0)
      if (auto s = tagsurv_config_set(config.get(), "threads", sub->threads.c_str()); s != TAGSURV_OK)
        return report(s);
    if (auto s = tagsurv_run_stage(config.get(), sub->name.c_str(), print_line, nullptr); s != TAGSURV_OK)
      return report(s);
  }
  return 0;
}
