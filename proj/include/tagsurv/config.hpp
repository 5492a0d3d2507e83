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

#pragma once

// Flat "key = value" pipeline configuration. Every key has a default;
// flags override file values. Path values that are relative resolve
// against the directory of the config file that was loaded.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>

namespace tagsurv::pipeline {

// Bit per stage, used to scope config keys to subcommands.
enum StageBit : unsigned {
  kSynth = 1u << 0,
  kPreprocess = 1u << 1,
  kVocab = 1u << 2,
  kTrain = 1u << 3,
  kFilter = 1u << 4,
  kFeatures = 1u << 5,
  kRegress = 1u << 6,
  kEvaluate = 1u << 7,
  kReport = 1u << 8,
  kAllStages = (1u << 9) - 1,
};

enum class KeyKind { path, integer, real, text, choice };

struct KeyInfo {
  std::string_view name;
  std::string_view default_value;
  KeyKind kind;
  unsigned stages;
  std::string_view help;
};

std::span<const KeyInfo> config_keys();
const KeyInfo* find_key(std::string_view name);

class PipelineConfig {
 public:
  PipelineConfig();

  // Applies a config file on top of the current values and makes its
  // directory the base for relative paths.
  void load_file(const std::filesystem::path& file);
  void set(std::string_view key, std::string_view value);

  const std::string& get(std::string_view key) const;
  std::size_t get_count(std::string_view key) const;  // non-negative integer
  std::uint64_t get_seed(std::string_view key) const;
  double get_real(std::string_view key) const;
  std::filesystem::path path(std::string_view key) const;
  bool has_path(std::string_view key) const { return !get(key).empty(); }

  const std::filesystem::path& base_dir() const { return base_dir_; }
  void set_base_dir(std::filesystem::path dir) { base_dir_ = std::move(dir); }

  // Sorted "key=value" lines; the basis of the manifest config hash.
  std::string canonical() const;
  const std::map<std::string, std::string, std::less<>>& values() const { return values_; }

 private:
  std::map<std::string, std::string, std::less<>> values_;
  std::filesystem::path base_dir_ = ".";
};

}  // namespace tagsurv::pipeline
