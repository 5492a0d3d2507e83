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

// Stage runner behind the CLI subcommands. Each stage reads and writes
// only the documented file formats and records SHA-256 digests of its
// inputs and outputs in the manifest.

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "tagsurv/config.hpp"

namespace tagsurv::pipeline {

struct StageInfo {
  std::string_view name;
  unsigned bit;  // 0 for the chained pipeline
  std::string_view help;
};

std::span<const StageInfo> stage_table();
const StageInfo* find_stage(std::string_view name);

// Runs one stage, or every stage listed in pipeline_stages for
// "pipeline". Progress and warnings go to `log`.
void run_stage(std::string_view name, const PipelineConfig& config, std::ostream& log);

// Hex SHA-256 of a file's bytes.
std::string file_digest(const std::filesystem::path& file);

}  // namespace tagsurv::pipeline
