// Copyright 2026 The colight-cpp Authors. All rights reserved.
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

#ifndef COLIGHT_CONFIG_H_
#define COLIGHT_CONFIG_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "colight/agent.h"
#include "colight/baselines.h"

namespace colight::harness {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  std::string scenario = "Grid3x3-Bi";
  std::string controller = "colight";
  int episodes = 100;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int eval_episodes = 10;
  int decision_s = 10;
  int episode_s = 3600;
  bool log_attention = true;
  int fixedtime_phase_s = 30;

  baselines::NetworkOptions network;
  agent::AgentConfig agent;

  std::string output_dir = "out";
  std::string checkpoint;  // eval only
  int jobs = 1;            // sweep only
};

ExperimentConfig DefaultConfig();

// `key = value` lines; '#' starts a comment. Unknown keys and malformed
// values throw ConfigError naming the line.
ExperimentConfig ParseConfig(const std::string& text, ExperimentConfig base = DefaultConfig());
ExperimentConfig LoadConfigFile(const std::string& path,
                                ExperimentConfig base = DefaultConfig());
void ApplyOverride(ExperimentConfig& config, const std::string& key, const std::string& value);
// "key=value".
void ApplyOverride(ExperimentConfig& config, const std::string& assignment);
void Validate(const ExperimentConfig& config);

std::vector<std::string> ConfigKeys();
std::string ConfigValue(const ExperimentConfig& config, const std::string& key);
// Every key in ConfigKeys() order, one `key = value` per line.
std::string ConfigToText(const ExperimentConfig& config);

}  // namespace colight::harness

#endif  // COLIGHT_CONFIG_H_
