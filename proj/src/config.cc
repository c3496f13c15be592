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

#include "colight/config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "colight/scenario.h"

namespace colight::harness {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("invalid value '" + v + "' for " + key);
  }
  return out;
}

double ParseDouble(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ConfigError("invalid value '" + v + "' for " + key);
  return out;
}

bool ParseBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("invalid value '" + v + "' for " + key + " (true/false)");
}

// Shortest text that parses back to the same double.
std::string Fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct Field {
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define INT_FIELD(key, member)                                                       \
  {key,                                                                              \
   {[](ExperimentConfig& c, const std::string& v) { c.member = ParseNumber<int>(key, v); }, \
    [](const ExperimentConfig& c) { return std::to_string(c.member); }}}
#define DOUBLE_FIELD(key, member)                                                  \
  {key,                                                                            \
   {[](ExperimentConfig& c, const std::string& v) { c.member = ParseDouble(key, v); }, \
    [](const ExperimentConfig& c) { return Fmt(c.member); }}}
#define STRING_FIELD(key, member)                                          \
  {key,                                                                    \
   {[](ExperimentConfig& c, const std::string& v) { c.member = v; },        \
    [](const ExperimentConfig& c) { return c.member; }}}

const std::vector<std::pair<std::string, Field>>& Fields() {
  static const std::vector<std::pair<std::string, Field>> fields = {
      STRING_FIELD("scenario", scenario),
      STRING_FIELD("controller", controller),
      INT_FIELD("episodes", episodes),
      {"seed",
       {[](ExperimentConfig& c, const std::string& v) {
          c.seed = ParseNumber<std::uint64_t>("seed", v);
          c.seed_set = true;
        },
        [](const ExperimentConfig& c) { return std::to_string(c.seed); }}},
      INT_FIELD("eval_episodes", eval_episodes),
      INT_FIELD("decision_s", decision_s),
      INT_FIELD("episode_s", episode_s),
      {"log_attention",
       {[](ExperimentConfig& c, const std::string& v) {
          c.log_attention = ParseBool("log_attention", v);
        },
        [](const ExperimentConfig& c) { return std::string(c.log_attention ? "true" : "false"); }}},
      INT_FIELD("fixedtime_phase_s", fixedtime_phase_s),
      INT_FIELD("embed_dim", network.model.embed_dim),
      INT_FIELD("key_dim", network.model.key_dim),
      INT_FIELD("value_dim", network.model.value_dim),
      INT_FIELD("layers", network.model.layers),
      INT_FIELD("heads", network.model.heads),
      DOUBLE_FIELD("tau", network.model.tau),
      INT_FIELD("neighbors", network.scope_size),
      {"neighbor_metric",
       {[](ExperimentConfig& c, const std::string& v) {
          try {
            c.network.metric = roadnet::ParseMetric(v);
          } catch (const std::exception&) {
            throw ConfigError("invalid value '" + v + "' for neighbor_metric (geo/node)");
          }
        },
        [](const ExperimentConfig& c) {
          return std::string(c.network.metric == roadnet::DistanceMetric::kGeo ? "geo" : "node");
        }}},
      DOUBLE_FIELD("gamma", agent.gamma),
      DOUBLE_FIELD("learning_rate", agent.learning_rate),
      {"replay_capacity",
       {[](ExperimentConfig& c, const std::string& v) {
          c.agent.replay_capacity = ParseNumber<std::size_t>("replay_capacity", v);
        },
        [](const ExperimentConfig& c) { return std::to_string(c.agent.replay_capacity); }}},
      INT_FIELD("batch_size", agent.batch_size),
      INT_FIELD("updates_per_episode", agent.updates_per_episode),
      INT_FIELD("target_sync_episodes", agent.target_sync_episodes),
      DOUBLE_FIELD("epsilon_start", agent.epsilon_start),
      DOUBLE_FIELD("epsilon_end", agent.epsilon_end),
      INT_FIELD("epsilon_decay_episodes", agent.epsilon_decay_episodes),
      DOUBLE_FIELD("reward_scale", agent.reward_scale),
      DOUBLE_FIELD("obs_scale", agent.obs_scale),
      STRING_FIELD("output_dir", output_dir),
      STRING_FIELD("checkpoint", checkpoint),
      INT_FIELD("jobs", jobs),
  };
  return fields;
}

const Field& Find(const std::string& key) {
  for (const auto& [k, f] : Fields()) {
    if (k == key) return f;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

ExperimentConfig DefaultConfig() {
  ExperimentConfig c;
  c.agent.reward_scale = 0.1;
  c.agent.obs_scale = 0.1;
  return c;
}

void ApplyOverride(ExperimentConfig& config, const std::string& key, const std::string& value) {
  Find(key).set(config, value);
}

void ApplyOverride(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
  ApplyOverride(config, Trim(assignment.substr(0, eq)), Trim(assignment.substr(eq + 1)));
}

ExperimentConfig ParseConfig(const std::string& text, ExperimentConfig base) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    try {
      ApplyOverride(base, line);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

ExperimentConfig LoadConfigFile(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return ParseConfig(buf.str(), std::move(base));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void Validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  try {
    MakeScenario(c.scenario);
    baselines::ParseController(c.controller);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  require(c.episodes >= 0, "episodes must be >= 0");
  require(c.eval_episodes >= 1, "eval_episodes must be >= 1");
  require(c.decision_s > 0 && c.episode_s > 0 && c.episode_s % c.decision_s == 0,
          "episode_s must be a positive multiple of decision_s");
  require(c.fixedtime_phase_s > 0, "fixedtime_phase_s must be > 0");
  const auto& m = c.network.model;
  require(m.embed_dim > 0 && m.key_dim > 0 && m.value_dim > 0, "model widths must be > 0");
  require(m.layers >= 0, "layers must be >= 0");
  require(m.heads >= 1, "heads must be >= 1");
  require(m.tau > 0, "tau must be > 0");
  require(c.network.scope_size >= 1, "neighbors must be >= 1");
  const auto& a = c.agent;
  require(a.gamma >= 0 && a.gamma <= 1, "gamma must be in [0, 1]");
  require(a.learning_rate >= 0, "learning_rate must be >= 0");
  require(a.replay_capacity >= 1, "replay_capacity must be >= 1");
  require(a.batch_size >= 1, "batch_size must be >= 1");
  require(a.updates_per_episode >= 0, "updates_per_episode must be >= 0");
  require(a.target_sync_episodes >= 1, "target_sync_episodes must be >= 1");
  require(a.epsilon_start >= 0 && a.epsilon_start <= 1 && a.epsilon_end >= 0 &&
              a.epsilon_end <= 1,
          "epsilon values must be in [0, 1]");
  require(a.epsilon_decay_episodes >= 0, "epsilon_decay_episodes must be >= 0");
  require(c.jobs >= 1, "jobs must be >= 1");
}

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> keys;
  for (const auto& [k, f] : Fields()) keys.push_back(k);
  return keys;
}

std::string ConfigValue(const ExperimentConfig& config, const std::string& key) {
  return Find(key).get(config);
}

std::string ConfigToText(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [k, f] : Fields()) out += k + " = " + f.get(config) + "\n";
  return out;
}

}  // namespace colight::harness
