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

#ifndef COLIGHT_HARNESS_H_
#define COLIGHT_HARNESS_H_

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "colight/agent.h"
#include "colight/attention.h"
#include "colight/config.h"
#include "colight/microsim.h"
#include "colight/scenario.h"

namespace colight::harness {

struct EpisodeMetrics {
  int episode = 0;
  double travel_time = 0.0;
  double loss = 0.0;
  double epsilon = 0.0;
};

struct RunReport {
  std::string scenario;
  std::string controller;
  std::uint64_t seed = 0;
  std::vector<EpisodeMetrics> episodes;
  std::vector<double> smoothed;  // 5-point trailing moving average of travel time
  std::vector<double> eval_travel_times;
  double final_travel_time = 0.0;  // mean of eval_travel_times
  double wall_time_s = 0.0;
  // Last-layer mean alpha per target and neighbour over the evaluation episodes.
  attention::SpatialSummary attention_summary;
  std::string effective_config;  // ConfigToText of the run

  // JSON rendering; wall time is optional so that reports can be compared
  // byte for byte.
  std::string ToJson(bool include_wall_time = true) const;
};

struct RunResult {
  RunReport report;
  attention::AttentionLog attention;
  std::optional<nn::ParamSet> params;  // learnable controllers only
};

// Per-decision callback: (observations before, actions, rewards, observations after).
using StepHook = std::function<void(const nn::Matrix&, const std::vector<int>&,
                                    const std::vector<double>&, const nn::Matrix&)>;
using Policy = std::function<std::vector<int>(const sim::Simulation&, const nn::Matrix&)>;

// Plays one episode from Reset(seed); returns the average travel time.
double RunEpisode(sim::Simulation& sim, std::uint64_t seed, int episode_s, int decision_s,
                  const Policy& policy, const StepHook& hook = nullptr);

// Travel-time moving average over the trailing `window` points.
std::vector<double> MovingAverage(const std::vector<double>& values, int window);

// Simulator seed of evaluation episode j.
std::uint64_t EvalSeed(std::uint64_t run_seed, int j);

// Trains (when learnable) and evaluates one controller on one scenario.
RunResult RunExperiment(const ExperimentConfig& config);

// Frozen-policy evaluation of `params` under `config` (the same protocol as
// the evaluation phase of RunExperiment). Returns per-episode travel times.
std::vector<double> EvaluateCheckpoint(const ExperimentConfig& config,
                                       const nn::ParamSet& params);

// metrics.csv, report.json, config.txt, attention.jsonl (when logged) and
// checkpoint.json (learnable controllers) under `dir`.
void WriteArtifacts(const RunResult& result, const std::string& dir);

struct SweepRow {
  std::string value;
  double final_travel_time = 0.0;
};
// One experiment per value of `parameter` (a config key such as heads or
// neighbors); at most `jobs` run concurrently.
std::vector<SweepRow> Sweep(const ExperimentConfig& base, const std::string& parameter,
                            const std::vector<std::string>& values, int jobs,
                            std::vector<RunResult>* results = nullptr);

}  // namespace colight::harness

#endif  // COLIGHT_HARNESS_H_
