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

#include "colight/harness.h"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "colight/baselines.h"
#include "json.hpp"

namespace colight::harness {
namespace {

using baselines::ControllerKind;
using nn::Matrix;

const model::CoLightNetwork* AsAttentionNetwork(const model::QNetwork& net) {
  return dynamic_cast<const model::CoLightNetwork*>(&net);
}

Scenario ConfiguredScenario(const ExperimentConfig& config) {
  Scenario s = MakeScenario(config.scenario);
  s.episode_s = config.episode_s;
  s.decision_s = config.decision_s;
  return s;
}

Policy FixedTimePolicy(const ExperimentConfig& config, const Scenario& s) {
  auto plans = std::make_shared<std::vector<baselines::FixedTimePlan>>(
      baselines::MakeFixedTimePlans(s.net->num_intersections(), s.net->num_phases(),
                                    config.fixedtime_phase_s, config.seed));
  return [plans](const sim::Simulation& sim, const Matrix&) {
    std::vector<int> actions(plans->size());
    for (std::size_t i = 0; i < plans->size(); ++i) {
      actions[i] = baselines::FixedTimeAct((*plans)[i], sim.clock());
    }
    return actions;
  };
}

Policy MaxPressurePolicy() {
  return [](const sim::Simulation& sim, const Matrix&) {
    return baselines::MaxPressureActions(sim);
  };
}

// Greedy policy over frozen parameters; logs attention of episode *episode
// into `log` when given.
Policy GreedyPolicy(const agent::DqnAgent& agent, attention::AttentionLog* log,
                    const int* episode) {
  return [&agent, log, episode](const sim::Simulation& sim, const Matrix& obs) {
    std::vector<model::AttentionValues> taps;
    const Matrix q = agent.network().QValues(agent.params(), agent.Preprocess(obs),
                                             log != nullptr ? &taps : nullptr);
    if (log != nullptr) log->Append(*episode, sim.clock(), taps);
    std::vector<int> actions(q.rows());
    for (int i = 0; i < q.rows(); ++i) actions[i] = agent::Argmax(q.row(i));
    return actions;
  };
}

std::vector<double> EvaluatePolicy(const ExperimentConfig& config, const Scenario& s,
                                   const Policy& policy, int* episode_counter) {
  sim::Simulation sim(s.net, s.flow, EvalSeed(config.seed, 0));
  std::vector<double> out;
  for (int j = 0; j < config.eval_episodes; ++j) {
    if (episode_counter != nullptr) *episode_counter = j;
    out.push_back(RunEpisode(sim, EvalSeed(config.seed, j), s.episode_s, s.decision_s, policy));
  }
  return out;
}

double Mean(const std::vector<double>& v) {
  double total = 0.0;
  for (double x : v) total += x;
  return v.empty() ? 0.0 : total / static_cast<double>(v.size());
}

}  // namespace

double RunEpisode(sim::Simulation& sim, std::uint64_t seed, int episode_s, int decision_s,
                  const Policy& policy, const StepHook& hook) {
  sim.Reset(seed);
  Matrix obs = sim.ObserveAll();
  while (sim.clock() + decision_s <= episode_s) {
    const auto actions = policy(sim, obs);
    const auto rewards = sim.Step(actions, decision_s);
    Matrix next = sim.ObserveAll();
    if (hook) hook(obs, actions, rewards, next);
    obs = std::move(next);
  }
  return sim.AverageTravelTime();
}

std::vector<double> MovingAverage(const std::vector<double>& values, int window) {
  std::vector<double> out(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= static_cast<std::size_t>(window)) sum -= values[i - window];
    out[i] = sum / static_cast<double>(std::min<std::size_t>(i + 1, window));
  }
  return out;
}

std::uint64_t EvalSeed(std::uint64_t run_seed, int j) { return run_seed + 1000 + j; }

RunResult RunExperiment(const ExperimentConfig& config) {
  Validate(config);
  const auto started = std::chrono::steady_clock::now();
  const Scenario s = ConfiguredScenario(config);
  const ControllerKind kind = baselines::ParseController(config.controller);

  RunResult result;
  RunReport& report = result.report;
  report.scenario = config.scenario;
  report.controller = config.controller;
  report.seed = config.seed;
  report.effective_config = ConfigToText(config);

  sim::Simulation sim(s.net, s.flow, config.seed);
  if (baselines::IsLearnable(kind)) {
    auto net = baselines::MakeNetwork(kind, *s.net, config.network);
    agent::DqnAgent agent(net, config.agent, config.seed);
    for (int e = 0; e < config.episodes; ++e) {
      const double eps = agent.EpsilonFor(e);
      const Policy explore = [&agent, eps](const sim::Simulation&, const Matrix& obs) {
        return agent.Decide(obs, eps);
      };
      const StepHook remember = [&agent](const Matrix& o, const std::vector<int>& a,
                                         const std::vector<double>& r, const Matrix& next) {
        agent.Remember(o, a, r, next);
      };
      const double tt =
          RunEpisode(sim, config.seed, s.episode_s, s.decision_s, explore, remember);
      const double loss = agent.FinishEpisode(e);
      report.episodes.push_back({e, tt, loss, eps});
    }
    const auto* attn = AsAttentionNetwork(*net);
    const bool logging = config.log_attention && attn != nullptr;
    if (logging) result.attention = attention::AttentionLog(attn->scope());
    int eval_episode = 0;
    report.eval_travel_times = EvaluatePolicy(
        config, s, GreedyPolicy(agent, logging ? &result.attention : nullptr, &eval_episode),
        &eval_episode);
    result.params = agent.params();
    if (logging) {
      std::vector<attention::AttentionRecord> records;
      records.reserve(result.attention.size());
      for (std::size_t r = 0; r < result.attention.size(); ++r) {
        records.push_back(result.attention.record(r));
      }
      report.attention_summary = attention::SpatialStudy(
          records, s.net->num_intersections(), result.attention.num_layers() - 1);
    }
  } else {
    const Policy policy =
        kind == ControllerKind::kFixedTime ? FixedTimePolicy(config, s) : MaxPressurePolicy();
    for (int e = 0; e < config.episodes; ++e) {
      report.episodes.push_back(
          {e, RunEpisode(sim, config.seed, s.episode_s, s.decision_s, policy), 0.0, 0.0});
    }
    report.eval_travel_times = EvaluatePolicy(config, s, policy, nullptr);
  }
  std::vector<double> curve;
  for (const auto& m : report.episodes) curve.push_back(m.travel_time);
  report.smoothed = MovingAverage(curve, 5);
  report.final_travel_time = Mean(report.eval_travel_times);
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

std::vector<double> EvaluateCheckpoint(const ExperimentConfig& config,
                                       const nn::ParamSet& params) {
  Validate(config);
  const Scenario s = ConfiguredScenario(config);
  const ControllerKind kind = baselines::ParseController(config.controller);
  if (!baselines::IsLearnable(kind)) {
    throw ConfigError("controller " + config.controller + " has no checkpoint to evaluate");
  }
  agent::DqnAgent agent(baselines::MakeNetwork(kind, *s.net, config.network), config.agent,
                        config.seed);
  agent.LoadParams(params);
  int eval_episode = 0;
  return EvaluatePolicy(config, s, GreedyPolicy(agent, nullptr, &eval_episode), &eval_episode);
}

std::string RunReport::ToJson(bool include_wall_time) const {
  nlohmann::ordered_json j;
  j["scenario"] = scenario;
  j["controller"] = controller;
  j["seed"] = seed;
  j["episodes"] = episodes.size();
  std::vector<double> tt, loss, eps;
  for (const auto& m : episodes) {
    tt.push_back(m.travel_time);
    loss.push_back(m.loss);
    eps.push_back(m.epsilon);
  }
  j["travel_time"] = tt;
  j["travel_time_smoothed"] = smoothed;
  j["loss"] = loss;
  j["epsilon"] = eps;
  j["eval_travel_times"] = eval_travel_times;
  j["final_travel_time"] = final_travel_time;
  if (include_wall_time) j["wall_time_s"] = wall_time_s;
  nlohmann::ordered_json summary = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < attention_summary.size(); ++t) {
    nlohmann::ordered_json per;
    for (const auto& [id, v] : attention_summary[t]) per[std::to_string(id)] = v;
    summary.push_back({{"target", t}, {"mean_alpha", per}});
  }
  j["attention_summary"] = summary;
  nlohmann::ordered_json cfg;
  std::istringstream lines(effective_config);
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    if (key == "output_dir" || key == "checkpoint" || key == "jobs") continue;
    cfg[key] = line.substr(eq + 3);
  }
  j["config"] = cfg;
  return j.dump(2) + "\n";
}

void WriteArtifacts(const RunResult& result, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream out(fs::path(dir) / name);
    if (!out) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
    return out;
  };
  {
    auto out = open("metrics.csv");
    out.precision(17);
    out << "episode,travel_time,loss,epsilon\n";
    for (const auto& m : result.report.episodes) {
      out << m.episode << ',' << m.travel_time << ',' << m.loss << ',' << m.epsilon << '\n';
    }
  }
  open("report.json") << result.report.ToJson();
  open("config.txt") << result.report.effective_config;
  if (!result.attention.empty()) {
    auto out = open("attention.jsonl");
    result.attention.WriteJsonl(out);
  }
  if (result.params) nn::SaveParamsFile(*result.params, (fs::path(dir) / "checkpoint.json").string());
}

std::vector<SweepRow> Sweep(const ExperimentConfig& base, const std::string& parameter,
                            const std::vector<std::string>& values, int jobs,
                            std::vector<RunResult>* results) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<ExperimentConfig> configs;
  for (const auto& v : values) {
    ExperimentConfig c = base;
    ApplyOverride(c, parameter, v);
    Validate(c);
    configs.push_back(std::move(c));
  }
  std::vector<RunResult> runs(configs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        runs[i] = RunExperiment(configs[i]);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(configs.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    rows.push_back({values[i], runs[i].report.final_travel_time});
  }
  if (results != nullptr) *results = std::move(runs);
  return rows;
}

}  // namespace colight::harness
