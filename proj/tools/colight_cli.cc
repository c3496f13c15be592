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

// Command-line entry point: run, sweep, eval, attention-report, validate-net.
// Exit codes: 0 success, 1 configuration / input error, 2 runtime error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "colight/attention.h"
#include "colight/harness.h"
#include "colight/microsim.h"
#include "colight/params.h"
#include "colight/roadnet_io.h"
#include "json.hpp"

namespace {

using colight::harness::ConfigError;
using colight::harness::ExperimentConfig;

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string scenario, controller, out;
  int episodes = -1;
  std::optional<std::uint64_t> seed;
};

void AddCommon(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "key = value config file");
  cmd->add_option("--set", f.overrides, "config override key=value (repeatable)");
  cmd->add_option("--scenario", f.scenario, "scenario name (config: scenario)");
  cmd->add_option("--controller", f.controller,
                  "fixedtime|maxpressure|colight|onemodel|neighbor_rl|gcn (config: controller)");
  cmd->add_option("--episodes", f.episodes, "training episodes (config: episodes)");
  cmd->add_option("--seed", f.seed, "run seed (config: seed)");
  cmd->add_option("--out", f.out, "output directory (config: output_dir)");
}

// Config file, then --set overrides, then dedicated flags.
ExperimentConfig Resolve(const CommonFlags& f) {
  ExperimentConfig c = f.config_path.empty()
                           ? colight::harness::DefaultConfig()
                           : colight::harness::LoadConfigFile(f.config_path);
  for (const auto& o : f.overrides) colight::harness::ApplyOverride(c, o);
  if (!f.scenario.empty()) c.scenario = f.scenario;
  if (!f.controller.empty()) c.controller = f.controller;
  if (f.episodes >= 0) c.episodes = f.episodes;
  if (f.seed) {
    c.seed = *f.seed;
    c.seed_set = true;
  }
  if (!f.out.empty()) c.output_dir = f.out;
  colight::harness::Validate(c);
  return c;
}

void RequireSeed(const ExperimentConfig& c) {
  if (!c.seed_set) throw ConfigError("a seed is required (--seed or seed = N)");
}

int CmdRun(const CommonFlags& f) {
  const auto c = Resolve(f);
  RequireSeed(c);
  const auto result = colight::harness::RunExperiment(c);
  colight::harness::WriteArtifacts(result, c.output_dir);
  std::cout.precision(17);
  std::cout << "final_travel_time " << result.report.final_travel_time << "\n"
            << "artifacts " << c.output_dir << "\n";
  return 0;
}

int CmdSweep(const CommonFlags& f, const std::string& param,
             const std::vector<std::string>& values, int jobs) {
  auto c = Resolve(f);
  RequireSeed(c);
  if (param != "heads" && param != "neighbors") {
    throw ConfigError("sweep parameter must be heads or neighbors");
  }
  if (jobs > 0) c.jobs = jobs;
  std::vector<colight::harness::RunResult> runs;
  const auto rows = colight::harness::Sweep(c, param, values, c.jobs, &runs);
  namespace fs = std::filesystem;
  fs::create_directories(c.output_dir);
  std::ofstream table(fs::path(c.output_dir) / "sweep.csv");
  table.precision(17);
  table << param << ",final_travel_time\n";
  std::cout << param << "\tfinal_travel_time\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    table << rows[i].value << ',' << rows[i].final_travel_time << '\n';
    std::cout << rows[i].value << '\t' << rows[i].final_travel_time << '\n';
    colight::harness::WriteArtifacts(
        runs[i], (fs::path(c.output_dir) / (param + "_" + rows[i].value)).string());
  }
  return 0;
}

int CmdEval(const CommonFlags& f, const std::string& checkpoint) {
  auto c = Resolve(f);
  if (!checkpoint.empty()) c.checkpoint = checkpoint;
  if (c.checkpoint.empty()) throw ConfigError("eval needs --checkpoint");
  colight::nn::ParamSet params;
  try {
    params = colight::nn::LoadParamsFile(c.checkpoint);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
  const auto times = colight::harness::EvaluateCheckpoint(c, params);
  double mean = 0;
  for (double t : times) mean += t;
  mean /= static_cast<double>(times.size());
  std::cout.precision(17);
  for (std::size_t j = 0; j < times.size(); ++j) {
    std::cout << "eval_episode " << j << " " << times[j] << "\n";
  }
  std::cout << "final_travel_time " << mean << "\n";
  return 0;
}

int CmdAttentionReport(const std::string& log_path, int layer, int target) {
  std::ifstream in(log_path);
  if (!in) throw ConfigError("cannot open attention log " + log_path);
  const auto records = colight::attention::ReadJsonl(in);
  if (records.empty()) throw ConfigError("attention log is empty");
  int targets = 0, layers = 0;
  for (const auto& r : records) {
    targets = std::max(targets, r.target + 1);
    layers = std::max(layers, r.layer + 1);
  }
  if (layer < 0) layer = layers - 1;
  nlohmann::ordered_json out;
  out["layer"] = layer;
  const auto spatial = colight::attention::SpatialStudy(records, targets, layer);
  out["spatial"] = nlohmann::ordered_json::array();
  for (int t = 0; t < targets; ++t) {
    nlohmann::ordered_json per;
    for (const auto& [id, v] : spatial[t]) per[std::to_string(id)] = v;
    out["spatial"].push_back({{"target", t}, {"mean_alpha", per}});
  }
  if (target >= 0) {
    const auto series = colight::attention::TemporalStudy(records, target, layer);
    nlohmann::ordered_json ts;
    ts["target"] = target;
    ts["t"] = series.times;
    for (const auto& [id, v] : series.alpha) ts["alpha"][std::to_string(id)] = v;
    out["temporal"] = ts;
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int CmdValidateNet(const std::string& net_path, const std::string& flow_path) {
  std::shared_ptr<const colight::roadnet::RoadNetwork> net;
  try {
    net = std::make_shared<colight::roadnet::RoadNetwork>(
        colight::roadnet::LoadNetworkFile(net_path));
  } catch (const std::exception& e) {
    throw ConfigError(net_path + ": " + e.what());
  }
  std::cout << "network ok: " << net->num_intersections() << " intersections, "
            << net->num_lanes() << " lanes, " << net->num_phases() << " phases\n";
  if (!flow_path.empty()) {
    try {
      colight::sim::Simulation sim(net, colight::sim::LoadFlowFile(flow_path), 0);
      (void)sim;
    } catch (const std::exception& e) {
      throw ConfigError(flow_path + ": " + e.what());
    }
    std::cout << "flow ok\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"colight: graph-attention traffic signal control experiments"};
  app.require_subcommand(1);

  CommonFlags run_f, sweep_f, eval_f;
  auto* run = app.add_subcommand("run", "train and evaluate one controller");
  AddCommon(run, run_f);

  auto* sweep = app.add_subcommand("sweep", "one experiment per parameter value");
  AddCommon(sweep, sweep_f);
  std::string sweep_param;
  std::vector<std::string> sweep_values;
  int sweep_jobs = 0;
  sweep->add_option("--param", sweep_param, "heads or neighbors")->required();
  sweep->add_option("--values", sweep_values, "values to try")->required()->delimiter(',');
  sweep->add_option("--jobs", sweep_jobs, "concurrent experiments (config: jobs)");

  auto* eval = app.add_subcommand("eval", "frozen-policy evaluation of a checkpoint");
  AddCommon(eval, eval_f);
  std::string checkpoint;
  eval->add_option("--checkpoint", checkpoint, "checkpoint.json (config: checkpoint)");

  auto* report = app.add_subcommand("attention-report", "summarise an attention log");
  std::string log_path;
  int layer = -1, target = -1;
  report->add_option("--log", log_path, "attention.jsonl")->required();
  report->add_option("--layer", layer, "layer (default: last)");
  report->add_option("--target", target, "also emit the time series of this intersection");

  auto* validate = app.add_subcommand("validate-net", "check a network (and flow) file");
  std::string net_path, flow_path;
  validate->add_option("--net", net_path, "network JSON")->required();
  validate->add_option("--flow", flow_path, "flow JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) return CmdRun(run_f);
    if (*sweep) return CmdSweep(sweep_f, sweep_param, sweep_values, sweep_jobs);
    if (*eval) return CmdEval(eval_f, checkpoint);
    if (*report) return CmdAttentionReport(log_path, layer, target);
    if (*validate) return CmdValidateNet(net_path, flow_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
