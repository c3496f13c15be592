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

#include "colight/baselines.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace colight::baselines {

using roadnet::Movement;

int FixedTimePlan::cycle() const {
  return std::accumulate(durations.begin(), durations.end(), 0);
}

int FixedTimeAct(const FixedTimePlan& plan, int clock) {
  if (plan.durations.empty()) throw std::invalid_argument("fixed-time plan has no phases");
  for (int d : plan.durations) {
    if (d <= 0) throw std::invalid_argument("fixed-time durations must be > 0");
  }
  const int cycle = plan.cycle();
  int pos = (clock + plan.offset) % cycle;
  if (pos < 0) pos += cycle;
  for (std::size_t p = 0; p < plan.durations.size(); ++p) {
    if (pos < plan.durations[p]) return static_cast<int>(p);
    pos -= plan.durations[p];
  }
  return static_cast<int>(plan.durations.size()) - 1;
}

std::vector<FixedTimePlan> MakeFixedTimePlans(int intersections, int phases, int phase_s,
                                              std::uint64_t seed) {
  if (phases < 1 || phase_s < 1) throw std::invalid_argument("invalid fixed-time plan");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> offset(0, phases * phase_s - 1);
  std::vector<FixedTimePlan> plans(intersections);
  for (auto& p : plans) {
    p.durations.assign(phases, phase_s);
    p.offset = offset(rng);
  }
  return plans;
}

std::vector<double> PhasePressures(const roadnet::RoadNetwork& net,
                                   roadnet::IntersectionId i,
                                   std::span<const int> lane_queue,
                                   std::span<const int> lane_count) {
  const auto& inter = net.intersection(i);
  std::vector<double> pressure(inter.phases.size(), 0.0);
  for (std::size_t p = 0; p < inter.phases.size(); ++p) {
    for (const auto& g : inter.phases[p].green) {
      if (g.movement == Movement::kRight) continue;
      for (auto l : inter.approach_lanes) {
        if (net.approach_of(l) != g.approach || !net.LaneServes(l, g.movement)) continue;
        double downstream = 0.0;
        const int in = net.link_of(l);
        for (int out : net.out_links(i)) {
          if (net.TurnBetween(in, out) != g.movement) continue;
          const auto& link = net.links()[out];
          if (net.IsIntersection(link.to)) {
            double sum = 0.0;
            for (auto dl : link.lanes) sum += lane_count[dl];
            downstream = sum / static_cast<double>(link.lanes.size());
          }
          break;
        }
        pressure[p] += lane_queue[l] - downstream;
      }
    }
  }
  return pressure;
}

int MaxPressureAct(const roadnet::RoadNetwork& net, roadnet::IntersectionId i,
                   std::span<const int> lane_queue, std::span<const int> lane_count) {
  const auto pressure = PhasePressures(net, i, lane_queue, lane_count);
  // Pressures are small rationals; the tolerance keeps rounding in the
  // downstream means from breaking ties away from the smallest phase id.
  int best = 0;
  for (int p = 1; p < static_cast<int>(pressure.size()); ++p) {
    if (pressure[p] > pressure[best] + 1e-9) best = p;
  }
  return best;
}

std::vector<int> MaxPressureActions(const sim::Simulation& sim) {
  const auto& net = sim.network();
  std::vector<int> queue(net.num_lanes()), count(net.num_lanes());
  for (int l = 0; l < net.num_lanes(); ++l) {
    queue[l] = sim.lane_stopped(l);
    count[l] = sim.lane_count(l);
  }
  std::vector<int> actions(net.num_intersections());
  for (int i = 0; i < net.num_intersections(); ++i) {
    actions[i] = MaxPressureAct(net, i, queue, count);
  }
  return actions;
}

ControllerKind ParseController(const std::string& name) {
  if (name == "fixedtime") return ControllerKind::kFixedTime;
  if (name == "maxpressure") return ControllerKind::kMaxPressure;
  if (name == "colight") return ControllerKind::kCoLight;
  if (name == "onemodel") return ControllerKind::kOneModel;
  if (name == "neighbor_rl") return ControllerKind::kNeighborRL;
  if (name == "gcn") return ControllerKind::kGcn;
  throw std::invalid_argument("unknown controller '" + name +
                              "' (fixedtime, maxpressure, colight, onemodel, "
                              "neighbor_rl, gcn)");
}

std::string ToString(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kFixedTime: return "fixedtime";
    case ControllerKind::kMaxPressure: return "maxpressure";
    case ControllerKind::kCoLight: return "colight";
    case ControllerKind::kOneModel: return "onemodel";
    case ControllerKind::kNeighborRL: return "neighbor_rl";
    case ControllerKind::kGcn: return "gcn";
  }
  return "?";
}

bool IsLearnable(ControllerKind kind) {
  return kind != ControllerKind::kFixedTime && kind != ControllerKind::kMaxPressure;
}

std::shared_ptr<const model::QNetwork> MakeNetwork(ControllerKind kind,
                                                   const roadnet::RoadNetwork& net,
                                                   NetworkOptions options) {
  auto cfg = options.model;
  cfg.phases = net.num_phases();
  cfg.obs_dim = roadnet::BuildObservationLayout(net).k;
  const int n = net.num_intersections();
  const int size = options.scope_size;
  switch (kind) {
    case ControllerKind::kCoLight:
      cfg.attention = model::AttentionMode::kLearned;
      return std::make_shared<model::CoLightNetwork>(
          cfg, roadnet::BuildScopeTable(net, size, options.metric));
    case ControllerKind::kGcn:
      cfg.attention = model::AttentionMode::kUniform;
      return std::make_shared<model::CoLightNetwork>(
          cfg, roadnet::BuildScopeTable(net, size, options.metric));
    case ControllerKind::kOneModel:
      cfg.attention = model::AttentionMode::kLearned;
      return std::make_shared<model::CoLightNetwork>(cfg, roadnet::SelfScopeTable(n));
    case ControllerKind::kNeighborRL:
      return std::make_shared<model::NeighborConcatNetwork>(cfg,
                                                            model::AdjacentNeighbors(net));
    default:
      throw std::invalid_argument(ToString(kind) + " has no Q-network");
  }
}

}  // namespace colight::baselines
