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

#ifndef COLIGHT_BASELINES_H_
#define COLIGHT_BASELINES_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "colight/microsim.h"
#include "colight/model.h"
#include "colight/roadnet.h"

namespace colight::baselines {

struct FixedTimePlan {
  std::vector<int> durations;  // seconds per phase, in phase order
  int offset = 0;

  int cycle() const;
};

// Phase whose slot of the cumulative schedule contains (clock + offset) mod cycle.
int FixedTimeAct(const FixedTimePlan& plan, int clock);

// One plan per intersection, `phase_s` seconds per phase, offsets uniform in
// [0, cycle) drawn from `seed`.
std::vector<FixedTimePlan> MakeFixedTimePlans(int intersections, int phases, int phase_s,
                                              std::uint64_t seed);

// Per-phase pressure: over every non-right green movement, the queue on the
// approach lanes serving it minus the mean per-lane vehicle count of the link
// that movement feeds (0 when it feeds a boundary sink).
std::vector<double> PhasePressures(const roadnet::RoadNetwork& net,
                                   roadnet::IntersectionId i,
                                   std::span<const int> lane_queue,
                                   std::span<const int> lane_count);
// Argmax of PhasePressures; ties go to the smallest phase id.
int MaxPressureAct(const roadnet::RoadNetwork& net, roadnet::IntersectionId i,
                   std::span<const int> lane_queue, std::span<const int> lane_count);
std::vector<int> MaxPressureActions(const sim::Simulation& sim);

enum class ControllerKind { kFixedTime, kMaxPressure, kCoLight, kOneModel, kNeighborRL, kGcn };

ControllerKind ParseController(const std::string& name);
std::string ToString(ControllerKind kind);
bool IsLearnable(ControllerKind kind);

struct NetworkOptions {
  model::ModelConfig model;  // obs_dim and phases are filled from the road network
  int scope_size = 5;
  roadnet::DistanceMetric metric = roadnet::DistanceMetric::kGeo;
};

// Q-network of a learnable controller on `net`:
//   colight     - learned multi-head attention over the neighbourhood scope
//   onemodel    - the same stack with a self-only scope
//   gcn         - uniform attention over the neighbourhood scope
//   neighbor_rl - own + adjacent observations concatenated at fixed positions
std::shared_ptr<const model::QNetwork> MakeNetwork(ControllerKind kind,
                                                   const roadnet::RoadNetwork& net,
                                                   NetworkOptions options);

}  // namespace colight::baselines

#endif  // COLIGHT_BASELINES_H_
