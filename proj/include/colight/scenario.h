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

#ifndef COLIGHT_SCENARIO_H_
#define COLIGHT_SCENARIO_H_

#include <memory>
#include <string>
#include <vector>

#include "colight/microsim.h"
#include "colight/roadnet.h"

namespace colight::harness {

struct Scenario {
  std::string name;
  std::shared_ptr<const roadnet::RoadNetwork> net;
  sim::FlowSpec flow;
  int episode_s = 3600;
  int decision_s = 10;
};

// Synthetic grid scenarios (300 m lanes, three lanes per approach):
//   Arterial1x3-Uni    W->E 300 veh/h along the single row
//   Grid3x3-Bi         W<->E 300 veh/h per row, N<->S 90 veh/h per column
//   Grid6x6-Uni        W->E 300, N->S 90
//   Grid6x6-Bi         W<->E 300, N<->S 90
//   Grid3x3-FlowShift  into Inter #4: N->S down column 1 ramps 120 -> 480 while
//                      W->E along row 1 ramps 480 -> 120; 60 veh/h elsewhere
std::vector<std::string> ScenarioNames();
Scenario MakeScenario(const std::string& name);

// Boundary node at the given edge of a grid row / column.
roadnet::NodeId GridBoundary(const roadnet::RoadNetwork& net, int row, int col,
                             roadnet::Approach side);

// Time-varying inflows used by the temporal attention study.
struct FlowShiftProfile {
  roadnet::NodeId ns_origin, ns_destination;  // N->S down column 1
  roadnet::NodeId we_origin, we_destination;  // W->E along row 1
};
FlowShiftProfile FlowShiftRoutes(const roadnet::RoadNetwork& net);

}  // namespace colight::harness

#endif  // COLIGHT_SCENARIO_H_
