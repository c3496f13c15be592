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

#include "colight/scenario.h"

#include <cmath>
#include <stdexcept>

namespace colight::harness {
namespace {

constexpr double kLaneLength = 300.0;
constexpr int kLanesPerApproach = 3;

using roadnet::Approach;

struct GridShape {
  int rows;
  int cols;
};

GridShape ShapeOf(const roadnet::RoadNetwork& net) {
  int cols = 0;
  for (const auto& it : net.intersections()) {
    if (std::abs(it.position.y) < 1e-9) ++cols;
  }
  return {net.num_intersections() / cols, cols};
}

void AddStraight(sim::FlowSpec& flow, const roadnet::RoadNetwork& net, Approach from,
                 double rate, double start = 0.0, double end = 3600.0) {
  const auto [rows, cols] = ShapeOf(net);
  const bool horizontal = from == Approach::kWest || from == Approach::kEast;
  const int count = horizontal ? rows : cols;
  const Approach to = static_cast<Approach>((static_cast<int>(from) + 2) % 4);
  for (int k = 0; k < count; ++k) {
    const int r = horizontal ? k : 0, c = horizontal ? 0 : k;
    flow.entries.push_back({GridBoundary(net, r, c, from), GridBoundary(net, r, c, to),
                            rate, start, end});
  }
}

}  // namespace

roadnet::NodeId GridBoundary(const roadnet::RoadNetwork& net, int row, int col,
                             Approach side) {
  const auto [rows, cols] = ShapeOf(net);
  const double len = kLaneLength;
  // Edge intersection on that side, then one lane length beyond it.
  int r = row, c = col;
  double dx = 0, dy = 0;
  switch (side) {
    case Approach::kNorth: r = 0; dy = len; break;
    case Approach::kSouth: r = rows - 1; dy = -len; break;
    case Approach::kWest: c = 0; dx = -len; break;
    case Approach::kEast: c = cols - 1; dx = len; break;
  }
  const auto p = net.intersection(r * cols + c).position;
  for (const auto& b : net.boundaries()) {
    if (std::abs(b.position.x - (p.x + dx)) < 1e-6 && std::abs(b.position.y - (p.y + dy)) < 1e-6) {
      return b.id;
    }
  }
  throw std::invalid_argument("no boundary node on that side of the grid");
}

FlowShiftProfile FlowShiftRoutes(const roadnet::RoadNetwork& net) {
  return {GridBoundary(net, 0, 1, Approach::kNorth), GridBoundary(net, 0, 1, Approach::kSouth),
          GridBoundary(net, 1, 0, Approach::kWest), GridBoundary(net, 1, 0, Approach::kEast)};
}

std::vector<std::string> ScenarioNames() {
  return {"Arterial1x3-Uni", "Grid3x3-Bi", "Grid6x6-Uni", "Grid6x6-Bi", "Grid3x3-FlowShift"};
}

Scenario MakeScenario(const std::string& name) {
  Scenario s;
  s.name = name;
  if (name == "Arterial1x3-Uni") {
    s.net = std::make_shared<roadnet::RoadNetwork>(
        roadnet::BuildGrid(1, 3, kLaneLength, kLanesPerApproach));
    AddStraight(s.flow, *s.net, Approach::kWest, 300.0);
  } else if (name == "Grid3x3-Bi" || name == "Grid6x6-Bi" || name == "Grid6x6-Uni") {
    const int n = name[4] == '3' ? 3 : 6;
    s.net = std::make_shared<roadnet::RoadNetwork>(
        roadnet::BuildGrid(n, n, kLaneLength, kLanesPerApproach));
    AddStraight(s.flow, *s.net, Approach::kWest, 300.0);
    AddStraight(s.flow, *s.net, Approach::kNorth, 90.0);
    if (name != "Grid6x6-Uni") {
      AddStraight(s.flow, *s.net, Approach::kEast, 300.0);
      AddStraight(s.flow, *s.net, Approach::kSouth, 90.0);
    }
  } else if (name == "Grid3x3-FlowShift") {
    s.net = std::make_shared<roadnet::RoadNetwork>(
        roadnet::BuildGrid(3, 3, kLaneLength, kLanesPerApproach));
    const auto& net = *s.net;
    constexpr double kBase = 60.0;
    for (Approach a : {Approach::kNorth, Approach::kEast, Approach::kSouth, Approach::kWest}) {
      sim::FlowSpec all;
      AddStraight(all, net, a, kBase);
      for (std::size_t k = 0; k < all.entries.size(); ++k) {
        const bool ramped = k == 1 && (a == Approach::kNorth || a == Approach::kWest);
        if (!ramped) s.flow.entries.push_back(all.entries[k]);
      }
    }
    const auto routes = FlowShiftRoutes(net);
    constexpr int kSegments = 6;
    const double seg = 3600.0 / kSegments;
    for (int k = 0; k < kSegments; ++k) {
      const double frac = static_cast<double>(k) / (kSegments - 1);
      const double up = 120.0 + 360.0 * frac;
      const double down = 480.0 - 360.0 * frac;
      s.flow.entries.push_back({routes.ns_origin, routes.ns_destination, up, k * seg, (k + 1) * seg});
      s.flow.entries.push_back({routes.we_origin, routes.we_destination, down, k * seg, (k + 1) * seg});
    }
  } else {
    std::string names;
    for (const auto& n : ScenarioNames()) names += (names.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown scenario '" + name + "' (" + names + ")");
  }
  return s;
}

}  // namespace colight::harness
