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

#include <algorithm>
#include <cmath>
#include <set>

#include "colight/roadnet.h"
#include "colight/roadnet_io.h"
#include "doctest.h"

using namespace colight::roadnet;

namespace {

// Brute-force scope oracle: sort every intersection by (distance, id).
std::vector<int> OracleScope(const RoadNetwork& net, int i, int size, DistanceMetric metric) {
  std::vector<std::pair<double, int>> order;
  const auto hops = HopDistances(net, i);
  for (int j = 0; j < net.num_intersections(); ++j) {
    double d;
    if (metric == DistanceMetric::kNode) {
      d = hops[j] < 0 ? 1e18 : hops[j];
    } else {
      const auto a = net.position(i), b = net.position(j);
      d = std::hypot(a.x - b.x, a.y - b.y);
    }
    order.push_back({j == i ? -1.0 : d, j});
  }
  std::sort(order.begin(), order.end());
  std::vector<int> out;
  for (int s = 0; s < size; ++s) out.push_back(s < static_cast<int>(order.size()) ? order[s].second : i);
  return out;
}

}  // namespace

TEST_CASE("build_grid examples") {
  const auto g = BuildGrid(3, 3, 300, 3);
  CHECK(g.num_intersections() == 9);
  for (const auto& it : g.intersections()) {
    CHECK(it.approach_lanes.size() == 12);
    for (auto l : it.approach_lanes) CHECK(g.lane(l).length == 300.0);
  }
  const auto one = BuildGrid(1, 1, 300, 1);
  CHECK(one.num_intersections() == 1);
  CHECK(one.intersection(0).approach_lanes.size() == 4);
  std::set<Approach> sides;
  for (auto l : one.intersection(0).approach_lanes) sides.insert(one.approach_of(l));
  CHECK(sides.size() == 4);

  const auto art = BuildGrid(1, 3, 300, 3);
  CHECK(art.num_intersections() == 3);
  const auto& adj = art.intersection_adjacency();
  CHECK(adj[1].size() == 2);
  int boundary_approaches = 0;
  for (auto l : art.intersection(1).approach_lanes) {
    if (art.IsBoundary(art.lane(l).from)) ++boundary_approaches;
  }
  CHECK(boundary_approaches == 2 * 3);  // north and south arms, three lanes each

  CHECK_THROWS_AS(BuildGrid(0, 3, 300, 3), NetworkError);
  CHECK_THROWS_AS(BuildGrid(3, 0, 300, 3), NetworkError);
  CHECK_THROWS_AS(BuildGrid(3, 3, 300, 0), NetworkError);
}

TEST_CASE("three-lane approaches are left, through, right") {
  const auto g = BuildGrid(2, 2, 300, 3);
  for (const auto& it : g.intersections()) {
    for (std::size_t k = 0; k < it.approach_lanes.size(); ++k) {
      CHECK(static_cast<int>(g.lane(it.approach_lanes[k]).movement) == static_cast<int>(k % 3));
      CHECK(static_cast<int>(g.approach_of(it.approach_lanes[k])) == static_cast<int>(k / 3));
    }
  }
  CHECK(g.num_phases() == 4);
  CHECK(BuildGrid(2, 2, 300, 1).num_phases() == 2);
}

TEST_CASE("every lane belongs to exactly one link") {
  const auto g = BuildGrid(3, 4, 250, 3);
  std::vector<int> owner(g.num_lanes(), 0);
  for (const auto& link : g.links()) {
    for (auto l : link.lanes) {
      ++owner[l];
      CHECK(g.lane(l).from == link.from);
      CHECK(g.lane(l).to == link.to);
    }
  }
  for (int c : owner) CHECK(c == 1);
}

TEST_CASE("neighborhood scope examples") {
  const auto g = BuildGrid(3, 3, 300, 3);
  auto center = NeighborhoodScope(g, 4, 5, DistanceMetric::kNode);
  CHECK(center.slots == std::vector<int>{4, 1, 3, 5, 7});
  CHECK(center.mask == Mask{1, 1, 1, 1, 1});

  const auto art = BuildGrid(1, 3, 300, 3);
  auto mid = NeighborhoodScope(art, 1, 5, DistanceMetric::kGeo);
  CHECK(mid.slots == std::vector<int>{1, 0, 2, 1, 1});
  CHECK(mid.mask == Mask{1, 1, 1, 0, 0});

  auto corner = NeighborhoodScope(g, 0, 5, DistanceMetric::kNode);
  CHECK(corner.slots == OracleScope(g, 0, 5, DistanceMetric::kNode));
  CHECK(corner.slots == std::vector<int>{0, 1, 3, 2, 4});
}

TEST_CASE("scope matches the brute-force oracle on several grids") {
  for (auto [r, c] : {std::pair{3, 3}, {2, 5}, {4, 4}, {1, 6}}) {
    const auto g = BuildGrid(r, c, 300, 3);
    for (int size = 1; size <= 7; ++size) {
      for (auto metric : {DistanceMetric::kGeo, DistanceMetric::kNode}) {
        for (int i = 0; i < g.num_intersections(); ++i) {
          const auto s = NeighborhoodScope(g, i, size, metric);
          CHECK(s.slots.size() == static_cast<std::size_t>(size));
          CHECK(s.slots[0] == i);
          CHECK(std::count(s.mask.begin(), s.mask.end(), 1) ==
                std::min(size, g.num_intersections()));
          // Self appears exactly once among active slots.
          int self = 0;
          for (int k = 0; k < size; ++k) self += s.mask[k] && s.slots[k] == i;
          CHECK(self == 1);
          CHECK(s.slots == OracleScope(g, i, size, metric));
        }
      }
    }
  }
}

TEST_CASE("node scope survives translating every position") {
  const auto g = BuildGrid(3, 3, 300, 3);
  auto inters = g.intersections();
  auto bounds = g.boundaries();
  for (auto& it : inters) it.position = {it.position.x + 1234.5, it.position.y - 77.0};
  for (auto& b : bounds) b.position = {b.position.x + 1234.5, b.position.y - 77.0};
  const RoadNetwork moved(inters, bounds, g.lanes());
  for (int i = 0; i < 9; ++i) {
    CHECK(NeighborhoodScope(g, i, 5, DistanceMetric::kNode).slots ==
          NeighborhoodScope(moved, i, 5, DistanceMetric::kNode).slots);
  }
}

TEST_CASE("observation layout") {
  const auto g = BuildGrid(3, 3, 300, 3);
  const auto lay = BuildObservationLayout(g);
  CHECK(lay.k == 16);
  const auto small = BuildObservationLayout(BuildGrid(2, 2, 300, 1));
  CHECK(small.k == 6);
  const auto again = BuildObservationLayout(g);
  CHECK(again.lane_slots == lay.lane_slots);
  // Bijection: every approach lane occupies a distinct coordinate in [p, k).
  for (int i = 0; i < 9; ++i) {
    std::set<int> coords;
    for (auto l : g.intersection(i).approach_lanes) {
      const int c = lay.LaneCoordinate(i, l);
      CHECK(c >= lay.num_phases);
      CHECK(c < lay.k);
      coords.insert(c);
    }
    CHECK(coords.size() == 12);
  }
}

TEST_CASE("hop scope table links the arterial through its middle") {
  const auto art = BuildGrid(1, 3, 300, 3);
  const auto t = BuildHopScopeTable(art, 1, 3);
  CHECK(t.num_targets() == 3);
  CHECK(t.at(0, 0) == 0);
  CHECK(t.active(0, 1));
  CHECK(t.at(0, 1) == 1);
  CHECK_FALSE(t.active(0, 2));
  CHECK(t.at(1, 1) == 0);
  CHECK(t.at(1, 2) == 2);
  CHECK(t.active(1, 2));
  CHECK(t.at(2, 1) == 1);
  CHECK_FALSE(t.active(2, 2));
}

TEST_CASE("network JSON round trip and validation") {
  const auto g = BuildGrid(2, 3, 300, 3);
  const auto text = NetworkToJson(g);
  const auto back = ParseNetworkJson(text);
  CHECK(NetworkToJson(back) == text);

  // Lane with zero length on a known line.
  const std::string bad = R"({
  "intersections": [
    {"id": 0, "x": 0, "y": 0, "phases": [{"id": 0, "green": [{"approach": "N", "movement": "through"}]}]}
  ],
  "boundaries": [{"id": 1, "x": 0, "y": 300}],
  "lanes": [
    {"id": 0, "from": 1, "to": 0, "length": 300, "movement": "through"},
    {"id": 1, "from": 0, "to": 1, "length": 0, "movement": "through"}
  ]
})";
  try {
    ParseNetworkJson(bad);
    FAIL("expected a NetworkError");
  } catch (const NetworkError& e) {
    CHECK(std::string(e.what()).rfind("line 8:", 0) == 0);
  }
  CHECK_THROWS_AS(ParseNetworkJson("{\"intersections\": [}"), NetworkError);
  CHECK_THROWS_AS(ParseNetworkJson("[]"), NetworkError);
}

TEST_CASE("disconnected networks are rejected") {
  const auto a = BuildGrid(1, 1, 300, 1);
  auto inters = a.intersections();
  auto second = inters[0];
  second.id = 1;
  second.approach_lanes.clear();
  second.position = {5000, 5000};
  inters.push_back(second);
  // Renumber boundaries past the new intersection.
  auto bounds = a.boundaries();
  auto lanes = a.lanes();
  for (auto& b : bounds) b.id += 1;
  for (auto& l : lanes) {
    if (l.from >= 1) l.from += 1;
    if (l.to >= 1) l.to += 1;
  }
  CHECK_THROWS_AS(RoadNetwork(inters, bounds, lanes), NetworkError);
}
