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

#include "colight/roadnet.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

namespace colight::roadnet {
namespace {

constexpr double kPi = 3.14159265358979323846;

Approach SideOf(Position at, Position from) {
  const double dx = from.x - at.x;
  const double dy = from.y - at.y;
  if (std::abs(dy) >= std::abs(dx)) {
    return dy > 0 ? Approach::kNorth : Approach::kSouth;
  }
  return dx > 0 ? Approach::kEast : Approach::kWest;
}

}  // namespace

const char* ToString(Movement m) {
  switch (m) {
    case Movement::kLeft: return "left";
    case Movement::kThrough: return "through";
    case Movement::kRight: return "right";
  }
  return "?";
}

const char* ToString(Approach a) {
  switch (a) {
    case Approach::kNorth: return "N";
    case Approach::kEast: return "E";
    case Approach::kSouth: return "S";
    case Approach::kWest: return "W";
  }
  return "?";
}

Movement ParseMovement(const std::string& s) {
  if (s == "left") return Movement::kLeft;
  if (s == "through") return Movement::kThrough;
  if (s == "right") return Movement::kRight;
  throw NetworkError("unknown movement '" + s + "'");
}

Approach ParseApproach(const std::string& s) {
  if (s == "N") return Approach::kNorth;
  if (s == "E") return Approach::kEast;
  if (s == "S") return Approach::kSouth;
  if (s == "W") return Approach::kWest;
  throw NetworkError("unknown approach '" + s + "'");
}

DistanceMetric ParseMetric(const std::string& s) {
  if (s == "geo") return DistanceMetric::kGeo;
  if (s == "node") return DistanceMetric::kNode;
  throw std::invalid_argument("unknown distance metric '" + s + "'");
}

bool Phase::Serves(Approach a, Movement m) const {
  return std::binary_search(green.begin(), green.end(), GreenMovement{a, m});
}

RoadNetwork::RoadNetwork(std::vector<Intersection> intersections,
                         std::vector<BoundaryNode> boundaries,
                         std::vector<Lane> lanes)
    : intersections_(std::move(intersections)),
      boundaries_(std::move(boundaries)),
      lanes_(std::move(lanes)) {
  Validate();
  BuildIndex();
}

bool RoadNetwork::IsBoundary(NodeId n) const {
  return n >= num_intersections() && n < num_nodes();
}

Position RoadNetwork::position(NodeId n) const {
  if (IsIntersection(n)) return intersections_[n].position;
  if (IsBoundary(n)) return boundaries_[n - num_intersections()].position;
  throw NetworkError("unknown node " + std::to_string(n));
}

void RoadNetwork::Validate() {
  const int n = num_intersections();
  if (n == 0) throw NetworkError("network has no intersections");
  for (int i = 0; i < n; ++i) {
    if (intersections_[i].id != i) {
      throw NetworkError("intersection ids must be 0..N-1 in order; found " +
                         std::to_string(intersections_[i].id) + " at index " +
                         std::to_string(i));
    }
  }
  for (std::size_t b = 0; b < boundaries_.size(); ++b) {
    if (boundaries_[b].id != n + static_cast<int>(b)) {
      throw NetworkError("boundary ids must be N..N+B-1 in order; found " +
                         std::to_string(boundaries_[b].id));
    }
  }
  for (std::size_t l = 0; l < lanes_.size(); ++l) {
    const Lane& lane = lanes_[l];
    const std::string where = "lane " + std::to_string(lane.id);
    if (lane.id != static_cast<int>(l)) {
      throw NetworkError("lane ids must be 0..L-1 in order; found " +
                         std::to_string(lane.id));
    }
    if (!(lane.length > 0.0)) throw NetworkError(where + ": length must be > 0");
    if (lane.from < 0 || lane.from >= num_nodes()) {
      throw NetworkError(where + ": unknown from node " + std::to_string(lane.from));
    }
    if (lane.to < 0 || lane.to >= num_nodes()) {
      throw NetworkError(where + ": unknown to node " + std::to_string(lane.to));
    }
    if (lane.from == lane.to) throw NetworkError(where + ": self loop");
    if (IsBoundary(lane.from) && IsBoundary(lane.to)) {
      throw NetworkError(where + ": connects two boundary nodes");
    }
  }
  num_phases_ = static_cast<int>(intersections_[0].phases.size());
  for (auto& inter : intersections_) {
    const std::string where = "intersection " + std::to_string(inter.id);
    if (inter.phases.empty()) throw NetworkError(where + ": no phases");
    if (static_cast<int>(inter.phases.size()) != num_phases_) {
      throw NetworkError(where + ": phase count differs from intersection 0");
    }
    std::set<std::vector<GreenMovement>> seen;
    for (std::size_t p = 0; p < inter.phases.size(); ++p) {
      Phase& phase = inter.phases[p];
      if (phase.id != static_cast<int>(p)) {
        throw NetworkError(where + ": phase ids must be 0..p-1 in order");
      }
      std::sort(phase.green.begin(), phase.green.end());
      phase.green.erase(std::unique(phase.green.begin(), phase.green.end()),
                        phase.green.end());
      if (phase.green.empty()) {
        throw NetworkError(where + ": phase " + std::to_string(p) +
                           " has no green movements");
      }
      if (!seen.insert(phase.green).second) {
        throw NetworkError(where + ": phase " + std::to_string(p) +
                           " duplicates an earlier phase");
      }
    }
    for (LaneId l : inter.approach_lanes) {
      if (l < 0 || l >= num_lanes()) {
        throw NetworkError(where + ": approach lane " + std::to_string(l) +
                           " does not exist");
      }
      if (lanes_[l].to != inter.id) {
        throw NetworkError(where + ": approach lane " + std::to_string(l) +
                           " does not end here");
      }
    }
  }
  // Weak connectivity over all nodes.
  std::vector<std::vector<int>> undirected(num_nodes());
  for (const Lane& lane : lanes_) {
    undirected[lane.from].push_back(lane.to);
    undirected[lane.to].push_back(lane.from);
  }
  std::vector<char> seen(num_nodes(), 0);
  std::deque<int> frontier{0};
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop_front();
    for (int v : undirected[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        frontier.push_back(v);
      }
    }
  }
  if (reached != num_nodes()) throw NetworkError("network is not weakly connected");
}

void RoadNetwork::BuildIndex() {
  std::map<std::pair<NodeId, NodeId>, int> link_index;
  lane_link_.assign(lanes_.size(), -1);
  for (const Lane& lane : lanes_) {
    auto key = std::make_pair(lane.from, lane.to);
    auto it = link_index.find(key);
    if (it == link_index.end()) {
      it = link_index.emplace(key, static_cast<int>(links_.size())).first;
      links_.push_back(Link{lane.from, lane.to, {}});
    }
    links_[it->second].lanes.push_back(lane.id);
    lane_link_[lane.id] = it->second;
  }
  out_links_.assign(num_nodes(), {});
  for (std::size_t k = 0; k < links_.size(); ++k) {
    out_links_[links_[k].from].push_back(static_cast<int>(k));
  }
  for (auto& outs : out_links_) {
    std::sort(outs.begin(), outs.end(), [&](int a, int b) {
      return links_[a].lanes.front() < links_[b].lanes.front();
    });
  }
  lane_approach_.assign(lanes_.size(), Approach::kNorth);
  neighbor_dir_.assign(intersections_.size(), {-1, -1, -1, -1});
  adjacency_.assign(intersections_.size(), {});
  for (auto& inter : intersections_) inter.approach_lanes.clear();
  for (const Lane& lane : lanes_) {
    if (!IsIntersection(lane.to)) continue;
    const Approach side = SideOf(position(lane.to), position(lane.from));
    lane_approach_[lane.id] = side;
    intersections_[lane.to].approach_lanes.push_back(lane.id);
    if (IsIntersection(lane.from)) {
      neighbor_dir_[lane.to][static_cast<int>(side)] = lane.from;
      adjacency_[lane.to].push_back(lane.from);
      adjacency_[lane.from].push_back(lane.to);
    }
  }
  for (auto& adj : adjacency_) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  for (auto& inter : intersections_) {
    std::sort(inter.approach_lanes.begin(), inter.approach_lanes.end(),
              [&](LaneId a, LaneId b) {
                return std::make_tuple(lane_approach_[a], lanes_[a].movement, a) <
                       std::make_tuple(lane_approach_[b], lanes_[b].movement, b);
              });
  }
}

Movement RoadNetwork::TurnBetween(int in_link, int out_link) const {
  const Link& in = links_.at(in_link);
  const Link& out = links_.at(out_link);
  const Position a = position(in.from);
  const Position b = position(in.to);
  const Position c = position(out.to);
  const double hx1 = b.x - a.x, hy1 = b.y - a.y;
  const double hx2 = c.x - b.x, hy2 = c.y - b.y;
  const double angle = std::atan2(hx1 * hy2 - hy1 * hx2, hx1 * hx2 + hy1 * hy2);
  if (std::abs(angle) < kPi / 4.0) return Movement::kThrough;
  return angle > 0 ? Movement::kLeft : Movement::kRight;
}

bool RoadNetwork::LaneServes(LaneId l, Movement turn) const {
  const Lane& lane = lanes_.at(l);
  if (lane.movement == turn) return true;
  const Link& link = links_[lane_link_[l]];
  int best = std::numeric_limits<int>::max();
  for (LaneId other : link.lanes) {
    const int d = std::abs(static_cast<int>(lanes_[other].movement) -
                           static_cast<int>(turn));
    if (d == 0) return false;  // a dedicated lane exists
    best = std::min(best, d);
  }
  return std::abs(static_cast<int>(lane.movement) - static_cast<int>(turn)) == best;
}

std::vector<Phase> FourPhasePlan() {
  using A = Approach;
  using M = Movement;
  return {
      Phase{0, {{A::kNorth, M::kThrough}, {A::kSouth, M::kThrough}}},
      Phase{1, {{A::kNorth, M::kLeft}, {A::kSouth, M::kLeft}}},
      Phase{2, {{A::kEast, M::kThrough}, {A::kWest, M::kThrough}}},
      Phase{3, {{A::kEast, M::kLeft}, {A::kWest, M::kLeft}}},
  };
}

std::vector<Phase> TwoPhasePlan() {
  using A = Approach;
  using M = Movement;
  return {
      Phase{0, {{A::kNorth, M::kLeft}, {A::kNorth, M::kThrough},
                {A::kSouth, M::kLeft}, {A::kSouth, M::kThrough}}},
      Phase{1, {{A::kEast, M::kLeft}, {A::kEast, M::kThrough},
                {A::kWest, M::kLeft}, {A::kWest, M::kThrough}}},
  };
}

RoadNetwork BuildGrid(int rows, int cols, double lane_length,
                      int lanes_per_direction) {
  if (rows < 1 || cols < 1) throw NetworkError("grid dimensions must be >= 1");
  if (lanes_per_direction < 1) throw NetworkError("lanes_per_direction must be >= 1");
  if (!(lane_length > 0.0)) throw NetworkError("lane length must be > 0");

  const int n = rows * cols;
  const auto plan = lanes_per_direction == 1 ? TwoPhasePlan() : FourPhasePlan();
  std::vector<Intersection> inters(n);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      Intersection& it = inters[r * cols + c];
      it.id = r * cols + c;
      it.position = {c * lane_length, -r * lane_length};
      it.phases = plan;
    }
  }
  std::vector<Movement> lane_moves;
  if (lanes_per_direction == 1) {
    lane_moves = {Movement::kThrough};
  } else {
    lane_moves.push_back(Movement::kLeft);
    for (int k = 0; k < std::max(1, lanes_per_direction - 2); ++k) {
      lane_moves.push_back(Movement::kThrough);
    }
    if (lanes_per_direction >= 3) lane_moves.push_back(Movement::kRight);
  }

  std::vector<BoundaryNode> boundaries;
  std::vector<Lane> lanes;
  auto add_link = [&](NodeId from, NodeId to) {
    for (Movement m : lane_moves) {
      lanes.push_back(Lane{static_cast<int>(lanes.size()), from, to, lane_length, m});
    }
  };
  // (drow, dcol) for N, E, S, W.
  const int dr[4] = {-1, 0, 1, 0};
  const int dc[4] = {0, 1, 0, -1};
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int id = r * cols + c;
      for (int side = 0; side < 4; ++side) {
        const int nr = r + dr[side];
        const int nc = c + dc[side];
        if (nr >= 0 && nr < rows && nc >= 0 && nc < cols) {
          add_link(nr * cols + nc, id);
        } else {
          const NodeId b = n + static_cast<int>(boundaries.size());
          boundaries.push_back(BoundaryNode{
              b, {inters[id].position.x + dc[side] * lane_length,
                  inters[id].position.y - dr[side] * lane_length}});
          add_link(b, id);
          add_link(id, b);
        }
      }
    }
  }
  return RoadNetwork(std::move(inters), std::move(boundaries), std::move(lanes));
}

std::vector<int> HopDistances(const RoadNetwork& net, IntersectionId from) {
  std::vector<int> dist(net.num_intersections(), -1);
  std::deque<int> frontier{from};
  dist[from] = 0;
  const auto& adj = net.intersection_adjacency();
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop_front();
    for (int v : adj[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        frontier.push_back(v);
      }
    }
  }
  return dist;
}

Scope NeighborhoodScope(const RoadNetwork& net, IntersectionId i, int size,
                        DistanceMetric metric) {
  if (size < 1) throw std::invalid_argument("scope size must be >= 1");
  const int n = net.num_intersections();
  std::vector<double> dist(n, 0.0);
  if (metric == DistanceMetric::kGeo) {
    const Position p = net.position(i);
    for (int j = 0; j < n; ++j) {
      const Position q = net.position(j);
      dist[j] = std::hypot(q.x - p.x, q.y - p.y);
    }
  } else {
    const auto hops = HopDistances(net, i);
    for (int j = 0; j < n; ++j) {
      dist[j] = hops[j] < 0 ? std::numeric_limits<double>::infinity() : hops[j];
    }
  }
  std::vector<int> others;
  for (int j = 0; j < n; ++j) {
    if (j != i) others.push_back(j);
  }
  std::stable_sort(others.begin(), others.end(),
                   [&](int a, int b) { return dist[a] < dist[b]; });
  Scope scope;
  scope.slots.push_back(i);
  scope.mask.push_back(1);
  for (int j : others) {
    if (static_cast<int>(scope.slots.size()) == size) break;
    scope.slots.push_back(j);
    scope.mask.push_back(1);
  }
  while (static_cast<int>(scope.slots.size()) < size) {
    scope.slots.push_back(i);
    scope.mask.push_back(0);
  }
  return scope;
}

ScopeTable BuildScopeTable(const RoadNetwork& net, int size,
                           DistanceMetric metric) {
  ScopeTable table;
  table.size = size;
  for (int i = 0; i < net.num_intersections(); ++i) {
    const Scope s = NeighborhoodScope(net, i, size, metric);
    table.slots.insert(table.slots.end(), s.slots.begin(), s.slots.end());
    table.mask.insert(table.mask.end(), s.mask.begin(), s.mask.end());
  }
  return table;
}

ScopeTable BuildHopScopeTable(const RoadNetwork& net, int hops, int size) {
  if (size < 1) throw std::invalid_argument("scope size must be >= 1");
  ScopeTable table;
  table.size = size;
  for (int i = 0; i < net.num_intersections(); ++i) {
    const auto dist = HopDistances(net, i);
    std::vector<int> others;
    for (int j = 0; j < net.num_intersections(); ++j) {
      if (j != i && dist[j] > 0 && dist[j] <= hops) others.push_back(j);
    }
    std::stable_sort(others.begin(), others.end(),
                     [&](int a, int b) { return dist[a] < dist[b]; });
    table.slots.push_back(i);
    table.mask.push_back(1);
    int used = 1;
    for (int j : others) {
      if (used == size) break;
      table.slots.push_back(j);
      table.mask.push_back(1);
      ++used;
    }
    for (; used < size; ++used) {
      table.slots.push_back(i);
      table.mask.push_back(0);
    }
  }
  return table;
}

ScopeTable SelfScopeTable(int num_intersections) {
  ScopeTable table;
  table.size = 1;
  table.slots.resize(num_intersections);
  std::iota(table.slots.begin(), table.slots.end(), 0);
  table.mask.assign(num_intersections, 1);
  return table;
}

int ObservationLayout::LaneCoordinate(IntersectionId i, LaneId l) const {
  const auto& slots = lane_slots.at(i);
  for (std::size_t j = 0; j < slots.size(); ++j) {
    if (slots[j] == l) return num_phases + static_cast<int>(j);
  }
  return -1;
}

ObservationLayout BuildObservationLayout(const RoadNetwork& net) {
  ObservationLayout layout;
  layout.num_phases = net.num_phases();
  std::vector<std::array<std::vector<LaneId>, 4>> by_side(net.num_intersections());
  for (const auto& inter : net.intersections()) {
    for (LaneId l : inter.approach_lanes) {
      by_side[inter.id][static_cast<int>(net.approach_of(l))].push_back(l);
    }
    for (const auto& side : by_side[inter.id]) {
      layout.lanes_per_approach =
          std::max(layout.lanes_per_approach, static_cast<int>(side.size()));
    }
  }
  layout.k = layout.num_phases + 4 * layout.lanes_per_approach;
  layout.lane_slots.assign(net.num_intersections(),
                           std::vector<LaneId>(4 * layout.lanes_per_approach, -1));
  for (int i = 0; i < net.num_intersections(); ++i) {
    for (int side = 0; side < 4; ++side) {
      // approach_lanes is already sorted by (approach, movement, id)
      const auto& lanes = by_side[i][side];
      for (std::size_t j = 0; j < lanes.size(); ++j) {
        layout.lane_slots[i][side * layout.lanes_per_approach + j] = lanes[j];
      }
    }
  }
  return layout;
}

}  // namespace colight::roadnet
