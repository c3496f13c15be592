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

#ifndef COLIGHT_ROADNET_H_
#define COLIGHT_ROADNET_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "colight/matrix.h"

namespace colight::roadnet {

using IntersectionId = int;
using LaneId = int;
using nn::Mask;
using NodeId = int;  // intersections are [0, N); boundary nodes are >= N

enum class Movement : std::uint8_t { kLeft = 0, kThrough = 1, kRight = 2 };
// Side of the intersection a lane arrives from.
enum class Approach : std::uint8_t { kNorth = 0, kEast = 1, kSouth = 2, kWest = 3 };

const char* ToString(Movement m);
const char* ToString(Approach a);
Movement ParseMovement(const std::string& s);
Approach ParseApproach(const std::string& s);

struct Position {
  double x = 0.0;  // meters, east positive
  double y = 0.0;  // meters, north positive
};

struct GreenMovement {
  Approach approach;
  Movement movement;
  friend bool operator==(const GreenMovement&, const GreenMovement&) = default;
  friend auto operator<=>(const GreenMovement&, const GreenMovement&) = default;
};

struct Phase {
  int id = 0;
  std::vector<GreenMovement> green;  // kept sorted

  bool Serves(Approach a, Movement m) const;
};

struct Lane {
  LaneId id = 0;
  NodeId from = 0;
  NodeId to = 0;
  double length = 0.0;
  Movement movement = Movement::kThrough;
};

struct Intersection {
  IntersectionId id = 0;
  Position position;
  std::vector<LaneId> approach_lanes;  // canonical order: N, E, S, W; L, T, R
  std::vector<Phase> phases;
};

struct BoundaryNode {
  NodeId id = 0;
  Position position;
};

// Directed road segment between two nodes; owns one or more lanes.
struct Link {
  NodeId from = 0;
  NodeId to = 0;
  std::vector<LaneId> lanes;  // ascending id
};

class NetworkError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Road graph with derived lookup tables. Immutable after construction.
class RoadNetwork {
 public:
  // Validates every invariant and throws NetworkError on the first violation.
  RoadNetwork(std::vector<Intersection> intersections,
              std::vector<BoundaryNode> boundaries, std::vector<Lane> lanes);

  int num_intersections() const { return static_cast<int>(intersections_.size()); }
  int num_lanes() const { return static_cast<int>(lanes_.size()); }
  int num_nodes() const { return num_intersections() + static_cast<int>(boundaries_.size()); }
  int num_phases() const { return num_phases_; }

  const std::vector<Intersection>& intersections() const { return intersections_; }
  const Intersection& intersection(IntersectionId i) const { return intersections_.at(i); }
  const std::vector<BoundaryNode>& boundaries() const { return boundaries_; }
  const std::vector<Lane>& lanes() const { return lanes_; }
  const Lane& lane(LaneId l) const { return lanes_.at(l); }
  const std::vector<Link>& links() const { return links_; }

  bool IsIntersection(NodeId n) const { return n >= 0 && n < num_intersections(); }
  bool IsBoundary(NodeId n) const;
  Position position(NodeId n) const;

  // Link index owning a lane.
  int link_of(LaneId l) const { return lane_link_[l]; }
  // Approach side of an incoming lane at its downstream intersection.
  Approach approach_of(LaneId l) const { return lane_approach_[l]; }
  // Turn taken when travelling from the end of `in_link` onto `out_link`.
  Movement TurnBetween(int in_link, int out_link) const;
  // Whether lane `l` can carry a vehicle performing `turn` at its end.
  bool LaneServes(LaneId l, Movement turn) const;
  // Outgoing link indices of a node, ascending by first lane id.
  const std::vector<int>& out_links(NodeId n) const { return out_links_[n]; }
  // Adjacent intersection in direction `a` (the one an `a`-approach lane
  // comes from), or -1.
  IntersectionId neighbor_toward(IntersectionId i, Approach a) const {
    return neighbor_dir_[i][static_cast<int>(a)];
  }
  // Undirected adjacency among intersections.
  const std::vector<std::vector<IntersectionId>>& intersection_adjacency() const {
    return adjacency_;
  }

 private:
  void Validate();
  void BuildIndex();

  std::vector<Intersection> intersections_;
  std::vector<BoundaryNode> boundaries_;
  std::vector<Lane> lanes_;
  std::vector<Link> links_;
  std::vector<int> lane_link_;
  std::vector<Approach> lane_approach_;
  std::vector<std::vector<int>> out_links_;
  std::vector<std::array<IntersectionId, 4>> neighbor_dir_;
  std::vector<std::vector<IntersectionId>> adjacency_;
  int num_phases_ = 0;
};

// Synthetic rows x cols grid. Intersection id = row * cols + col, row 0 is
// the northern row. Each edge arm ends in its own boundary node.
RoadNetwork BuildGrid(int rows, int cols, double lane_length,
                      int lanes_per_direction);

// Standard signal plans. Right turns are permitted in every phase and are not
// listed. Four-phase: NS-through, NS-left, EW-through, EW-left. Two-phase
// (single shared lane per approach): NS all, EW all.
std::vector<Phase> FourPhasePlan();
std::vector<Phase> TwoPhasePlan();

enum class DistanceMetric { kGeo, kNode };

DistanceMetric ParseMetric(const std::string& s);

// Self plus the size-1 nearest intersections; ties go to the smaller id.
// When the network is too small the list is padded with self and the
// returned mask marks padded slots with 0.
struct Scope {
  std::vector<IntersectionId> slots;
  Mask mask;
};
Scope NeighborhoodScope(const RoadNetwork& net, IntersectionId i, int size,
                        DistanceMetric metric);

// Neighbourhood table for every intersection, flattened row-major
// (intersection i, slot s) -> i * size + s.
struct ScopeTable {
  int size = 0;
  std::vector<IntersectionId> slots;
  Mask mask;

  int num_targets() const { return size == 0 ? 0 : static_cast<int>(slots.size()) / size; }
  IntersectionId at(int i, int s) const { return slots[static_cast<std::size_t>(i) * size + s]; }
  bool active(int i, int s) const { return mask[static_cast<std::size_t>(i) * size + s] != 0; }
};
ScopeTable BuildScopeTable(const RoadNetwork& net, int size, DistanceMetric metric);
// Self plus intersections within `hops` graph hops, padded to `size`.
ScopeTable BuildHopScopeTable(const RoadNetwork& net, int hops, int size);
// Each intersection sees only itself.
ScopeTable SelfScopeTable(int num_intersections);

// Hop distances among intersections (undirected); -1 when unreachable.
std::vector<int> HopDistances(const RoadNetwork& net, IntersectionId from);

// Observation coordinates: [0, p) phase one-hot, then for each approach
// (N, E, S, W) `lanes_per_approach` lane slots ordered left, through, right.
// Missing lanes keep slot value -1 and read as zero.
struct ObservationLayout {
  int num_phases = 0;
  int lanes_per_approach = 0;
  int k = 0;
  // lane_slots[i][j] = lane id for coordinate num_phases + j, or -1.
  std::vector<std::vector<LaneId>> lane_slots;

  int LaneCoordinate(IntersectionId i, LaneId l) const;
};
ObservationLayout BuildObservationLayout(const RoadNetwork& net);

}  // namespace colight::roadnet

#endif  // COLIGHT_ROADNET_H_
