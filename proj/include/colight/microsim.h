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

#ifndef COLIGHT_MICROSIM_H_
#define COLIGHT_MICROSIM_H_

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "colight/matrix.h"
#include "colight/roadnet.h"

namespace colight::sim {

using roadnet::LaneId;
using roadnet::NodeId;
using roadnet::RoadNetwork;

// Constant-rate demand between two boundary nodes over [start_s, end_s).
struct FlowEntry {
  NodeId origin = 0;
  NodeId destination = 0;
  double rate_vph = 0.0;
  double start_s = 0.0;
  double end_s = 3600.0;
};

struct ExplicitVehicle {
  NodeId origin = 0;
  NodeId destination = 0;
  double depart_s = 0.0;
};

struct FlowSpec {
  std::vector<FlowEntry> entries;
  std::vector<ExplicitVehicle> vehicles;

  // Summed rate of all entries from `origin` active at time t.
  double RateAt(NodeId origin, NodeId destination, double t) const;
};

class FlowError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// {"entries": [{origin, destination, rate_vph, start_s, end_s}]} and/or
// {"vehicles": [{origin, destination, depart_s}]}.
FlowSpec ParseFlowJson(const std::string& text);
FlowSpec LoadFlowFile(const std::string& path);
std::string FlowToJson(const FlowSpec& flow);

struct SimOptions {
  double free_flow_speed = 10.0;  // m/s
  int yellow_s = 3;
  int all_red_s = 2;
  double vehicle_spacing = 7.5;  // m of lane per stored vehicle
  int saturation_per_s = 1;      // vehicles per lane per green second
};

struct Vehicle {
  int id = 0;
  NodeId origin = 0;
  NodeId destination = 0;
  int depart_time = 0;
  std::vector<LaneId> route;
  int enter_time = -1;  // -1 until the vehicle gets onto its first lane
  int exit_time = -1;
};

enum class Interim : std::uint8_t { kGreen, kYellow, kAllRed };

struct SignalState {
  int phase = 0;  // commanded phase (the incoming one during a transition)
  Interim interim = Interim::kGreen;
  int remaining = 0;  // seconds left in yellow / all-red
};

// Deterministic point-queue simulator. Vehicles drive at free-flow speed to
// the stop line, queue FIFO, and discharge one per lane per green second when
// the receiving lane has room.
class Simulation {
 public:
  Simulation(std::shared_ptr<const RoadNetwork> net, FlowSpec flow,
             std::uint64_t seed, SimOptions options = {});

  // Back to clock 0 with empty lanes and every signal green on phase 0.
  void Reset(std::uint64_t seed);

  // Runs `dt` one-second ticks under `actions` (one phase per intersection)
  // and returns r_i = -(stopped vehicles on i's approach lanes) at the end.
  std::vector<double> Step(std::span<const int> actions, int dt);
  void Tick();

  // Observation of one intersection per the observation layout.
  std::vector<double> Observe(roadnet::IntersectionId i) const;
  // All intersections' observations stacked as an N x k matrix.
  nn::Matrix ObserveAll() const;

  double Reward(roadnet::IntersectionId i) const;

  int clock() const { return clock_; }
  const RoadNetwork& network() const { return *net_; }
  std::shared_ptr<const RoadNetwork> network_ptr() const { return net_; }
  const roadnet::ObservationLayout& layout() const { return layout_; }
  const SimOptions& options() const { return options_; }
  const std::vector<Vehicle>& ledger() const { return vehicles_; }
  const SignalState& signal(roadnet::IntersectionId i) const { return signals_[i]; }

  int lane_count(LaneId l) const { return static_cast<int>(lanes_[l].size()); }
  int lane_stopped(LaneId l) const;
  int lane_capacity(LaneId l) const { return capacity_[l]; }

  int spawned() const { return static_cast<int>(vehicles_.size()); }
  int waiting_to_enter() const;
  int on_lanes() const;
  int in_network() const { return waiting_to_enter() + on_lanes(); }
  int exited() const { return exited_; }

  // Mean of exit - enter over vehicles that entered; vehicles still inside
  // count up to the current clock. 0 when no vehicle entered.
  double AverageTravelTime() const;

  // vehicle_id,depart,enter,exit,route_len (unset times as empty fields).
  void WriteLedgerCsv(std::ostream& out) const;

 private:
  struct OnLane {
    int vehicle;
    int arrival;  // time the vehicle reaches the lane end
  };
  struct Pending {
    int depart;
    NodeId origin;
    NodeId destination;
    std::uint64_t order;
  };

  void BuildSchedule();
  std::vector<LaneId> Route(NodeId origin, NodeId destination) const;
  bool Permitted(LaneId l, roadnet::Movement turn) const;
  void AdvanceSignals();
  void EnterLane(int vehicle, LaneId l);

  std::shared_ptr<const RoadNetwork> net_;
  FlowSpec flow_;
  SimOptions options_;
  roadnet::ObservationLayout layout_;
  std::vector<int> capacity_;
  std::vector<int> travel_s_;
  std::vector<std::vector<LaneId>> lanes_in_order_;  // per intersection, id order

  std::mt19937_64 rng_;
  int clock_ = 0;
  std::vector<Pending> schedule_;  // sorted by (depart, order)
  std::size_t next_spawn_ = 0;
  std::vector<std::deque<OnLane>> lanes_;
  std::vector<std::deque<int>> entry_queue_;  // per boundary origin
  std::vector<SignalState> signals_;
  std::vector<Vehicle> vehicles_;
  std::vector<std::vector<roadnet::Movement>> turns_;  // per vehicle per hop
  std::vector<int> route_pos_;
  int exited_ = 0;
  mutable std::vector<std::vector<LaneId>> route_cache_;
  mutable std::vector<char> route_cached_;
};

}  // namespace colight::sim

#endif  // COLIGHT_MICROSIM_H_
