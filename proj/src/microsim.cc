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

#include "colight/microsim.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace colight::sim {

using roadnet::IntersectionId;
using roadnet::Movement;

double FlowSpec::RateAt(NodeId origin, NodeId destination, double t) const {
  double rate = 0.0;
  for (const auto& e : entries) {
    if (e.origin == origin && e.destination == destination && t >= e.start_s &&
        t < e.end_s) {
      rate += e.rate_vph;
    }
  }
  return rate;
}

FlowSpec ParseFlowJson(const std::string& text) {
  using nlohmann::json;
  FlowSpec flow;
  try {
    const json doc = json::parse(text);
    if (doc.contains("entries")) {
      for (const auto& e : doc.at("entries")) {
        flow.entries.push_back({e.at("origin").get<int>(), e.at("destination").get<int>(),
                                e.at("rate_vph").get<double>(),
                                e.value("start_s", 0.0), e.value("end_s", 3600.0)});
      }
    }
    if (doc.contains("vehicles")) {
      for (const auto& v : doc.at("vehicles")) {
        flow.vehicles.push_back({v.at("origin").get<int>(),
                                 v.at("destination").get<int>(),
                                 v.at("depart_s").get<double>()});
      }
    }
  } catch (const json::exception& e) {
    throw FlowError(std::string("flow file: ") + e.what());
  }
  return flow;
}

FlowSpec LoadFlowFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FlowError("cannot open flow file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseFlowJson(buf.str());
}

std::string FlowToJson(const FlowSpec& flow) {
  using nlohmann::json;
  json doc;
  doc["entries"] = json::array();
  for (const auto& e : flow.entries) {
    doc["entries"].push_back({{"origin", e.origin},
                              {"destination", e.destination},
                              {"rate_vph", e.rate_vph},
                              {"start_s", e.start_s},
                              {"end_s", e.end_s}});
  }
  if (!flow.vehicles.empty()) {
    doc["vehicles"] = json::array();
    for (const auto& v : flow.vehicles) {
      doc["vehicles"].push_back(
          {{"origin", v.origin}, {"destination", v.destination}, {"depart_s", v.depart_s}});
    }
  }
  return doc.dump(1);
}

Simulation::Simulation(std::shared_ptr<const RoadNetwork> net, FlowSpec flow,
                       std::uint64_t seed, SimOptions options)
    : net_(std::move(net)), flow_(std::move(flow)), options_(options) {
  if (!net_) throw std::invalid_argument("simulation: null network");
  if (!(options_.free_flow_speed > 0.0) || options_.vehicle_spacing <= 0.0 ||
      options_.saturation_per_s < 1 || options_.yellow_s < 0 || options_.all_red_s < 0) {
    throw std::invalid_argument("simulation: invalid options");
  }
  layout_ = roadnet::BuildObservationLayout(*net_);
  const int num_lanes = net_->num_lanes();
  capacity_.resize(num_lanes);
  travel_s_.resize(num_lanes);
  for (const auto& lane : net_->lanes()) {
    capacity_[lane.id] =
        std::max(1, static_cast<int>(std::floor(lane.length / options_.vehicle_spacing)));
    travel_s_[lane.id] =
        std::max(1, static_cast<int>(std::ceil(lane.length / options_.free_flow_speed - 1e-9)));
  }
  lanes_in_order_.resize(net_->num_intersections());
  for (const auto& inter : net_->intersections()) {
    lanes_in_order_[inter.id] = inter.approach_lanes;
    std::sort(lanes_in_order_[inter.id].begin(), lanes_in_order_[inter.id].end());
  }
  route_cache_.assign(static_cast<std::size_t>(net_->num_nodes()) * net_->num_nodes(), {});
  route_cached_.assign(route_cache_.size(), 0);

  auto check = [&](NodeId origin, NodeId destination, const std::string& what) {
    if (!net_->IsBoundary(origin)) {
      throw FlowError(what + ": origin " + std::to_string(origin) + " is not a boundary node");
    }
    if (!net_->IsBoundary(destination)) {
      throw FlowError(what + ": destination " + std::to_string(destination) +
                      " is not a boundary node");
    }
    if (Route(origin, destination).empty()) {
      throw FlowError(what + ": no route from " + std::to_string(origin) + " to " +
                      std::to_string(destination));
    }
  };
  for (std::size_t k = 0; k < flow_.entries.size(); ++k) {
    const auto& e = flow_.entries[k];
    const std::string what = "flow entry " + std::to_string(k);
    if (e.rate_vph < 0.0) throw FlowError(what + ": negative rate");
    if (e.start_s > e.end_s) throw FlowError(what + ": start after end");
    check(e.origin, e.destination, what);
  }
  for (std::size_t k = 0; k < flow_.vehicles.size(); ++k) {
    const auto& v = flow_.vehicles[k];
    const std::string what = "flow vehicle " + std::to_string(k);
    if (v.depart_s < 0.0) throw FlowError(what + ": negative departure");
    check(v.origin, v.destination, what);
  }
  Reset(seed);
}

std::vector<LaneId> Simulation::Route(NodeId origin, NodeId destination) const {
  const std::size_t key =
      static_cast<std::size_t>(origin) * net_->num_nodes() + destination;
  if (route_cached_[key]) return route_cache_[key];
  route_cached_[key] = 1;

  const auto& links = net_->links();
  std::vector<int> parent_link(net_->num_nodes(), -1);
  std::vector<char> seen(net_->num_nodes(), 0);
  std::deque<NodeId> frontier{origin};
  seen[origin] = 1;
  while (!frontier.empty() && !seen[destination]) {
    const NodeId u = frontier.front();
    frontier.pop_front();
    if (u != origin && net_->IsBoundary(u)) continue;  // sinks do not relay
    for (int k : net_->out_links(u)) {
      const NodeId v = links[k].to;
      if (seen[v]) continue;
      seen[v] = 1;
      parent_link[v] = k;
      frontier.push_back(v);
    }
  }
  if (!seen[destination] || origin == destination) return {};
  std::vector<int> path;
  for (NodeId v = destination; v != origin; v = links[parent_link[v]].from) {
    path.push_back(parent_link[v]);
  }
  std::reverse(path.begin(), path.end());
  std::vector<LaneId> route;
  for (std::size_t h = 0; h < path.size(); ++h) {
    const auto& lanes = links[path[h]].lanes;
    LaneId chosen = lanes.front();
    if (h + 1 < path.size()) {
      const Movement turn = net_->TurnBetween(path[h], path[h + 1]);
      for (LaneId l : lanes) {
        if (net_->LaneServes(l, turn)) {
          chosen = l;
          break;
        }
      }
    } else {
      for (LaneId l : lanes) {
        if (net_->lane(l).movement == Movement::kThrough) {
          chosen = l;
          break;
        }
      }
    }
    route.push_back(chosen);
  }
  route_cache_[key] = route;
  return route;
}

void Simulation::BuildSchedule() {
  schedule_.clear();
  std::uint64_t order = 0;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& e : flow_.entries) {
    if (e.rate_vph <= 0.0) {
      ++order;
      continue;
    }
    const double headway = 3600.0 / e.rate_vph;
    const double offset = unit(rng_) * headway;
    for (long j = 0;; ++j) {
      const double t = e.start_s + offset + static_cast<double>(j) * headway;
      if (t >= e.end_s) break;
      schedule_.push_back({static_cast<int>(std::floor(t)), e.origin, e.destination, order++});
    }
  }
  for (const auto& v : flow_.vehicles) {
    schedule_.push_back(
        {static_cast<int>(std::floor(v.depart_s)), v.origin, v.destination, order++});
  }
  std::sort(schedule_.begin(), schedule_.end(), [](const Pending& a, const Pending& b) {
    return a.depart != b.depart ? a.depart < b.depart : a.order < b.order;
  });
}

void Simulation::Reset(std::uint64_t seed) {
  rng_.seed(seed);
  clock_ = 0;
  next_spawn_ = 0;
  exited_ = 0;
  lanes_.assign(net_->num_lanes(), {});
  entry_queue_.assign(net_->num_nodes(), {});
  signals_.assign(net_->num_intersections(), SignalState{});
  vehicles_.clear();
  turns_.clear();
  route_pos_.clear();
  BuildSchedule();
}

int Simulation::lane_stopped(LaneId l) const {
  int n = 0;
  for (const auto& v : lanes_[l]) {
    if (v.arrival >= clock_) break;
    ++n;
  }
  return n;
}

int Simulation::waiting_to_enter() const {
  int n = 0;
  for (const auto& q : entry_queue_) n += static_cast<int>(q.size());
  return n;
}

int Simulation::on_lanes() const {
  int n = 0;
  for (const auto& q : lanes_) n += static_cast<int>(q.size());
  return n;
}

bool Simulation::Permitted(LaneId l, Movement turn) const {
  if (turn == Movement::kRight) return true;
  const IntersectionId at = net_->lane(l).to;
  const SignalState& s = signals_[at];
  if (s.interim != Interim::kGreen) return false;
  return net_->intersection(at).phases[s.phase].Serves(net_->approach_of(l), turn);
}

void Simulation::EnterLane(int vehicle, LaneId l) {
  lanes_[l].push_back({vehicle, clock_ + travel_s_[l]});
}

void Simulation::AdvanceSignals() {
  for (auto& s : signals_) {
    if (s.interim == Interim::kGreen) continue;
    if (--s.remaining > 0) continue;
    if (s.interim == Interim::kYellow && options_.all_red_s > 0) {
      s.interim = Interim::kAllRed;
      s.remaining = options_.all_red_s;
    } else {
      s.interim = Interim::kGreen;
      s.remaining = 0;
    }
  }
}

void Simulation::Tick() {
  const int t = clock_;
  // Vehicles reaching a boundary sink leave the network.
  for (const auto& lane : net_->lanes()) {
    if (!net_->IsBoundary(lane.to)) continue;
    auto& q = lanes_[lane.id];
    while (!q.empty() && q.front().arrival <= t) {
      vehicles_[q.front().vehicle].exit_time = q.front().arrival;
      ++exited_;
      q.pop_front();
    }
  }
  // Stop-line discharge, intersections and lanes in id order.
  for (IntersectionId i = 0; i < net_->num_intersections(); ++i) {
    for (LaneId l : lanes_in_order_[i]) {
      auto& q = lanes_[l];
      for (int served = 0; served < options_.saturation_per_s && !q.empty(); ++served) {
        const OnLane head = q.front();
        if (head.arrival >= t) break;
        const int v = head.vehicle;
        const int pos = route_pos_[v];
        const LaneId next = vehicles_[v].route[pos + 1];
        if (!Permitted(l, turns_[v][pos])) break;
        if (lane_count(next) >= capacity_[next]) break;
        q.pop_front();
        route_pos_[v] = pos + 1;
        EnterLane(v, next);
      }
    }
  }
  // Departures join their origin's entry queue, then enter when there is room.
  while (next_spawn_ < schedule_.size() && schedule_[next_spawn_].depart <= t) {
    const Pending& p = schedule_[next_spawn_++];
    Vehicle veh;
    veh.id = static_cast<int>(vehicles_.size());
    veh.origin = p.origin;
    veh.destination = p.destination;
    veh.depart_time = p.depart;
    veh.route = Route(p.origin, p.destination);
    std::vector<Movement> turns;
    for (std::size_t h = 0; h + 1 < veh.route.size(); ++h) {
      turns.push_back(net_->TurnBetween(net_->link_of(veh.route[h]),
                                        net_->link_of(veh.route[h + 1])));
    }
    turns_.push_back(std::move(turns));
    route_pos_.push_back(0);
    entry_queue_[p.origin].push_back(veh.id);
    vehicles_.push_back(std::move(veh));
  }
  for (auto& q : entry_queue_) {
    while (!q.empty()) {
      const int v = q.front();
      const LaneId first = vehicles_[v].route.front();
      if (lane_count(first) >= capacity_[first]) break;
      q.pop_front();
      vehicles_[v].enter_time = t;
      EnterLane(v, first);
    }
  }
  AdvanceSignals();
  ++clock_;
}

std::vector<double> Simulation::Step(std::span<const int> actions, int dt) {
  const int n = net_->num_intersections();
  if (static_cast<int>(actions.size()) != n) {
    throw std::invalid_argument("step: expected one action per intersection");
  }
  if (dt <= options_.yellow_s + options_.all_red_s) {
    throw std::invalid_argument("step: interval must exceed yellow + all-red");
  }
  for (int i = 0; i < n; ++i) {
    if (actions[i] < 0 || actions[i] >= net_->num_phases()) {
      throw std::invalid_argument("step: invalid phase " + std::to_string(actions[i]) +
                                  " for intersection " + std::to_string(i));
    }
  }
  for (int i = 0; i < n; ++i) {
    SignalState& s = signals_[i];
    if (actions[i] == s.phase) continue;
    s.phase = actions[i];
    if (options_.yellow_s > 0) {
      s.interim = Interim::kYellow;
      s.remaining = options_.yellow_s;
    } else if (options_.all_red_s > 0) {
      s.interim = Interim::kAllRed;
      s.remaining = options_.all_red_s;
    }
  }
  for (int k = 0; k < dt; ++k) Tick();
  std::vector<double> rewards(n);
  for (int i = 0; i < n; ++i) rewards[i] = Reward(i);
  return rewards;
}

double Simulation::Reward(IntersectionId i) const {
  int stopped = 0;
  for (LaneId l : net_->intersection(i).approach_lanes) stopped += lane_stopped(l);
  return -static_cast<double>(stopped);
}

std::vector<double> Simulation::Observe(IntersectionId i) const {
  std::vector<double> obs(layout_.k, 0.0);
  obs[signals_[i].phase] = 1.0;
  const auto& slots = layout_.lane_slots[i];
  for (std::size_t j = 0; j < slots.size(); ++j) {
    if (slots[j] >= 0) obs[layout_.num_phases + j] = lane_count(slots[j]);
  }
  return obs;
}

nn::Matrix Simulation::ObserveAll() const {
  const int n = net_->num_intersections();
  nn::Matrix out(n, layout_.k);
  for (int i = 0; i < n; ++i) {
    const auto obs = Observe(i);
    std::copy(obs.begin(), obs.end(), out.row(i).begin());
  }
  return out;
}

double Simulation::AverageTravelTime() const {
  double total = 0.0;
  int count = 0;
  for (const auto& v : vehicles_) {
    if (v.enter_time < 0) continue;
    const int end = v.exit_time >= 0 ? v.exit_time : clock_;
    total += end - v.enter_time;
    ++count;
  }
  return count == 0 ? 0.0 : total / count;
}

void Simulation::WriteLedgerCsv(std::ostream& out) const {
  out << "vehicle_id,depart,enter,exit,route_len\n";
  for (const auto& v : vehicles_) {
    out << v.id << ',' << v.depart_time << ',';
    if (v.enter_time >= 0) out << v.enter_time;
    out << ',';
    if (v.exit_time >= 0) out << v.exit_time;
    out << ',' << v.route.size() << '\n';
  }
}

}  // namespace colight::sim
