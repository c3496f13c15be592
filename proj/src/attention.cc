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

#include "colight/attention.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace colight::attention {

AttentionLog::AttentionLog(roadnet::ScopeTable scope) : scope_(std::move(scope)) {}

void AttentionLog::Append(int episode, int time,
                          std::span<const model::AttentionValues> taps) {
  const int n = scope_.num_targets();
  for (const auto& tap : taps) {
    if (tap.alpha.rows() != n || tap.alpha.cols() != scope_.size) {
      throw nn::ShapeError("attention tap " + tap.alpha.ShapeString() +
                           " does not match the scope table");
    }
    for (int i = 0; i < n; ++i) {
      episode_.push_back(episode);
      time_.push_back(time);
      layer_.push_back(tap.layer);
      head_.push_back(tap.head);
      target_.push_back(i);
      const auto row = tap.alpha.row(i);
      alpha_.insert(alpha_.end(), row.begin(), row.end());
    }
  }
}

int AttentionLog::num_layers() const {
  return layer_.empty() ? 0 : *std::max_element(layer_.begin(), layer_.end()) + 1;
}

AttentionRecord AttentionLog::record(std::size_t r) const {
  AttentionRecord rec{episode_[r], time_[r], layer_[r], head_[r], target_[r], {}, {}};
  for (int s = 0; s < scope_.size; ++s) {
    if (!scope_.active(rec.target, s)) continue;
    rec.neighbors.push_back(scope_.at(rec.target, s));
    rec.alpha.push_back(alpha_[r * scope_.size + s]);
  }
  return rec;
}

void AttentionLog::WriteJsonl(std::ostream& out) const {
  for (std::size_t r = 0; r < size(); ++r) {
    const auto rec = record(r);
    nlohmann::json line = {{"episode", rec.episode}, {"t", rec.time},
                           {"layer", rec.layer},     {"head", rec.head},
                           {"target", rec.target},   {"neighbors", rec.neighbors},
                           {"alpha", rec.alpha}};
    out << line.dump() << '\n';
  }
}

std::vector<AttentionRecord> ReadJsonl(std::istream& in) {
  std::vector<AttentionRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      AttentionRecord rec;
      rec.episode = j.value("episode", 0);
      rec.time = j.at("t").get<int>();
      rec.layer = j.at("layer").get<int>();
      rec.head = j.at("head").get<int>();
      rec.target = j.at("target").get<int>();
      rec.neighbors = j.at("neighbors").get<std::vector<int>>();
      rec.alpha = j.at("alpha").get<std::vector<double>>();
      if (rec.neighbors.size() != rec.alpha.size()) {
        throw std::invalid_argument("neighbors and alpha differ in length");
      }
      out.push_back(std::move(rec));
    } catch (const std::exception& e) {
      throw std::invalid_argument("attention log line " + std::to_string(lineno) + ": " +
                                  e.what());
    }
  }
  return out;
}

namespace {

bool Selected(std::span<const int> episodes, int e) {
  return episodes.empty() || std::find(episodes.begin(), episodes.end(), e) != episodes.end();
}

}  // namespace

SpatialSummary SpatialStudy(std::span<const AttentionRecord> records, int num_targets,
                            int layer, std::span<const int> episodes) {
  std::vector<std::map<int, double>> sum(num_targets);
  std::vector<int> count(num_targets, 0);
  for (const auto& r : records) {
    if (r.layer != layer || !Selected(episodes, r.episode)) continue;
    if (r.target < 0 || r.target >= num_targets) {
      throw std::out_of_range("attention record target out of range");
    }
    // Duplicate ids within one record (a neighbour present in two slots) add up.
    for (std::size_t s = 0; s < r.neighbors.size(); ++s) sum[r.target][r.neighbors[s]] += r.alpha[s];
    ++count[r.target];
  }
  for (int t = 0; t < num_targets; ++t) {
    if (count[t] == 0) continue;
    for (auto& [id, v] : sum[t]) v /= count[t];
  }
  return sum;
}

TemporalSeries TemporalStudy(std::span<const AttentionRecord> records, int target,
                             int layer, std::span<const int> episodes) {
  std::map<int, std::map<int, double>> sum;  // time -> id -> sum
  std::map<int, int> count;
  std::set<int> ids;
  for (const auto& r : records) {
    if (r.layer != layer || r.target != target || !Selected(episodes, r.episode)) continue;
    for (std::size_t s = 0; s < r.neighbors.size(); ++s) {
      sum[r.time][r.neighbors[s]] += r.alpha[s];
      ids.insert(r.neighbors[s]);
    }
    ++count[r.time];
  }
  TemporalSeries out;
  for (const auto& [t, per_id] : sum) {
    out.times.push_back(t);
    for (int id : ids) {
      auto it = per_id.find(id);
      out.alpha[id].push_back(it == per_id.end() ? 0.0 : it->second / count[t]);
    }
  }
  return out;
}

namespace {

std::vector<double> AverageRanks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double Spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
  if (x.size() < 2) return 0.0;
  const auto rx = AverageRanks(x), ry = AverageRanks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace colight::attention
