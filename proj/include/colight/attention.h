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

#ifndef COLIGHT_ATTENTION_H_
#define COLIGHT_ATTENTION_H_

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "colight/model.h"
#include "colight/roadnet.h"

namespace colight::attention {

// One attention row: intersection `target`'s weights over its scope slots.
struct AttentionRecord {
  int episode = 0;
  int time = 0;
  int layer = 0;
  int head = 0;
  int target = 0;
  std::vector<int> neighbors;  // active slot ids, in slot order
  std::vector<double> alpha;   // aligned with `neighbors`
};

// Column-oriented store of attention records with a fixed scope width.
class AttentionLog {
 public:
  AttentionLog() = default;
  explicit AttentionLog(roadnet::ScopeTable scope);

  // Appends one record per (tap, target) row.
  void Append(int episode, int time, std::span<const model::AttentionValues> taps);

  std::size_t size() const { return episode_.size(); }
  bool empty() const { return episode_.empty(); }
  AttentionRecord record(std::size_t r) const;
  const roadnet::ScopeTable& scope() const { return scope_; }
  int num_layers() const;

  // {"episode", "t", "layer", "head", "target", "neighbors", "alpha"} per line.
  void WriteJsonl(std::ostream& out) const;

 private:
  roadnet::ScopeTable scope_;
  std::vector<int> episode_, time_, layer_, head_, target_;
  std::vector<double> alpha_;  // size() x scope width
};

// Records parsed back from WriteJsonl output.
std::vector<AttentionRecord> ReadJsonl(std::istream& in);

// mean_alpha[target][neighbor id] over the records of `layer` (all heads,
// steps and the given episodes; every episode when the list is empty).
using SpatialSummary = std::vector<std::map<int, double>>;
SpatialSummary SpatialStudy(std::span<const AttentionRecord> records, int num_targets,
                            int layer, std::span<const int> episodes = {});

// Per decision time: head-averaged alpha of `target` per neighbor id, averaged
// over the listed episodes (all when empty).
struct TemporalSeries {
  std::vector<int> times;
  std::map<int, std::vector<double>> alpha;  // neighbor id -> series
};
TemporalSeries TemporalStudy(std::span<const AttentionRecord> records, int target,
                             int layer, std::span<const int> episodes = {});

// Spearman rank correlation with average ranks for ties; 0 when either
// series is constant.
double Spearman(std::span<const double> x, std::span<const double> y);

}  // namespace colight::attention

#endif  // COLIGHT_ATTENTION_H_
