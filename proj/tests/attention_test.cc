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

#include <cmath>
#include <random>
#include <sstream>

#include "colight/attention.h"
#include "colight/model.h"
#include "doctest.h"
#include "test_util.h"

using namespace colight;
using attention::AttentionLog;
using attention::Spearman;

TEST_CASE("spearman examples") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  CHECK(Spearman(x, std::vector<double>{2, 4, 8, 16, 32}) == doctest::Approx(1.0));
  CHECK(Spearman(x, std::vector<double>{5, 3, 1, 0, -7}) == doctest::Approx(-1.0));
  // Tied ranks 3.5/3.5: hand-computed Pearson on ranks = 8 / sqrt(95).
  CHECK(Spearman(x, std::vector<double>{5, 6, 7, 8, 7}) == doctest::Approx(8 / std::sqrt(95.0)));
  CHECK(Spearman(x, std::vector<double>{1, 1, 1, 1, 1}) == 0.0);
  CHECK_THROWS(Spearman(x, std::vector<double>{1, 2}));
}

TEST_CASE("spearman is invariant to monotone transforms") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(30), b(30), c(30);
    for (int k = 0; k < 30; ++k) {
      a[k] = n(rng);
      b[k] = a[k] + n(rng);
      c[k] = std::exp(b[k]);
    }
    CHECK(Spearman(a, b) == doctest::Approx(Spearman(a, c)).epsilon(1e-12));
    CHECK(std::abs(Spearman(a, b)) <= 1.0 + 1e-12);
  }
}

namespace {

AttentionLog MakeLog(int episodes, int steps) {
  const auto net = roadnet::BuildGrid(1, 3, 300, 3);
  const auto table = roadnet::BuildScopeTable(net, 5, roadnet::DistanceMetric::kGeo);
  model::ModelConfig cfg;
  cfg.obs_dim = 16;
  cfg.embed_dim = cfg.key_dim = cfg.value_dim = 6;
  cfg.heads = 2;
  cfg.layers = 2;
  cfg.phases = 4;
  model::CoLightNetwork m(cfg, table);
  const auto params = m.InitParams(3);
  std::mt19937_64 rng(4);
  AttentionLog log(table);
  for (int e = 0; e < episodes; ++e) {
    for (int s = 0; s < steps; ++s) {
      std::vector<model::AttentionValues> taps;
      m.QValues(params, testing::RandomMatrix(3, 16, rng, 0, 4), &taps);
      log.Append(e, s * 10, taps);
    }
  }
  return log;
}

}  // namespace

TEST_CASE("attention log keeps active slots and round trips through JSONL") {
  const auto log = MakeLog(2, 4);
  CHECK(log.size() == 2u * 4 * 2 * 2 * 3);
  CHECK(log.num_layers() == 2);
  for (std::size_t r = 0; r < log.size(); ++r) {
    const auto rec = log.record(r);
    CHECK(rec.neighbors.size() == 3);  // two padded slots dropped
    CHECK(rec.neighbors[0] == rec.target);
    double sum = 0;
    for (double a : rec.alpha) sum += a;
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
  std::stringstream buf;
  log.WriteJsonl(buf);
  const auto back = attention::ReadJsonl(buf);
  REQUIRE(back.size() == log.size());
  for (std::size_t r = 0; r < back.size(); ++r) {
    const auto rec = log.record(r);
    CHECK(back[r].episode == rec.episode);
    CHECK(back[r].time == rec.time);
    CHECK(back[r].layer == rec.layer);
    CHECK(back[r].head == rec.head);
    CHECK(back[r].target == rec.target);
    CHECK(back[r].neighbors == rec.neighbors);
    CHECK(back[r].alpha == rec.alpha);
  }
  std::stringstream bad("{\"episode\": 1}\n");
  CHECK_THROWS(attention::ReadJsonl(bad));
}

TEST_CASE("spatial and temporal studies recompute from raw records") {
  const auto log = MakeLog(3, 5);
  std::vector<attention::AttentionRecord> recs;
  for (std::size_t r = 0; r < log.size(); ++r) recs.push_back(log.record(r));
  const std::vector<int> last{1, 2};
  const auto spatial = attention::SpatialStudy(recs, 3, 1, last);
  for (int target = 0; target < 3; ++target) {
    std::map<int, double> sum;
    int rows = 0;
    for (const auto& rec : recs) {
      if (rec.target != target || rec.layer != 1 || rec.episode == 0) continue;
      ++rows;
      for (std::size_t k = 0; k < rec.neighbors.size(); ++k) sum[rec.neighbors[k]] += rec.alpha[k];
    }
    double total = 0;
    for (const auto& [id, s] : sum) {
      CHECK(spatial[target].at(id) == doctest::Approx(s / rows).epsilon(1e-12));
      total += spatial[target].at(id);
    }
    CHECK(total == doctest::Approx(1.0));
  }

  const auto temporal = attention::TemporalStudy(recs, 1, 0);
  CHECK(temporal.times == std::vector<int>{0, 10, 20, 30, 40});
  for (std::size_t k = 0; k < temporal.times.size(); ++k) {
    double total = 0;
    for (const auto& [id, series] : temporal.alpha) total += series[k];
    CHECK(total == doctest::Approx(1.0));
    double self = 0;
    int rows = 0;
    for (const auto& rec : recs) {
      if (rec.target == 1 && rec.layer == 0 && rec.time == temporal.times[k]) {
        self += rec.alpha[0];
        ++rows;
      }
    }
    CHECK(temporal.alpha.at(1)[k] == doctest::Approx(self / rows).epsilon(1e-12));
  }
}
