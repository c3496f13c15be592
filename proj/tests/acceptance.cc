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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "colight/agent.h"
#include "colight/attention.h"
#include "colight/baselines.h"
#include "colight/config.h"
#include "colight/harness.h"
#include "colight/microsim.h"
#include "colight/model.h"
#include "colight/scenario.h"
#include "test_util.h"

using namespace colight;
using nn::Matrix;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

std::string Fmt(const char* fmt, auto... args) {
  char buf[1024];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

harness::ExperimentConfig Config(const std::string& scenario, const std::string& controller,
                                 std::uint64_t seed) {
  auto c = harness::DefaultConfig();
  c.scenario = scenario;
  c.controller = controller;
  c.seed = seed;
  c.seed_set = true;
  return c;
}

std::vector<attention::AttentionRecord> Records(const attention::AttentionLog& log) {
  std::vector<attention::AttentionRecord> out;
  out.reserve(log.size());
  for (std::size_t r = 0; r < log.size(); ++r) out.push_back(log.record(r));
  return out;
}

// Shared by several criteria: the 100-episode Grid3x3-Bi runs.
struct GridRuns {
  harness::RunResult colight, maxpressure, fixedtime;
  double colight_s = 0, maxpressure_s = 0, fixedtime_s = 0;
};

GridRuns& Grid() {
  static GridRuns runs = [] {
    GridRuns g;
    auto timed = [](const std::string& controller, double& seconds) {
      const auto start = std::chrono::steady_clock::now();
      auto r = harness::RunExperiment(Config("Grid3x3-Bi", controller, 7));
      seconds = Seconds(start);
      return r;
    };
    g.colight = timed("colight", g.colight_s);
    g.maxpressure = timed("maxpressure", g.maxpressure_s);
    g.fixedtime = timed("fixedtime", g.fixedtime_s);
    return g;
  }();
  return runs;
}

std::shared_ptr<model::CoLightNetwork> Network(const roadnet::RoadNetwork& net,
                                               const roadnet::ScopeTable& scope, int width,
                                               int heads, int layers, double tau = 1.0) {
  model::ModelConfig c;
  c.obs_dim = roadnet::BuildObservationLayout(net).k;
  c.phases = net.num_phases();
  c.embed_dim = c.key_dim = c.value_dim = width;
  c.heads = heads;
  c.layers = layers;
  c.tau = tau;
  return std::make_shared<model::CoLightNetwork>(c, scope);
}

roadnet::ScopeTable Shuffle(const roadnet::ScopeTable& t, std::mt19937_64& rng) {
  roadnet::ScopeTable out = t;
  std::vector<int> perm(t.size);
  for (int i = 0; i < t.num_targets(); ++i) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int s = 0; s < t.size; ++s) {
      out.slots[i * t.size + s] = t.slots[i * t.size + perm[s]];
      out.mask[i * t.size + s] = t.mask[i * t.size + perm[s]];
    }
  }
  return out;
}

Outcome GradientCorrectness() {
  const auto start = std::chrono::steady_clock::now();
  const auto net = roadnet::BuildGrid(1, 3, 300, 3);
  const auto q = Network(net, roadnet::BuildScopeTable(net, 3, roadnet::DistanceMetric::kGeo), 8, 2, 2);
  auto params = q->InitParams(1);
  const auto target = q->InitParams(2);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> phase(0, 3);
  std::vector<agent::Experience> data;
  for (int b = 0; b < 4; ++b) {
    agent::Experience e{testing::RandomMatrix(3, 16, rng, 0, 2), {}, {},
                        testing::RandomMatrix(3, 16, rng, 0, 2)};
    for (int i = 0; i < 3; ++i) {
      e.actions.push_back(phase(rng));
      e.rewards.push_back(-phase(rng));
    }
    data.push_back(std::move(e));
  }
  std::vector<const agent::Experience*> batch;
  for (const auto& e : data) batch.push_back(&e);
  const agent::TdOptions opt{.gamma = 0.8, .reward_scale = 1.0};
  const auto analytic = agent::TdLoss(*q, params, target, batch, opt);
  const double err = testing::GradientCheck(
      params, analytic.grads, [&] { return agent::TdLoss(*q, params, target, batch, opt).loss; });
  const double secs = Seconds(start);
  return {err < 1e-4 && secs < 10.0,
          Fmt("max relative error %.3g over %zu parameters, %.2f s", err, params.ScalarCount(), secs)};
}

Outcome AttentionNormalization() {
  const auto& log = Grid().colight.attention;
  double worst = 0;
  for (std::size_t r = 0; r < log.size(); ++r) {
    double sum = 0;
    for (double a : log.record(r).alpha) sum += a;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  int episodes = 0;
  for (std::size_t r = 0; r < log.size(); ++r) episodes = std::max(episodes, log.record(r).episode + 1);
  return {!log.empty() && episodes == 10 && worst <= 1e-6,
          Fmt("%zu records over %d episodes, max |sum - 1| = %.3g", log.size(), episodes, worst)};
}

Outcome IndexFreeInvariance() {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> dim(1, 4), scope(2, 6), heads(1, 3), layers(1, 2);
  std::bernoulli_distribution coin(0.5);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto net = roadnet::BuildGrid(dim(rng), dim(rng), 300, coin(rng) ? 3 : 1);
    const auto metric = coin(rng) ? roadnet::DistanceMetric::kGeo : roadnet::DistanceMetric::kNode;
    const auto table = roadnet::BuildScopeTable(net, scope(rng), metric);
    const int h = heads(rng), l = layers(rng);
    const auto base = Network(net, table, 6, h, l, 0.5 + coin(rng));
    const auto params = base->InitParams(rng());
    const Matrix obs = testing::RandomMatrix(net.num_intersections(), base->obs_dim(), rng, 0, 5);
    const Matrix q = base->QValues(params, obs);
    const auto shuffled = Network(net, Shuffle(table, rng), 6, h, l, base->config().tau);
    worst = std::max(worst, testing::MaxAbsDiff(shuffled->QValues(params, obs), q));
  }
  return {worst < 1e-12, Fmt("1000 permutations, max |dq| = %.3g", worst)};
}

Outcome ParamCountClosedForm() {
  model::ModelConfig c;
  c.obs_dim = 20;
  c.embed_dim = c.key_dim = c.value_dim = 32;
  c.layers = 2;
  c.phases = 4;
  c.heads = 1;
  const std::size_t k = 20, m = 32, p = 4, L = 2;
  const std::size_t closed = k * m + m + m * (4 * m + 1) * L + m * p + p;
  const auto net = roadnet::BuildGrid(2, 2, 300, 3);
  const model::CoLightNetwork built(c, roadnet::BuildScopeTable(net, 3, roadnet::DistanceMetric::kGeo));
  const std::size_t instantiated = built.InitParams(1).ScalarCount();
  const std::size_t counted = model::ParamCount(c);
  return {counted == 9060 && closed == 9060 && instantiated == 9060,
          Fmt("param_count %zu, closed form %zu, instantiated %zu", counted, closed, instantiated)};
}

Outcome ReceptiveField() {
  const auto net = roadnet::BuildGrid(1, 3, 300, 3);
  const auto table = roadnet::BuildHopScopeTable(net, 1, 3);
  std::mt19937_64 rng(5);
  double change[3] = {0, 0, 0};
  for (int layers : {1, 2}) {
    const auto q = Network(net, table, 16, 2, layers);
    const auto params = q->InitParams(6);
    Matrix obs = testing::RandomMatrix(3, 16, rng, 0, 3);
    const Matrix before = q->QValues(params, obs);
    for (int c = 4; c < 16; ++c) obs(2, c) += 7.0;
    const Matrix after = q->QValues(params, obs);
    for (int a = 0; a < 4; ++a) change[layers] = std::max(change[layers], std::abs(after(0, a) - before(0, a)));
  }
  return {change[1] == 0.0 && change[2] > 0.0,
          Fmt("L=1: max |dq_0| = %.3g, L=2: max |dq_0| = %.3g", change[1], change[2])};
}

Outcome SimulatorConservation() {
  const auto sc = harness::MakeScenario("Grid6x6-Bi");
  bool conserved = true;
  int checks = 0;
  auto run = [&](std::uint64_t seed) {
    sim::Simulation s(sc.net, sc.flow, seed);
    auto check = [&] {
      ++checks;
      if (s.spawned() != s.in_network() + s.exited()) conserved = false;
    };
    // Phases are re-chosen every 10 s; the interval is split so that the
    // counts are checked after most individual ticks.
    while (s.clock() < 3600) {
      s.Step(baselines::MaxPressureActions(s), 6);
      check();
      for (int k = 0; k < 4; ++k) {
        s.Tick();
        check();
      }
    }
    std::ostringstream out;
    s.WriteLedgerCsv(out);
    return out.str();
  };
  const std::string a = run(17), b = run(17);
  return {conserved && a == b && !a.empty(),
          Fmt("%d conservation checks %s, ledgers %s (%zu bytes)", checks,
              conserved ? "held" : "FAILED", a == b ? "identical" : "differ", a.size())};
}

Outcome MethodOrdering() {
  const auto& g = Grid();
  const double cl = g.colight.report.final_travel_time, mp = g.maxpressure.report.final_travel_time,
               ft = g.fixedtime.report.final_travel_time;
  const bool fast = g.colight_s < 900 && g.maxpressure_s < 900 && g.fixedtime_s < 900;
  return {cl < ft && mp < ft && fast,
          Fmt("CoLight %.2f, MaxPressure %.2f, FixedTime %.2f (run times %.0f/%.0f/%.0f s)", cl, mp,
              ft, g.colight_s, g.maxpressure_s, g.fixedtime_s)};
}

Outcome SpatialStudy() {
  int passing = 0;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto r = harness::RunExperiment(Config("Arterial1x3-Uni", "colight", seed));
    const auto records = Records(r.attention);
    const auto s = attention::SpatialStudy(records, 3, r.attention.num_layers() - 1);
    const auto& a0 = s[0];
    const bool self_max = a0.at(0) >= a0.at(1) && a0.at(0) >= a0.at(2);
    const bool upstream = s[1].at(0) > s[1].at(2);
    passing += self_max && upstream;
    detail += Fmt("%sseed %llu: #0 self %.4f vs %.4f/%.4f, #1 on #0 %.4f vs #2 %.4f",
                  detail.empty() ? "" : "; ", static_cast<unsigned long long>(seed), a0.at(0),
                  a0.at(1), a0.at(2), s[1].at(0), s[1].at(2));
  }
  return {passing >= 2, Fmt("%d/3 seeds; ", passing) + detail};
}

// Scheduled entry rate (veh/h) of one origin at time t.
double InflowAt(const sim::FlowSpec& flow, roadnet::NodeId origin, double t) {
  double rate = 0;
  for (const auto& e : flow.entries) {
    if (e.origin == origin && e.start_s <= t && t < e.end_s) rate += e.rate_vph;
  }
  return rate;
}

// Same protocol as the spatial study: seeds 1..3, at least two must pass.
Outcome TemporalStudy() {
  const auto sc = harness::MakeScenario("Grid3x3-FlowShift");
  const auto routes = harness::FlowShiftRoutes(*sc.net);
  int passing = 0;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto r = harness::RunExperiment(Config("Grid3x3-FlowShift", "colight", seed));
    const auto records = Records(r.attention);
    const auto series = attention::TemporalStudy(records, 4, r.attention.num_layers() - 1);
    std::vector<double> ns, we;
    for (int t : series.times) {
      ns.push_back(InflowAt(sc.flow, routes.ns_origin, t));
      we.push_back(InflowAt(sc.flow, routes.we_origin, t));
    }
    const double rho_ns = attention::Spearman(series.alpha.at(1), ns);
    const double rho_we = attention::Spearman(series.alpha.at(3), we);
    int self_max = 0;
    for (std::size_t k = 0; k < series.times.size(); ++k) {
      bool top = true;
      for (const auto& [id, a] : series.alpha) top = top && a[k] <= series.alpha.at(4)[k];
      self_max += top;
    }
    const double frac = static_cast<double>(self_max) / series.times.size();
    passing += rho_ns > 0 && rho_we > 0 && frac >= 0.9;
    detail += Fmt("%sseed %llu: spearman(alpha_1, N->S) %.3f, spearman(alpha_3, W->E) %.3f, "
                  "self largest %.1f%%",
                  detail.empty() ? "" : "; ", static_cast<unsigned long long>(seed), rho_ns,
                  rho_we, 100 * frac);
  }
  return {passing >= 2, Fmt("%d/3 seeds; ", passing) + detail};
}

Outcome HeadSweep() {
  auto c = Config("Grid3x3-Bi", "colight", 7);
  c.network.model.heads = 1;
  c.log_attention = false;
  const double h1 = harness::RunExperiment(c).report.final_travel_time;
  const double h5 = Grid().colight.report.final_travel_time;
  return {h5 <= h1, Fmt("H=5 %.2f, H=1 %.2f", h5, h1)};
}

Outcome BaselineSanity() {
  const auto& ft = Grid().fixedtime.report.episodes;
  bool flat = !ft.empty();
  for (const auto& e : ft) flat = flat && e.travel_time == ft[0].travel_time;

  auto gcn_cfg = Config("Grid3x3-Bi", "gcn", 7);
  gcn_cfg.episodes = 3;
  gcn_cfg.eval_episodes = 1;
  const auto gcn = harness::RunExperiment(gcn_cfg);
  bool uniform = !gcn.attention.empty();
  for (std::size_t r = 0; r < gcn.attention.size(); ++r) {
    const auto rec = gcn.attention.record(r);
    for (double a : rec.alpha) uniform = uniform && a == 1.0 / rec.alpha.size();
  }

  // Swap two neighbours of the centre intersection in both models.
  const auto net = roadnet::BuildGrid(3, 3, 300, 3);
  model::ModelConfig mc;
  mc.obs_dim = 16;
  mc.phases = 4;
  mc.embed_dim = mc.key_dim = mc.value_dim = 16;
  auto nbrs = model::AdjacentNeighbors(net);
  const model::NeighborConcatNetwork concat(mc, nbrs);
  std::swap(nbrs[4][0], nbrs[4][1]);
  const model::NeighborConcatNetwork concat_swapped(mc, nbrs);
  auto table = roadnet::BuildScopeTable(net, 5, roadnet::DistanceMetric::kGeo);
  const model::CoLightNetwork colight(mc, table);
  std::swap(table.slots[4 * 5 + 1], table.slots[4 * 5 + 2]);
  const model::CoLightNetwork colight_swapped(mc, table);
  std::mt19937_64 rng(8);
  const Matrix obs = testing::RandomMatrix(9, 16, rng, 0, 5);
  const auto pc = concat.InitParams(9), pl = colight.InitParams(9);
  const double d_concat = testing::MaxAbsDiff(concat.QValues(pc, obs), concat_swapped.QValues(pc, obs));
  const double d_colight = testing::MaxAbsDiff(colight.QValues(pl, obs), colight_swapped.QValues(pl, obs));

  return {flat && uniform && d_concat > 1e-9 && d_colight < 1e-12,
          Fmt("FixedTime curve %s over %zu episodes; GCN alpha %s; neighbor swap: Neighbor RL "
              "|dq| %.3g, CoLight |dq| %.3g",
              flat ? "flat" : "NOT flat", ft.size(), uniform ? "exactly uniform" : "NOT uniform",
              d_concat, d_colight)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient correctness", GradientCorrectness},
      {"attention normalization", AttentionNormalization},
      {"index-free invariance", IndexFreeInvariance},
      {"parameter count", ParamCountClosedForm},
      {"receptive field", ReceptiveField},
      {"simulator conservation and determinism", SimulatorConservation},
      {"method ordering on Grid3x3-Bi", MethodOrdering},
      {"spatial attention on Arterial1x3-Uni", SpatialStudy},
      {"temporal attention on Grid3x3-FlowShift", TemporalStudy},
      {"head sweep", HeadSweep},
      {"baseline sanity", BaselineSanity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %zu %s: %s (%s)\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
