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

// Serial single-tape TD loss versus the OpenMP per-sample version on the
// default Grid3x3 model. Usage: bench_td_loss [batch] [repeats]

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>

#include "colight/agent.h"
#include "colight/baselines.h"
#include "colight/config.h"
#include "colight/scenario.h"

using namespace colight;

namespace {

template <typename F>
double MedianMs(int repeats, F&& f) {
  std::vector<double> ms;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    f();
    ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
  }
  std::sort(ms.begin(), ms.end());
  return ms[ms.size() / 2];
}

}  // namespace

int main(int argc, char** argv) {
  const int batch_size = argc > 1 ? std::atoi(argv[1]) : 32;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 20;
  const auto cfg = harness::DefaultConfig();
  const auto sc = harness::MakeScenario("Grid3x3-Bi");
  const auto net = baselines::MakeNetwork(baselines::ControllerKind::kCoLight, *sc.net, cfg.network);
  const auto online = net->InitParams(1), target = net->InitParams(2);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> count(0, 4);
  std::uniform_int_distribution<int> phase(0, net->num_actions() - 1);
  const int n = sc.net->num_intersections(), k = net->obs_dim();
  std::vector<agent::Experience> data(batch_size);
  for (auto& e : data) {
    e.obs = nn::Matrix(n, k);
    e.next_obs = nn::Matrix(n, k);
    for (auto& v : e.obs.values()) v = count(rng);
    for (auto& v : e.next_obs.values()) v = count(rng);
    for (int i = 0; i < n; ++i) {
      e.actions.push_back(phase(rng));
      e.rewards.push_back(-count(rng));
    }
  }
  std::vector<const agent::Experience*> batch;
  for (const auto& e : data) batch.push_back(&e);
  const agent::TdOptions opt{cfg.agent.gamma, cfg.agent.reward_scale};

  double loss_serial = 0, loss_parallel = 0;
  const double serial = MedianMs(repeats, [&] {
    loss_serial = agent::TdLossSerial(*net, online, target, batch, opt).loss;
  });
  std::printf("batch %d, %d intersections, %zu parameters\n", batch_size, n, online.ScalarCount());
  std::printf("serial            %8.2f ms\n", serial);
  for (int threads = 1; threads <= omp_get_num_procs(); threads *= 2) {
    omp_set_num_threads(threads);
    const double par = MedianMs(repeats, [&] {
      loss_parallel = agent::TdLoss(*net, online, target, batch, opt).loss;
    });
    std::printf("openmp %2d threads %8.2f ms  (x%.2f)\n", threads, par, serial / par);
  }
  std::printf("loss difference   %.3g\n", std::abs(loss_serial - loss_parallel));
  return 0;
}
