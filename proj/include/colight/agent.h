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

#ifndef COLIGHT_AGENT_H_
#define COLIGHT_AGENT_H_

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "colight/matrix.h"
#include "colight/model.h"
#include "colight/params.h"

namespace colight::agent {

// One decision step for every intersection of the network.
struct Experience {
  nn::Matrix obs;       // N x k
  std::vector<int> actions;
  std::vector<double> rewards;
  nn::Matrix next_obs;  // N x k
};

class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::uint64_t seed);

  // Overwrites the oldest entry once full.
  void Push(Experience e);
  // Uniform sample with replacement.
  std::vector<const Experience*> Sample(std::size_t count);

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  const Experience& at(std::size_t i) const { return items_[i]; }
  void Clear();

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Experience> items_;
  std::mt19937_64 rng_;
};

// Epsilon-greedy over one intersection's q values; greedy ties go to the
// smallest phase id.
int Act(std::span<const double> q, double epsilon, std::mt19937_64& rng);
int Argmax(std::span<const double> q);

struct TdResult {
  double loss = 0.0;
  std::vector<nn::Matrix> grads;  // aligned with the online ParamSet
};

struct TdOptions {
  double gamma = 0.8;
  double reward_scale = 1.0;
};

// Mean over the batch of sum over intersections of
// (r * reward_scale + gamma * max_a Q(o', a; target) - Q(o, a; online))^2.
// Per-sample tapes run in parallel; gradients are reduced in batch order so
// the result does not depend on the thread count.
TdResult TdLoss(const model::QNetwork& net, const nn::ParamSet& online,
                const nn::ParamSet& target, std::span<const Experience* const> batch,
                TdOptions options);
// Same quantity on a single tape; the reference for TdLoss.
TdResult TdLossSerial(const model::QNetwork& net, const nn::ParamSet& online,
                      const nn::ParamSet& target,
                      std::span<const Experience* const> batch, TdOptions options);

struct AgentConfig {
  double gamma = 0.8;
  double learning_rate = 1e-3;
  std::size_t replay_capacity = 10000;
  int batch_size = 32;
  int updates_per_episode = 60;
  int target_sync_episodes = 1;
  double epsilon_start = 0.8;
  double epsilon_end = 0.05;
  int epsilon_decay_episodes = 50;
  double reward_scale = 1.0;
  // Multiplies the lane-count coordinates of every observation before it
  // reaches the network (phase one-hot coordinates are left alone).
  double obs_scale = 1.0;
};

class DqnAgent {
 public:
  DqnAgent(std::shared_ptr<const model::QNetwork> net, AgentConfig config,
           std::uint64_t seed);

  double EpsilonFor(int episode) const;

  // Raw simulator observations in, one phase per intersection out.
  std::vector<int> Decide(const nn::Matrix& raw_obs, double epsilon);
  nn::Matrix QValues(const nn::Matrix& raw_obs) const;
  nn::Matrix Preprocess(const nn::Matrix& raw_obs) const;

  void Remember(const nn::Matrix& raw_obs, std::vector<int> actions,
                std::vector<double> rewards, const nn::Matrix& raw_next_obs);
  // Runs `updates` minibatch steps; returns the mean loss (0 if the buffer
  // is empty or updates == 0).
  double Train(int updates);
  void SyncTarget() { target_ = online_; }
  // End-of-episode bookkeeping: training and the target sync schedule.
  double FinishEpisode(int episode);

  const nn::ParamSet& params() const { return online_; }
  const nn::ParamSet& target_params() const { return target_; }
  // Replaces both online and target parameters; layouts must match.
  void LoadParams(const nn::ParamSet& params);
  const model::QNetwork& network() const { return *net_; }
  std::shared_ptr<const model::QNetwork> network_ptr() const { return net_; }
  const AgentConfig& config() const { return config_; }
  const ReplayBuffer& replay() const { return replay_; }
  std::int64_t updates_applied() const { return adam_.step_count(); }

 private:
  std::shared_ptr<const model::QNetwork> net_;
  AgentConfig config_;
  nn::ParamSet online_;
  nn::ParamSet target_;
  nn::AdamState adam_;
  ReplayBuffer replay_;
  std::mt19937_64 act_rng_;
};

}  // namespace colight::agent

#endif  // COLIGHT_AGENT_H_
