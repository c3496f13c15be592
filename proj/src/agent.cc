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

#include "colight/agent.h"

#include <algorithm>
#include <stdexcept>

#include "colight/tape.h"

namespace colight::agent {

using nn::Matrix;

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(seed) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be > 0");
}

void ReplayBuffer::Push(Experience e) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(e));
  } else {
    items_[next_] = std::move(e);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<const Experience*> ReplayBuffer::Sample(std::size_t count) {
  if (items_.empty()) throw std::logic_error("sampling from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<const Experience*> out(count);
  for (auto& p : out) p = &items_[pick(rng_)];
  return out;
}

void ReplayBuffer::Clear() {
  items_.clear();
  next_ = 0;
}

int Argmax(std::span<const double> q) {
  if (q.empty()) throw std::invalid_argument("argmax of empty q vector");
  return static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
}

int Act(std::span<const double> q, double epsilon, std::mt19937_64& rng) {
  if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon outside [0, 1]");
  if (q.empty()) throw std::invalid_argument("act on empty q vector");
  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon) {
      std::uniform_int_distribution<int> any(0, static_cast<int>(q.size()) - 1);
      return any(rng);
    }
  }
  return Argmax(q);
}

namespace {

// TD targets for one experience: r * scale + gamma * max_a Q_target(o', a).
Matrix Targets(const model::QNetwork& net, const nn::ParamSet& target,
               const Experience& e, const TdOptions& opt) {
  const Matrix next_q = net.QValues(target, e.next_obs);
  if (e.rewards.size() != static_cast<std::size_t>(next_q.rows()) ||
      e.actions.size() != e.rewards.size() || e.obs.rows() != next_q.rows()) {
    throw nn::ShapeError("experience fields cover different intersection sets");
  }
  Matrix y(next_q.rows(), 1);
  for (int i = 0; i < next_q.rows(); ++i) {
    const auto row = next_q.row(i);
    y(i, 0) = e.rewards[i] * opt.reward_scale +
              opt.gamma * *std::max_element(row.begin(), row.end());
  }
  return y;
}

void CheckBatch(std::span<const Experience* const> batch, const nn::ParamSet& online,
                const nn::ParamSet& target) {
  if (batch.empty()) throw std::invalid_argument("td loss on an empty batch");
  if (!online.SameLayout(target)) {
    throw nn::ShapeError("online and target parameters differ in layout");
  }
}

}  // namespace

TdResult TdLoss(const model::QNetwork& net, const nn::ParamSet& online,
                const nn::ParamSet& target, std::span<const Experience* const> batch,
                TdOptions options) {
  CheckBatch(batch, online, target);
  const int n = static_cast<int>(batch.size());
  const double inv = 1.0 / n;
  std::vector<double> losses(n);
  std::vector<std::vector<Matrix>> grads(n);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (int b = 0; b < n; ++b) {
    try {
      const Experience& e = *batch[b];
      const Matrix y = Targets(net, target, e, options);
      nn::Tape tape;
      const auto vars = model::BindParams(tape, online);
      const auto fwd = net.Build(tape, vars, e.obs);
      const auto picked = tape.Pick(fwd.q, e.actions);
      const auto loss = tape.Scale(tape.SquaredErrorSum(picked, y), inv);
      tape.Backward(loss);
      losses[b] = tape.value(loss)(0, 0);
      grads[b].reserve(vars.size());
      for (const auto& v : vars) grads[b].push_back(tape.grad(v));
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  TdResult out;
  out.grads = online.ZerosLike();
  for (int b = 0; b < n; ++b) {
    out.loss += losses[b];
    for (std::size_t t = 0; t < out.grads.size(); ++t) out.grads[t] += grads[b][t];
  }
  return out;
}

TdResult TdLossSerial(const model::QNetwork& net, const nn::ParamSet& online,
                      const nn::ParamSet& target,
                      std::span<const Experience* const> batch, TdOptions options) {
  CheckBatch(batch, online, target);
  nn::Tape tape;
  const auto vars = model::BindParams(tape, online);
  nn::Var total;
  for (const Experience* e : batch) {
    const Matrix y = Targets(net, target, *e, options);
    const auto fwd = net.Build(tape, vars, e->obs);
    const auto sse = tape.SquaredErrorSum(tape.Pick(fwd.q, e->actions), y);
    total = total.valid() ? tape.Add(total, sse) : sse;
  }
  const auto loss = tape.Scale(total, 1.0 / static_cast<double>(batch.size()));
  tape.Backward(loss);
  TdResult out;
  out.loss = tape.value(loss)(0, 0);
  for (const auto& v : vars) out.grads.push_back(tape.grad(v));
  return out;
}

DqnAgent::DqnAgent(std::shared_ptr<const model::QNetwork> net, AgentConfig config,
                   std::uint64_t seed)
    : net_(std::move(net)),
      config_(config),
      replay_(config.replay_capacity, seed ^ 0x9e3779b97f4a7c15ULL),
      act_rng_(seed + 1) {
  if (!net_) throw std::invalid_argument("agent needs a network");
  if (config_.batch_size < 1 || config_.updates_per_episode < 0 ||
      config_.target_sync_episodes < 1 || config_.epsilon_decay_episodes < 0) {
    throw std::invalid_argument("invalid agent configuration");
  }
  online_ = net_->InitParams(seed);
  target_ = online_;
  adam_ = nn::AdamState(online_, {.learning_rate = config_.learning_rate});
}

double DqnAgent::EpsilonFor(int episode) const {
  if (config_.epsilon_decay_episodes == 0 || episode >= config_.epsilon_decay_episodes) {
    return config_.epsilon_end;
  }
  const double frac = static_cast<double>(episode) / config_.epsilon_decay_episodes;
  return config_.epsilon_start + (config_.epsilon_end - config_.epsilon_start) * frac;
}

Matrix DqnAgent::Preprocess(const Matrix& raw) const {
  if (config_.obs_scale == 1.0) return raw;
  Matrix out = raw;
  const int phases = net_->num_actions();
  for (int i = 0; i < out.rows(); ++i) {
    for (int c = phases; c < out.cols(); ++c) out(i, c) *= config_.obs_scale;
  }
  return out;
}

Matrix DqnAgent::QValues(const Matrix& raw_obs) const {
  return net_->QValues(online_, Preprocess(raw_obs));
}

std::vector<int> DqnAgent::Decide(const Matrix& raw_obs, double epsilon) {
  const Matrix q = QValues(raw_obs);
  std::vector<int> actions(q.rows());
  for (int i = 0; i < q.rows(); ++i) actions[i] = Act(q.row(i), epsilon, act_rng_);
  return actions;
}

void DqnAgent::Remember(const Matrix& raw_obs, std::vector<int> actions,
                        std::vector<double> rewards, const Matrix& raw_next_obs) {
  replay_.Push({Preprocess(raw_obs), std::move(actions), std::move(rewards),
                Preprocess(raw_next_obs)});
}

double DqnAgent::Train(int updates) {
  if (replay_.empty() || updates <= 0) return 0.0;
  const TdOptions opt{config_.gamma, config_.reward_scale};
  double total = 0.0;
  for (int u = 0; u < updates; ++u) {
    const auto batch = replay_.Sample(config_.batch_size);
    auto result = TdLoss(*net_, online_, target_, batch, opt);
    adam_.Step(online_, result.grads);
    total += result.loss;
  }
  return total / updates;
}

double DqnAgent::FinishEpisode(int episode) {
  const double loss = Train(config_.updates_per_episode);
  if ((episode + 1) % config_.target_sync_episodes == 0) SyncTarget();
  return loss;
}

void DqnAgent::LoadParams(const nn::ParamSet& params) {
  if (!params.SameLayout(online_)) {
    throw nn::ShapeError("checkpoint layout does not match the configured network");
  }
  online_ = params;
  target_ = params;
  adam_ = nn::AdamState(online_, {.learning_rate = config_.learning_rate});
}

}  // namespace colight::agent
