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

#include "colight/model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace colight::model {

using nn::Matrix;
using nn::Tape;
using nn::Var;

std::size_t ParamCount(const ModelConfig& c) {
  const std::size_t k = c.obs_dim, m = c.embed_dim, n = c.key_dim, v = c.value_dim;
  const std::size_t per_head =
      (c.attention == AttentionMode::kLearned ? 2 * m * n : 0) + m * v;
  const std::size_t per_layer = c.heads * per_head + v * m + m;
  return k * m + m + c.layers * per_layer + m * c.phases + c.phases;
}

std::vector<Var> BindParams(Tape& tape, const nn::ParamSet& params) {
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const auto& t : params.tensors()) vars.push_back(tape.Param(t));
  return vars;
}

Matrix QNetwork::QValues(const nn::ParamSet& params, const Matrix& obs) const {
  return QValues(params, obs, nullptr);
}

Matrix QNetwork::QValues(const nn::ParamSet& params, const Matrix& obs,
                         std::vector<AttentionValues>* attention) const {
  Tape tape;
  const auto vars = BindParams(tape, params);
  const auto fwd = Build(tape, vars, obs);
  if (attention != nullptr) {
    attention->clear();
    for (const auto& tap : fwd.taps) {
      attention->push_back({tap.layer, tap.head, tape.value(tap.alpha)});
    }
  }
  return tape.value(fwd.q);
}

CoLightNetwork::CoLightNetwork(ModelConfig config, roadnet::ScopeTable scope)
    : config_(config), scope_(std::move(scope)) {
  if (config_.obs_dim <= 0 || config_.embed_dim <= 0 || config_.key_dim <= 0 ||
      config_.value_dim <= 0 || config_.layers < 0 || config_.heads < 1 ||
      config_.phases < 1) {
    throw nn::ShapeError("colight: invalid model dimensions");
  }
  if (!(config_.tau > 0.0)) throw std::invalid_argument("colight: tau must be > 0");
  if (scope_.size < 1 || scope_.slots.size() != scope_.mask.size()) {
    throw nn::ShapeError("colight: malformed scope table");
  }
  int idx = 2;
  const bool learned = config_.attention == AttentionMode::kLearned;
  for (int l = 0; l < config_.layers; ++l) {
    std::vector<std::array<int, 3>> heads;
    for (int h = 0; h < config_.heads; ++h) {
      std::array<int, 3> ids{-1, -1, -1};
      if (learned) {
        ids[0] = idx++;
        ids[1] = idx++;
      }
      ids[2] = idx++;
      heads.push_back(ids);
    }
    layout_.heads.push_back(std::move(heads));
    layout_.w_q.push_back(idx++);
    layout_.b_q.push_back(idx++);
  }
  layout_.q_w = idx++;
  layout_.q_b = idx++;

  gather_index_ = scope_.slots;
  const int n = scope_.num_targets();
  uniform_alpha_ = Matrix(n, scope_.size);
  for (int i = 0; i < n; ++i) {
    int active = 0;
    for (int s = 0; s < scope_.size; ++s) active += scope_.active(i, s) ? 1 : 0;
    if (active == 0) throw nn::ShapeError("colight: intersection with empty scope");
    for (int s = 0; s < scope_.size; ++s) {
      if (scope_.active(i, s)) uniform_alpha_(i, s) = 1.0 / active;
    }
  }
}

nn::ParamSet CoLightNetwork::InitParams(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  const int k = config_.obs_dim, m = config_.embed_dim;
  const int n = config_.key_dim, c = config_.value_dim;
  nn::ParamSet p;
  p.Add("embed.W", nn::GlorotUniform(k, m, rng));
  p.Add("embed.b", Matrix(1, m));
  const bool learned = config_.attention == AttentionMode::kLearned;
  for (int l = 0; l < config_.layers; ++l) {
    const std::string prefix = "gat" + std::to_string(l);
    for (int h = 0; h < config_.heads; ++h) {
      const std::string hp = prefix + ".head" + std::to_string(h);
      if (learned) {
        p.Add(hp + ".W_t", nn::GlorotUniform(m, n, rng));
        p.Add(hp + ".W_s", nn::GlorotUniform(m, n, rng));
      }
      p.Add(hp + ".W_c", nn::GlorotUniform(m, c, rng));
    }
    p.Add(prefix + ".W_q", nn::GlorotUniform(c, m, rng));
    p.Add(prefix + ".b_q", Matrix(1, m));
  }
  p.Add("q.W", nn::GlorotUniform(m, config_.phases, rng));
  p.Add("q.b", Matrix(1, config_.phases));
  return p;
}

ForwardResult CoLightNetwork::Build(Tape& tape, std::span<const Var> params,
                                    const Matrix& obs) const {
  if (obs.cols() != config_.obs_dim || obs.rows() != scope_.num_targets()) {
    throw nn::ShapeError("colight forward: observations " + obs.ShapeString() +
                         ", expected " + std::to_string(scope_.num_targets()) + "x" +
                         std::to_string(config_.obs_dim));
  }
  ForwardResult out;
  const Var o = tape.Input(obs);
  Var h = tape.Relu(tape.AddRow(tape.MatMul(o, params[layout_.embed_w]),
                                params[layout_.embed_b]));
  const bool learned = config_.attention == AttentionMode::kLearned;
  for (int l = 0; l < config_.layers; ++l) {
    Var total;
    for (int hd = 0; hd < config_.heads; ++hd) {
      const auto& ids = layout_.heads[l][hd];
      Var alpha;
      if (learned) {
        const Var target = tape.MatMul(h, params[ids[0]]);
        const Var source = tape.MatMul(h, params[ids[1]]);
        const Var scores =
            tape.SlotDot(target, tape.GatherRows(source, gather_index_), scope_.size);
        alpha = tape.MaskedSoftmax(scores, scope_.mask, config_.tau);
      } else {
        alpha = tape.Input(uniform_alpha_);
      }
      out.taps.push_back({l, hd, alpha});
      const Var values = tape.GatherRows(tape.MatMul(h, params[ids[2]]), gather_index_);
      const Var summary = tape.SlotWeightedSum(alpha, values);
      total = total.valid() ? tape.Add(total, summary) : summary;
    }
    const Var mean = tape.Scale(total, 1.0 / config_.heads);
    h = tape.Relu(tape.AddRow(tape.MatMul(mean, params[layout_.w_q[l]]),
                              params[layout_.b_q[l]]));
  }
  out.q = tape.AddRow(tape.MatMul(h, params[layout_.q_w]), params[layout_.q_b]);
  return out;
}

std::vector<std::array<int, 4>> AdjacentNeighbors(const roadnet::RoadNetwork& net) {
  std::vector<std::array<int, 4>> out(net.num_intersections());
  for (int i = 0; i < net.num_intersections(); ++i) {
    for (int d = 0; d < 4; ++d) {
      out[i][d] = net.neighbor_toward(i, static_cast<roadnet::Approach>(d));
    }
  }
  return out;
}

NeighborConcatNetwork::NeighborConcatNetwork(ModelConfig config,
                                             std::vector<std::array<int, 4>> neighbors)
    : config_(config), neighbors_(std::move(neighbors)) {
  if (config_.obs_dim <= 0 || config_.embed_dim <= 0 || config_.layers < 0 ||
      config_.phases < 1) {
    throw nn::ShapeError("neighbor network: invalid model dimensions");
  }
}

nn::ParamSet NeighborConcatNetwork::InitParams(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  const int in = 5 * config_.obs_dim, m = config_.embed_dim;
  nn::ParamSet p;
  p.Add("embed.W", nn::GlorotUniform(in, m, rng));
  p.Add("embed.b", Matrix(1, m));
  for (int l = 0; l < config_.layers; ++l) {
    p.Add("hidden" + std::to_string(l) + ".W", nn::GlorotUniform(m, m, rng));
    p.Add("hidden" + std::to_string(l) + ".b", Matrix(1, m));
  }
  p.Add("q.W", nn::GlorotUniform(m, config_.phases, rng));
  p.Add("q.b", Matrix(1, config_.phases));
  return p;
}

Matrix NeighborConcatNetwork::ConcatInputs(const Matrix& obs) const {
  const int k = config_.obs_dim;
  if (obs.cols() != k || obs.rows() != static_cast<int>(neighbors_.size())) {
    throw nn::ShapeError("neighbor network: observations " + obs.ShapeString());
  }
  Matrix x(obs.rows(), 5 * k);
  for (int i = 0; i < obs.rows(); ++i) {
    auto row = x.row(i);
    std::copy_n(obs.row(i).data(), k, row.data());
    for (int d = 0; d < 4; ++d) {
      const int j = neighbors_[i][d];
      if (j >= 0) std::copy_n(obs.row(j).data(), k, row.data() + (d + 1) * k);
    }
  }
  return x;
}

ForwardResult NeighborConcatNetwork::Build(Tape& tape, std::span<const Var> params,
                                           const Matrix& obs) const {
  ForwardResult out;
  const Var x = tape.Input(ConcatInputs(obs));
  Var h = tape.Relu(tape.AddRow(tape.MatMul(x, params[0]), params[1]));
  for (int l = 0; l < config_.layers; ++l) {
    h = tape.Relu(tape.AddRow(tape.MatMul(h, params[2 + 2 * l]), params[3 + 2 * l]));
  }
  const int q = 2 + 2 * config_.layers;
  out.q = tape.AddRow(tape.MatMul(h, params[q]), params[q + 1]);
  return out;
}

Matrix Embed(const Matrix& obs_row, const Matrix& w_e, const Matrix& b_e) {
  return nn::Dense(obs_row, w_e, b_e, nn::Activation::kRelu);
}

std::vector<double> InteractionScores(const Matrix& h_i, std::span<const Matrix> neighbors,
                                      const Matrix& w_t, const Matrix& w_s,
                                      std::span<const std::uint8_t> mask) {
  if (mask.size() != neighbors.size()) throw nn::ShapeError("scores: mask length");
  const Matrix target = nn::MatMul(h_i, w_t);
  std::vector<double> e(neighbors.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < neighbors.size(); ++j) {
    if (!mask[j]) continue;
    const Matrix source = nn::MatMul(neighbors[j], w_s);
    double acc = 0.0;
    for (int c = 0; c < target.cols(); ++c) acc += target(0, c) * source(0, c);
    e[j] = acc;
  }
  return e;
}

std::vector<double> Attention(std::span<const double> scores, double tau,
                              std::span<const std::uint8_t> mask) {
  return nn::SoftmaxTemp(scores, tau, mask);
}

Matrix Aggregate(std::span<const std::vector<double>> alpha_per_head,
                 std::span<const Matrix> neighbors, std::span<const Matrix> w_c_per_head,
                 const Matrix& w_q, const Matrix& b_q) {
  if (alpha_per_head.size() != w_c_per_head.size() || alpha_per_head.empty()) {
    throw nn::ShapeError("aggregate: head count mismatch");
  }
  const int heads = static_cast<int>(alpha_per_head.size());
  Matrix mean(1, w_c_per_head[0].cols());
  for (int h = 0; h < heads; ++h) {
    for (std::size_t j = 0; j < neighbors.size(); ++j) {
      const double a = alpha_per_head[h][j];
      if (a == 0.0) continue;
      Matrix v = nn::MatMul(neighbors[j], w_c_per_head[h]);
      v *= a / heads;
      mean += v;
    }
  }
  return nn::Dense(mean, w_q, b_q, nn::Activation::kRelu);
}

ReferenceOutput ForwardReference(const CoLightNetwork& net, const nn::ParamSet& params,
                                 const Matrix& obs) {
  const auto& cfg = net.config();
  const auto& scope = net.scope();
  const auto& lay = net.layout();
  const int n = obs.rows();
  std::vector<Matrix> h(n);
  for (int i = 0; i < n; ++i) {
    Matrix row(1, obs.cols());
    std::copy_n(obs.row(i).data(), obs.cols(), row.row(0).data());
    h[i] = Embed(row, params[lay.embed_w], params[lay.embed_b]);
  }
  ReferenceOutput out;
  for (int l = 0; l < cfg.layers; ++l) {
    std::vector<std::vector<std::vector<double>>> layer_alpha(cfg.heads);
    std::vector<Matrix> next(n);
    for (int i = 0; i < n; ++i) {
      std::vector<Matrix> nbrs;
      nn::Mask mask;
      for (int s = 0; s < scope.size; ++s) {
        nbrs.push_back(h[scope.at(i, s)]);
        mask.push_back(scope.active(i, s) ? 1 : 0);
      }
      std::vector<std::vector<double>> alphas;
      std::vector<Matrix> w_c;
      for (int hd = 0; hd < cfg.heads; ++hd) {
        const auto& ids = lay.heads[l][hd];
        std::vector<double> alpha;
        if (cfg.attention == AttentionMode::kLearned) {
          const auto e = InteractionScores(h[i], nbrs, params[ids[0]], params[ids[1]], mask);
          alpha = Attention(e, cfg.tau, mask);
        } else {
          const double active = std::count(mask.begin(), mask.end(), 1);
          for (auto m : mask) alpha.push_back(m ? 1.0 / active : 0.0);
        }
        layer_alpha[hd].push_back(alpha);
        alphas.push_back(std::move(alpha));
        w_c.push_back(params[ids[2]]);
      }
      next[i] = Aggregate(alphas, nbrs, w_c, params[lay.w_q[l]], params[lay.b_q[l]]);
    }
    h = std::move(next);
    out.alpha.push_back(std::move(layer_alpha));
  }
  out.q = Matrix(n, cfg.phases);
  for (int i = 0; i < n; ++i) {
    const Matrix q = nn::Dense(h[i], params[lay.q_w], params[lay.q_b], nn::Activation::kNone);
    std::copy_n(q.row(0).data(), cfg.phases, out.q.row(i).data());
  }
  return out;
}

}  // namespace colight::model
