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

#ifndef COLIGHT_MODEL_H_
#define COLIGHT_MODEL_H_

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "colight/matrix.h"
#include "colight/params.h"
#include "colight/roadnet.h"
#include "colight/tape.h"

namespace colight::model {

enum class AttentionMode {
  kLearned,  // e_ij = (h_i W_t) . (h_j W_s), softmax over the scope
  kUniform,  // alpha fixed to 1/|active slots| (graph-convolution stand-in)
};

struct ModelConfig {
  int obs_dim = 0;     // k
  int embed_dim = 32;  // m; also the width of every attention layer's output
  int key_dim = 32;    // n
  int value_dim = 32;  // c
  int layers = 2;      // L
  int heads = 5;       // H
  int phases = 4;      // p
  double tau = 1.0;
  AttentionMode attention = AttentionMode::kLearned;
};

// Exact learnable scalar count of the parameter set built for `config`.
std::size_t ParamCount(const ModelConfig& config);

struct AttentionTap {
  int layer = 0;
  int head = 0;
  nn::Var alpha;  // N x |scope|
};

struct ForwardResult {
  nn::Var q;  // N x p
  std::vector<AttentionTap> taps;
};

// Attention weights of one layer/head after a forward pass.
struct AttentionValues {
  int layer = 0;
  int head = 0;
  nn::Matrix alpha;  // N x |scope|
};

// Registers every tensor of `params` as a trainable tape leaf.
std::vector<nn::Var> BindParams(nn::Tape& tape, const nn::ParamSet& params);

// Shared-parameter Q-network evaluated jointly over all intersections.
class QNetwork {
 public:
  virtual ~QNetwork() = default;

  virtual nn::ParamSet InitParams(std::uint64_t seed) const = 0;
  // Records the forward pass for an N x k observation matrix.
  virtual ForwardResult Build(nn::Tape& tape, std::span<const nn::Var> params,
                              const nn::Matrix& obs) const = 0;
  virtual int num_actions() const = 0;
  virtual int obs_dim() const = 0;
  virtual bool has_attention() const { return false; }

  // Q values without gradients.
  nn::Matrix QValues(const nn::ParamSet& params, const nn::Matrix& obs) const;
  // Same, also copying out every attention tap when `attention` is non-null.
  nn::Matrix QValues(const nn::ParamSet& params, const nn::Matrix& obs,
                     std::vector<AttentionValues>* attention) const;
};

// Observation embedding, L multi-head neighbourhood attention layers with
// head averaging, and a linear Q head. Parameters are shared by all
// intersections; the neighbourhood is read from the scope table, so the
// result does not depend on the storage order of neighbour slots.
class CoLightNetwork final : public QNetwork {
 public:
  CoLightNetwork(ModelConfig config, roadnet::ScopeTable scope);

  nn::ParamSet InitParams(std::uint64_t seed) const override;
  ForwardResult Build(nn::Tape& tape, std::span<const nn::Var> params,
                      const nn::Matrix& obs) const override;
  int num_actions() const override { return config_.phases; }
  int obs_dim() const override { return config_.obs_dim; }
  bool has_attention() const override { return true; }

  const ModelConfig& config() const { return config_; }
  const roadnet::ScopeTable& scope() const { return scope_; }

  // Tensor indices inside the ParamSet.
  struct Layout {
    int embed_w = 0;
    int embed_b = 1;
    // per layer, per head: {W_t, W_s, W_c}; W_t/W_s are -1 in uniform mode
    std::vector<std::vector<std::array<int, 3>>> heads;
    std::vector<int> w_q;
    std::vector<int> b_q;
    int q_w = 0;
    int q_b = 0;
  };
  const Layout& layout() const { return layout_; }

 private:
  ModelConfig config_;
  roadnet::ScopeTable scope_;
  Layout layout_;
  std::vector<int> gather_index_;
  nn::Matrix uniform_alpha_;
};

// Baseline that concatenates the own observation with the four adjacent
// intersections' observations at fixed N, E, S, W positions (zero when
// absent), followed by an MLP of the same depth.
class NeighborConcatNetwork final : public QNetwork {
 public:
  // neighbors[i] = {north, east, south, west} intersection ids or -1.
  NeighborConcatNetwork(ModelConfig config,
                        std::vector<std::array<int, 4>> neighbors);

  nn::ParamSet InitParams(std::uint64_t seed) const override;
  ForwardResult Build(nn::Tape& tape, std::span<const nn::Var> params,
                      const nn::Matrix& obs) const override;
  int num_actions() const override { return config_.phases; }
  int obs_dim() const override { return config_.obs_dim; }

  nn::Matrix ConcatInputs(const nn::Matrix& obs) const;
  const std::vector<std::array<int, 4>>& neighbors() const { return neighbors_; }

 private:
  ModelConfig config_;
  std::vector<std::array<int, 4>> neighbors_;
};

std::vector<std::array<int, 4>> AdjacentNeighbors(const roadnet::RoadNetwork& net);

// ---- Per-intersection reference path (used by tests) ----

// h = relu(o W_e + b_e).
nn::Matrix Embed(const nn::Matrix& obs_row, const nn::Matrix& w_e,
                 const nn::Matrix& b_e);

// e_j = (h_i W_t) . (h_j W_s); masked slots get -infinity.
std::vector<double> InteractionScores(const nn::Matrix& h_i,
                                      std::span<const nn::Matrix> neighbors,
                                      const nn::Matrix& w_t, const nn::Matrix& w_s,
                                      std::span<const std::uint8_t> mask);

// Softmax with temperature over unmasked slots.
std::vector<double> Attention(std::span<const double> scores, double tau,
                              std::span<const std::uint8_t> mask);

// hm = relu(((1/H) sum_h sum_j alpha_hj (h_j W_c^h)) W_q + b_q).
nn::Matrix Aggregate(std::span<const std::vector<double>> alpha_per_head,
                     std::span<const nn::Matrix> neighbors,
                     std::span<const nn::Matrix> w_c_per_head, const nn::Matrix& w_q,
                     const nn::Matrix& b_q);

struct ReferenceOutput {
  nn::Matrix q;
  // alpha[layer][head][i] = per-slot weights of intersection i
  std::vector<std::vector<std::vector<std::vector<double>>>> alpha;
};

// Intersection-by-intersection forward pass built from the functions above.
ReferenceOutput ForwardReference(const CoLightNetwork& net, const nn::ParamSet& params,
                                 const nn::Matrix& obs);

}  // namespace colight::model

#endif  // COLIGHT_MODEL_H_
