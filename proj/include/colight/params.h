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

#ifndef COLIGHT_PARAMS_H_
#define COLIGHT_PARAMS_H_

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "colight/matrix.h"

namespace colight::nn {

// Ordered, named collection of learnable tensors.
class ParamSet {
 public:
  int Add(std::string name, Matrix value);

  std::size_t size() const { return tensors_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  Matrix& operator[](std::size_t i) { return tensors_[i]; }
  const Matrix& operator[](std::size_t i) const { return tensors_[i]; }
  const std::vector<Matrix>& tensors() const { return tensors_; }
  std::vector<Matrix>& tensors() { return tensors_; }
  const std::vector<std::string>& names() const { return names_; }

  // Total number of learnable scalars.
  std::size_t ScalarCount() const;
  // Same names and shapes, in the same order.
  bool SameLayout(const ParamSet& other) const;
  // Zero-valued tensors with this set's layout.
  std::vector<Matrix> ZerosLike() const;

  friend bool operator==(const ParamSet&, const ParamSet&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<Matrix> tensors_;
};

// Glorot-uniform weights; used for every weight matrix in the models.
Matrix GlorotUniform(int fan_in, int fan_out, std::mt19937_64& rng);

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class NonFiniteGradient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AdamState {
 public:
  AdamState() = default;
  AdamState(const ParamSet& params, AdamOptions options);

  // Applies one bias-corrected Adam update. Throws NonFiniteGradient (and
  // leaves params and moments untouched) when any gradient is NaN or inf.
  void Step(ParamSet& params, const std::vector<Matrix>& grads);

  std::int64_t step_count() const { return step_; }
  const AdamOptions& options() const { return options_; }
  void set_learning_rate(double lr) { options_.learning_rate = lr; }
  const std::vector<Matrix>& first_moment() const { return m_; }
  const std::vector<Matrix>& second_moment() const { return v_; }

 private:
  AdamOptions options_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  std::int64_t step_ = 0;
};

// Checkpoint as JSON: {"tensors": {name: {"shape": [r, c], "values": [...]}},
// "order": [names...]}. Doubles are written with round-trip precision.
void SaveParams(const ParamSet& params, std::ostream& out);
ParamSet LoadParams(std::istream& in);
void SaveParamsFile(const ParamSet& params, const std::string& path);
ParamSet LoadParamsFile(const std::string& path);

}  // namespace colight::nn

#endif  // COLIGHT_PARAMS_H_
