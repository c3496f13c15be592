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

#include "colight/params.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace colight::nn {

using nlohmann::json;

int ParamSet::Add(std::string name, Matrix value) {
  if (std::find(names_.begin(), names_.end(), name) != names_.end()) {
    throw std::invalid_argument("duplicate parameter name '" + name + "'");
  }
  names_.push_back(std::move(name));
  tensors_.push_back(std::move(value));
  return static_cast<int>(tensors_.size()) - 1;
}

std::size_t ParamSet::ScalarCount() const {
  std::size_t total = 0;
  for (const auto& t : tensors_) total += t.size();
  return total;
}

bool ParamSet::SameLayout(const ParamSet& other) const {
  if (names_ != other.names_) return false;
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    if (!tensors_[i].SameShape(other.tensors_[i])) return false;
  }
  return true;
}

std::vector<Matrix> ParamSet::ZerosLike() const {
  std::vector<Matrix> out;
  out.reserve(tensors_.size());
  for (const auto& t : tensors_) out.emplace_back(t.rows(), t.cols());
  return out;
}

Matrix GlorotUniform(int fan_in, int fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix w(fan_in, fan_out);
  for (double& v : w.values()) v = dist(rng);
  return w;
}

AdamState::AdamState(const ParamSet& params, AdamOptions options)
    : options_(options), m_(params.ZerosLike()), v_(params.ZerosLike()) {}

void AdamState::Step(ParamSet& params, const std::vector<Matrix>& grads) {
  if (grads.size() != params.size() || m_.size() != params.size()) {
    throw ShapeError("adam: gradient count does not match parameters");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!grads[i].SameShape(params[i])) {
      throw ShapeError("adam: gradient shape mismatch for " + params.name(i));
    }
    if (!grads[i].AllFinite()) {
      throw NonFiniteGradient("adam: non-finite gradient for " +
                              params.name(i));
    }
  }
  ++step_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const double lr = options_.learning_rate;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    auto p = params[i].values();
    auto m = m_[i].values();
    auto v = v_[i].values();
    const auto g = grads[i].values();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = b1 * m[j] + (1.0 - b1) * g[j];
      v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      p[j] -= lr * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
  }
}

void SaveParams(const ParamSet& params, std::ostream& out) {
  json tensors = json::object();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& t = params[i];
    tensors[params.name(i)] = {
        {"shape", {t.rows(), t.cols()}},
        {"values", std::vector<double>(t.values().begin(), t.values().end())}};
  }
  json doc = {{"order", params.names()}, {"tensors", std::move(tensors)}};
  out << doc.dump() << '\n';
}

ParamSet LoadParams(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("checkpoint: ") + e.what());
  }
  ParamSet params;
  try {
    for (const auto& name : doc.at("order")) {
      const auto& entry = doc.at("tensors").at(name.get<std::string>());
      const int rows = entry.at("shape").at(0).get<int>();
      const int cols = entry.at("shape").at(1).get<int>();
      params.Add(name.get<std::string>(),
                 Matrix(rows, cols, entry.at("values").get<std::vector<double>>()));
    }
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: ") + e.what());
  }
  return params;
}

void SaveParamsFile(const ParamSet& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  SaveParams(params, out);
}

ParamSet LoadParamsFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path);
  return LoadParams(in);
}

}  // namespace colight::nn
