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

#include "colight/matrix.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace colight::nn {

Matrix::Matrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw ShapeError("negative matrix dimension");
  data_.assign(static_cast<std::size_t>(rows) * cols, fill);
}

Matrix::Matrix(int rows, int cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (rows < 0 || cols < 0) throw ShapeError("negative matrix dimension");
  if (data_.size() != static_cast<std::size_t>(rows) * cols) {
    throw ShapeError("matrix data size does not match " + ShapeString());
  }
}

Matrix Matrix::Identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::RowVector(std::vector<double> values) {
  const int n = static_cast<int>(values.size());
  return Matrix(1, n, std::move(values));
}

void Matrix::Fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

std::string Matrix::ShapeString() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Matrix& Matrix::operator+=(const Matrix& other) {
  if (!SameShape(other)) {
    throw ShapeError("add: " + ShapeString() + " vs " + other.ShapeString());
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix MatMul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + a.ShapeString() + " * " + b.ShapeString());
  }
  Matrix c(a.rows(), b.cols());
  const int inner = a.cols();
  const int n = b.cols();
  for (int i = 0; i < a.rows(); ++i) {
    double* out = c.row(i).data();
    const double* ar = a.row(i).data();
    for (int p = 0; p < inner; ++p) {
      const double av = ar[p];
      if (av == 0.0) continue;
      const double* br = b.row(p).data();
      for (int j = 0; j < n; ++j) out[j] += av * br[j];
    }
  }
  return c;
}

Matrix Dense(const Matrix& x, const Matrix& w, const Matrix& b,
             Activation activation) {
  if (x.rows() != 1 || b.rows() != 1 || b.cols() != w.cols()) {
    throw ShapeError("dense: x " + x.ShapeString() + ", W " + w.ShapeString() +
                     ", b " + b.ShapeString());
  }
  Matrix y = MatMul(x, w);
  y += b;
  if (activation == Activation::kRelu) {
    for (double& v : y.values()) v = std::max(v, 0.0);
  }
  return y;
}

std::vector<double> SoftmaxTemp(std::span<const double> logits, double tau,
                                std::span<const std::uint8_t> mask) {
  if (!(tau > 0.0)) throw std::invalid_argument("softmax: tau must be > 0");
  if (mask.size() != logits.size()) {
    throw ShapeError("softmax: mask length differs from logits");
  }
  double max_logit = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    if (!mask[j]) continue;
    any = true;
    max_logit = std::max(max_logit, logits[j] / tau);
  }
  if (!any) throw std::invalid_argument("softmax: every slot is masked");
  std::vector<double> out(logits.size(), 0.0);
  double total = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    if (!mask[j]) continue;
    out[j] = std::exp(logits[j] / tau - max_logit);
    total += out[j];
  }
  for (double& v : out) v /= total;
  return out;
}

std::vector<double> SoftmaxTemp(std::span<const double> logits, double tau) {
  Mask all(logits.size(), 1);
  return SoftmaxTemp(logits, tau, all);
}

}  // namespace colight::nn
