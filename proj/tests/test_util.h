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

#ifndef COLIGHT_TESTS_TEST_UTIL_H_
#define COLIGHT_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "colight/matrix.h"
#include "colight/params.h"

namespace colight::testing {

inline nn::Matrix RandomMatrix(int rows, int cols, std::mt19937_64& rng, double lo = -1.0,
                               double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  nn::Matrix m(rows, cols);
  for (auto& v : m.values()) v = u(rng);
  return m;
}

// Naive triple loop, independent of nn::MatMul.
inline nn::Matrix NaiveMatMul(const nn::Matrix& a, const nn::Matrix& b) {
  nn::Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) {
      double s = 0;
      for (int k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

inline double MaxAbsDiff(const nn::Matrix& a, const nn::Matrix& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
  return d;
}

// Max relative error between analytic gradients and central differences of
// `loss` over every scalar of `params` (h = 1e-5). Relative error uses
// max(|a|, |n|, 1e-6) as the denominator floor.
inline double GradientCheck(nn::ParamSet& params, const std::vector<nn::Matrix>& analytic,
                            const std::function<double()>& loss, double h = 1e-5) {
  double worst = 0.0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t k = 0; k < params[t].size(); ++k) {
      double& x = params[t].values()[k];
      const double saved = x;
      x = saved + h;
      const double up = loss();
      x = saved - h;
      const double down = loss();
      x = saved;
      const double numeric = (up - down) / (2 * h);
      const double a = analytic[t].values()[k];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace colight::testing

#endif  // COLIGHT_TESTS_TEST_UTIL_H_
