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

#ifndef COLIGHT_TAPE_H_
#define COLIGHT_TAPE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "colight/matrix.h"

namespace colight::nn {

// Handle to a node recorded on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Records matrix-level primitive operations for reverse-mode
// differentiation. Nodes are appended in topological order, so the backward
// sweep is a single reverse pass over the node list.
//
// Slot operations work on a neighbourhood layout: a "gathered" matrix has
// rows * slots rows, row i * slots + s holding slot s of target row i.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Trainable leaf referencing external storage; `value` must outlive the
  // tape. Gradients accumulate across backward calls.
  Var Param(const Matrix& value);
  // Constant leaf (no gradient).
  Var Input(Matrix value);

  Var MatMul(Var a, Var b);
  Var AddRow(Var a, Var bias);  // bias is 1 x cols, broadcast over rows
  Var Relu(Var a);
  Var Add(Var a, Var b);
  Var Scale(Var a, double s);
  Var GatherRows(Var a, std::vector<int> rows);
  // out(i, s) = dot(targets.row(i), gathered.row(i * slots + s)).
  Var SlotDot(Var targets, Var gathered, int slots);
  // Row-wise temperature softmax over unmasked slots; mask is rows x cols.
  Var MaskedSoftmax(Var scores, Mask mask, double tau);
  // out.row(i) = sum_s weights(i, s) * gathered.row(i * slots + s).
  Var SlotWeightedSum(Var weights, Var gathered);
  // out(i, 0) = a(i, cols[i]).
  Var Pick(Var a, std::vector<int> cols);
  // 1 x 1: sum of (a - target)^2.
  Var SquaredErrorSum(Var a, Matrix target);
  // 1 x 1: sum of all entries.
  Var Sum(Var a);

  const Matrix& value(Var v) const;
  // Accumulated gradient of a Param leaf (zero matrix if none reached it).
  Matrix grad(Var v) const;

  // Reverse sweep from a 1 x 1 node; adds into the Param leaf gradients.
  void Backward(Var loss);
  void ZeroGrad();

  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  enum class Op : std::uint8_t {
    kParam,
    kInput,
    kMatMul,
    kAddRow,
    kRelu,
    kAdd,
    kScale,
    kGather,
    kSlotDot,
    kSoftmax,
    kWeightedSum,
    kPick,
    kSquaredError,
    kSum,
  };

  struct Node {
    Op op;
    int a = -1;
    int b = -1;
    bool needs_grad = false;
    const Matrix* ref = nullptr;  // Param leaves
    Matrix value;                 // everything else
    Matrix aux;                   // SquaredError target
    std::vector<int> index;       // Gather rows / Pick cols
    Mask mask;
    double scalar = 0.0;  // Scale factor, softmax tau
    int slots = 0;
  };

  Var Push(Node node);
  const Node& at(Var v) const;
  const Matrix& val(int id) const;
  void Propagate(int id, const Matrix& g, std::vector<Matrix>& adj);

  std::vector<Node> nodes_;
  std::vector<Matrix> param_grads_;  // indexed by node id, Param only
};

}  // namespace colight::nn

#endif  // COLIGHT_TAPE_H_
