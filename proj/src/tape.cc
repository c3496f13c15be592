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

#include "colight/tape.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace colight::nn {
namespace {

Matrix& Slot(std::vector<Matrix>& adj, int id, int rows, int cols) {
  if (adj[id].empty() && rows * cols > 0) adj[id] = Matrix(rows, cols);
  return adj[id];
}

}  // namespace

Var Tape::Push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tape::Node& Tape::at(Var v) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
    throw std::out_of_range("tape: invalid variable handle");
  }
  return nodes_[v.id];
}

const Matrix& Tape::val(int id) const {
  const Node& n = nodes_[id];
  return n.ref != nullptr ? *n.ref : n.value;
}

const Matrix& Tape::value(Var v) const {
  at(v);
  return val(v.id);
}

Var Tape::Param(const Matrix& value) {
  Node n{.op = Op::kParam};
  n.ref = &value;
  n.needs_grad = true;
  return Push(std::move(n));
}

Var Tape::Input(Matrix value) {
  Node n{.op = Op::kInput};
  n.value = std::move(value);
  return Push(std::move(n));
}

Var Tape::MatMul(Var a, Var b) {
  Node n{.op = Op::kMatMul, .a = a.id, .b = b.id};
  n.value = nn::MatMul(value(a), value(b));
  n.needs_grad = at(a).needs_grad || at(b).needs_grad;
  return Push(std::move(n));
}

Var Tape::AddRow(Var a, Var bias) {
  const Matrix& x = value(a);
  const Matrix& b = value(bias);
  if (b.rows() != 1 || b.cols() != x.cols()) {
    throw ShapeError("add_row: " + x.ShapeString() + " + " + b.ShapeString());
  }
  Node n{.op = Op::kAddRow, .a = a.id, .b = bias.id};
  n.value = x;
  for (int r = 0; r < x.rows(); ++r) {
    auto row = n.value.row(r);
    for (int c = 0; c < x.cols(); ++c) row[c] += b(0, c);
  }
  n.needs_grad = at(a).needs_grad || at(bias).needs_grad;
  return Push(std::move(n));
}

Var Tape::Relu(Var a) {
  Node n{.op = Op::kRelu, .a = a.id};
  n.value = value(a);
  for (double& v : n.value.values()) v = std::max(v, 0.0);
  n.needs_grad = at(a).needs_grad;
  return Push(std::move(n));
}

Var Tape::Add(Var a, Var b) {
  Node n{.op = Op::kAdd, .a = a.id, .b = b.id};
  n.value = value(a);
  n.value += value(b);
  n.needs_grad = at(a).needs_grad || at(b).needs_grad;
  return Push(std::move(n));
}

Var Tape::Scale(Var a, double s) {
  Node n{.op = Op::kScale, .a = a.id};
  n.value = value(a);
  n.value *= s;
  n.scalar = s;
  n.needs_grad = at(a).needs_grad;
  return Push(std::move(n));
}

Var Tape::GatherRows(Var a, std::vector<int> rows) {
  const Matrix& x = value(a);
  Node n{.op = Op::kGather, .a = a.id};
  n.value = Matrix(static_cast<int>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= x.rows()) {
      throw ShapeError("gather: row index out of range");
    }
    std::copy_n(x.row(rows[r]).data(), x.cols(),
                n.value.row(static_cast<int>(r)).data());
  }
  n.index = std::move(rows);
  n.needs_grad = at(a).needs_grad;
  return Push(std::move(n));
}

Var Tape::SlotDot(Var targets, Var gathered, int slots) {
  const Matrix& t = value(targets);
  const Matrix& g = value(gathered);
  if (slots <= 0 || g.rows() != t.rows() * slots || g.cols() != t.cols()) {
    throw ShapeError("slot_dot: targets " + t.ShapeString() + ", gathered " +
                     g.ShapeString());
  }
  Node n{.op = Op::kSlotDot, .a = targets.id, .b = gathered.id};
  n.slots = slots;
  n.value = Matrix(t.rows(), slots);
  for (int i = 0; i < t.rows(); ++i) {
    const auto ti = t.row(i);
    for (int s = 0; s < slots; ++s) {
      const auto gj = g.row(i * slots + s);
      double acc = 0.0;
      for (int c = 0; c < t.cols(); ++c) acc += ti[c] * gj[c];
      n.value(i, s) = acc;
    }
  }
  n.needs_grad = at(targets).needs_grad || at(gathered).needs_grad;
  return Push(std::move(n));
}

Var Tape::MaskedSoftmax(Var scores, Mask mask, double tau) {
  const Matrix& e = value(scores);
  if (mask.size() != e.size()) throw ShapeError("softmax: mask shape");
  Node n{.op = Op::kSoftmax, .a = scores.id};
  n.value = Matrix(e.rows(), e.cols());
  for (int i = 0; i < e.rows(); ++i) {
    const std::span<const std::uint8_t> m(
        mask.data() + static_cast<std::size_t>(i) * e.cols(), e.cols());
    const auto alpha = SoftmaxTemp(e.row(i), tau, m);
    std::copy(alpha.begin(), alpha.end(), n.value.row(i).begin());
  }
  n.mask = std::move(mask);
  n.scalar = tau;
  n.needs_grad = at(scores).needs_grad;
  return Push(std::move(n));
}

Var Tape::SlotWeightedSum(Var weights, Var gathered) {
  const Matrix& w = value(weights);
  const Matrix& g = value(gathered);
  const int slots = w.cols();
  if (g.rows() != w.rows() * slots) {
    throw ShapeError("slot_weighted_sum: weights " + w.ShapeString() +
                     ", gathered " + g.ShapeString());
  }
  Node n{.op = Op::kWeightedSum, .a = weights.id, .b = gathered.id};
  n.slots = slots;
  n.value = Matrix(w.rows(), g.cols());
  for (int i = 0; i < w.rows(); ++i) {
    auto out = n.value.row(i);
    for (int s = 0; s < slots; ++s) {
      const double ws = w(i, s);
      if (ws == 0.0) continue;
      const auto gj = g.row(i * slots + s);
      for (int c = 0; c < g.cols(); ++c) out[c] += ws * gj[c];
    }
  }
  n.needs_grad = at(weights).needs_grad || at(gathered).needs_grad;
  return Push(std::move(n));
}

Var Tape::Pick(Var a, std::vector<int> cols) {
  const Matrix& x = value(a);
  if (static_cast<int>(cols.size()) != x.rows()) {
    throw ShapeError("pick: one column per row required");
  }
  Node n{.op = Op::kPick, .a = a.id};
  n.value = Matrix(x.rows(), 1);
  for (int i = 0; i < x.rows(); ++i) {
    if (cols[i] < 0 || cols[i] >= x.cols()) {
      throw ShapeError("pick: column index out of range");
    }
    n.value(i, 0) = x(i, cols[i]);
  }
  n.index = std::move(cols);
  n.needs_grad = at(a).needs_grad;
  return Push(std::move(n));
}

Var Tape::SquaredErrorSum(Var a, Matrix target) {
  const Matrix& x = value(a);
  if (!x.SameShape(target)) {
    throw ShapeError("squared_error: " + x.ShapeString() + " vs " +
                     target.ShapeString());
  }
  Node n{.op = Op::kSquaredError, .a = a.id};
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x.values()[i] - target.values()[i];
    acc += d * d;
  }
  n.value = Matrix(1, 1, acc);
  n.aux = std::move(target);
  n.needs_grad = at(a).needs_grad;
  return Push(std::move(n));
}

Var Tape::Sum(Var a) {
  Node n{.op = Op::kSum, .a = a.id};
  double acc = 0.0;
  for (double v : value(a).values()) acc += v;
  n.value = Matrix(1, 1, acc);
  n.needs_grad = at(a).needs_grad;
  return Push(std::move(n));
}

Matrix Tape::grad(Var v) const {
  const Node& n = at(v);
  if (v.id < static_cast<int>(param_grads_.size()) &&
      !param_grads_[v.id].empty()) {
    return param_grads_[v.id];
  }
  const Matrix& x = val(v.id);
  (void)n;
  return Matrix(x.rows(), x.cols());
}

void Tape::ZeroGrad() { param_grads_.clear(); }

void Tape::Backward(Var loss) {
  const Matrix& l = value(loss);
  if (l.rows() != 1 || l.cols() != 1) {
    throw ShapeError("backward: loss must be 1x1, got " + l.ShapeString());
  }
  if (param_grads_.size() < nodes_.size()) param_grads_.resize(nodes_.size());
  std::vector<Matrix> adj(loss.id + 1);
  adj[loss.id] = Matrix(1, 1, 1.0);
  for (int id = loss.id; id >= 0; --id) {
    if (adj[id].empty() || !nodes_[id].needs_grad) continue;
    Propagate(id, adj[id], adj);
    adj[id] = Matrix();
  }
}

void Tape::Propagate(int id, const Matrix& g, std::vector<Matrix>& adj) {
  const Node& n = nodes_[id];
  auto wants = [&](int child) { return nodes_[child].needs_grad; };
  switch (n.op) {
    case Op::kInput:
      break;
    case Op::kParam: {
      Matrix& acc = param_grads_[id];
      if (acc.empty()) acc = Matrix(g.rows(), g.cols());
      acc += g;
      break;
    }
    case Op::kMatMul: {
      const Matrix& a = val(n.a);
      const Matrix& b = val(n.b);
      if (wants(n.a)) {
        // dA = dC * B^T
        Matrix& da = Slot(adj, n.a, a.rows(), a.cols());
        for (int i = 0; i < a.rows(); ++i) {
          const auto gi = g.row(i);
          auto di = da.row(i);
          for (int p = 0; p < a.cols(); ++p) {
            const auto bp = b.row(p);
            double acc = 0.0;
            for (int j = 0; j < b.cols(); ++j) acc += gi[j] * bp[j];
            di[p] += acc;
          }
        }
      }
      if (wants(n.b)) {
        // dB = A^T * dC
        Matrix& db = Slot(adj, n.b, b.rows(), b.cols());
        for (int i = 0; i < a.rows(); ++i) {
          const auto ai = a.row(i);
          const auto gi = g.row(i);
          for (int p = 0; p < a.cols(); ++p) {
            const double av = ai[p];
            if (av == 0.0) continue;
            auto dp = db.row(p);
            for (int j = 0; j < b.cols(); ++j) dp[j] += av * gi[j];
          }
        }
      }
      break;
    }
    case Op::kAddRow: {
      if (wants(n.a)) Slot(adj, n.a, g.rows(), g.cols()) += g;
      if (wants(n.b)) {
        Matrix& db = Slot(adj, n.b, 1, g.cols());
        for (int i = 0; i < g.rows(); ++i) {
          for (int c = 0; c < g.cols(); ++c) db(0, c) += g(i, c);
        }
      }
      break;
    }
    case Op::kRelu: {
      if (!wants(n.a)) break;
      Matrix& da = Slot(adj, n.a, g.rows(), g.cols());
      const auto out = n.value.values();
      auto d = da.values();
      const auto gv = g.values();
      for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i] > 0.0) d[i] += gv[i];
      }
      break;
    }
    case Op::kAdd:
      if (wants(n.a)) Slot(adj, n.a, g.rows(), g.cols()) += g;
      if (wants(n.b)) Slot(adj, n.b, g.rows(), g.cols()) += g;
      break;
    case Op::kScale: {
      if (!wants(n.a)) break;
      Matrix& da = Slot(adj, n.a, g.rows(), g.cols());
      auto d = da.values();
      const auto gv = g.values();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += n.scalar * gv[i];
      break;
    }
    case Op::kGather: {
      if (!wants(n.a)) break;
      const Matrix& src = val(n.a);
      Matrix& da = Slot(adj, n.a, src.rows(), src.cols());
      for (std::size_t r = 0; r < n.index.size(); ++r) {
        auto dst = da.row(n.index[r]);
        const auto gr = g.row(static_cast<int>(r));
        for (int c = 0; c < src.cols(); ++c) dst[c] += gr[c];
      }
      break;
    }
    case Op::kSlotDot: {
      const Matrix& t = val(n.a);
      const Matrix& gathered = val(n.b);
      const int slots = n.slots;
      const bool want_t = wants(n.a);
      const bool want_g = wants(n.b);
      Matrix* dt = want_t ? &Slot(adj, n.a, t.rows(), t.cols()) : nullptr;
      Matrix* dg = want_g ? &Slot(adj, n.b, gathered.rows(), gathered.cols())
                          : nullptr;
      for (int i = 0; i < t.rows(); ++i) {
        const auto ti = t.row(i);
        for (int s = 0; s < slots; ++s) {
          const double gs = g(i, s);
          if (gs == 0.0) continue;
          const int r = i * slots + s;
          const auto gj = gathered.row(r);
          if (dt != nullptr) {
            auto d = dt->row(i);
            for (int c = 0; c < t.cols(); ++c) d[c] += gs * gj[c];
          }
          if (dg != nullptr) {
            auto d = dg->row(r);
            for (int c = 0; c < t.cols(); ++c) d[c] += gs * ti[c];
          }
        }
      }
      break;
    }
    case Op::kSoftmax: {
      if (!wants(n.a)) break;
      const Matrix& alpha = n.value;
      Matrix& de = Slot(adj, n.a, alpha.rows(), alpha.cols());
      for (int i = 0; i < alpha.rows(); ++i) {
        double dot = 0.0;
        for (int s = 0; s < alpha.cols(); ++s) dot += alpha(i, s) * g(i, s);
        for (int s = 0; s < alpha.cols(); ++s) {
          if (!n.mask[static_cast<std::size_t>(i) * alpha.cols() + s]) continue;
          de(i, s) += alpha(i, s) * (g(i, s) - dot) / n.scalar;
        }
      }
      break;
    }
    case Op::kWeightedSum: {
      const Matrix& w = val(n.a);
      const Matrix& gathered = val(n.b);
      const int slots = n.slots;
      const bool want_w = wants(n.a);
      const bool want_g = wants(n.b);
      Matrix* dw = want_w ? &Slot(adj, n.a, w.rows(), w.cols()) : nullptr;
      Matrix* dg = want_g ? &Slot(adj, n.b, gathered.rows(), gathered.cols())
                          : nullptr;
      for (int i = 0; i < w.rows(); ++i) {
        const auto gi = g.row(i);
        for (int s = 0; s < slots; ++s) {
          const int r = i * slots + s;
          if (dw != nullptr) {
            const auto gj = gathered.row(r);
            double acc = 0.0;
            for (int c = 0; c < gathered.cols(); ++c) acc += gi[c] * gj[c];
            (*dw)(i, s) += acc;
          }
          if (dg != nullptr) {
            const double ws = w(i, s);
            if (ws == 0.0) continue;
            auto d = dg->row(r);
            for (int c = 0; c < gathered.cols(); ++c) d[c] += ws * gi[c];
          }
        }
      }
      break;
    }
    case Op::kPick: {
      if (!wants(n.a)) break;
      const Matrix& src = val(n.a);
      Matrix& da = Slot(adj, n.a, src.rows(), src.cols());
      for (int i = 0; i < src.rows(); ++i) da(i, n.index[i]) += g(i, 0);
      break;
    }
    case Op::kSquaredError: {
      if (!wants(n.a)) break;
      const Matrix& x = val(n.a);
      Matrix& da = Slot(adj, n.a, x.rows(), x.cols());
      const double scale = 2.0 * g(0, 0);
      auto d = da.values();
      for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] += scale * (x.values()[i] - n.aux.values()[i]);
      }
      break;
    }
    case Op::kSum: {
      if (!wants(n.a)) break;
      const Matrix& x = val(n.a);
      Matrix& da = Slot(adj, n.a, x.rows(), x.cols());
      for (double& v : da.values()) v += g(0, 0);
      break;
    }
  }
}

}  // namespace colight::nn
