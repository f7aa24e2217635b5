// include/simuls2s/numerics/autograd.h

// Copyright 2026  The simuls2s Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SIMULS2S_NUMERICS_AUTOGRAD_H_
#define SIMULS2S_NUMERICS_AUTOGRAD_H_

#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "simuls2s/numerics/tensor.h"

namespace simuls2s {

// A trainable tensor. Gradients from every tape that watches it accumulate in
// `grad` until the optimizer consumes them.
struct Parameter {
  std::string name;
  Tensor value;
  std::vector<double> grad;
  bool frozen = false;

  Parameter() = default;
  Parameter(std::string n, Tensor v);
  void ZeroGrad();
};

class Tape;

// A tensor value optionally tracked by a tape. Untracked vars are constants:
// ops on them only compute values, which is how inference runs.
class Var {
 public:
  Var() = default;
  explicit Var(Tensor value) : value_(std::move(value)) {}

  const Tensor& value() const { return value_; }
  const Tensor* operator->() const { return &value_; }
  Tape* tape() const { return tape_; }
  int node() const { return node_; }
  bool tracked() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Tensor value_;
  Tape* tape_ = nullptr;
  int node_ = -1;
};

// Ordered record of differentiable ops. Nodes are appended as ops run, so the
// node order is already topological; Backward walks it once in reverse.
class Tape {
 public:
  // Receives the gradient of the node's output and adds parent gradients
  // through Tape::GradOf.
  using BackwardFn = std::function<void(std::span<const double> out_grad, Tape& tape)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Leaf(Tensor value);
  // Frozen parameters come back as constants. Repeated calls for one
  // parameter return the same node.
  Var Watch(Parameter& param);

  Var Record(Tensor value, BackwardFn backward);

  // Seeds d(loss)/d(loss) = 1 and propagates to every reachable node, then
  // adds leaf gradients into watched parameters.
  void Backward(const Var& loss);

  // Gradient buffer of a node, allocated lazily as zeros.
  std::vector<double>& GradOf(int node);
  Tensor Grad(const Var& v) const;

  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;
    BackwardFn backward;
    Parameter* param = nullptr;
  };
  std::vector<Node> nodes_;
  std::unordered_map<Parameter*, int> watched_;
  bool backward_done_ = false;
};

// Parameter access that works both in training (tape != nullptr) and
// inference.
inline Var Use(Parameter& p, Tape* tape) {
  return tape != nullptr ? tape->Watch(p) : Var(p.value);
}

// Returns the tape shared by the tracked inputs, or nullptr if none is
// tracked. Mixing tapes is an error.
Tape* CommonTape(std::initializer_list<const Var*> vars);
Tape* CommonTape(std::span<const Var> vars);

}  // namespace simuls2s

#endif  // SIMULS2S_NUMERICS_AUTOGRAD_H_
