// src/numerics/autograd.cc

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

#include "simuls2s/numerics/autograd.h"

#include "simuls2s/base/error.h"

namespace simuls2s {

Parameter::Parameter(std::string n, Tensor v)
    : name(std::move(n)), value(std::move(v)), grad(value.size(), 0.0) {}

void Parameter::ZeroGrad() { grad.assign(value.size(), 0.0); }

Var Tape::Leaf(Tensor value) {
  S2S_CHECK(!backward_done_, "tape already consumed by Backward");
  Var v(std::move(value));
  nodes_.push_back(Node{v.value_, {}, nullptr, nullptr});
  v.tape_ = this;
  v.node_ = static_cast<int>(nodes_.size()) - 1;
  return v;
}

Var Tape::Watch(Parameter& param) {
  if (param.frozen) return Var(param.value);
  auto it = watched_.find(&param);
  if (it != watched_.end()) {
    Var v(nodes_[it->second].value);
    v.tape_ = this;
    v.node_ = it->second;
    return v;
  }
  Var v = Leaf(param.value);
  nodes_[v.node_].param = &param;
  watched_[&param] = v.node_;
  return v;
}

Var Tape::Record(Tensor value, BackwardFn backward) {
  S2S_CHECK(!backward_done_, "tape already consumed by Backward");
  Var v(std::move(value));
  nodes_.push_back(Node{v.value_, {}, std::move(backward), nullptr});
  v.tape_ = this;
  v.node_ = static_cast<int>(nodes_.size()) - 1;
  return v;
}

std::vector<double>& Tape::GradOf(int node) {
  Node& n = nodes_.at(node);
  if (n.grad.empty()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

Tensor Tape::Grad(const Var& v) const {
  S2S_CHECK(v.tape_ == this, "variable is not tracked by this tape");
  const Node& n = nodes_.at(v.node_);
  if (n.grad.empty()) return Tensor::Zeros(n.value.shape());
  return Tensor(n.value.shape(), n.grad);
}

void Tape::Backward(const Var& loss) {
  S2S_CHECK(loss.tape_ == this, "loss is not tracked by this tape");
  S2S_CHECK(loss.value().size() == 1, "Backward needs a scalar loss");
  S2S_CHECK(!backward_done_, "Backward called twice on one tape");
  backward_done_ = true;
  GradOf(loss.node_)[0] = 1.0;
  for (int i = loss.node_; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.grad.empty()) continue;
    CheckFinite(n.grad, "backward pass");
    if (n.backward) n.backward(n.grad, *this);
    if (n.param != nullptr) {
      auto& g = n.param->grad;
      if (g.size() != n.grad.size()) g.assign(n.grad.size(), 0.0);
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += n.grad[k];
    }
  }
}

namespace {
Tape* Merge(Tape* acc, const Var& v) {
  if (!v.tracked()) return acc;
  if (acc != nullptr && acc != v.tape()) throw ShapeError("op mixes variables from two tapes");
  return v.tape();
}
}  // namespace

Tape* CommonTape(std::initializer_list<const Var*> vars) {
  Tape* t = nullptr;
  for (const Var* v : vars) t = Merge(t, *v);
  return t;
}

Tape* CommonTape(std::span<const Var> vars) {
  Tape* t = nullptr;
  for (const Var& v : vars) t = Merge(t, v);
  return t;
}

}  // namespace simuls2s
