// Copyright 2026 The Brightsynth Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "brightsynth/nn/tape.h"

#include "brightsynth/errors.h"

namespace brightsynth::nn {

Var Tape::Constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::Input(Tensor value) {
  Var v = Constant(std::move(value));
  nodes_[v.id].requires_grad = true;
  return v;
}

Var Tape::Param(const ParamSet& params, const std::string& name) {
  Node node;
  node.external = &params.at(name);
  node.requires_grad = true;
  node.param_name = name;
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tensor& Tape::value(Var v) const {
  const Node& node = nodes_[v.id];
  return node.external ? *node.external : node.value;
}

Tensor Tape::grad(Var v) const {
  const Node& node = nodes_[v.id];
  if (node.grad.data.empty()) return Tensor(value(v).shape);
  return node.grad;
}

Tensor& Tape::GradRef(Var v) {
  Node& node = nodes_[v.id];
  if (node.grad.data.empty()) node.grad = Tensor(value(v).shape);
  return node.grad;
}

Var Tape::Record(Tensor value, std::vector<Var> inputs,
                 std::function<void(Tape&, int)> backward) {
  Node node;
  node.value = std::move(value);
  for (Var in : inputs) node.requires_grad |= nodes_[in.id].requires_grad;
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

void Tape::Backward(Var loss) {
  if (value(loss).size() != 1) {
    throw ShapeError("Backward needs a scalar loss, got " + value(loss).shape.str());
  }
  GradRef(loss).data[0] = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    Node& node = nodes_[i];
    if (node.backward && !node.grad.data.empty()) node.backward(*this, i);
  }
}

void Tape::AccumulateParamGrads(ParamSet& grads) const {
  for (const Node& node : nodes_) {
    if (node.param_name.empty() || node.grad.data.empty()) continue;
    Tensor& dst = grads.at(node.param_name);
    CheckSameShape(dst, node.grad, "parameter gradient");
    for (size_t k = 0; k < dst.size(); ++k) dst.data[k] += node.grad.data[k];
  }
}

}  // namespace brightsynth::nn
