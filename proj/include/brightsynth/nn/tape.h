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
#ifndef BRIGHTSYNTH_NN_TAPE_H_
#define BRIGHTSYNTH_NN_TAPE_H_

// Reverse-mode automatic differentiation over NCHW tensors.
//
// A Tape records every op as a node holding its value and a closure that
// propagates the node's gradient to its inputs. Backward() walks the nodes in
// reverse creation order, which is a valid topological order.

#include <functional>
#include <string>
#include <vector>

#include "brightsynth/nn/params.h"
#include "brightsynth/nn/tensor.h"

namespace brightsynth::nn {

struct Var {
  int id = -1;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf without gradient.
  Var Constant(Tensor value);
  // Leaf with gradient (used for gradient checks on inputs).
  Var Input(Tensor value);
  // Leaf bound to params.at(name). The tensor must outlive the tape.
  Var Param(const ParamSet& params, const std::string& name);

  const Tensor& value(Var v) const;
  // Gradient after Backward(); zero tensor when nothing flowed into v.
  Tensor grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

  // `loss` must hold a single element; its gradient is seeded with 1.
  void Backward(Var loss);

  // Adds the gradient of every Param leaf into `grads` under its name.
  void AccumulateParamGrads(ParamSet& grads) const;

  // Op-construction interface used by the free functions in ops.h.
  Var Record(Tensor value, std::vector<Var> inputs,
             std::function<void(Tape&, int self)> backward);
  Tensor& GradRef(Var v);
  bool HasGrad(Var v) const { return !nodes_[v.id].grad.data.empty(); }

 private:
  struct Node {
    Tensor value;
    const Tensor* external = nullptr;
    Tensor grad;
    bool requires_grad = false;
    std::string param_name;
    std::function<void(Tape&, int)> backward;
  };
  std::vector<Node> nodes_;
};

}  // namespace brightsynth::nn

#endif  // BRIGHTSYNTH_NN_TAPE_H_
