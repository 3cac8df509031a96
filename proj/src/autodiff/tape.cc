//
// Copyright 2026 The BVFL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "bvfl/autodiff/tape.h"

#include <algorithm>
#include <cmath>

#include "bvfl/autodiff/parameter.h"
#include "bvfl/common/error.h"

namespace bvfl {

const Tensor& Var::value() const {
  if (tape == nullptr) throw ContractError("Var is not attached to a tape");
  return tape->value(id);
}

void CheckFinite(const Tensor& t, const char* op) {
  if (!t.AllFinite()) {
    throw NumericError(std::string("non-finite value produced by ") + op);
  }
}

const Tensor& BackwardContext::output() const { return tape_->value(node_); }

const Tensor& BackwardContext::input(std::size_t k) const {
  return tape_->value(tape_->nodes_[node_].inputs.at(k));
}

std::span<double> BackwardContext::input_grad(std::size_t k) {
  const std::size_t in = tape_->nodes_[node_].inputs.at(k);
  if (!tape_->nodes_[in].requires_grad) return {};
  auto& g = (*tape_->active_grads_)[in];
  if (g.empty()) g.assign(tape_->nodes_[in].value.size(), 0.0);
  return g;
}

const Tensor* Gradients::Find(Var v) const {
  if (v.id >= grads_.size() || !grads_[v.id].has_value()) return nullptr;
  return &*grads_[v.id];
}

Tensor Gradients::Get(Var v) const {
  if (const Tensor* g = Find(v)) return *g;
  return Tensor::Zeros(v.value().shape());
}

Var Tape::Leaf(Tensor value, bool requires_grad) {
  nodes_.push_back(Node{std::move(value), {}, nullptr,
                        requires_grad && record_});
  return Var{this, nodes_.size() - 1};
}

Var Tape::Record(Tensor value, std::vector<Var> inputs, BackwardFn fn) {
  Node node;
  node.value = std::move(value);
  if (record_) {
    bool needs = false;
    node.inputs.reserve(inputs.size());
    for (const Var& v : inputs) {
      CheckOwned(v);
      node.inputs.push_back(v.id);
      needs = needs || nodes_[v.id].requires_grad;
    }
    node.requires_grad = needs;
    if (needs) node.backward = std::move(fn);
  }
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Var Tape::Bind(Parameter& param) {
  auto it = bound_.find(&param);
  if (it != bound_.end()) return it->second;
  Var v = Leaf(param.value, true);
  bound_.emplace(&param, v);
  return v;
}

void Tape::BindAs(Parameter& param, Var v) {
  CheckOwned(v);
  if (!bound_.emplace(&param, v).second) {
    throw ContractError("parameter " + param.name + " is already bound");
  }
}

const Var* Tape::BoundVar(const Parameter& param) const {
  auto it = bound_.find(&param);
  return it == bound_.end() ? nullptr : &it->second;
}

void Tape::CheckOwned(Var v) const {
  if (v.tape != this || v.id >= nodes_.size()) {
    throw ContractError("Var belongs to a different tape");
  }
}

Gradients Tape::Backward(Var loss) {
  CheckOwned(loss);
  if (value(loss.id).size() != 1) {
    throw ContractError("backward requires a scalar loss, got shape " +
                        ShapeToString(value(loss.id).shape()));
  }
  Seed seed{loss, Tensor::Full(value(loss.id).shape(), 1.0)};
  return Backward(std::span<const Seed>(&seed, 1));
}

Gradients Tape::Backward(std::span<const Seed> seeds) {
  if (nodes_.empty()) throw ContractError("backward on an empty tape");
  std::vector<std::vector<double>> grads(nodes_.size());
  std::size_t top = 0;
  for (const Seed& s : seeds) {
    CheckOwned(s.var);
    if (!s.grad.SameShape(value(s.var.id))) {
      throw DimensionError("seed gradient shape " +
                           ShapeToString(s.grad.shape()) + " vs value " +
                           ShapeToString(value(s.var.id).shape()));
    }
    auto& g = grads[s.var.id];
    if (g.empty()) g.assign(s.grad.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += s.grad[i];
    top = std::max(top, s.var.id);
  }
  active_grads_ = &grads;
  for (std::size_t id = top + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (grads[id].empty() || !node.backward) continue;
    // The rule may allocate buffers for inputs (always earlier ids), which
    // never reallocates grads[id] itself.
    BackwardContext ctx(this, id, grads[id]);
    node.backward(ctx);
  }
  active_grads_ = nullptr;

  Gradients out;
  out.grads_.resize(nodes_.size());
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    if (!grads[id].empty()) {
      out.grads_[id] = Tensor(nodes_[id].value.shape(), std::move(grads[id]));
    }
  }
  return out;
}

}  // namespace bvfl
