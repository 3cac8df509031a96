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

#ifndef BVFL_AUTODIFF_TAPE_H_
#define BVFL_AUTODIFF_TAPE_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bvfl/autodiff/tensor.h"

namespace bvfl {

class Tape;
struct Parameter;

// Handle to a node on a tape. Cheap to copy; only valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

// Seed for a multi-output backward pass: d(objective)/d(var) = grad.
struct Seed {
  Var var;
  Tensor grad;
};

// View handed to an operation's local gradient rule during backward.
class BackwardContext {
 public:
  std::span<const double> grad_out() const { return grad_out_; }
  const Tensor& output() const;
  const Tensor& input(std::size_t k) const;
  // Accumulation buffer for input k, or an empty span when that input does
  // not require a gradient.
  std::span<double> input_grad(std::size_t k);

 private:
  friend class Tape;
  BackwardContext(Tape* tape, std::size_t node,
                  std::span<const double> grad_out)
      : tape_(tape), node_(node), grad_out_(grad_out) {}
  Tape* tape_;
  std::size_t node_;
  std::span<const double> grad_out_;
};

// Result of a backward pass: one gradient per node reachable from the seeds.
class Gradients {
 public:
  // Gradient for `v`, or nullptr if `v` was not reached.
  const Tensor* Find(Var v) const;
  // Gradient for `v`, zeros when unreached.
  Tensor Get(Var v) const;
  bool Has(Var v) const { return Find(v) != nullptr; }

 private:
  friend class Tape;
  std::vector<std::optional<Tensor>> grads_;
};

// Records operations in topological order and runs reverse-mode
// differentiation. A tape constructed with `record == false` only evaluates
// values, which is what evaluation passes use.
class Tape {
 public:
  using BackwardFn = std::function<void(BackwardContext&)>;

  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }

  Var Leaf(Tensor value, bool requires_grad = true);
  Var Constant(Tensor value) { return Leaf(std::move(value), false); }
  Var Record(Tensor value, std::vector<Var> inputs, BackwardFn fn);

  // Registers a trainable parameter as a leaf once; later calls return the
  // same node.
  Var Bind(Parameter& param);
  // Makes later Bind(param) calls return `v` (used to differentiate with
  // respect to a parameter through an arbitrary node).
  void BindAs(Parameter& param, Var v);
  // Node bound for `param`, or nullptr.
  const Var* BoundVar(const Parameter& param) const;

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Backward from a scalar loss; d(loss)/d(loss) = 1.
  Gradients Backward(Var loss);
  // Backward from several outputs with caller-supplied upstream gradients.
  Gradients Backward(std::span<const Seed> seeds);

 private:
  friend class BackwardContext;
  struct Node {
    Tensor value;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool requires_grad = false;
  };

  void CheckOwned(Var v) const;

  bool record_;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, Var> bound_;
  std::vector<std::vector<double>>* active_grads_ = nullptr;
};

// Throws NumericError naming `op` if `t` holds NaN or Inf.
void CheckFinite(const Tensor& t, const char* op);

}  // namespace bvfl

#endif  // BVFL_AUTODIFF_TAPE_H_
