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

#ifndef BVFL_AUTODIFF_OPS_H_
#define BVFL_AUTODIFF_OPS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "bvfl/autodiff/tape.h"
#include "bvfl/autodiff/tensor.h"
#include "bvfl/common/rng.h"

// Differentiable operations. Every op checks shapes (DimensionError) and the
// finiteness of its output (NumericError), and records itself on the tape of
// its inputs.
namespace bvfl::ops {

// 2-D matrix product.
Var MatMul(Var a, Var b);
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);
Var Scale(Var a, double factor);
// x (N x D) + b broadcast over rows; b has D elements.
Var AddRow(Var x, Var b);
// x (N x D) with row i multiplied by s[i]; s has N elements.
Var ScaleRows(Var x, Var s);

Var Relu(Var x);
Var Tanh(Var x);
Var Sigmoid(Var x);
Var Softplus(Var x);
Var Log(Var x);
Var Exp(Var x);
// Softmax along `axis` of a 2-D tensor (a 1-D tensor uses axis 0).
Var Softmax(Var x, std::size_t axis);

// Sum of all elements, shape {1}.
Var Sum(Var x);
Var Mean(Var x);
// Row sums of a 2-D tensor (axis 1, result N x 1) or column sums (axis 0,
// result 1 x D).
Var SumAxis(Var x, std::size_t axis);
// Euclidean norm of each row, N x 1. The gradient at a zero row is zero.
Var RowL2Norm(Var x);
// Cosine similarity of matching rows, N x 1. Zero-norm rows give 0.
Var CosineRows(Var a, Var b);
// Each row scaled by min(1, bound / (||row|| + guard)).
Var ClipRowsL2(Var x, double bound, double guard);

Var ConcatCols(std::span<const Var> parts);
Var SliceCols(Var x, std::size_t begin, std::size_t end);
// Rows of `table` (V x D) selected by `indices`; out-of-range indices are a
// PreconditionError.
Var EmbeddingLookup(Var table, std::span<const std::size_t> indices);

// Running statistics owned by a batch-norm layer.
struct BatchNormStats {
  Tensor running_mean;
  Tensor running_var;
  double momentum = 0.1;
  double epsilon = 1e-5;
};
// Per-column batch normalization of an N x D input. Training mode uses batch
// statistics and updates `stats`; evaluation mode uses the running values.
Var BatchNorm1d(Var x, Var gamma, Var beta, BatchNormStats& stats,
                bool training);

// Inverted dropout: kept entries are scaled by 1/(1-p). Identity when
// `training` is false or p == 0.
Var Dropout(Var x, double p, CounterRng& rng, bool training);

// Generic dispatch over the parameterless element-wise and reduction ops.
enum class OpKind {
  kMatMul,
  kAdd,
  kMultiply,
  kRelu,
  kTanh,
  kSigmoid,
  kSoftplus,
  kLog,
  kExp,
  kSum,
  kMean,
  kL2Norm,
  kConcatenate,
};
Var Forward(OpKind kind, std::span<const Var> inputs);

}  // namespace bvfl::ops

#endif  // BVFL_AUTODIFF_OPS_H_
