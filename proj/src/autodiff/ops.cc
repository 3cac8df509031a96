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

#include "bvfl/autodiff/ops.h"

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "bvfl/common/error.h"

namespace bvfl::ops {
namespace {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

Tape* TapeOf(Var a) {
  if (a.tape == nullptr) throw ContractError("Var is not attached to a tape");
  return a.tape;
}

Tape* TapeOf(Var a, Var b) {
  if (a.tape != b.tape) throw ContractError("inputs live on different tapes");
  return TapeOf(a);
}

void Require2d(const Tensor& t, const char* op) {
  if (t.ndim() != 2) {
    throw DimensionError(std::string(op) + " expects a 2-D tensor, got " +
                         ShapeToString(t.shape()));
  }
}

void RequireSameShape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.SameShape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         ShapeToString(a.shape()) + " vs " +
                         ShapeToString(b.shape()));
  }
}

Var Finish(Tape* tape, Tensor out, std::vector<Var> inputs, const char* op,
           Tape::BackwardFn fn) {
  CheckFinite(out, op);
  return tape->Record(std::move(out), std::move(inputs), std::move(fn));
}

double StableSigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double StableSoftplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// Element-wise op; `deriv(x, y)` is dy/dx at input x with output y.
template <class F, class D>
Var Unary(Var x, const char* op, F f, D deriv) {
  Tape* tape = TapeOf(x);
  const Tensor& in = x.value();
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  return Finish(tape, std::move(out), {x}, op, [deriv](BackwardContext& ctx) {
    auto gx = ctx.input_grad(0);
    if (gx.empty()) return;
    const Tensor& in = ctx.input(0);
    const Tensor& y = ctx.output();
    auto g = ctx.grad_out();
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * deriv(in[i], y[i]);
  });
}

}  // namespace

Var MatMul(Var a, Var b) {
  Tape* tape = TapeOf(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  Require2d(A, "matmul");
  Require2d(B, "matmul");
  if (A.cols() != B.rows()) {
    throw DimensionError("matmul: inner dimensions differ " +
                         ShapeToString(A.shape()) + " x " +
                         ShapeToString(B.shape()));
  }
  const auto n = static_cast<Eigen::Index>(A.rows());
  const auto k = static_cast<Eigen::Index>(A.cols());
  const auto m = static_cast<Eigen::Index>(B.cols());
  Tensor out({A.rows(), B.cols()});
  MutMap(out.mutable_data().data(), n, m).noalias() =
      ConstMap(A.data().data(), n, k) * ConstMap(B.data().data(), k, m);
  return Finish(tape, std::move(out), {a, b}, "matmul",
                [n, k, m](BackwardContext& ctx) {
                  ConstMap G(ctx.grad_out().data(), n, m);
                  if (auto ga = ctx.input_grad(0); !ga.empty()) {
                    MutMap(ga.data(), n, k).noalias() +=
                        G * ConstMap(ctx.input(1).data().data(), k, m)
                                .transpose();
                  }
                  if (auto gb = ctx.input_grad(1); !gb.empty()) {
                    MutMap(gb.data(), k, m).noalias() +=
                        ConstMap(ctx.input(0).data().data(), n, k)
                            .transpose() *
                        G;
                  }
                });
}

Var Add(Var a, Var b) {
  Tape* tape = TapeOf(a, b);
  RequireSameShape(a.value(), b.value(), "add");
  Tensor out = a.value();
  const Tensor& B = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += B[i];
  return Finish(tape, std::move(out), {a, b}, "add", [](BackwardContext& ctx) {
    auto g = ctx.grad_out();
    for (std::size_t k = 0; k < 2; ++k) {
      if (auto gi = ctx.input_grad(k); !gi.empty()) {
        for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
      }
    }
  });
}

Var Sub(Var a, Var b) {
  Tape* tape = TapeOf(a, b);
  RequireSameShape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  const Tensor& B = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= B[i];
  return Finish(tape, std::move(out), {a, b}, "sub", [](BackwardContext& ctx) {
    auto g = ctx.grad_out();
    if (auto ga = ctx.input_grad(0); !ga.empty()) {
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (auto gb = ctx.input_grad(1); !gb.empty()) {
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var Mul(Var a, Var b) {
  Tape* tape = TapeOf(a, b);
  RequireSameShape(a.value(), b.value(), "multiply");
  Tensor out = a.value();
  const Tensor& B = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= B[i];
  return Finish(tape, std::move(out), {a, b}, "multiply",
                [](BackwardContext& ctx) {
                  auto g = ctx.grad_out();
                  const Tensor& A = ctx.input(0);
                  const Tensor& B = ctx.input(1);
                  if (auto ga = ctx.input_grad(0); !ga.empty()) {
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * B[i];
                  }
                  if (auto gb = ctx.input_grad(1); !gb.empty()) {
                    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * A[i];
                  }
                });
}

Var Scale(Var a, double factor) {
  Tape* tape = TapeOf(a);
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factor;
  return Finish(tape, std::move(out), {a}, "scale",
                [factor](BackwardContext& ctx) {
                  auto g = ctx.grad_out();
                  if (auto ga = ctx.input_grad(0); !ga.empty()) {
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * factor;
                  }
                });
}

Var AddRow(Var x, Var b) {
  Tape* tape = TapeOf(x, b);
  const Tensor& X = x.value();
  Require2d(X, "add_row");
  const std::size_t d = X.cols();
  if (b.value().size() != d) {
    throw DimensionError("add_row: bias has " +
                         std::to_string(b.value().size()) +
                         " elements, rows have " + std::to_string(d));
  }
  Tensor out = X;
  const Tensor& B = b.value();
  for (std::size_t r = 0; r < X.rows(); ++r) {
    for (std::size_t c = 0; c < d; ++c) out.at(r, c) += B[c];
  }
  return Finish(tape, std::move(out), {x, b}, "add_row",
                [d](BackwardContext& ctx) {
                  auto g = ctx.grad_out();
                  if (auto gx = ctx.input_grad(0); !gx.empty()) {
                    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                  }
                  if (auto gb = ctx.input_grad(1); !gb.empty()) {
                    for (std::size_t i = 0; i < g.size(); ++i) gb[i % d] += g[i];
                  }
                });
}

Var ScaleRows(Var x, Var s) {
  Tape* tape = TapeOf(x, s);
  const Tensor& X = x.value();
  Require2d(X, "scale_rows");
  const std::size_t n = X.rows();
  const std::size_t d = X.cols();
  if (s.value().size() != n) {
    throw DimensionError("scale_rows: expected " + std::to_string(n) +
                         " scales, got " + std::to_string(s.value().size()));
  }
  Tensor out = X;
  const Tensor& S = s.value();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) out.at(r, c) *= S[r];
  }
  return Finish(tape, std::move(out), {x, s}, "scale_rows",
                [n, d](BackwardContext& ctx) {
                  auto g = ctx.grad_out();
                  const Tensor& X = ctx.input(0);
                  const Tensor& S = ctx.input(1);
                  if (auto gx = ctx.input_grad(0); !gx.empty()) {
                    for (std::size_t r = 0; r < n; ++r) {
                      for (std::size_t c = 0; c < d; ++c) {
                        gx[r * d + c] += g[r * d + c] * S[r];
                      }
                    }
                  }
                  if (auto gs = ctx.input_grad(1); !gs.empty()) {
                    for (std::size_t r = 0; r < n; ++r) {
                      double acc = 0.0;
                      for (std::size_t c = 0; c < d; ++c) {
                        acc += g[r * d + c] * X.at(r, c);
                      }
                      gs[r] += acc;
                    }
                  }
                });
}

Var Relu(Var x) {
  return Unary(
      x, "relu", [](double v) { return v > 0 ? v : 0.0; },
      [](double v, double) { return v > 0 ? 1.0 : 0.0; });
}

Var Tanh(Var x) {
  return Unary(
      x, "tanh", [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Var Sigmoid(Var x) {
  return Unary(x, "sigmoid", StableSigmoid,
               [](double, double y) { return y * (1.0 - y); });
}

Var Softplus(Var x) {
  return Unary(x, "softplus", StableSoftplus,
               [](double v, double) { return StableSigmoid(v); });
}

Var Log(Var x) {
  return Unary(
      x, "log", [](double v) { return std::log(v); },
      [](double v, double) { return 1.0 / v; });
}

Var Exp(Var x) {
  return Unary(
      x, "exp", [](double v) { return std::exp(v); },
      [](double, double y) { return y; });
}

Var Softmax(Var x, std::size_t axis) {
  Tape* tape = TapeOf(x);
  const Tensor& X = x.value();
  if (X.ndim() > 2) throw DimensionError("softmax expects 1-D or 2-D input");
  std::size_t rows = X.rows();
  std::size_t cols = X.cols();
  if (X.ndim() == 1) {
    if (axis != 0) throw DimensionError("softmax: axis out of range");
  } else if (axis > 1) {
    throw DimensionError("softmax: axis out of range");
  }
  // Iterate "lines" along the softmax axis: (count, length, stride, step).
  const bool along_rows = X.ndim() == 1 || axis == 1;
  const std::size_t lines = along_rows ? rows : cols;
  const std::size_t len = along_rows ? cols : rows;
  const std::size_t stride = along_rows ? 1 : cols;
  const std::size_t step = along_rows ? cols : 1;
  Tensor out(X.shape());
  for (std::size_t l = 0; l < lines; ++l) {
    const std::size_t base = l * step;
    double mx = X[base];
    for (std::size_t j = 1; j < len; ++j) mx = std::max(mx, X[base + j * stride]);
    double z = 0.0;
    for (std::size_t j = 0; j < len; ++j) {
      const double e = std::exp(X[base + j * stride] - mx);
      out[base + j * stride] = e;
      z += e;
    }
    for (std::size_t j = 0; j < len; ++j) out[base + j * stride] /= z;
  }
  return Finish(tape, std::move(out), {x}, "softmax",
                [lines, len, stride, step](BackwardContext& ctx) {
                  auto gx = ctx.input_grad(0);
                  if (gx.empty()) return;
                  auto g = ctx.grad_out();
                  const Tensor& y = ctx.output();
                  for (std::size_t l = 0; l < lines; ++l) {
                    const std::size_t base = l * step;
                    double dot = 0.0;
                    for (std::size_t j = 0; j < len; ++j) {
                      const std::size_t i = base + j * stride;
                      dot += g[i] * y[i];
                    }
                    for (std::size_t j = 0; j < len; ++j) {
                      const std::size_t i = base + j * stride;
                      gx[i] += y[i] * (g[i] - dot);
                    }
                  }
                });
}

Var Sum(Var x) {
  Tape* tape = TapeOf(x);
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  return Finish(tape, Tensor::Scalar(s), {x}, "sum", [](BackwardContext& ctx) {
    if (auto gx = ctx.input_grad(0); !gx.empty()) {
      const double g = ctx.grad_out()[0];
      for (double& v : gx) v += g;
    }
  });
}

Var Mean(Var x) {
  const double n = static_cast<double>(x.value().size());
  return Scale(Sum(x), 1.0 / n);
}

Var SumAxis(Var x, std::size_t axis) {
  Tape* tape = TapeOf(x);
  const Tensor& X = x.value();
  Require2d(X, "sum_axis");
  const std::size_t n = X.rows();
  const std::size_t d = X.cols();
  if (axis > 1) throw DimensionError("sum_axis: axis out of range");
  Tensor out(axis == 1 ? Shape{n, 1} : Shape{1, d});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) out[axis == 1 ? r : c] += X.at(r, c);
  }
  return Finish(tape, std::move(out), {x}, "sum_axis",
                [n, d, axis](BackwardContext& ctx) {
                  auto gx = ctx.input_grad(0);
                  if (gx.empty()) return;
                  auto g = ctx.grad_out();
                  for (std::size_t r = 0; r < n; ++r) {
                    for (std::size_t c = 0; c < d; ++c) {
                      gx[r * d + c] += g[axis == 1 ? r : c];
                    }
                  }
                });
}

Var RowL2Norm(Var x) {
  Tape* tape = TapeOf(x);
  const Tensor& X = x.value();
  const std::size_t n = X.rows();
  const std::size_t d = X.cols();
  Tensor out({n, 1});
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (double v : X.row(r)) s += v * v;
    out[r] = std::sqrt(s);
  }
  return Finish(tape, std::move(out), {x}, "l2_norm",
                [n, d](BackwardContext& ctx) {
                  auto gx = ctx.input_grad(0);
                  if (gx.empty()) return;
                  auto g = ctx.grad_out();
                  const Tensor& X = ctx.input(0);
                  const Tensor& y = ctx.output();
                  for (std::size_t r = 0; r < n; ++r) {
                    if (y[r] == 0.0) continue;
                    const double f = g[r] / y[r];
                    for (std::size_t c = 0; c < d; ++c) {
                      gx[r * d + c] += f * X[r * d + c];
                    }
                  }
                });
}

Var CosineRows(Var a, Var b) {
  Tape* tape = TapeOf(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  RequireSameShape(A, B, "cosine");
  const std::size_t n = A.rows();
  const std::size_t d = A.cols();
  Tensor out({n, 1});
  for (std::size_t r = 0; r < n; ++r) {
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      ab += A.at(r, c) * B.at(r, c);
      aa += A.at(r, c) * A.at(r, c);
      bb += B.at(r, c) * B.at(r, c);
    }
    out[r] = (aa == 0.0 || bb == 0.0) ? 0.0 : ab / std::sqrt(aa * bb);
  }
  return Finish(
      tape, std::move(out), {a, b}, "cosine", [n, d](BackwardContext& ctx) {
        auto g = ctx.grad_out();
        const Tensor& A = ctx.input(0);
        const Tensor& B = ctx.input(1);
        const Tensor& cos = ctx.output();
        auto ga = ctx.input_grad(0);
        auto gb = ctx.input_grad(1);
        for (std::size_t r = 0; r < n; ++r) {
          double aa = 0.0, bb = 0.0;
          for (std::size_t c = 0; c < d; ++c) {
            aa += A.at(r, c) * A.at(r, c);
            bb += B.at(r, c) * B.at(r, c);
          }
          if (aa == 0.0 || bb == 0.0) continue;
          const double na = std::sqrt(aa);
          const double nb = std::sqrt(bb);
          for (std::size_t c = 0; c < d; ++c) {
            const std::size_t i = r * d + c;
            if (!ga.empty()) {
              ga[i] += g[r] * (B[i] / (na * nb) - cos[r] * A[i] / aa);
            }
            if (!gb.empty()) {
              gb[i] += g[r] * (A[i] / (na * nb) - cos[r] * B[i] / bb);
            }
          }
        }
      });
}

Var ClipRowsL2(Var x, double bound, double guard) {
  Tape* tape = TapeOf(x);
  if (!(bound > 0)) throw PreconditionError("clip bound must be positive");
  const Tensor& X = x.value();
  const std::size_t n = X.rows();
  const std::size_t d = X.cols();
  Tensor out = X;
  std::vector<double> norms(n);
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (double v : X.row(r)) s += v * v;
    norms[r] = std::sqrt(s);
    const double factor = std::min(1.0, bound / (norms[r] + guard));
    for (double& v : out.mutable_row(r)) v *= factor;
  }
  return Finish(tape, std::move(out), {x}, "clip_l2",
                [n, d, bound, guard, norms = std::move(norms)](
                    BackwardContext& ctx) {
                  auto gx = ctx.input_grad(0);
                  if (gx.empty()) return;
                  auto g = ctx.grad_out();
                  const Tensor& X = ctx.input(0);
                  for (std::size_t r = 0; r < n; ++r) {
                    const double denom = norms[r] + guard;
                    const double ratio = bound / denom;
                    if (ratio >= 1.0 || norms[r] == 0.0) {
                      for (std::size_t c = 0; c < d; ++c) gx[r * d + c] += g[r * d + c];
                      continue;
                    }
                    double xg = 0.0;
                    for (std::size_t c = 0; c < d; ++c) xg += X[r * d + c] * g[r * d + c];
                    const double k = bound * xg / (denom * denom * norms[r]);
                    for (std::size_t c = 0; c < d; ++c) {
                      gx[r * d + c] += ratio * g[r * d + c] - k * X[r * d + c];
                    }
                  }
                });
}

Var ConcatCols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concatenate: no inputs");
  Tape* tape = TapeOf(parts[0]);
  const std::size_t n = parts[0].value().rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Var& p : parts) {
    TapeOf(parts[0], p);
    const Tensor& t = p.value();
    Require2d(t, "concatenate");
    if (t.rows() != n) throw DimensionError("concatenate: row counts differ");
    widths.push_back(t.cols());
    total += t.cols();
  }
  Tensor out({n, total});
  std::size_t off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& t = parts[k].value();
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < widths[k]; ++c) out.at(r, off + c) = t.at(r, c);
    }
    off += widths[k];
  }
  return Finish(tape, std::move(out), {parts.begin(), parts.end()},
                "concatenate", [n, total, widths](BackwardContext& ctx) {
                  auto g = ctx.grad_out();
                  std::size_t off = 0;
                  for (std::size_t k = 0; k < widths.size(); ++k) {
                    if (auto gk = ctx.input_grad(k); !gk.empty()) {
                      for (std::size_t r = 0; r < n; ++r) {
                        for (std::size_t c = 0; c < widths[k]; ++c) {
                          gk[r * widths[k] + c] += g[r * total + off + c];
                        }
                      }
                    }
                    off += widths[k];
                  }
                });
}

Var SliceCols(Var x, std::size_t begin, std::size_t end) {
  Tape* tape = TapeOf(x);
  const Tensor& X = x.value();
  Require2d(X, "slice_cols");
  if (begin >= end || end > X.cols()) {
    throw DimensionError("slice_cols: bad range");
  }
  const std::size_t n = X.rows();
  const std::size_t d = X.cols();
  const std::size_t w = end - begin;
  Tensor out({n, w});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < w; ++c) out.at(r, c) = X.at(r, begin + c);
  }
  return Finish(tape, std::move(out), {x}, "slice_cols",
                [n, d, w, begin](BackwardContext& ctx) {
                  auto gx = ctx.input_grad(0);
                  if (gx.empty()) return;
                  auto g = ctx.grad_out();
                  for (std::size_t r = 0; r < n; ++r) {
                    for (std::size_t c = 0; c < w; ++c) {
                      gx[r * d + begin + c] += g[r * w + c];
                    }
                  }
                });
}

Var EmbeddingLookup(Var table, std::span<const std::size_t> indices) {
  Tape* tape = TapeOf(table);
  const Tensor& T = table.value();
  Require2d(T, "embedding_lookup");
  const std::size_t vocab = T.rows();
  const std::size_t d = T.cols();
  if (indices.empty()) throw DimensionError("embedding_lookup: no indices");
  Tensor out({indices.size(), d});
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= vocab) {
      throw PreconditionError("embedding index " + std::to_string(indices[r]) +
                              " outside vocabulary of size " +
                              std::to_string(vocab));
    }
    for (std::size_t c = 0; c < d; ++c) out.at(r, c) = T.at(indices[r], c);
  }
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return Finish(tape, std::move(out), {table}, "embedding_lookup",
                [d, idx = std::move(idx)](BackwardContext& ctx) {
                  auto gt = ctx.input_grad(0);
                  if (gt.empty()) return;
                  auto g = ctx.grad_out();
                  for (std::size_t r = 0; r < idx.size(); ++r) {
                    for (std::size_t c = 0; c < d; ++c) {
                      gt[idx[r] * d + c] += g[r * d + c];
                    }
                  }
                });
}

Var BatchNorm1d(Var x, Var gamma, Var beta, BatchNormStats& stats,
                bool training) {
  Tape* tape = TapeOf(x, gamma);
  TapeOf(x, beta);
  const Tensor& X = x.value();
  Require2d(X, "batch_norm_1d");
  const std::size_t n = X.rows();
  const std::size_t d = X.cols();
  if (gamma.value().size() != d || beta.value().size() != d ||
      stats.running_mean.size() != d || stats.running_var.size() != d) {
    throw DimensionError("batch_norm_1d: parameter width mismatch");
  }
  std::vector<double> mean(d, 0.0), inv_std(d, 0.0);
  if (training) {
    for (std::size_t c = 0; c < d; ++c) {
      double m = 0.0;
      for (std::size_t r = 0; r < n; ++r) m += X.at(r, c);
      m /= static_cast<double>(n);
      double v = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const double e = X.at(r, c) - m;
        v += e * e;
      }
      const double biased = v / static_cast<double>(n);
      const double unbiased = n > 1 ? v / static_cast<double>(n - 1) : biased;
      mean[c] = m;
      inv_std[c] = 1.0 / std::sqrt(biased + stats.epsilon);
      stats.running_mean[c] =
          (1.0 - stats.momentum) * stats.running_mean[c] + stats.momentum * m;
      stats.running_var[c] = (1.0 - stats.momentum) * stats.running_var[c] +
                             stats.momentum * unbiased;
    }
  } else {
    for (std::size_t c = 0; c < d; ++c) {
      mean[c] = stats.running_mean[c];
      inv_std[c] = 1.0 / std::sqrt(stats.running_var[c] + stats.epsilon);
    }
  }
  const Tensor& G = gamma.value();
  const Tensor& B = beta.value();
  Tensor xhat({n, d});
  Tensor out({n, d});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      xhat.at(r, c) = (X.at(r, c) - mean[c]) * inv_std[c];
      out.at(r, c) = G[c] * xhat.at(r, c) + B[c];
    }
  }
  return Finish(
      tape, std::move(out), {x, gamma, beta}, "batch_norm_1d",
      [n, d, training, inv_std = std::move(inv_std),
       xhat = std::move(xhat)](BackwardContext& ctx) {
        auto g = ctx.grad_out();
        const Tensor& G = ctx.input(1);
        if (auto gg = ctx.input_grad(1); !gg.empty()) {
          for (std::size_t i = 0; i < g.size(); ++i) gg[i % d] += g[i] * xhat[i];
        }
        if (auto gb = ctx.input_grad(2); !gb.empty()) {
          for (std::size_t i = 0; i < g.size(); ++i) gb[i % d] += g[i];
        }
        auto gx = ctx.input_grad(0);
        if (gx.empty()) return;
        if (!training) {
          for (std::size_t i = 0; i < g.size(); ++i) {
            gx[i] += g[i] * G[i % d] * inv_std[i % d];
          }
          return;
        }
        const double nn = static_cast<double>(n);
        for (std::size_t c = 0; c < d; ++c) {
          double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
          for (std::size_t r = 0; r < n; ++r) {
            const double dxh = g[r * d + c] * G[c];
            sum_dxhat += dxh;
            sum_dxhat_xhat += dxh * xhat[r * d + c];
          }
          for (std::size_t r = 0; r < n; ++r) {
            const double dxh = g[r * d + c] * G[c];
            gx[r * d + c] += inv_std[c] / nn *
                             (nn * dxh - sum_dxhat -
                              xhat[r * d + c] * sum_dxhat_xhat);
          }
        }
      });
}

Var Dropout(Var x, double p, CounterRng& rng, bool training) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw PreconditionError("dropout probability must be in [0, 1)");
  }
  if (!training || p == 0.0) return x;
  Tape* tape = TapeOf(x);
  const Tensor& X = x.value();
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> mask(X.size());
  Tensor out(X.shape());
  for (std::size_t i = 0; i < X.size(); ++i) {
    mask[i] = rng.Uniform() >= p ? keep_scale : 0.0;
    out[i] = X[i] * mask[i];
  }
  return Finish(tape, std::move(out), {x}, "dropout",
                [mask = std::move(mask)](BackwardContext& ctx) {
                  auto gx = ctx.input_grad(0);
                  if (gx.empty()) return;
                  auto g = ctx.grad_out();
                  for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * mask[i];
                });
}

Var Forward(OpKind kind, std::span<const Var> inputs) {
  auto need = [&](std::size_t n) {
    if (inputs.size() != n) {
      throw DimensionError("op expects " + std::to_string(n) + " inputs, got " +
                           std::to_string(inputs.size()));
    }
  };
  switch (kind) {
    case OpKind::kMatMul: need(2); return MatMul(inputs[0], inputs[1]);
    case OpKind::kAdd: need(2); return Add(inputs[0], inputs[1]);
    case OpKind::kMultiply: need(2); return Mul(inputs[0], inputs[1]);
    case OpKind::kRelu: need(1); return Relu(inputs[0]);
    case OpKind::kTanh: need(1); return Tanh(inputs[0]);
    case OpKind::kSigmoid: need(1); return Sigmoid(inputs[0]);
    case OpKind::kSoftplus: need(1); return Softplus(inputs[0]);
    case OpKind::kLog: need(1); return Log(inputs[0]);
    case OpKind::kExp: need(1); return Exp(inputs[0]);
    case OpKind::kSum: need(1); return Sum(inputs[0]);
    case OpKind::kMean: need(1); return Mean(inputs[0]);
    case OpKind::kL2Norm: need(1); return RowL2Norm(inputs[0]);
    case OpKind::kConcatenate: return ConcatCols(inputs);
  }
  throw ContractError("unknown op kind");
}

}  // namespace bvfl::ops
