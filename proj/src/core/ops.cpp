// Copyright 2026 The ginas Authors.
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

#include "core/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "core/error.hpp"
#include "core/kernels.hpp"

namespace ginas::ad {
namespace {

Var Emit(const char* op, Tensor value, std::vector<Var> inputs,
         BackwardFn backward) {
  Graph& g = inputs.front().graph();
  return g.record(op, std::move(value), std::move(inputs),
                  std::move(backward));
}

template <typename F>
Tensor Map(const Tensor& x, F f) {
  Tensor out(x.shape());
  const double* src = x.raw();
  double* dst = out.raw();
  for (int64_t i = 0; i < x.numel(); ++i) dst[i] = f(src[i]);
  return out;
}

template <typename F>
Tensor Zip(const Tensor& a, const Tensor& b, F f) {
  Tensor out(a.shape());
  const double* pa = a.raw();
  const double* pb = b.raw();
  double* dst = out.raw();
  for (int64_t i = 0; i < a.numel(); ++i) dst[i] = f(pa[i], pb[i]);
  return out;
}

std::pair<Var, Var> Align(const Var& a, const Var& b, const char* op) {
  if (a.shape() == b.shape()) return {a, b};
  if (a.numel() == 1) return {expand(a, b.shape()), b};
  if (b.numel() == 1) return {a, expand(b, a.shape())};
  Fail(ErrorCode::kShapeMismatch, std::string(op) + ": shapes " +
                                      ShapeToString(a.shape()) + " and " +
                                      ShapeToString(b.shape()) +
                                      " are not broadcastable");
}

// For each flat index of `in`, the flat index of the reduced tensor.
std::vector<int64_t> ReduceIndex(const Shape& in, const std::vector<int>& axes,
                                 Shape* reduced_shape) {
  const int rank = static_cast<int>(in.size());
  std::vector<bool> reduced(in.size(), false);
  for (int a : axes) {
    Require(a >= 0 && a < rank, ErrorCode::kOutOfRange,
            "reduction axis " + std::to_string(a) + " out of range for " +
                ShapeToString(in));
    reduced[static_cast<size_t>(a)] = true;
  }
  Shape out;
  for (int d = 0; d < rank; ++d) {
    if (!reduced[static_cast<size_t>(d)]) out.push_back(in[static_cast<size_t>(d)]);
  }
  if (out.empty()) out.push_back(1);
  *reduced_shape = out;

  // Stride of each input dim within the reduced tensor (0 when reduced).
  std::vector<int64_t> stride(in.size(), 0);
  int64_t s = 1;
  for (int d = rank - 1; d >= 0; --d) {
    if (!reduced[static_cast<size_t>(d)]) {
      stride[static_cast<size_t>(d)] = s;
      s *= in[static_cast<size_t>(d)];
    }
  }
  const int64_t n = NumElements(in);
  std::vector<int64_t> map(static_cast<size_t>(n));
  std::vector<int64_t> idx(in.size(), 0);
  int64_t off = 0;
  for (int64_t i = 0; i < n; ++i) {
    map[static_cast<size_t>(i)] = off;
    for (int d = rank - 1; d >= 0; --d) {
      const size_t du = static_cast<size_t>(d);
      if (++idx[du] < in[du]) {
        off += stride[du];
        break;
      }
      off -= stride[du] * (in[du] - 1);
      idx[du] = 0;
    }
  }
  return map;
}

std::vector<int> AllAxesExcept(int64_t rank, int keep) {
  std::vector<int> axes;
  for (int d = 0; d < rank; ++d) {
    if (d != keep) axes.push_back(d);
  }
  return axes;
}

Tensor Transpose2D(const Tensor& m) {
  Tensor t(Shape{m.dim(1), m.dim(0)});
  for (int64_t i = 0; i < m.dim(0); ++i) {
    for (int64_t j = 0; j < m.dim(1); ++j) {
      t[j * m.dim(0) + i] = m[i * m.dim(1) + j];
    }
  }
  return t;
}

double CubicWeight(double x) {
  constexpr double a = -0.5;
  x = std::fabs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

}  // namespace

Var add(const Var& a0, const Var& b0) {
  auto [a, b] = Align(a0, b0, "add");
  return Emit("add", Zip(a.value(), b.value(), [](double x, double y) { return x + y; }),
              {a, b}, [](const BackwardArgs& args) {
                return std::vector<Var>{args.grad_output, args.grad_output};
              });
}

Var sub(const Var& a0, const Var& b0) {
  auto [a, b] = Align(a0, b0, "sub");
  return Emit("sub", Zip(a.value(), b.value(), [](double x, double y) { return x - y; }),
              {a, b}, [](const BackwardArgs& args) {
                Var gb;
                if (args.needs[1]) gb = neg(args.grad_output);
                return std::vector<Var>{args.grad_output, gb};
              });
}

Var mul(const Var& a0, const Var& b0) {
  auto [a, b] = Align(a0, b0, "mul");
  return Emit("mul", Zip(a.value(), b.value(), [](double x, double y) { return x * y; }),
              {a, b}, [](const BackwardArgs& args) {
                std::vector<Var> out(2);
                if (args.needs[0]) out[0] = mul(args.grad_output, args.inputs[1]);
                if (args.needs[1]) out[1] = mul(args.grad_output, args.inputs[0]);
                return out;
              });
}

Var div(const Var& a0, const Var& b0) {
  auto [a, b] = Align(a0, b0, "div");
  return Emit("div", Zip(a.value(), b.value(), [](double x, double y) { return x / y; }),
              {a, b}, [](const BackwardArgs& args) {
                std::vector<Var> out(2);
                if (args.needs[0]) out[0] = div(args.grad_output, args.inputs[1]);
                if (args.needs[1]) {
                  out[1] = neg(div(mul(args.grad_output, args.output),
                                   args.inputs[1]));
                }
                return out;
              });
}

Var neg(const Var& x) {
  return Emit("neg", Map(x.value(), [](double v) { return -v; }), {x},
              [](const BackwardArgs& args) {
                return std::vector<Var>{neg(args.grad_output)};
              });
}

Var square(const Var& x) {
  return Emit("square", Map(x.value(), [](double v) { return v * v; }), {x},
              [](const BackwardArgs& args) {
                return std::vector<Var>{
                    mul(args.grad_output, affine(args.inputs[0], 2.0, 0.0))};
              });
}

Var sqrt(const Var& x) {
  for (double v : x.value().data()) {
    Require(!(v < 0.0), ErrorCode::kDomain, "sqrt of negative value");
  }
  return Emit("sqrt", Map(x.value(), [](double v) { return std::sqrt(v); }),
              {x}, [](const BackwardArgs& args) {
                return std::vector<Var>{
                    div(args.grad_output, affine(args.output, 2.0, 0.0))};
              });
}

Var exp(const Var& x) {
  return Emit("exp", Map(x.value(), [](double v) { return std::exp(v); }), {x},
              [](const BackwardArgs& args) {
                return std::vector<Var>{mul(args.grad_output, args.output)};
              });
}

Var log(const Var& x) {
  for (double v : x.value().data()) {
    Require(!(v <= 0.0), ErrorCode::kDomain, "log of non-positive value");
  }
  return Emit("log", Map(x.value(), [](double v) { return std::log(v); }), {x},
              [](const BackwardArgs& args) {
                return std::vector<Var>{div(args.grad_output, args.inputs[0])};
              });
}

Var abs(const Var& x) {
  return Emit("abs", Map(x.value(), [](double v) { return std::fabs(v); }),
              {x}, [](const BackwardArgs& args) {
                Tensor s = Map(args.inputs[0].value(), [](double v) {
                  return static_cast<double>((v > 0) - (v < 0));
                });
                return std::vector<Var>{mul_const(args.grad_output, std::move(s))};
              });
}

Var sign(const Var& x) {
  // Piecewise constant: the gradient is zero wherever it exists.
  return Emit("sign", Map(x.value(), [](double v) {
                return static_cast<double>((v > 0) - (v < 0));
              }),
              {x}, [](const BackwardArgs& args) {
                return std::vector<Var>{args.output.graph().constant(
                    Tensor(args.inputs[0].shape(), 0.0))};
              });
}

Var sigmoid(const Var& x) {
  return Emit("sigmoid", Map(x.value(), [](double v) {
                return v >= 0 ? 1.0 / (1.0 + std::exp(-v))
                              : std::exp(v) / (1.0 + std::exp(v));
              }),
              {x}, [](const BackwardArgs& args) {
                const Var& y = args.output;
                return std::vector<Var>{
                    mul(args.grad_output, mul(y, affine(y, -1.0, 1.0)))};
              });
}

Var clamp_min(const Var& x, double lower) {
  return Emit("clamp_min",
              Map(x.value(), [lower](double v) { return std::max(v, lower); }),
              {x}, [lower](const BackwardArgs& args) {
                Tensor mask = Map(args.inputs[0].value(), [lower](double v) {
                  return v > lower ? 1.0 : 0.0;
                });
                return std::vector<Var>{mul_const(args.grad_output, std::move(mask))};
              });
}

Var affine(const Var& x, double scale, double shift) {
  return Emit("affine",
              Map(x.value(), [scale, shift](double v) { return scale * v + shift; }),
              {x}, [scale](const BackwardArgs& args) {
                return std::vector<Var>{affine(args.grad_output, scale, 0.0)};
              });
}

Var mul_const(const Var& x, Tensor factor) {
  Require(factor.shape() == x.shape(), ErrorCode::kShapeMismatch,
          "mul_const: factor " + ShapeToString(factor.shape()) +
              " does not match " + ShapeToString(x.shape()));
  Tensor value = Zip(x.value(), factor, [](double a, double b) { return a * b; });
  return Emit("mul_const", std::move(value), {x},
              [factor = std::move(factor)](const BackwardArgs& args) {
                return std::vector<Var>{mul_const(args.grad_output, factor)};
              });
}

Var sum(const Var& x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  return Emit("sum", Tensor::Scalar(s), {x}, [](const BackwardArgs& args) {
    return std::vector<Var>{expand(args.grad_output, args.inputs[0].shape())};
  });
}

Var mean(const Var& x) {
  return affine(sum(x), 1.0 / static_cast<double>(x.numel()), 0.0);
}

Var expand(const Var& scalar, const Shape& shape) {
  Require(scalar.numel() == 1, ErrorCode::kShapeMismatch,
          "expand requires a single-element tensor");
  return Emit("expand", Tensor(shape, scalar.value()[0]), {scalar},
              [](const BackwardArgs& args) {
                Var s = sum(args.grad_output);
                if (s.shape() != args.inputs[0].shape()) {
                  s = reshape(s, args.inputs[0].shape());
                }
                return std::vector<Var>{s};
              });
}

Var reshape(const Var& x, Shape shape) {
  return Emit("reshape", x.value().reshaped(std::move(shape)), {x},
              [](const BackwardArgs& args) {
                return std::vector<Var>{
                    reshape(args.grad_output, args.inputs[0].shape())};
              });
}

Var sum_axes(const Var& x, std::vector<int> axes) {
  Shape out_shape;
  const std::vector<int64_t> map = ReduceIndex(x.shape(), axes, &out_shape);
  Tensor out(out_shape);
  const double* src = x.value().raw();
  for (size_t i = 0; i < map.size(); ++i) out[map[i]] += src[i];
  return Emit("sum_axes", std::move(out), {x},
              [axes = std::move(axes)](const BackwardArgs& args) {
                return std::vector<Var>{broadcast_axes(
                    args.grad_output, args.inputs[0].shape(), axes)};
              });
}

Var broadcast_axes(const Var& v, const Shape& target, std::vector<int> axes) {
  Shape reduced;
  const std::vector<int64_t> map = ReduceIndex(target, axes, &reduced);
  Require(reduced == v.shape(), ErrorCode::kShapeMismatch,
          "broadcast_axes: " + ShapeToString(v.shape()) +
              " cannot broadcast to " + ShapeToString(target));
  Tensor out(target);
  const double* src = v.value().raw();
  for (size_t i = 0; i < map.size(); ++i) out[static_cast<int64_t>(i)] = src[map[i]];
  return Emit("broadcast_axes", std::move(out), {v},
              [axes = std::move(axes)](const BackwardArgs& args) {
                return std::vector<Var>{sum_axes(args.grad_output, axes)};
              });
}

Var add_channel_bias(const Var& x, const Var& bias) {
  Require(x.value().rank() >= 2 && bias.value().rank() == 1 &&
              bias.shape()[0] == x.shape()[1],
          ErrorCode::kShapeMismatch,
          "bias " + ShapeToString(bias.shape()) + " does not match channels of " +
              ShapeToString(x.shape()));
  return add(x, broadcast_axes(bias, x.shape(), AllAxesExcept(x.value().rank(), 1)));
}

Var channel_scale(const Var& x, const Var& scale) {
  Require(x.value().rank() >= 2 && scale.value().rank() == 1 &&
              scale.shape()[0] == x.shape()[1],
          ErrorCode::kShapeMismatch,
          "channel scale " + ShapeToString(scale.shape()) +
              " does not match " + ShapeToString(x.shape()));
  return mul(x, broadcast_axes(scale, x.shape(), AllAxesExcept(x.value().rank(), 1)));
}

Var matmul(const Var& a, const Var& b, bool trans_a, bool trans_b) {
  return Emit("matmul", kernels::MatMul(a.value(), b.value(), trans_a, trans_b),
              {a, b}, [trans_a, trans_b](const BackwardArgs& args) {
                const Var& g = args.grad_output;
                const Var& a = args.inputs[0];
                const Var& b = args.inputs[1];
                std::vector<Var> out(2);
                if (args.needs[0]) {
                  out[0] = trans_a ? matmul(b, g, trans_b, true)
                                   : matmul(g, b, false, !trans_b);
                }
                if (args.needs[1]) {
                  out[1] = trans_b ? matmul(g, a, true, trans_a)
                                   : matmul(a, g, !trans_a, false);
                }
                return out;
              });
}

Var linear(const Var& x, const Var& weight, const Var& bias) {
  return add_channel_bias(matmul(x, weight), bias);
}

Var relu(const Var& x) {
  return mul_const(x, Map(x.value(), [](double v) { return v > 0 ? 1.0 : 0.0; }));
}

Var leaky_relu(const Var& x, double slope) {
  return mul_const(x, Map(x.value(), [slope](double v) { return v > 0 ? 1.0 : slope; }));
}

Var prelu(const Var& x, const Var& slope) {
  Tensor negative = Map(x.value(), [](double v) { return v > 0 ? 0.0 : 1.0; });
  return add(relu(x), channel_scale(mul_const(x, std::move(negative)), slope));
}

Var log_softmax(const Var& logits) {
  const Tensor& x = logits.value();
  Require(x.rank() == 2, ErrorCode::kShapeMismatch,
          "log_softmax expects [B,L], got " + ShapeToString(x.shape()));
  const int64_t rows = x.dim(0), cols = x.dim(1);
  Tensor out(x.shape());
  for (int64_t r = 0; r < rows; ++r) {
    const double* src = x.raw() + r * cols;
    const double m = *std::max_element(src, src + cols);
    double s = 0.0;
    for (int64_t c = 0; c < cols; ++c) s += std::exp(src[c] - m);
    const double lse = m + std::log(s);
    for (int64_t c = 0; c < cols; ++c) out[r * cols + c] = src[c] - lse;
  }
  return Emit("log_softmax", std::move(out), {logits},
              [](const BackwardArgs& args) {
                const Var& g = args.grad_output;
                Var row_total = broadcast_axes(sum_axes(g, {1}), g.shape(), {1});
                return std::vector<Var>{sub(g, mul(exp(args.output), row_total))};
              });
}

Var softmax_cross_entropy(const Var& logits, const Tensor& one_hot) {
  Require(one_hot.shape() == logits.shape() && one_hot.rank() == 2,
          ErrorCode::kShapeMismatch,
          "labels " + ShapeToString(one_hot.shape()) + " do not match logits " +
              ShapeToString(logits.shape()));
  const int64_t rows = one_hot.dim(0), cols = one_hot.dim(1);
  for (int64_t r = 0; r < rows; ++r) {
    double total = 0.0;
    int hot = 0;
    for (int64_t c = 0; c < cols; ++c) {
      const double v = one_hot[r * cols + c];
      total += v;
      if (std::fabs(v - 1.0) <= 1e-9) {
        ++hot;
      } else {
        Require(std::fabs(v) <= 1e-9, ErrorCode::kInvalidArgument,
                "label row " + std::to_string(r) + " is not one-hot");
      }
    }
    Require(hot == 1 && std::fabs(total - 1.0) <= 1e-9,
            ErrorCode::kInvalidArgument,
            "label row " + std::to_string(r) + " is not one-hot");
  }
  Var picked = sum(mul_const(log_softmax(logits), one_hot));
  return affine(picked, -1.0 / static_cast<double>(rows), 0.0);
}

Var conv2d(const Var& input, const Var& weight, const std::optional<Var>& bias,
           const Conv2dOptions& opts) {
  const kernels::ConvGeometry geo = kernels::MakeConvGeometry(
      input.shape(), weight.shape(), opts.stride, opts.padding, opts.dilation,
      opts.groups);
  Var y = Emit("conv2d", kernels::ConvForward(input.value(), weight.value(), geo),
               {input, weight}, [opts](const BackwardArgs& args) {
                 const Var& g = args.grad_output;
                 const Var& x = args.inputs[0];
                 const Var& w = args.inputs[1];
                 std::vector<Var> out(2);
                 if (args.needs[0]) out[0] = conv2d_input_grad(g, w, x.shape(), opts);
                 if (args.needs[1]) out[1] = conv2d_weight_grad(x, g, w.shape(), opts);
                 return out;
               });
  if (bias) y = add_channel_bias(y, *bias);
  return y;
}

Var conv2d_input_grad(const Var& grad_out, const Var& weight,
                      const Shape& input_shape, const Conv2dOptions& opts) {
  const kernels::ConvGeometry geo = kernels::MakeConvGeometry(
      input_shape, weight.shape(), opts.stride, opts.padding, opts.dilation,
      opts.groups);
  Require(grad_out.shape() == Shape({geo.batch, geo.out_channels, geo.out_h, geo.out_w}),
          ErrorCode::kShapeMismatch,
          "conv2d_input_grad: output gradient " + ShapeToString(grad_out.shape()) +
              " does not match geometry");
  return Emit("conv2d_input_grad",
              kernels::ConvInputGrad(grad_out.value(), weight.value(), geo),
              {grad_out, weight}, [opts](const BackwardArgs& args) {
                const Var& up = args.grad_output;  // shaped like the conv input
                const Var& gy = args.inputs[0];
                const Var& w = args.inputs[1];
                std::vector<Var> out(2);
                if (args.needs[0]) out[0] = conv2d(up, w, std::nullopt, opts);
                if (args.needs[1]) out[1] = conv2d_weight_grad(up, gy, w.shape(), opts);
                return out;
              });
}

Var conv2d_weight_grad(const Var& input, const Var& grad_out,
                       const Shape& weight_shape, const Conv2dOptions& opts) {
  const kernels::ConvGeometry geo = kernels::MakeConvGeometry(
      input.shape(), weight_shape, opts.stride, opts.padding, opts.dilation,
      opts.groups);
  Require(grad_out.shape() == Shape({geo.batch, geo.out_channels, geo.out_h, geo.out_w}),
          ErrorCode::kShapeMismatch,
          "conv2d_weight_grad: output gradient " + ShapeToString(grad_out.shape()) +
              " does not match geometry");
  return Emit("conv2d_weight_grad",
              kernels::ConvWeightGrad(input.value(), grad_out.value(), geo),
              {input, grad_out}, [opts](const BackwardArgs& args) {
                const Var& up = args.grad_output;  // shaped like the weight
                const Var& x = args.inputs[0];
                const Var& gy = args.inputs[1];
                std::vector<Var> out(2);
                if (args.needs[0]) out[0] = conv2d_input_grad(gy, up, x.shape(), opts);
                if (args.needs[1]) out[1] = conv2d(x, up, std::nullopt, opts);
                return out;
              });
}

Tensor ResampleMatrix(int64_t in, ResampleDirection direction, Interp mode) {
  Require(in >= 1, ErrorCode::kInvalidArgument, "resample of empty axis");
  if (direction == ResampleDirection::kDown) {
    Require(in % 2 == 0, ErrorCode::kShapeMismatch,
            "2x downsampling requires even spatial dims, got " + std::to_string(in));
  }
  const int64_t out = direction == ResampleDirection::kUp ? in * 2 : in / 2;
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  Tensor m(Shape{out, in});
  for (int64_t i = 0; i < out; ++i) {
    double* row = m.raw() + i * in;
    switch (mode) {
      case Interp::kNearest: {
        const int64_t src = std::min<int64_t>(
            static_cast<int64_t>(std::floor(static_cast<double>(i) * scale)), in - 1);
        row[src] = 1.0;
        break;
      }
      case Interp::kBilinear: {
        double src = (static_cast<double>(i) + 0.5) * scale - 0.5;
        if (src < 0) src = 0;
        const int64_t i0 = std::min<int64_t>(static_cast<int64_t>(src), in - 1);
        const int64_t i1 = std::min<int64_t>(i0 + 1, in - 1);
        const double lambda = src - static_cast<double>(i0);
        row[i0] += 1.0 - lambda;
        row[i1] += lambda;
        break;
      }
      case Interp::kBicubic: {
        const double src = (static_cast<double>(i) + 0.5) * scale - 0.5;
        const int64_t i0 = static_cast<int64_t>(std::floor(src));
        const double t = src - static_cast<double>(i0);
        for (int64_t k = -1; k <= 2; ++k) {
          const int64_t idx = std::clamp<int64_t>(i0 + k, 0, in - 1);
          row[idx] += CubicWeight(t - static_cast<double>(k));
        }
        break;
      }
    }
  }
  return m;
}

Var separable_map(const Var& input, const Tensor& rows, const Tensor& cols) {
  return Emit("separable_map", kernels::SeparableMap(input.value(), rows, cols),
              {input}, [rows_t = Transpose2D(rows),
                        cols_t = Transpose2D(cols)](const BackwardArgs& args) {
                return std::vector<Var>{
                    separable_map(args.grad_output, rows_t, cols_t)};
              });
}

Var resample2x(const Var& input, ResampleDirection direction, Interp mode) {
  Require(input.value().rank() == 4, ErrorCode::kShapeMismatch,
          "resample2x expects NCHW, got " + ShapeToString(input.shape()));
  return separable_map(input, ResampleMatrix(input.shape()[2], direction, mode),
                       ResampleMatrix(input.shape()[3], direction, mode));
}

Var cosine_distance(std::span<const Var> a, std::span<const Var> b) {
  Require(!a.empty() && a.size() == b.size(), ErrorCode::kShapeMismatch,
          "cosine_distance needs two non-empty lists of equal length");
  Var dot, na, nb;
  for (size_t i = 0; i < a.size(); ++i) {
    Require(a[i].shape() == b[i].shape(), ErrorCode::kShapeMismatch,
            "cosine_distance: entry " + std::to_string(i) + " shapes " +
                ShapeToString(a[i].shape()) + " vs " + ShapeToString(b[i].shape()));
    Var d = sum(mul(a[i], b[i]));
    Var sa = sum(square(a[i]));
    Var sb = sum(square(b[i]));
    dot = dot.valid() ? add(dot, d) : d;
    na = na.valid() ? add(na, sa) : sa;
    nb = nb.valid() ? add(nb, sb) : sb;
  }
  constexpr double kEps = 1e-12;
  // NaN norms pass through so callers see a non-finite result.
  Require(!(std::sqrt(na.value()[0]) <= kEps) && !(std::sqrt(nb.value()[0]) <= kEps),
          ErrorCode::kDomain, "cosine_distance of a zero-norm vector");
  Var denom = clamp_min(mul(sqrt(na), sqrt(nb)), kEps);
  return neg(div(dot, denom));
}

}  // namespace ginas::ad
