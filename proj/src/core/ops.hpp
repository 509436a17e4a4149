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

#ifndef GINAS_CORE_OPS_HPP_
#define GINAS_CORE_OPS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "core/graph.hpp"
#include "core/tensor.hpp"

// Differentiable operations. Every backward is expressed with these same
// operations, so any result can be differentiated again.
namespace ginas::ad {

// Binary ops accept equal shapes, or a single-element operand that is
// broadcast to the other's shape.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);

Var neg(const Var& x);
Var square(const Var& x);
Var sqrt(const Var& x);
Var exp(const Var& x);
Var log(const Var& x);
Var abs(const Var& x);
Var sign(const Var& x);
Var sigmoid(const Var& x);
Var clamp_min(const Var& x, double lower);
// scale * x + shift
Var affine(const Var& x, double scale, double shift);
// Multiplies by a constant tensor of the same shape.
Var mul_const(const Var& x, Tensor factor);

Var sum(const Var& x);
Var mean(const Var& x);
Var expand(const Var& scalar, const Shape& shape);
Var reshape(const Var& x, Shape shape);

// Sums over `axes`, dropping them. Reducing every axis yields shape {1}.
Var sum_axes(const Var& x, std::vector<int> axes);
// Inverse of sum_axes: repeats v along `axes` to reach `target`.
Var broadcast_axes(const Var& v, const Shape& target, std::vector<int> axes);

// Per-channel ops; the channel axis is axis 1 of a rank >= 2 tensor.
Var add_channel_bias(const Var& x, const Var& bias);
Var channel_scale(const Var& x, const Var& scale);

Var matmul(const Var& a, const Var& b, bool trans_a = false,
           bool trans_b = false);
// x [B,D] * weight [D,K] + bias [K]
Var linear(const Var& x, const Var& weight, const Var& bias);

Var relu(const Var& x);
Var leaky_relu(const Var& x, double slope);
// One learnable slope per channel.
Var prelu(const Var& x, const Var& slope);

// Row-wise log-softmax of a [B,L] tensor, stabilized by row-max subtraction.
Var log_softmax(const Var& logits);
// Mean over the batch of -log softmax(logits)[true class].
Var softmax_cross_entropy(const Var& logits, const Tensor& one_hot);

struct Conv2dOptions {
  int64_t stride = 1;
  int64_t padding = 0;
  int64_t dilation = 1;
  int64_t groups = 1;
};

Var conv2d(const Var& input, const Var& weight,
           const std::optional<Var>& bias, const Conv2dOptions& opts);
// Vector-Jacobian products of conv2d. Each is bilinear in its operands, so the
// three functions are closed under differentiation.
Var conv2d_input_grad(const Var& grad_out, const Var& weight,
                      const Shape& input_shape, const Conv2dOptions& opts);
Var conv2d_weight_grad(const Var& input, const Var& grad_out,
                       const Shape& weight_shape, const Conv2dOptions& opts);

enum class Interp { kNearest, kBilinear, kBicubic };
enum class ResampleDirection { kUp, kDown };

// Exact 2x resize of an NCHW tensor (half-pixel centers, clamped borders,
// Catmull-Rom cubic). Linear in the input.
Var resample2x(const Var& input, ResampleDirection direction, Interp mode);
// out = rows * x * cols^T per plane, with constant interpolation matrices.
Var separable_map(const Var& input, const Tensor& rows, const Tensor& cols);
// 1-D interpolation matrix for a 2x resize of length `in`.
Tensor ResampleMatrix(int64_t in, ResampleDirection direction, Interp mode);

// -<a,b> / (|a| |b|) over the concatenation of the tensors in each list.
Var cosine_distance(std::span<const Var> a, std::span<const Var> b);

}  // namespace ginas::ad

#endif  // GINAS_CORE_OPS_HPP_
