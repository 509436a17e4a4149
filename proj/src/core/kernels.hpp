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

#ifndef GINAS_CORE_KERNELS_HPP_
#define GINAS_CORE_KERNELS_HPP_

#include <cstdint>

#include "core/tensor.hpp"

// Raw numeric kernels behind the differentiable ops. No graph involvement.
namespace ginas::kernels {

struct ConvGeometry {
  int64_t batch = 0;
  int64_t in_channels = 0;
  int64_t in_h = 0;
  int64_t in_w = 0;
  int64_t out_channels = 0;
  int64_t kernel_h = 0;
  int64_t kernel_w = 0;
  int64_t out_h = 0;
  int64_t out_w = 0;
  int64_t stride = 1;
  int64_t padding = 0;
  int64_t dilation = 1;
  int64_t groups = 1;
};

// Validates shapes and derives the output size.
ConvGeometry MakeConvGeometry(const Shape& input, const Shape& weight,
                              int64_t stride, int64_t padding,
                              int64_t dilation, int64_t groups);

Tensor ConvForward(const Tensor& input, const Tensor& weight,
                   const ConvGeometry& geo);
Tensor ConvInputGrad(const Tensor& grad_out, const Tensor& weight,
                     const ConvGeometry& geo);
Tensor ConvWeightGrad(const Tensor& input, const Tensor& grad_out,
                      const ConvGeometry& geo);

// C = op(A) * op(B) for rank-2 tensors.
Tensor MatMul(const Tensor& a, const Tensor& b, bool trans_a, bool trans_b);

// out[n,c] = rows * x[n,c] * cols^T for every plane of an NCHW tensor.
Tensor SeparableMap(const Tensor& x, const Tensor& rows, const Tensor& cols);

}  // namespace ginas::kernels

#endif  // GINAS_CORE_KERNELS_HPP_
