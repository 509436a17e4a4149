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

#include "core/kernels.hpp"

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace ginas::kernels {
namespace {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

bool IsPointwise(const ConvGeometry& g) {
  return g.kernel_h == 1 && g.kernel_w == 1 && g.stride == 1 &&
         g.padding == 0;
}

// Unfolds one (batch, group) slice into a [cin_g*kh*kw, out_h*out_w] matrix.
void Im2Col(const double* x, const ConvGeometry& g, int64_t cin_g,
            double* col) {
  const int64_t out_hw = g.out_h * g.out_w;
  for (int64_t c = 0; c < cin_g; ++c) {
    const double* plane = x + c * g.in_h * g.in_w;
    for (int64_t i = 0; i < g.kernel_h; ++i) {
      for (int64_t j = 0; j < g.kernel_w; ++j) {
        double* row = col + ((c * g.kernel_h + i) * g.kernel_w + j) * out_hw;
        for (int64_t oh = 0; oh < g.out_h; ++oh) {
          const int64_t ih = oh * g.stride - g.padding + i * g.dilation;
          double* dst = row + oh * g.out_w;
          if (ih < 0 || ih >= g.in_h) {
            for (int64_t ow = 0; ow < g.out_w; ++ow) dst[ow] = 0.0;
            continue;
          }
          const double* src = plane + ih * g.in_w;
          for (int64_t ow = 0; ow < g.out_w; ++ow) {
            const int64_t iw = ow * g.stride - g.padding + j * g.dilation;
            dst[ow] = (iw >= 0 && iw < g.in_w) ? src[iw] : 0.0;
          }
        }
      }
    }
  }
}

// Adjoint of Im2Col: scatters-adds a column matrix back into the input slice.
void Col2ImAdd(const double* col, const ConvGeometry& g, int64_t cin_g,
               double* x) {
  const int64_t out_hw = g.out_h * g.out_w;
  for (int64_t c = 0; c < cin_g; ++c) {
    double* plane = x + c * g.in_h * g.in_w;
    for (int64_t i = 0; i < g.kernel_h; ++i) {
      for (int64_t j = 0; j < g.kernel_w; ++j) {
        const double* row =
            col + ((c * g.kernel_h + i) * g.kernel_w + j) * out_hw;
        for (int64_t oh = 0; oh < g.out_h; ++oh) {
          const int64_t ih = oh * g.stride - g.padding + i * g.dilation;
          if (ih < 0 || ih >= g.in_h) continue;
          const double* src = row + oh * g.out_w;
          double* dst = plane + ih * g.in_w;
          for (int64_t ow = 0; ow < g.out_w; ++ow) {
            const int64_t iw = ow * g.stride - g.padding + j * g.dilation;
            if (iw >= 0 && iw < g.in_w) dst[iw] += src[ow];
          }
        }
      }
    }
  }
}

}  // namespace

ConvGeometry MakeConvGeometry(const Shape& input, const Shape& weight,
                              int64_t stride, int64_t padding,
                              int64_t dilation, int64_t groups) {
  Require(input.size() == 4, ErrorCode::kShapeMismatch,
          "conv2d input must be NCHW, got " + ShapeToString(input));
  Require(weight.size() == 4, ErrorCode::kShapeMismatch,
          "conv2d weight must be rank 4, got " + ShapeToString(weight));
  Require(stride >= 1 && dilation >= 1 && padding >= 0 && groups >= 1,
          ErrorCode::kInvalidArgument,
          "conv2d requires stride >= 1, dilation >= 1, padding >= 0, "
          "groups >= 1");
  ConvGeometry g;
  g.batch = input[0];
  g.in_channels = input[1];
  g.in_h = input[2];
  g.in_w = input[3];
  g.out_channels = weight[0];
  g.kernel_h = weight[2];
  g.kernel_w = weight[3];
  g.stride = stride;
  g.padding = padding;
  g.dilation = dilation;
  g.groups = groups;
  Require(g.in_channels % groups == 0 && g.out_channels % groups == 0,
          ErrorCode::kShapeMismatch,
          "conv2d channels " + std::to_string(g.in_channels) + "->" +
              std::to_string(g.out_channels) + " not divisible by groups " +
              std::to_string(groups));
  Require(weight[1] * groups == g.in_channels, ErrorCode::kShapeMismatch,
          "conv2d weight " + ShapeToString(weight) +
              " does not match input channels " +
              std::to_string(g.in_channels) + " with groups " +
              std::to_string(groups));
  Require(g.kernel_h % 2 == 1 && g.kernel_w % 2 == 1,
          ErrorCode::kInvalidArgument, "conv2d kernel dims must be odd");
  const int64_t span_h = dilation * (g.kernel_h - 1) + 1;
  const int64_t span_w = dilation * (g.kernel_w - 1) + 1;
  Require(g.in_h + 2 * padding >= span_h && g.in_w + 2 * padding >= span_w,
          ErrorCode::kShapeMismatch, "conv2d kernel larger than padded input");
  g.out_h = (g.in_h + 2 * padding - span_h) / stride + 1;
  g.out_w = (g.in_w + 2 * padding - span_w) / stride + 1;
  return g;
}

Tensor ConvForward(const Tensor& input, const Tensor& weight,
                   const ConvGeometry& g) {
  Tensor out(Shape{g.batch, g.out_channels, g.out_h, g.out_w});
  const int64_t cin_g = g.in_channels / g.groups;
  const int64_t cout_g = g.out_channels / g.groups;
  const int64_t k = cin_g * g.kernel_h * g.kernel_w;
  const int64_t out_hw = g.out_h * g.out_w;
  const int64_t in_hw = g.in_h * g.in_w;
  const bool pointwise = IsPointwise(g);
  std::vector<double> col(pointwise ? 0 : static_cast<size_t>(k * out_hw));
  for (int64_t n = 0; n < g.batch; ++n) {
    for (int64_t grp = 0; grp < g.groups; ++grp) {
      const double* x = input.raw() + (n * g.in_channels + grp * cin_g) * in_hw;
      const double* colp = x;
      if (!pointwise) {
        Im2Col(x, g, cin_g, col.data());
        colp = col.data();
      }
      ConstMapMat w(weight.raw() + grp * cout_g * k, cout_g, k);
      ConstMapMat c(colp, k, out_hw);
      MapMat y(out.raw() + (n * g.out_channels + grp * cout_g) * out_hw,
               cout_g, out_hw);
      y.noalias() = w * c;
    }
  }
  return out;
}

Tensor ConvInputGrad(const Tensor& grad_out, const Tensor& weight,
                     const ConvGeometry& g) {
  Tensor gx(Shape{g.batch, g.in_channels, g.in_h, g.in_w});
  const int64_t cin_g = g.in_channels / g.groups;
  const int64_t cout_g = g.out_channels / g.groups;
  const int64_t k = cin_g * g.kernel_h * g.kernel_w;
  const int64_t out_hw = g.out_h * g.out_w;
  const int64_t in_hw = g.in_h * g.in_w;
  const bool pointwise = IsPointwise(g);
  std::vector<double> col(pointwise ? 0 : static_cast<size_t>(k * out_hw));
  for (int64_t n = 0; n < g.batch; ++n) {
    for (int64_t grp = 0; grp < g.groups; ++grp) {
      double* x = gx.raw() + (n * g.in_channels + grp * cin_g) * in_hw;
      ConstMapMat w(weight.raw() + grp * cout_g * k, cout_g, k);
      ConstMapMat gy(
          grad_out.raw() + (n * g.out_channels + grp * cout_g) * out_hw,
          cout_g, out_hw);
      if (pointwise) {
        MapMat dst(x, k, out_hw);
        dst.noalias() = w.transpose() * gy;
      } else {
        MapMat c(col.data(), k, out_hw);
        c.noalias() = w.transpose() * gy;
        Col2ImAdd(col.data(), g, cin_g, x);
      }
    }
  }
  return gx;
}

Tensor ConvWeightGrad(const Tensor& input, const Tensor& grad_out,
                      const ConvGeometry& g) {
  const int64_t cin_g = g.in_channels / g.groups;
  const int64_t cout_g = g.out_channels / g.groups;
  Tensor gw(Shape{g.out_channels, cin_g, g.kernel_h, g.kernel_w});
  const int64_t k = cin_g * g.kernel_h * g.kernel_w;
  const int64_t out_hw = g.out_h * g.out_w;
  const int64_t in_hw = g.in_h * g.in_w;
  const bool pointwise = IsPointwise(g);
  std::vector<double> col(pointwise ? 0 : static_cast<size_t>(k * out_hw));
  for (int64_t n = 0; n < g.batch; ++n) {
    for (int64_t grp = 0; grp < g.groups; ++grp) {
      const double* x = input.raw() + (n * g.in_channels + grp * cin_g) * in_hw;
      const double* colp = x;
      if (!pointwise) {
        Im2Col(x, g, cin_g, col.data());
        colp = col.data();
      }
      ConstMapMat c(colp, k, out_hw);
      ConstMapMat gy(
          grad_out.raw() + (n * g.out_channels + grp * cout_g) * out_hw,
          cout_g, out_hw);
      MapMat w(gw.raw() + grp * cout_g * k, cout_g, k);
      w.noalias() += gy * c.transpose();
    }
  }
  return gw;
}

Tensor MatMul(const Tensor& a, const Tensor& b, bool trans_a, bool trans_b) {
  Require(a.rank() == 2 && b.rank() == 2, ErrorCode::kShapeMismatch,
          "matmul requires rank-2 operands, got " + ShapeToString(a.shape()) +
              " and " + ShapeToString(b.shape()));
  const int64_t m = trans_a ? a.dim(1) : a.dim(0);
  const int64_t ka = trans_a ? a.dim(0) : a.dim(1);
  const int64_t kb = trans_b ? b.dim(1) : b.dim(0);
  const int64_t n = trans_b ? b.dim(0) : b.dim(1);
  Require(ka == kb, ErrorCode::kShapeMismatch,
          "matmul inner dims disagree: " + ShapeToString(a.shape()) + " and " +
              ShapeToString(b.shape()));
  Tensor out(Shape{m, n});
  ConstMapMat ma(a.raw(), a.dim(0), a.dim(1));
  ConstMapMat mb(b.raw(), b.dim(0), b.dim(1));
  MapMat c(out.raw(), m, n);
  if (!trans_a && !trans_b) {
    c.noalias() = ma * mb;
  } else if (trans_a && !trans_b) {
    c.noalias() = ma.transpose() * mb;
  } else if (!trans_a && trans_b) {
    c.noalias() = ma * mb.transpose();
  } else {
    c.noalias() = ma.transpose() * mb.transpose();
  }
  return out;
}

Tensor SeparableMap(const Tensor& x, const Tensor& rows, const Tensor& cols) {
  Require(x.rank() == 4, ErrorCode::kShapeMismatch,
          "resampling requires NCHW input, got " + ShapeToString(x.shape()));
  Require(rows.dim(1) == x.dim(2) && cols.dim(1) == x.dim(3),
          ErrorCode::kShapeMismatch,
          "resampling matrices do not match input " +
              ShapeToString(x.shape()));
  const int64_t planes = x.dim(0) * x.dim(1);
  const int64_t h = x.dim(2), w = x.dim(3);
  const int64_t oh = rows.dim(0), ow = cols.dim(0);
  Tensor out(Shape{x.dim(0), x.dim(1), oh, ow});
  ConstMapMat r(rows.raw(), oh, h);
  ConstMapMat c(cols.raw(), ow, w);
  RowMat tmp(oh, w);
  for (int64_t p = 0; p < planes; ++p) {
    ConstMapMat src(x.raw() + p * h * w, h, w);
    MapMat dst(out.raw() + p * oh * ow, oh, ow);
    tmp.noalias() = r * src;
    dst.noalias() = tmp * c.transpose();
  }
  return out;
}

}  // namespace ginas::kernels
