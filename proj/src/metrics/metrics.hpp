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

#ifndef GINAS_METRICS_METRICS_HPP_
#define GINAS_METRICS_METRICS_HPP_

#include <cstdint>
#include <vector>

#include "core/tensor.hpp"

namespace ginas {

inline constexpr double kPsnrCap = 100.0;

// 10 log10(1 / MSE) for images in [0, 1]; kPsnrCap when identical.
double Psnr(const Tensor& a, const Tensor& b);

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

// Mean local SSIM over window positions fully inside the image, per channel
// then averaged. Images are [C, H, W] or [1, C, H, W].
double Ssim(const Tensor& a, const Tensor& b, const SsimOptions& opts = {});

// Image n of an NCHW batch as [C, H, W].
Tensor BatchImage(const Tensor& batch, int64_t n);

inline constexpr int64_t kExhaustiveAlignMax = 8;

// perm[i] = index of the ground-truth image matched to reconstruction i,
// maximizing mean PSNR. Exhaustive up to kExhaustiveAlignMax, greedy
// best-pair-first above.
std::vector<int> BatchAlign(const Tensor& reconstructed, const Tensor& truth);
std::vector<int> BatchAlignGreedy(const Tensor& reconstructed, const Tensor& truth);

struct MetricReport {
  std::vector<double> psnr;
  std::vector<double> ssim;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  std::vector<int> permutation;
};

MetricReport EvaluateBatch(const Tensor& reconstructed, const Tensor& truth);

}  // namespace ginas

#endif  // GINAS_METRICS_METRICS_HPP_
