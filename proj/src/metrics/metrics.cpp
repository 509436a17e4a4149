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

#include "metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/error.hpp"

namespace ginas {
namespace {

std::vector<std::vector<double>> PsnrTable(const Tensor& rec, const Tensor& truth) {
  Require(rec.rank() == 4 && rec.shape() == truth.shape(), ErrorCode::kShapeMismatch,
          "batch alignment needs equal NCHW batches, got " + ShapeToString(rec.shape()) +
              " and " + ShapeToString(truth.shape()));
  const int64_t b = rec.dim(0);
  std::vector<std::vector<double>> table(static_cast<size_t>(b), std::vector<double>(static_cast<size_t>(b)));
  for (int64_t i = 0; i < b; ++i)
    for (int64_t j = 0; j < b; ++j)
      table[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          Psnr(BatchImage(rec, i), BatchImage(truth, j));
  return table;
}

std::vector<double> GaussianWindow(int size, double sigma) {
  std::vector<double> w(static_cast<size_t>(size));
  const double c = (size - 1) / 2.0;
  for (int i = 0; i < size; ++i) w[static_cast<size_t>(i)] = std::exp(-(i - c) * (i - c) / (2 * sigma * sigma));
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= s;
  return w;
}

// Valid-mode separable filter of one H x W plane.
std::vector<double> Filter(const double* x, int64_t h, int64_t w, const std::vector<double>& k) {
  const int64_t n = static_cast<int64_t>(k.size());
  const int64_t oh = h - n + 1, ow = w - n + 1;
  std::vector<double> rows(static_cast<size_t>(h * ow), 0.0);
  for (int64_t y = 0; y < h; ++y)
    for (int64_t xo = 0; xo < ow; ++xo) {
      double s = 0;
      for (int64_t i = 0; i < n; ++i) s += k[static_cast<size_t>(i)] * x[y * w + xo + i];
      rows[static_cast<size_t>(y * ow + xo)] = s;
    }
  std::vector<double> out(static_cast<size_t>(oh * ow), 0.0);
  for (int64_t yo = 0; yo < oh; ++yo)
    for (int64_t xo = 0; xo < ow; ++xo) {
      double s = 0;
      for (int64_t i = 0; i < n; ++i) s += k[static_cast<size_t>(i)] * rows[static_cast<size_t>((yo + i) * ow + xo)];
      out[static_cast<size_t>(yo * ow + xo)] = s;
    }
  return out;
}

}  // namespace

double Psnr(const Tensor& a, const Tensor& b) {
  Require(a.shape() == b.shape(), ErrorCode::kShapeMismatch,
          "psnr of " + ShapeToString(a.shape()) + " vs " + ShapeToString(b.shape()));
  double mse = 0.0;
  for (int64_t i = 0; i < a.numel(); ++i) mse += (a[i] - b[i]) * (a[i] - b[i]);
  mse /= static_cast<double>(a.numel());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double Ssim(const Tensor& a, const Tensor& b, const SsimOptions& opts) {
  Require(a.shape() == b.shape(), ErrorCode::kShapeMismatch,
          "ssim of " + ShapeToString(a.shape()) + " vs " + ShapeToString(b.shape()));
  Require(a.rank() == 3 || (a.rank() == 4 && a.dim(0) == 1), ErrorCode::kShapeMismatch,
          "ssim expects a single [C,H,W] image");
  const int64_t c = a.dim(a.rank() - 3), h = a.dim(a.rank() - 2), w = a.dim(a.rank() - 1);
  Require(h >= opts.window && w >= opts.window, ErrorCode::kInvalidArgument,
          "ssim needs images of at least " + std::to_string(opts.window) + "x" +
              std::to_string(opts.window));
  const auto k = GaussianWindow(opts.window, opts.sigma);
  const double c1 = std::pow(opts.k1 * opts.dynamic_range, 2);
  const double c2 = std::pow(opts.k2 * opts.dynamic_range, 2);
  const int64_t plane = h * w;
  double total = 0.0;
  std::vector<double> aa(static_cast<size_t>(plane)), bb(aa.size()), ab(aa.size());
  for (int64_t ch = 0; ch < c; ++ch) {
    const double* pa = a.raw() + ch * plane;
    const double* pb = b.raw() + ch * plane;
    for (int64_t i = 0; i < plane; ++i) {
      aa[static_cast<size_t>(i)] = pa[i] * pa[i];
      bb[static_cast<size_t>(i)] = pb[i] * pb[i];
      ab[static_cast<size_t>(i)] = pa[i] * pb[i];
    }
    const auto mu_a = Filter(pa, h, w, k), mu_b = Filter(pb, h, w, k);
    const auto e_aa = Filter(aa.data(), h, w, k), e_bb = Filter(bb.data(), h, w, k);
    const auto e_ab = Filter(ab.data(), h, w, k);
    double sum = 0.0;
    for (size_t i = 0; i < mu_a.size(); ++i) {
      const double va = e_aa[i] - mu_a[i] * mu_a[i];
      const double vb = e_bb[i] - mu_b[i] * mu_b[i];
      const double cov = e_ab[i] - mu_a[i] * mu_b[i];
      sum += ((2 * mu_a[i] * mu_b[i] + c1) * (2 * cov + c2)) /
             ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2));
    }
    total += sum / static_cast<double>(mu_a.size());
  }
  return total / static_cast<double>(c);
}

Tensor BatchImage(const Tensor& batch, int64_t n) {
  Require(batch.rank() == 4, ErrorCode::kShapeMismatch, "expected an NCHW batch");
  Require(n >= 0 && n < batch.dim(0), ErrorCode::kOutOfRange, "batch index out of range");
  const int64_t size = batch.dim(1) * batch.dim(2) * batch.dim(3);
  const auto d = batch.data();
  return Tensor({batch.dim(1), batch.dim(2), batch.dim(3)},
                std::vector<double>(d.begin() + n * size, d.begin() + (n + 1) * size));
}

std::vector<int> BatchAlignGreedy(const Tensor& reconstructed, const Tensor& truth) {
  const auto table = PsnrTable(reconstructed, truth);
  const size_t b = table.size();
  std::vector<int> perm(b, -1);
  std::vector<bool> used(b, false);
  for (size_t round = 0; round < b; ++round) {
    size_t bi = 0, bj = 0;
    double best = -1.0;
    for (size_t i = 0; i < b; ++i) {
      if (perm[i] >= 0) continue;
      for (size_t j = 0; j < b; ++j) {
        if (used[j]) continue;
        if (table[i][j] > best) {
          best = table[i][j];
          bi = i;
          bj = j;
        }
      }
    }
    perm[bi] = static_cast<int>(bj);
    used[bj] = true;
  }
  return perm;
}

std::vector<int> BatchAlign(const Tensor& reconstructed, const Tensor& truth) {
  const auto table = PsnrTable(reconstructed, truth);
  const int64_t b = static_cast<int64_t>(table.size());
  if (b > kExhaustiveAlignMax) return BatchAlignGreedy(reconstructed, truth);
  std::vector<int> perm(static_cast<size_t>(b));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_sum = -1.0;
  do {
    double s = 0.0;
    for (size_t i = 0; i < perm.size(); ++i) s += table[i][static_cast<size_t>(perm[i])];
    if (s > best_sum) {
      best_sum = s;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

MetricReport EvaluateBatch(const Tensor& reconstructed, const Tensor& truth) {
  MetricReport r;
  r.permutation = BatchAlign(reconstructed, truth);
  for (size_t i = 0; i < r.permutation.size(); ++i) {
    const Tensor x = BatchImage(reconstructed, static_cast<int64_t>(i));
    const Tensor y = BatchImage(truth, r.permutation[i]);
    r.psnr.push_back(Psnr(x, y));
    r.ssim.push_back(Ssim(x, y));
  }
  const double n = static_cast<double>(r.psnr.size());
  r.mean_psnr = std::accumulate(r.psnr.begin(), r.psnr.end(), 0.0) / n;
  r.mean_ssim = std::accumulate(r.ssim.begin(), r.ssim.end(), 0.0) / n;
  return r;
}

}  // namespace ginas
