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

#include "defenses/defenses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "core/error.hpp"
#include "core/ops.hpp"

namespace ginas {
namespace {

double ParseNumber(const std::string& text, const std::string& what) {
  try {
    size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  Fail(ErrorCode::kInvalidArgument, "bad " + what + " value '" + text + "'");
}

void SparsifyInPlace(std::span<double> v, double prune_rate) {
  const int64_t d = static_cast<int64_t>(v.size());
  const int64_t keep = SparsificationKeepCount(d, prune_rate);
  std::vector<int64_t> order(static_cast<size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  // Largest magnitude first; equal magnitudes keep the lower index.
  std::stable_sort(order.begin(), order.end(), [&](int64_t a, int64_t b) {
    return std::fabs(v[static_cast<size_t>(a)]) > std::fabs(v[static_cast<size_t>(b)]);
  });
  for (int64_t k = keep; k < d; ++k) v[static_cast<size_t>(order[static_cast<size_t>(k)])] = 0.0;
}

}  // namespace

void DefenseConfig::Validate() const {
  switch (kind) {
    case DefenseKind::kNone:
      break;
    case DefenseKind::kGaussianNoise:
      Require(sigma > 0.0, ErrorCode::kInvalidArgument, "noise sigma must be > 0");
      break;
    case DefenseKind::kClipping:
      Require(bound > 0.0, ErrorCode::kInvalidArgument, "clipping bound must be > 0");
      break;
    case DefenseKind::kSparsification:
      Require(prune_rate > 0.0 && prune_rate < 1.0, ErrorCode::kInvalidArgument,
              "prune rate must lie in (0, 1)");
      break;
  }
}

std::string DefenseConfig::ToString() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case DefenseKind::kNone:
      os << "none";
      break;
    case DefenseKind::kGaussianNoise:
      os << "noise:" << sigma;
      break;
    case DefenseKind::kClipping:
      os << "clip:" << bound;
      break;
    case DefenseKind::kSparsification:
      os << "sparsify:" << prune_rate << (per_layer ? ":per_layer" : "");
      break;
  }
  return os.str();
}

DefenseConfig DefenseConfig::Parse(const std::string& text) {
  DefenseConfig cfg;
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  Require(!parts.empty(), ErrorCode::kInvalidArgument, "empty defense spec");
  const std::string& kind = parts[0];
  if (kind == "none") {
    Require(parts.size() == 1, ErrorCode::kInvalidArgument, "'none' takes no argument");
    cfg.kind = DefenseKind::kNone;
  } else if (kind == "noise") {
    cfg.kind = DefenseKind::kGaussianNoise;
    if (parts.size() > 1) cfg.sigma = ParseNumber(parts[1], "noise sigma");
    Require(parts.size() <= 2, ErrorCode::kInvalidArgument, "bad noise spec '" + text + "'");
  } else if (kind == "clip") {
    cfg.kind = DefenseKind::kClipping;
    if (parts.size() > 1) cfg.bound = ParseNumber(parts[1], "clipping bound");
    Require(parts.size() <= 2, ErrorCode::kInvalidArgument, "bad clip spec '" + text + "'");
  } else if (kind == "sparsify") {
    cfg.kind = DefenseKind::kSparsification;
    if (parts.size() > 1) cfg.prune_rate = ParseNumber(parts[1], "prune rate");
    if (parts.size() > 2) {
      Require(parts[2] == "per_layer" && parts.size() == 3, ErrorCode::kInvalidArgument,
              "bad sparsify spec '" + text + "'");
      cfg.per_layer = true;
    }
  } else {
    Fail(ErrorCode::kInvalidArgument, "unknown defense '" + kind + "'");
  }
  cfg.Validate();
  return cfg;
}

int64_t SparsificationKeepCount(int64_t d, double prune_rate) {
  // The 1e-9 slack stops (1 - 0.9) * 10 = 1.0000000000000002 rounding up to 2.
  const double exact = (1.0 - prune_rate) * static_cast<double>(d);
  return std::clamp<int64_t>(static_cast<int64_t>(std::ceil(exact - 1e-9)), 0, d);
}

GradientSet ApplyDefense(const GradientSet& gradients, const DefenseConfig& cfg) {
  cfg.Validate();
  GradientSet out = gradients;
  switch (cfg.kind) {
    case DefenseKind::kNone:
      break;
    case DefenseKind::kGaussianNoise: {
      std::mt19937_64 rng(cfg.seed);
      std::normal_distribution<double> noise(0.0, cfg.sigma);
      for (Tensor& t : out.tensors) {
        for (double& v : t.data()) v += noise(rng);
      }
      break;
    }
    case DefenseKind::kClipping: {
      auto norm_of = [](const GradientSet& g) {
        double sq = 0.0;
        for (const Tensor& t : g.tensors) {
          for (double v : t.data()) sq += v * v;
        }
        return std::sqrt(sq);
      };
      const double norm = norm_of(gradients);
      if (norm > cfg.bound) {
        // Rounding can leave the rescaled norm an ulp above the bound; shrink
        // the factor until it is not.
        for (double factor = cfg.bound / norm;; factor = std::nextafter(factor, 0.0)) {
          for (size_t i = 0; i < out.tensors.size(); ++i) {
            const auto src = gradients.tensors[i].data();
            auto dst = out.tensors[i].data();
            for (size_t k = 0; k < src.size(); ++k) dst[k] = src[k] * factor;
          }
          if (norm_of(out) <= cfg.bound) break;
        }
      }
      break;
    }
    case DefenseKind::kSparsification: {
      if (cfg.per_layer) {
        for (Tensor& t : out.tensors) SparsifyInPlace(t.data(), cfg.prune_rate);
      } else {
        std::vector<double> flat = out.Flatten();
        SparsifyInPlace(flat, cfg.prune_rate);
        out = GradientSet::Unflatten(flat, out);
      }
      break;
    }
  }
  return out;
}

std::vector<ad::Var> EstimateTransform(std::span<const ad::Var> dummy,
                                       const GradientSet& observed,
                                       const DefenseConfig& cfg) {
  cfg.Validate();
  std::vector<ad::Var> out(dummy.begin(), dummy.end());
  switch (cfg.kind) {
    case DefenseKind::kNone:
    case DefenseKind::kGaussianNoise:
      return out;
    case DefenseKind::kClipping: {
      Require(!out.empty(), ErrorCode::kInvalidArgument, "empty gradient list");
      ad::Var sq;
      for (const ad::Var& v : out) {
        ad::Var s = ad::sum(ad::square(v));
        sq = sq.valid() ? ad::add(sq, s) : s;
      }
      ad::Var norm = ad::sqrt(sq);
      if (norm.value()[0] > cfg.bound) {
        ad::Var factor = ad::div(out.front().graph().constant(Tensor::Scalar(cfg.bound)), norm);
        for (ad::Var& v : out) v = ad::mul(v, factor);
      }
      return out;
    }
    case DefenseKind::kSparsification: {
      Require(observed.tensors.size() == out.size(), ErrorCode::kShapeMismatch,
              "observed gradient mask does not match dummy gradient count");
      for (size_t i = 0; i < out.size(); ++i) {
        const Tensor& obs = observed.tensors[i];
        Require(obs.shape() == out[i].shape(), ErrorCode::kShapeMismatch,
                "observed gradient mask length mismatch at entry " + std::to_string(i));
        Tensor mask(obs.shape());
        for (int64_t k = 0; k < obs.numel(); ++k) mask[k] = obs[k] == 0.0 ? 0.0 : 1.0;
        out[i] = ad::mul_const(out[i], std::move(mask));
      }
      return out;
    }
  }
  return out;
}

}  // namespace ginas
