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

#include "victim/victim.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>

#include "core/error.hpp"
#include "core/init.hpp"
#include "core/ops.hpp"

namespace ginas {
namespace {

using ad::Conv2dOptions;
using ad::Var;

class ParamBuilder {
 public:
  explicit ParamBuilder(uint64_t seed) : rng_(seed) {}

  void Weight(std::vector<ad::Parameter>& out, std::string name, Shape shape,
              int64_t fan_in) {
    out.push_back({std::move(name), KaimingUniform(std::move(shape), fan_in, rng_), true});
  }

  void Bias(std::vector<ad::Parameter>& out, std::string name, int64_t size,
            int64_t fan_in) {
    out.push_back({std::move(name), BiasUniform(size, fan_in, rng_), true});
  }

 private:
  std::mt19937_64 rng_;
};

void ConvParams(ParamBuilder& pb, std::vector<ad::Parameter>& out,
                const std::string& name, int64_t cout, int64_t cin, int64_t k,
                bool bias) {
  const int64_t fan_in = cin * k * k;
  pb.Weight(out, name + ".weight", {cout, cin, k, k}, fan_in);
  if (bias) pb.Bias(out, name + ".bias", cout, fan_in);
}

void LinearParams(ParamBuilder& pb, std::vector<ad::Parameter>& out,
                  int64_t in, int64_t classes) {
  pb.Weight(out, "fc.weight", {in, classes}, in);
  pb.Bias(out, "fc.bias", classes, in);
}

Var Flatten(const Var& x) {
  const int64_t b = x.shape()[0];
  return ad::reshape(x, {b, x.numel() / b});
}

constexpr int64_t kTinyC1 = 8;
constexpr int64_t kTinyC2 = 16;
constexpr int64_t kLenetC = 12;
constexpr int64_t kResC1 = 8;
constexpr int64_t kResC2 = 16;

}  // namespace

const char* ClassifierKindName(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kTinyConvNet:
      return "tiny_convnet";
    case ClassifierKind::kLenetZhuLike:
      return "lenet_zhu_like";
    case ClassifierKind::kMiniResNet:
      return "mini_resnet";
  }
  return "unknown";
}

ClassifierKind ParseClassifierKind(const std::string& name) {
  if (name == "tiny_convnet") return ClassifierKind::kTinyConvNet;
  if (name == "lenet_zhu_like") return ClassifierKind::kLenetZhuLike;
  if (name == "mini_resnet") return ClassifierKind::kMiniResNet;
  Fail(ErrorCode::kInvalidArgument, "unsupported victim kind '" + name + "'");
}

int64_t GradientSet::total_size() const {
  int64_t n = 0;
  for (const Tensor& t : tensors) n += t.numel();
  return n;
}

std::vector<double> GradientSet::Flatten() const {
  std::vector<double> flat;
  flat.reserve(static_cast<size_t>(total_size()));
  for (const Tensor& t : tensors) flat.insert(flat.end(), t.data().begin(), t.data().end());
  return flat;
}

GradientSet GradientSet::Unflatten(std::span<const double> flat,
                                   const GradientSet& like) {
  Require(static_cast<int64_t>(flat.size()) == like.total_size(),
          ErrorCode::kShapeMismatch, "flat gradient length mismatch");
  GradientSet out;
  size_t off = 0;
  for (const Tensor& t : like.tensors) {
    const size_t n = static_cast<size_t>(t.numel());
    out.tensors.emplace_back(t.shape(), std::vector<double>(flat.begin() + off,
                                                            flat.begin() + off + n));
    off += n;
  }
  return out;
}

Classifier Classifier::Build(const ClassifierSpec& spec) {
  Require(spec.batch >= 1 && spec.batch <= kMaxBatch, ErrorCode::kInvalidArgument,
          "batch size must be in [1, 96]");
  Require(spec.channels >= 1 && spec.classes >= 2, ErrorCode::kInvalidArgument,
          "classifier needs >= 1 channel and >= 2 classes");
  Classifier c;
  c.spec_ = spec;
  ParamBuilder pb(spec.seed);
  auto& p = c.params_;
  const int64_t h = spec.height, w = spec.width;
  switch (spec.kind) {
    case ClassifierKind::kTinyConvNet:
      Require(h % 2 == 0 && w % 2 == 0 && h >= 4 && w >= 4,
              ErrorCode::kInvalidArgument, "tiny_convnet needs even H, W >= 4");
      ConvParams(pb, p, "conv1", kTinyC1, spec.channels, 3, true);
      ConvParams(pb, p, "conv2", kTinyC2, kTinyC1, 3, true);
      LinearParams(pb, p, kTinyC2 * (h / 2) * (w / 2), spec.classes);
      break;
    case ClassifierKind::kLenetZhuLike:
      Require(h % 4 == 0 && w % 4 == 0 && h >= 8 && w >= 8,
              ErrorCode::kInvalidArgument, "lenet_zhu_like needs H, W divisible by 4");
      ConvParams(pb, p, "conv1", kLenetC, spec.channels, 5, true);
      ConvParams(pb, p, "conv2", kLenetC, kLenetC, 5, true);
      ConvParams(pb, p, "conv3", kLenetC, kLenetC, 5, true);
      LinearParams(pb, p, kLenetC * (h / 4) * (w / 4), spec.classes);
      break;
    case ClassifierKind::kMiniResNet:
      Require(h % 2 == 0 && w % 2 == 0 && h >= 4 && w >= 4,
              ErrorCode::kInvalidArgument, "mini_resnet needs even H, W >= 4");
      ConvParams(pb, p, "stem", kResC1, spec.channels, 3, false);
      ConvParams(pb, p, "block1.conv_a", kResC1, kResC1, 3, false);
      ConvParams(pb, p, "block1.conv_b", kResC1, kResC1, 3, false);
      ConvParams(pb, p, "block2.conv_a", kResC2, kResC1, 3, false);
      ConvParams(pb, p, "block2.conv_b", kResC2, kResC2, 3, false);
      ConvParams(pb, p, "block2.shortcut", kResC2, kResC1, 1, false);
      LinearParams(pb, p, kResC2, spec.classes);
      break;
  }
  return c;
}

int64_t Classifier::parameter_count() const {
  int64_t n = 0;
  for (const auto& p : params_) n += p.value.numel();
  return n;
}

uint64_t Classifier::Checksum() const {
  uint64_t h = kChecksumInit;
  for (const auto& p : params_) h = ChecksumUpdate(h, p.value);
  return h;
}

std::vector<Var> Classifier::Bind(ad::Graph& graph) const {
  std::vector<Var> vars;
  vars.reserve(params_.size());
  for (const auto& p : params_) vars.push_back(graph.variable(p.value));
  return vars;
}

Var Classifier::Forward(const Var& images, std::span<const Var> p) const {
  const Shape& s = images.shape();
  Require(s.size() == 4 && s[1] == spec_.channels && s[2] == spec_.height &&
              s[3] == spec_.width,
          ErrorCode::kShapeMismatch,
          "victim input " + ShapeToString(s) + " does not match its spec");
  Require(p.size() == params_.size(), ErrorCode::kInvalidArgument,
          "wrong number of bound victim parameters");
  switch (spec_.kind) {
    case ClassifierKind::kTinyConvNet: {
      Var h = ad::relu(ad::conv2d(images, p[0], p[1], {1, 1, 1, 1}));
      h = ad::relu(ad::conv2d(h, p[2], p[3], {2, 1, 1, 1}));
      return ad::linear(Flatten(h), p[4], p[5]);
    }
    case ClassifierKind::kLenetZhuLike: {
      Var h = ad::sigmoid(ad::conv2d(images, p[0], p[1], {2, 2, 1, 1}));
      h = ad::sigmoid(ad::conv2d(h, p[2], p[3], {2, 2, 1, 1}));
      h = ad::sigmoid(ad::conv2d(h, p[4], p[5], {1, 2, 1, 1}));
      return ad::linear(Flatten(h), p[6], p[7]);
    }
    case ClassifierKind::kMiniResNet: {
      Var h = ad::relu(ad::conv2d(images, p[0], std::nullopt, {1, 1, 1, 1}));
      Var a = ad::relu(ad::conv2d(h, p[1], std::nullopt, {1, 1, 1, 1}));
      a = ad::conv2d(a, p[2], std::nullopt, {1, 1, 1, 1});
      h = ad::relu(ad::add(a, h));
      Var b = ad::relu(ad::conv2d(h, p[3], std::nullopt, {2, 1, 1, 1}));
      b = ad::conv2d(b, p[4], std::nullopt, {1, 1, 1, 1});
      Var shortcut = ad::conv2d(h, p[5], std::nullopt, {2, 0, 1, 1});
      h = ad::relu(ad::add(b, shortcut));
      const double area = static_cast<double>(h.shape()[2] * h.shape()[3]);
      Var pooled = ad::affine(ad::sum_axes(h, {2, 3}), 1.0 / area, 0.0);
      return ad::linear(pooled, p[6], p[7]);
    }
  }
  Fail(ErrorCode::kInvalidArgument, "unsupported victim kind");
}

Tensor OneHot(std::span<const int> labels, int64_t classes) {
  Tensor t(Shape{static_cast<int64_t>(labels.size()), classes});
  for (size_t i = 0; i < labels.size(); ++i) {
    Require(labels[i] >= 0 && labels[i] < classes, ErrorCode::kOutOfRange,
            "label " + std::to_string(labels[i]) + " outside [0, " +
                std::to_string(classes) + ")");
    t[static_cast<int64_t>(i) * classes + labels[i]] = 1.0;
  }
  return t;
}

std::vector<Var> ParameterGradients(const Classifier& model,
                                    std::span<const Var> params,
                                    const Var& images, std::span<const int> labels,
                                    bool create_graph) {
  Require(static_cast<int64_t>(labels.size()) == images.shape()[0],
          ErrorCode::kShapeMismatch, "label count does not match batch size");
  const Tensor one_hot = OneHot(labels, model.spec().classes);
  Var loss = ad::softmax_cross_entropy(model.Forward(images, params), one_hot);
  return ad::grad(loss, params, create_graph).grads;
}

GradientSet ComputeGradients(const Classifier& model, const PrivateBatch& batch) {
  Require(batch.images.rank() == 4 && batch.images.dim(0) == batch.size(),
          ErrorCode::kShapeMismatch, "private batch images/labels disagree");
  ad::Graph g;
  std::vector<Var> params = model.Bind(g);
  Var images = g.constant(batch.images);
  GradientSet out;
  for (const Var& v : ParameterGradients(model, params, images, batch.labels, false)) {
    out.tensors.push_back(v.value());
  }
  return out;
}

LabelInference InferLabels(const GradientSet& gradients, const Classifier& model,
                           int64_t batch) {
  Require(gradients.tensors.size() == model.parameters().size(),
          ErrorCode::kShapeMismatch, "gradient set does not match the victim");
  const int64_t classes = model.spec().classes;
  Require(batch >= 1 && batch <= classes, ErrorCode::kInvalidArgument,
          "label inference needs 1 <= B <= number of classes");
  const Tensor& bias_grad = gradients.tensors.back();
  Require(bias_grad.numel() == classes, ErrorCode::kShapeMismatch,
          "last gradient is not the final-layer bias");
  std::vector<int> order(static_cast<size_t>(classes));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return bias_grad[a] < bias_grad[b]; });
  int64_t negatives = 0;
  for (int64_t k = 0; k < classes; ++k) negatives += bias_grad[k] < 0.0 ? 1 : 0;
  LabelInference out;
  out.partial = negatives < batch;
  out.labels.assign(order.begin(), order.begin() + batch);
  return out;
}

}  // namespace ginas
