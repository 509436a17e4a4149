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

#ifndef GINAS_VICTIM_VICTIM_HPP_
#define GINAS_VICTIM_VICTIM_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/graph.hpp"
#include "core/tensor.hpp"

namespace ginas {

enum class ClassifierKind { kTinyConvNet, kLenetZhuLike, kMiniResNet };

const char* ClassifierKindName(ClassifierKind kind);
ClassifierKind ParseClassifierKind(const std::string& name);

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::kTinyConvNet;
  int64_t batch = 1;
  int64_t channels = 1;
  int64_t height = 16;
  int64_t width = 16;
  int64_t classes = 10;
  uint64_t seed = 0;
};

// Private client data: images in [0,1] (NCHW) and integer labels.
struct PrivateBatch {
  Tensor images;
  std::vector<int> labels;

  int64_t size() const { return static_cast<int64_t>(labels.size()); }
};

inline constexpr int64_t kMaxBatch = 96;

// Per-parameter gradients in parameter registration order.
struct GradientSet {
  std::vector<Tensor> tensors;

  int64_t total_size() const;
  std::vector<double> Flatten() const;
  // Rebuilds a set with the shapes of `like` from a flat vector.
  static GradientSet Unflatten(std::span<const double> flat, const GradientSet& like);
};

// A small classification model. Parameters are immutable after Build; each
// forward pass binds them into the caller's graph.
class Classifier {
 public:
  static Classifier Build(const ClassifierSpec& spec);

  const ClassifierSpec& spec() const { return spec_; }
  const std::vector<ad::Parameter>& parameters() const { return params_; }
  int64_t parameter_count() const;
  // FNV-1a over the raw parameter bytes.
  uint64_t Checksum() const;

  // Registers every parameter as a differentiable leaf of `graph`.
  std::vector<ad::Var> Bind(ad::Graph& graph) const;

  // images [B,C,H,W] -> logits [B,L].
  ad::Var Forward(const ad::Var& images, std::span<const ad::Var> params) const;

 private:
  ClassifierSpec spec_;
  std::vector<ad::Parameter> params_;
};

Tensor OneHot(std::span<const int> labels, int64_t classes);

// Mean-reduced cross-entropy gradient w.r.t. every parameter.
GradientSet ComputeGradients(const Classifier& model, const PrivateBatch& batch);

// Gradient of the loss on (images, labels) w.r.t. `params`, recorded in the
// images' graph. With create_graph the result stays differentiable w.r.t.
// whatever produced `images`.
std::vector<ad::Var> ParameterGradients(const Classifier& model,
                                        std::span<const ad::Var> params,
                                        const ad::Var& images,
                                        std::span<const int> labels,
                                        bool create_graph);

struct LabelInference {
  std::vector<int> labels;
  // Fewer than B negative bias-gradient entries were found (e.g. repeated
  // labels); the result was padded and may be wrong.
  bool partial = false;
};

// Reads labels off the sign of the final-layer bias gradient.
LabelInference InferLabels(const GradientSet& gradients, const Classifier& model,
                           int64_t batch);

}  // namespace ginas

#endif  // GINAS_VICTIM_VICTIM_HPP_
