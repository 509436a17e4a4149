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

#include <cmath>
#include <random>
#include <numeric>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "core/error.hpp"
#include "core/ops.hpp"
#include "test_util.hpp"
#include "victim/victim.hpp"

namespace ginas {
namespace {

using ::ginas::testing::RandomTensor;

ClassifierSpec Spec(ClassifierKind kind, int64_t batch, uint64_t seed,
                    int64_t channels = 1, int64_t hw = 16) {
  ClassifierSpec s;
  s.kind = kind;
  s.batch = batch;
  s.channels = channels;
  s.height = hw;
  s.width = hw;
  s.classes = 10;
  s.seed = seed;
  return s;
}

PrivateBatch RandomBatch(const ClassifierSpec& spec, std::mt19937_64& rng,
                         std::vector<int> labels) {
  PrivateBatch b;
  b.images = RandomTensor({spec.batch, spec.channels, spec.height, spec.width}, rng, 0, 1);
  b.labels = std::move(labels);
  return b;
}

double Loss(const Classifier& model, const PrivateBatch& batch) {
  ad::Graph g;
  auto params = model.Bind(g);
  ad::Var logits = model.Forward(g.constant(batch.images), params);
  return ad::softmax_cross_entropy(logits, OneHot(batch.labels, model.spec().classes))
      .value()
      .item();
}

const ClassifierKind kKinds[] = {ClassifierKind::kTinyConvNet,
                                 ClassifierKind::kLenetZhuLike,
                                 ClassifierKind::kMiniResNet};

TEST(ClassifierTest, DeterministicBuild) {
  for (ClassifierKind kind : kKinds) {
    const Classifier a = Classifier::Build(Spec(kind, 1, 42));
    const Classifier b = Classifier::Build(Spec(kind, 1, 42));
    const Classifier c = Classifier::Build(Spec(kind, 1, 43));
    EXPECT_EQ(a.Checksum(), b.Checksum());
    EXPECT_NE(a.Checksum(), c.Checksum());
  }
}

TEST(ClassifierTest, ShapeContract) {
  const Classifier model = Classifier::Build(Spec(ClassifierKind::kTinyConvNet, 1, 1));
  ad::Graph g;
  auto params = model.Bind(g);
  ad::Var logits = model.Forward(g.constant(Tensor(Shape{1, 1, 16, 16})), params);
  EXPECT_EQ(logits.shape(), Shape({1, 10}));
  EXPECT_THROW(model.Forward(g.constant(Tensor(Shape{1, 3, 16, 16})), params), Error);
}

TEST(ClassifierTest, UnsupportedKind) {
  EXPECT_THROW(ParseClassifierKind("resnet50"), Error);
  EXPECT_EQ(ParseClassifierKind("mini_resnet"), ClassifierKind::kMiniResNet);
}

TEST(ClassifierTest, MiniResNetZeroInputGivesFinalBias) {
  // Bias-free convolutions map zero to zero, so only the classifier bias
  // survives the forward pass.
  const Classifier model = Classifier::Build(Spec(ClassifierKind::kMiniResNet, 2, 5, 3));
  ad::Graph g;
  auto params = model.Bind(g);
  ad::Var logits = model.Forward(g.constant(Tensor(Shape{2, 3, 16, 16})), params);
  const Tensor& bias = model.parameters().back().value;
  for (int r = 0; r < 2; ++r)
    for (int k = 0; k < 10; ++k) EXPECT_EQ(logits.value()[r * 10 + k], bias[k]);
}

TEST(ComputeGradientsTest, BiasGradientClosedForm) {
  std::mt19937_64 rng(3);
  const Classifier model = Classifier::Build(Spec(ClassifierKind::kTinyConvNet, 1, 9));
  const PrivateBatch batch = RandomBatch(model.spec(), rng, {4});
  const GradientSet gs = ComputeGradients(model, batch);
  ad::Graph g;
  auto params = model.Bind(g);
  const Tensor logits = model.Forward(g.constant(batch.images), params).value();
  double m = logits[0], z = 0;
  for (int k = 0; k < 10; ++k) m = std::max(m, logits[k]);
  for (int k = 0; k < 10; ++k) z += std::exp(logits[k] - m);
  for (int k = 0; k < 10; ++k) {
    const double p = std::exp(logits[k] - m) / z;
    EXPECT_NEAR(gs.tensors.back()[k], p - (k == 4 ? 1.0 : 0.0), 1e-14);
  }
}

TEST(ComputeGradientsTest, DuplicatedSamplesMatchSingle) {
  std::mt19937_64 rng(4);
  for (ClassifierKind kind : kKinds) {
    const Classifier one = Classifier::Build(Spec(kind, 1, 17));
    const Classifier three = Classifier::Build(Spec(kind, 3, 17));
    const PrivateBatch single = RandomBatch(one.spec(), rng, {6});
    PrivateBatch dup;
    dup.images = Tensor(Shape{3, 1, 16, 16});
    for (int k = 0; k < 3; ++k)
      std::copy(single.images.data().begin(), single.images.data().end(),
                dup.images.data().begin() + k * 256);
    dup.labels = {6, 6, 6};
    const auto a = ComputeGradients(one, single).Flatten();
    const auto b = ComputeGradients(three, dup).Flatten();
    ASSERT_EQ(a.size(), b.size());
    for (size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12 * (1 + std::fabs(a[i])));
  }
}

TEST(ComputeGradientsTest, MatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  for (ClassifierKind kind : kKinds) {
    const Classifier model = Classifier::Build(Spec(kind, 2, 23));
    const PrivateBatch batch = RandomBatch(model.spec(), rng, {1, 8});
    const GradientSet gs = ComputeGradients(model, batch);
    // Probe a random subset of coordinates of every parameter tensor.
    std::vector<double> analytic, numeric;
    for (size_t p = 0; p < model.parameters().size(); ++p) {
      const int64_t n = model.parameters()[p].value.numel();
      for (int probe = 0; probe < 12; ++probe) {
        const int64_t i = std::uniform_int_distribution<int64_t>(0, n - 1)(rng);
        Classifier perturbed = model;
        auto& value = const_cast<Tensor&>(perturbed.parameters()[p].value);
        const double x0 = value[i], h = 1e-6;
        value[i] = x0 + h;
        const double fp = Loss(perturbed, batch);
        value[i] = x0 - h;
        const double fm = Loss(perturbed, batch);
        analytic.push_back(gs.tensors[p][i]);
        numeric.push_back((fp - fm) / (2 * h));
      }
    }
    EXPECT_LT(testing::RelErr(analytic, numeric), 1e-6) << ClassifierKindName(kind);
  }
}

TEST(ComputeGradientsTest, LabelOutOfRange) {
  std::mt19937_64 rng(6);
  const Classifier model = Classifier::Build(Spec(ClassifierKind::kTinyConvNet, 1, 1));
  EXPECT_THROW(ComputeGradients(model, RandomBatch(model.spec(), rng, {10})), Error);
  EXPECT_THROW(ComputeGradients(model, RandomBatch(model.spec(), rng, {-1})), Error);
}

TEST(GradientSetTest, FlattenLengthAndRoundTrip) {
  std::mt19937_64 rng(7);
  for (ClassifierKind kind : kKinds) {
    const Classifier model = Classifier::Build(Spec(kind, 1, 2));
    const GradientSet gs = ComputeGradients(model, RandomBatch(model.spec(), rng, {0}));
    const auto flat = gs.Flatten();
    EXPECT_EQ(static_cast<int64_t>(flat.size()), model.parameter_count());
    EXPECT_EQ(GradientSet::Unflatten(flat, gs).Flatten(), flat);
  }
}

TEST(InferLabelsTest, SingleSampleExact) {
  std::mt19937_64 rng(8);
  const Classifier model = Classifier::Build(Spec(ClassifierKind::kTinyConvNet, 1, 3));
  const auto r = InferLabels(ComputeGradients(model, RandomBatch(model.spec(), rng, {3})), model, 1);
  EXPECT_EQ(r.labels, std::vector<int>({3}));
  EXPECT_FALSE(r.partial);
}

TEST(InferLabelsTest, DistinctBatchOfFour) {
  std::mt19937_64 rng(9);
  int exact = 0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    const Classifier model = Classifier::Build(Spec(ClassifierKind::kTinyConvNet, 4, 1000 + seed));
    std::vector<int> labels(10);
    std::iota(labels.begin(), labels.end(), 0);
    std::shuffle(labels.begin(), labels.end(), rng);
    labels.resize(4);
    const auto r = InferLabels(ComputeGradients(model, RandomBatch(model.spec(), rng, labels)), model, 4);
    exact += std::set<int>(r.labels.begin(), r.labels.end()) ==
             std::set<int>(labels.begin(), labels.end());
  }
  EXPECT_GE(exact, 95);
}

TEST(InferLabelsTest, DuplicateLabelsFlagPartial) {
  std::mt19937_64 rng(10);
  const Classifier model = Classifier::Build(Spec(ClassifierKind::kTinyConvNet, 3, 4));
  const auto r = InferLabels(ComputeGradients(model, RandomBatch(model.spec(), rng, {2, 2, 5})), model, 3);
  EXPECT_TRUE(r.partial);
  EXPECT_EQ(r.labels.size(), 3u);
}

TEST(InferLabelsTest, InvariantUnderPositiveRescaling) {
  std::mt19937_64 rng(11);
  const Classifier model = Classifier::Build(Spec(ClassifierKind::kLenetZhuLike, 4, 6));
  const GradientSet gs = ComputeGradients(model, RandomBatch(model.spec(), rng, {0, 3, 7, 9}));
  const auto base = InferLabels(gs, model, 4);
  for (double c : {1e-6, 0.3, 7.0, 1e5}) {
    auto flat = gs.Flatten();
    for (double& v : flat) v *= c;
    const auto r = InferLabels(GradientSet::Unflatten(flat, gs), model, 4);
    EXPECT_EQ(r.labels, base.labels);
    EXPECT_EQ(r.partial, base.partial);
  }
}

}  // namespace
}  // namespace ginas
