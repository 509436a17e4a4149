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
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "core/error.hpp"
#include "recovery/recovery.hpp"
#include "test_util.hpp"

namespace ginas {
namespace {

using ::ginas::testing::RandomTensor;

struct Scenario {
  Scenario(int64_t size, uint64_t seed) {
    ClassifierSpec spec;
    spec.height = spec.width = size;
    spec.seed = seed;
    victim = Classifier::Build(spec);
    batch.images = Tensor(Shape{1, 1, size, size});
    for (int64_t y = 0; y < size; ++y)
      for (int64_t x = 0; x < size; ++x)
        batch.images.at(0, 0, y, x) = 0.5 + 0.4 * std::sin(0.5 * y + seed) * std::cos(0.3 * x);
    batch.labels = {2};
    observed = ComputeGradients(victim, batch);
    target = AttackTarget{&victim, &observed, {2}, DefenseConfig{}};
  }
  Scenario(const Scenario&) = delete;

  Classifier victim;
  GradientSet observed;
  PrivateBatch batch;
  AttackTarget target;
};

Decoder Baseline16(uint64_t seed) {
  ArchGenome g = ArchGenome::Baseline();
  g.init_seed = seed;
  return Decoder::Build(g, {1, 16, 2, 2}, {1, 1, 16, 16});
}

TEST(AdamStepTest, FirstSignedStepMovesByLearningRate) {
  std::vector<Tensor> params{Tensor(Shape{2}, {0.5, -1.0})};
  const std::vector<Tensor> grads{Tensor(Shape{2}, {3.7, -0.2})};
  AdamState state;
  AdamOptions opts;
  AdamStep(params, grads, state, opts);
  // m_hat = sign, v_hat = 1: step = lr / (1 + eps)
  const double step = 1e-3 / (1.0 + 1e-8);
  EXPECT_NEAR(params[0][0], 0.5 - step, 1e-15);
  EXPECT_NEAR(params[0][1], -1.0 + step, 1e-15);
  EXPECT_EQ(state.step, 1);
}

TEST(AdamStepTest, ZeroGradientLeavesParameters) {
  std::vector<Tensor> params{Tensor(Shape{3}, {1, 2, 3})};
  const std::vector<Tensor> grads{Tensor(Shape{3}, 0.0)};
  AdamState state;
  AdamOptions opts;
  opts.signed_gradient = false;
  for (int i = 0; i < 3; ++i) AdamStep(params, grads, state, opts);
  EXPECT_EQ(params[0].storage(), (std::vector<double>{1, 2, 3}));
}

TEST(AdamStepTest, MatchesScalarReferenceOnSquare) {
  // f(w) = w^2, gradient 2w.
  double w = 1.0, m = 0.0, v = 0.0;
  std::vector<double> ref;
  for (int t = 1; t <= 10; ++t) {
    const double g = 2.0 * w;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1.0 - std::pow(0.9, t));
    const double vh = v / (1.0 - std::pow(0.999, t));
    w = w - 1e-3 * mh / (std::sqrt(vh) + 1e-8);
    ref.push_back(w);
  }
  std::vector<Tensor> params{Tensor::Scalar(1.0)};
  AdamState state;
  AdamOptions opts;
  opts.signed_gradient = false;
  for (int t = 0; t < 10; ++t) {
    const std::vector<Tensor> grads{Tensor::Scalar(2.0 * params[0].item())};
    AdamStep(params, grads, state, opts);
    EXPECT_NEAR(params[0].item(), ref[static_cast<size_t>(t)], 1e-12);
  }
}

TEST(AdamStepTest, ShapeMismatchIsAnError) {
  std::vector<Tensor> params{Tensor(Shape{2})};
  AdamState state;
  EXPECT_THROW(AdamStep(params, std::vector<Tensor>{Tensor(Shape{3})}, state, {}), Error);
  EXPECT_THROW(AdamStep(params, std::vector<Tensor>{}, state, {}), Error);
}

TEST(RecoverTest, ZeroIterationsReturnsInitialOutput) {
  Scenario s(16, 1);
  const Decoder d = Baseline16(3);
  const Tensor z = SampleLatent({1, 16, 2, 2}, 4);
  RecoveryOptions opts;
  opts.iterations = 0;
  const RecoveryResult r = Recover(d, z, s.target, opts);
  ASSERT_TRUE(r.ok);
  ad::Graph g;
  const Tensor want = d.Forward(g.constant(z), d.Bind(g, false)).value();
  EXPECT_EQ(r.reconstruction.storage(), want.storage());
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.trace[0].step, 0);
  EXPECT_EQ(r.trace[0].loss, InitialLoss(d, z, s.target));
}

TEST(RecoverTest, InvalidOptions) {
  Scenario s(16, 1);
  RecoveryOptions opts;
  opts.iterations = -1;
  EXPECT_THROW(Recover(Baseline16(1), SampleLatent({1, 16, 2, 2}, 1), s.target, opts), Error);
  opts.iterations = 1;
  opts.adam.learning_rate = 0;
  EXPECT_THROW(Recover(Baseline16(1), SampleLatent({1, 16, 2, 2}, 1), s.target, opts), Error);
}

TEST(RecoverTest, GradientMatchesFiniteDifferences) {
  // Two conv layers in the victim, two levels in the decoder.
  Scenario s(8, 5);
  ArchGenome g = ArchGenome::Baseline(2, {2, 3});
  g.latent_channels = 2;
  g.skips = SkipMatrix::Parse("11,01");
  g.upsample[0] = UpsampleConfig::Parse("bicubic,separable,prelu,3,1");
  g.init_seed = 11;
  const Decoder d = Decoder::Build(g, {1, 2, 2, 2}, {1, 1, 8, 8});
  const Tensor z = SampleLatent({1, 2, 2, 2}, 6);
  std::vector<Tensor> params;
  for (const auto& p : d.parameters()) params.push_back(p.value);
  const auto analytic = MatchingLossGradient(d, params, z, s.target);

  const double h = 1e-4;
  Decoder probe = d;
  double num = 0, den = 0;
  for (size_t i = 0; i < params.size(); ++i) {
    for (int64_t k = 0; k < params[i].numel(); ++k) {
      Tensor& v = probe.mutable_parameters()[i].value;
      const double x0 = v[k];
      v[k] = x0 + h;
      const double fp = InitialLoss(probe, z, s.target);
      v[k] = x0 - h;
      const double fm = InitialLoss(probe, z, s.target);
      v[k] = x0;
      const double fd = (fp - fm) / (2 * h);
      num += (fd - analytic[i][k]) * (fd - analytic[i][k]);
      den += fd * fd;
    }
  }
  EXPECT_LT(std::sqrt(num / den), 1e-4);
}

TEST(RecoverTest, DeterministicAndInRange) {
  Scenario s(16, 2);
  const Tensor z = SampleLatent({1, 16, 2, 2}, 8);
  RecoveryOptions opts;
  opts.iterations = 30;
  const RecoveryResult a = Recover(Baseline16(5), z, s.target, opts);
  const RecoveryResult b = Recover(Baseline16(5), z, s.target, opts);
  ASSERT_TRUE(a.ok);
  EXPECT_EQ(a.reconstruction.storage(), b.reconstruction.storage());
  EXPECT_EQ(a.parameter_checksum, b.parameter_checksum);
  ASSERT_EQ(a.trace.size(), 31u);
  for (size_t i = 0; i < a.trace.size(); ++i) EXPECT_EQ(a.trace[i].loss, b.trace[i].loss);
  for (double v : a.reconstruction.data()) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(RecoverTest, MakesProgressAndStrideThinsTrace) {
  Scenario s(16, 3);
  const Tensor z = SampleLatent({1, 16, 2, 2}, 2);
  RecoveryOptions opts;
  opts.iterations = 200;
  opts.trace_stride = 50;
  const RecoveryResult r = Recover(Baseline16(9), z, s.target, opts);
  ASSERT_TRUE(r.ok);
  ASSERT_EQ(r.trace.size(), 5u);  // steps 0, 50, 100, 150 and the final 200
  EXPECT_EQ(r.trace.back().step, 200);
  double best = r.trace.front().loss;
  for (const auto& t : r.trace) best = std::min(best, t.loss);
  EXPECT_LE(best, r.trace.front().loss);
  EXPECT_LT(r.trace.back().loss, r.trace.front().loss);
}

TEST(RecoverTest, NonFiniteLossAborts) {
  Scenario s(16, 4);
  Tensor z = SampleLatent({1, 16, 2, 2}, 2);
  z[0] = std::numeric_limits<double>::quiet_NaN();
  RecoveryOptions opts;
  opts.iterations = 10;
  const RecoveryResult r = Recover(Baseline16(1), z, s.target, opts);
  EXPECT_FALSE(r.ok);
  EXPECT_FALSE(r.error.empty());
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_TRUE(std::isnan(r.trace[0].loss));
}

TEST(LossTraceCsvTest, Format) {
  std::ostringstream os;
  const std::vector<TracePoint> trace{{0, -0.5}, {10, -0.75}};
  WriteLossTraceCsv(os, trace);
  EXPECT_EQ(os.str(), "step,loss\n0,-0.5\n10,-0.75\n");
}

}  // namespace
}  // namespace ginas
