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

#include <algorithm>
#include <cstring>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "core/error.hpp"
#include "search/search.hpp"
#include "test_util.hpp"

namespace ginas {
namespace {

using ::ginas::testing::RandomTensor;

// ---- straight-line reference: plain loops, no graph ----

struct Img {
  int c = 0, h = 0, w = 0;
  std::vector<double> v;
  Img(int c_, int h_, int w_) : c(c_), h(h_), w(w_), v(static_cast<size_t>(c_ * h_ * w_), 0.0) {}
  double& at(int ci, int y, int x) { return v[static_cast<size_t>((ci * h + y) * w + x)]; }
  double get(int ci, int y, int x) const {
    if (y < 0 || y >= h || x < 0 || x >= w) return 0.0;
    return v[static_cast<size_t>((ci * h + y) * w + x)];
  }
};

Img Conv(const Img& in, const Tensor& wt, const Tensor& b, int stride, int pad) {
  const int o = static_cast<int>(wt.dim(0)), k = static_cast<int>(wt.dim(2));
  Img out(o, (in.h + 2 * pad - k) / stride + 1, (in.w + 2 * pad - k) / stride + 1);
  for (int oc = 0; oc < o; ++oc)
    for (int y = 0; y < out.h; ++y)
      for (int x = 0; x < out.w; ++x) {
        double s = b[oc];
        for (int c = 0; c < in.c; ++c)
          for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
              s += wt.at(oc, c, i, j) * in.get(c, y * stride - pad + i, x * stride - pad + j);
        out.at(oc, y, x) = s;
      }
  return out;
}

// Gradients of the conv above: accumulates into dw, db and returns d(input).
Img ConvBack(const Img& in, const Tensor& wt, const Img& dy, int stride, int pad,
             std::vector<double>& dw, std::vector<double>& db) {
  const int k = static_cast<int>(wt.dim(2));
  Img din(in.c, in.h, in.w);
  dw.assign(static_cast<size_t>(wt.numel()), 0.0);
  db.assign(static_cast<size_t>(dy.c), 0.0);
  for (int oc = 0; oc < dy.c; ++oc)
    for (int y = 0; y < dy.h; ++y)
      for (int x = 0; x < dy.w; ++x) {
        const double g = dy.v[static_cast<size_t>((oc * dy.h + y) * dy.w + x)];
        db[static_cast<size_t>(oc)] += g;
        for (int c = 0; c < in.c; ++c)
          for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
              const int yy = y * stride - pad + i, xx = x * stride - pad + j;
              if (yy < 0 || yy >= in.h || xx < 0 || xx >= in.w) continue;
              dw[static_cast<size_t>(((oc * in.c + c) * k + i) * k + j)] += g * in.get(c, yy, xx);
              din.at(c, yy, xx) += g * wt.at(oc, c, i, j);
            }
      }
  return din;
}

Img NearestUp(const Img& in) {
  Img out(in.c, in.h * 2, in.w * 2);
  for (int c = 0; c < in.c; ++c)
    for (int y = 0; y < out.h; ++y)
      for (int x = 0; x < out.w; ++x) out.at(c, y, x) = in.get(c, y / 2, x / 2);
  return out;
}

template <typename F>
Img Map(Img x, F f) {
  for (double& v : x.v) v = f(v);
  return x;
}

double ReferenceLoss(const std::vector<ad::Parameter>& dec, const Tensor& z0,
                     const Classifier& victim, int label, const GradientSet& observed) {
  // Decoder: one level, skip e0 -> d0, nearest / conv2d 1x1 / relu.
  Img z(static_cast<int>(z0.dim(1)), static_cast<int>(z0.dim(2)), static_cast<int>(z0.dim(3)));
  z.v.assign(z0.data().begin(), z0.data().end());
  Img e0 = Map(Conv(NearestUp(z), dec[0].value, dec[1].value, 2, 1),
               [](double v) { return v > 0 ? v : 0.2 * v; });
  Img proj = Conv(e0, dec[2].value, dec[3].value, 1, 0);
  Img in = e0;
  for (size_t i = 0; i < in.v.size(); ++i) in.v[i] += proj.v[i];
  Img h = Map(Conv(NearestUp(in), dec[4].value, dec[5].value, 1, 0),
              [](double v) { return v > 0 ? v : 0.0; });
  Img x = Map(Conv(h, dec[6].value, dec[7].value, 1, 0),
              [](double v) { return 1.0 / (1.0 + std::exp(-v)); });

  // Victim forward.
  const auto& p = victim.parameters();
  Img a1 = Map(Conv(x, p[0].value, p[1].value, 1, 1), [](double v) { return v > 0 ? v : 0.0; });
  Img a2 = Map(Conv(a1, p[2].value, p[3].value, 2, 1), [](double v) { return v > 0 ? v : 0.0; });
  const Tensor& fw = p[4].value;
  const Tensor& fb = p[5].value;
  const int D = static_cast<int>(fw.dim(0)), K = static_cast<int>(fw.dim(1));
  std::vector<double> logits(static_cast<size_t>(K));
  for (int k = 0; k < K; ++k) {
    double s = fb[k];
    for (int d = 0; d < D; ++d) s += a2.v[static_cast<size_t>(d)] * fw[d * K + k];
    logits[static_cast<size_t>(k)] = s;
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double zsum = 0;
  for (double l : logits) zsum += std::exp(l - mx);
  std::vector<double> dz(static_cast<size_t>(K));
  for (int k = 0; k < K; ++k)
    dz[static_cast<size_t>(k)] = std::exp(logits[static_cast<size_t>(k)] - mx) / zsum - (k == label);

  // Victim backward.
  std::vector<double> dfw(static_cast<size_t>(D * K)), dfb = dz;
  Img da2(a2.c, a2.h, a2.w);
  for (int d = 0; d < D; ++d)
    for (int k = 0; k < K; ++k) {
      dfw[static_cast<size_t>(d * K + k)] = a2.v[static_cast<size_t>(d)] * dz[static_cast<size_t>(k)];
      da2.v[static_cast<size_t>(d)] += fw[d * K + k] * dz[static_cast<size_t>(k)];
    }
  for (size_t i = 0; i < da2.v.size(); ++i) if (a2.v[i] <= 0) da2.v[i] = 0;
  std::vector<double> dw2, db2, dw1, db1;
  Img da1 = ConvBack(a1, p[2].value, da2, 2, 1, dw2, db2);
  for (size_t i = 0; i < da1.v.size(); ++i) if (a1.v[i] <= 0) da1.v[i] = 0;
  ConvBack(x, p[0].value, da1, 1, 1, dw1, db1);

  std::vector<double> dummy;
  for (const auto* part : {&dw1, &db1, &dw2, &db2, &dfw, &dfb})
    dummy.insert(dummy.end(), part->begin(), part->end());
  const std::vector<double> obs = observed.Flatten();
  double dot = 0, na = 0, nb = 0;
  for (size_t i = 0; i < obs.size(); ++i) {
    dot += dummy[i] * obs[i];
    na += dummy[i] * dummy[i];
    nb += obs[i] * obs[i];
  }
  return -dot / (std::sqrt(na) * std::sqrt(nb));
}

// ---- fixtures ----

struct Scenario {
  Scenario(int64_t size, uint64_t seed, int label = 3) {
    ClassifierSpec spec;
    spec.height = spec.width = size;
    spec.seed = seed;
    victim = Classifier::Build(spec);
    std::mt19937_64 rng(seed + 100);
    batch.images = RandomTensor({1, 1, size, size}, rng, 0.0, 1.0);
    batch.labels = {label};
    observed = ComputeGradients(victim, batch);
    target = AttackTarget{&victim, &observed, {label}, DefenseConfig{}};
  }
  Scenario(const Scenario&) = delete;

  Classifier victim;
  GradientSet observed;
  PrivateBatch batch;
  AttackTarget target;
};

std::vector<ArchGenome> RandomGenomes(size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<ArchGenome> out;
  for (size_t i = 0; i < n; ++i) out.push_back(SampleGenome(rng, SampleMode::kFull, ArchGenome::Baseline()));
  return out;
}

TEST(InitialLossTest, ExactImageGivesMinusOne) {
  Scenario s(16, 1);
  ad::Graph g;
  const double loss = GradientMatchingLoss(g, g.constant(s.batch.images), s.target, false).value().item();
  EXPECT_NEAR(loss, -1.0, 1e-12);
}

TEST(InitialLossTest, RepeatIsBitIdentical) {
  Scenario s(16, 2);
  const Decoder d = Decoder::Build(RandomGenomes(1, 5)[0], {1, 16, 2, 2}, {1, 1, 16, 16});
  const Tensor z = SampleLatent({1, 16, 2, 2}, 9);
  const double a = InitialLoss(d, z, s.target);
  const double b = InitialLoss(d, z, s.target);
  EXPECT_EQ(std::memcmp(&a, &b, sizeof(double)), 0);
  EXPECT_GE(a, -1.0);
  EXPECT_LE(a, 1.0);
}

TEST(InitialLossTest, MatchesStraightLineReference) {
  for (uint64_t seed : {1u, 2u, 3u}) {
    Scenario s(8, seed, static_cast<int>(seed));
    ArchGenome g = ArchGenome::Baseline(1, {3});
    g.latent_channels = 2;
    g.upsample[0] = UpsampleConfig::Parse("nearest,conv2d,relu,1,1");
    g.init_seed = seed * 7;
    const Decoder d = Decoder::Build(g, {1, 2, 4, 4}, {1, 1, 8, 8});
    ASSERT_EQ(d.parameters().size(), 8u);
    const Tensor z = SampleLatent({1, 2, 4, 4}, seed);
    const double want = ReferenceLoss(d.parameters(), z, s.victim, static_cast<int>(seed), s.observed);
    EXPECT_NEAR(InitialLoss(d, z, s.target), want, 1e-10);
  }
}

TEST(SelectOptimalTest, ArgminExamples) {
  EXPECT_EQ(ArgminLowestIndex(std::vector<double>{0.5, -0.2, 0.1}), 1u);
  EXPECT_EQ(ArgminLowestIndex(std::vector<double>{0.3, 0.3}), 0u);
  EXPECT_THROW(ArgminLowestIndex(std::vector<double>{}), Error);
  EXPECT_THROW(ArgminLowestIndex(std::vector<double>{0.1, NAN}), Error);
}

TEST(SelectOptimalTest, EmptyListIsAnError) {
  Scenario s(16, 1);
  EXPECT_THROW(SelectOptimal({}, SampleLatent({1, 16, 2, 2}, 1), {1, 1, 16, 16}, s.target), Error);
}

TEST(SelectOptimalTest, EqualsExhaustiveArgminOverFiftyGenomes) {
  Scenario s(16, 4);
  const auto genomes = RandomGenomes(50, 77);
  const Tensor z = SampleLatent({1, 16, 2, 2}, 3);
  const Selection sel = SelectOptimal(genomes, z, {1, 1, 16, 16}, s.target);
  ASSERT_EQ(sel.scores.size(), 50u);
  std::vector<double> again;
  for (const auto& g : genomes) {
    again.push_back(InitialLoss(Decoder::Build(g, z.shape(), {1, 1, 16, 16}), z, s.target));
  }
  const size_t best = static_cast<size_t>(std::min_element(again.begin(), again.end()) - again.begin());
  EXPECT_EQ(sel.index, best);
  for (size_t i = 0; i < again.size(); ++i) {
    EXPECT_EQ(sel.scores[i].genome_id, i);
    EXPECT_EQ(sel.scores[i].initial_loss, again[i]);
  }
  // Pure function of its inputs.
  const Selection sel2 = SelectOptimal(genomes, z, {1, 1, 16, 16}, s.target);
  EXPECT_EQ(sel2.index, sel.index);
}

TEST(SelectOptimalTest, PositiveRescalingKeepsSelection) {
  Scenario s(16, 6);
  const auto genomes = RandomGenomes(12, 8);
  const Tensor z = SampleLatent({1, 16, 2, 2}, 4);
  const Selection a = SelectOptimal(genomes, z, {1, 1, 16, 16}, s.target);
  GradientSet scaled = s.observed;
  for (Tensor& t : scaled.tensors)
    for (double& v : t.data()) v *= 37.5;
  AttackTarget t2 = s.target;
  t2.observed = &scaled;
  const Selection b = SelectOptimal(genomes, z, {1, 1, 16, 16}, t2);
  EXPECT_EQ(a.index, b.index);
  for (size_t i = 0; i < a.scores.size(); ++i)
    EXPECT_NEAR(a.scores[i].initial_loss, b.scores[i].initial_loss, 1e-12);
}

TEST(KendallTauTest, Examples) {
  const std::vector<double> inc{1, 2, 3, 4, 5};
  const std::vector<double> dec{5, 4, 3, 2, 1};
  EXPECT_DOUBLE_EQ(KendallTau(inc, inc), 1.0);
  EXPECT_DOUBLE_EQ(KendallTau(inc, dec), -1.0);
  EXPECT_NEAR(KendallTau(std::vector<double>{1, 2, 3}, std::vector<double>{1, 3, 2}), 1.0 / 3.0, 1e-15);
  // One tie in a: 2 concordant pairs, 2 untied in a, 3 untied in b.
  EXPECT_NEAR(KendallTau(std::vector<double>{1, 1, 2}, std::vector<double>{1, 2, 3}),
              2.0 / std::sqrt(6.0), 1e-15);
}

TEST(KendallTauTest, SymmetricAndMonotoneInvariant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(15), b(15), ea(15), cb(15);
    for (size_t i = 0; i < a.size(); ++i) {
      a[i] = u(rng);
      b[i] = a[i] + u(rng);
      ea[i] = std::exp(a[i]);
      cb[i] = b[i] * b[i] * b[i];
    }
    const double tau = KendallTau(a, b);
    EXPECT_DOUBLE_EQ(KendallTau(b, a), tau);
    EXPECT_DOUBLE_EQ(KendallTau(ea, cb), tau);
    EXPECT_GE(tau, -1.0);
    EXPECT_LE(tau, 1.0);
  }
}

TEST(KendallTauTest, Errors) {
  EXPECT_THROW(KendallTau(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), Error);
  EXPECT_THROW(KendallTau(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), Error);
  EXPECT_THROW(KendallTau(std::vector<double>{1}, std::vector<double>{1}), Error);
}

TEST(CandidateCsvTest, Format) {
  std::ostringstream os;
  const std::vector<CandidateScore> scores{{0, -0.5}, {1, 0.25}};
  WriteCandidateCsv(os, scores);
  EXPECT_EQ(os.str(), "genome_id,initial_loss\n0,-0.5\n1,0.25\n");
}

}  // namespace
}  // namespace ginas
