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
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/ops.hpp"
#include "core/seeding.hpp"
#include "harness/experiment.hpp"

namespace ginas {
namespace {

using ad::Var;
using Fn = std::function<Var(ad::Graph&, const std::vector<Var>&)>;

Tensor Uniform(const Shape& shape, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(shape);
  for (double& v : t.data()) v = u(rng);
  return t;
}

double Eval(const Fn& f, const std::vector<Tensor>& in) {
  ad::Graph g;
  std::vector<Var> vars;
  for (const Tensor& t : in) vars.push_back(g.variable(t));
  return f(g, vars).value().item();
}

// Relative L2 error of the analytic gradient of `f` w.r.t. input `which`
// against central differences.
double CheckInput(const Fn& f, std::vector<Tensor> in, size_t which, double h) {
  ad::Graph g;
  std::vector<Var> vars;
  for (const Tensor& t : in) vars.push_back(g.variable(t));
  const Var wrt[] = {vars[which]};
  const auto r = ad::grad(f(g, vars), wrt, false);
  const Tensor analytic = r.grads[0].value();
  double num = 0, den = 0;
  for (int64_t i = 0; i < in[which].numel(); ++i) {
    const double x0 = in[which][i];
    in[which][i] = x0 + h;
    const double fp = Eval(f, in);
    in[which][i] = x0 - h;
    const double fm = Eval(f, in);
    in[which][i] = x0;
    const double fd = (fp - fm) / (2 * h);
    num += (fd - analytic[i]) * (fd - analytic[i]);
    den += fd * fd;
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

Var Project(ad::Graph& g, const Var& x, std::mt19937_64& rng) {
  return ad::sum(ad::mul(x, g.constant(Uniform(x.shape(), rng, -1, 1))));
}

}  // namespace

GradcheckOutcome RunGradcheck(uint64_t seed, int instances) {
  Require(instances >= 1, ErrorCode::kInvalidArgument, "need at least one instance");
  GradcheckOutcome out;
  out.instances = instances;
  constexpr double kFirstH = 1e-6, kSecondH = 1e-5;

  for (int k = 0; k < instances; ++k) {
    std::mt19937_64 rng(DeriveSeed(seed, "gradcheck", static_cast<uint64_t>(k)));
    const uint64_t probe_seed = rng();
    auto first = [&](const Fn& f, const std::vector<Tensor>& in) {
      for (size_t i = 0; i < in.size(); ++i) {
        out.first_order_max = std::max(out.first_order_max, CheckInput(f, in, i, kFirstH));
      }
    };
    auto probe = [probe_seed](ad::Graph& g, const Var& x) {
      std::mt19937_64 r(probe_seed);
      return Project(g, x, r);
    };

    // Convolution with stride, padding, dilation and groups.
    const int64_t groups = 1 + k % 2, stride = 1 + (k / 2) % 2, dil = 1 + (k % 3 == 2);
    first(
        [&](ad::Graph& g, const std::vector<Var>& v) {
          return probe(g, ad::conv2d(v[0], v[1], v[2], {stride, dil, dil, groups}));
        },
        {Uniform({2, 2, 5, 5}, rng, -1, 1), Uniform({4, 2 / groups, 3, 3}, rng, -1, 1),
         Uniform({4}, rng, -1, 1)});
    // Linear layer into cross-entropy.
    const Tensor onehot = [&] {
      Tensor t(Shape{3, 4}, 0.0);
      for (int64_t b = 0; b < 3; ++b) t[b * 4 + static_cast<int64_t>(rng() % 4)] = 1.0;
      return t;
    }();
    first(
        [&](ad::Graph&, const std::vector<Var>& v) {
          return ad::softmax_cross_entropy(ad::linear(v[0], v[1], v[2]), onehot);
        },
        {Uniform({3, 5}, rng, -1, 1), Uniform({5, 4}, rng, -1, 1), Uniform({4}, rng, -1, 1)});
    // Activations.
    first(
        [&](ad::Graph& g, const std::vector<Var>& v) {
          return ad::add(probe(g, ad::sigmoid(v[0])),
                         ad::add(probe(g, ad::leaky_relu(v[0], 0.2)), probe(g, ad::prelu(v[0], v[1]))));
        },
        {Uniform({2, 3, 4, 4}, rng, -2, 2), Uniform({3}, rng, 0, 0.5)});
    // Resampling.
    first(
        [&](ad::Graph& g, const std::vector<Var>& v) {
          Var up = ad::resample2x(v[0], ad::ResampleDirection::kUp, ad::Interp::kBicubic);
          Var bl = ad::resample2x(v[0], ad::ResampleDirection::kUp, ad::Interp::kBilinear);
          Var dn = ad::resample2x(bl, ad::ResampleDirection::kDown, ad::Interp::kBilinear);
          return ad::add(probe(g, up), probe(g, dn));
        },
        {Uniform({1, 2, 4, 6}, rng, -1, 1)});
    // Cosine distance.
    first(
        [&](ad::Graph&, const std::vector<Var>& v) {
          const Var a[] = {v[0], v[1]};
          const Var b[] = {v[2], v[3]};
          return ad::cosine_distance(a, b);
        },
        {Uniform({3, 2}, rng, -1, 1), Uniform({4}, rng, -1, 1), Uniform({3, 2}, rng, -1, 1),
         Uniform({4}, rng, -1, 1)});

    // Grad-of-grad: d/dx cosine(dL/dtheta(x), target).
    const int act = k % 3;
    const Tensor x = Uniform({1, 1, 6, 6}, rng, 0, 1);
    const Tensor w = Uniform({3, 1, 3, 3}, rng, -0.5, 0.5);
    const Tensor b = Uniform({3}, rng, -0.1, 0.1);
    const Tensor slope = Uniform({3}, rng, 0.1, 0.4);
    const Tensor fw = Uniform({3 * 36, 4}, rng, -0.2, 0.2);
    const Tensor fb = Uniform({4}, rng, -0.1, 0.1);
    Tensor label(Shape{1, 4}, 0.0);
    label[static_cast<int64_t>(rng() % 4)] = 1.0;
    std::vector<Tensor> targets;
    for (const Tensor* t : {&w, &b, &fw, &fb}) targets.push_back(Uniform(t->shape(), rng, -1, 1));
    const Fn second = [&](ad::Graph& g, const std::vector<Var>& v) {
      std::vector<Var> theta = {g.variable(w), g.variable(b), g.variable(fw), g.variable(fb)};
      Var h = ad::conv2d(v[0], theta[0], theta[1], {1, 1, 1, 1});
      h = act == 0 ? ad::sigmoid(h) : act == 1 ? ad::leaky_relu(h, 0.2) : ad::prelu(h, g.constant(slope));
      const Var logits = ad::linear(ad::reshape(h, {1, 3 * 36}), theta[2], theta[3]);
      const Var loss = ad::softmax_cross_entropy(logits, label);
      const auto r = ad::grad(loss, theta, true);
      std::vector<Var> tv;
      for (const Tensor& t : targets) tv.push_back(g.constant(t));
      return ad::cosine_distance(r.grads, tv);
    };
    out.second_order_max = std::max(out.second_order_max, CheckInput(second, {x}, 0, kSecondH));
  }
  out.report.Set("gradcheck.instances", static_cast<int64_t>(instances));
  out.report.Set("gradcheck.first_order_max_rel_err", out.first_order_max);
  out.report.Set("gradcheck.second_order_max_rel_err", out.second_order_max);
  out.report.Set("gradcheck.first_order_pass", static_cast<int64_t>(out.first_order_max < 1e-6));
  out.report.Set("gradcheck.second_order_pass", static_cast<int64_t>(out.second_order_max < 1e-4));
  return out;
}

}  // namespace ginas
