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

#ifndef GINAS_TESTS_TEST_UTIL_HPP_
#define GINAS_TESTS_TEST_UTIL_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "core/graph.hpp"
#include "core/ops.hpp"
#include "core/tensor.hpp"

namespace ginas::testing {

inline Tensor RandomTensor(const Shape& shape, std::mt19937_64& rng,
                           double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(shape);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

// |a - b|_2 / max(|b|_2, tiny)
inline double RelErr(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

inline double MaxAbsDiff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (int64_t i = 0; i < a.numel(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

// Scalar function of several input tensors, built on a fresh graph.
using ScalarFn = std::function<ad::Var(ad::Graph&, const std::vector<ad::Var>&)>;

inline double Evaluate(const ScalarFn& f, const std::vector<Tensor>& inputs) {
  ad::Graph g;
  std::vector<ad::Var> vars;
  for (const Tensor& t : inputs) vars.push_back(g.variable(t));
  return f(g, vars).value().item();
}

// Analytic gradient w.r.t. input `which`, flattened.
inline std::vector<double> AnalyticGrad(const ScalarFn& f,
                                        const std::vector<Tensor>& inputs,
                                        size_t which) {
  ad::Graph g;
  std::vector<ad::Var> vars;
  for (const Tensor& t : inputs) vars.push_back(g.variable(t));
  ad::Var out = f(g, vars);
  const ad::Var wrt[] = {vars[which]};
  auto r = ad::grad(out, wrt, false);
  const auto d = r.grads[0].value().data();
  return {d.begin(), d.end()};
}

// Central finite differences w.r.t. input `which`.
inline std::vector<double> NumericGrad(const ScalarFn& f,
                                       std::vector<Tensor> inputs, size_t which,
                                       double h = 1e-6) {
  std::vector<double> out(static_cast<size_t>(inputs[which].numel()));
  for (int64_t i = 0; i < inputs[which].numel(); ++i) {
    const double x0 = inputs[which][i];
    inputs[which][i] = x0 + h;
    const double fp = Evaluate(f, inputs);
    inputs[which][i] = x0 - h;
    const double fm = Evaluate(f, inputs);
    inputs[which][i] = x0;
    out[static_cast<size_t>(i)] = (fp - fm) / (2.0 * h);
  }
  return out;
}

inline double GradCheck(const ScalarFn& f, const std::vector<Tensor>& inputs,
                        size_t which, double h = 1e-6) {
  return RelErr(AnalyticGrad(f, inputs, which), NumericGrad(f, inputs, which, h));
}

}  // namespace ginas::testing

#endif  // GINAS_TESTS_TEST_UTIL_HPP_
