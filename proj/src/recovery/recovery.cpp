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

#include "recovery/recovery.hpp"

#include <cmath>
#include <iomanip>
#include <limits>

#include "core/error.hpp"
#include "core/ops.hpp"

namespace ginas {
namespace {

double MatchingLoss(const Decoder& decoder, std::span<const Tensor> params, const Tensor& z0,
                    const AttackTarget& target) {
  ad::Graph graph;
  std::vector<ad::Var> phi;
  for (const Tensor& t : params) phi.push_back(graph.constant(t));
  const ad::Var x = decoder.Forward(graph.constant(z0), phi);
  return GradientMatchingLoss(graph, x, target, false).value().item();
}

Tensor Reconstruct(const Decoder& decoder, std::span<const Tensor> params, const Tensor& z0) {
  ad::Graph graph;
  ad::GradModeGuard no_grad(graph, false);
  std::vector<ad::Var> phi;
  for (const Tensor& t : params) phi.push_back(graph.constant(t));
  return decoder.Forward(graph.constant(z0), phi).value();
}

}  // namespace

void AdamStep(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state,
              const AdamOptions& opts) {
  Require(params.size() == grads.size(), ErrorCode::kShapeMismatch,
          "adam: parameter and gradient counts differ");
  if (state.step == 0 && state.m.empty()) {
    for (const Tensor& p : params) {
      state.m.emplace_back(p.shape(), 0.0);
      state.v.emplace_back(p.shape(), 0.0);
    }
  }
  Require(state.m.size() == params.size(), ErrorCode::kShapeMismatch,
          "adam: state does not match parameters");
  for (size_t i = 0; i < params.size(); ++i) {
    Require(SameShape(params[i], grads[i]) && SameShape(params[i], state.m[i]),
            ErrorCode::kShapeMismatch,
            "adam: shape mismatch at parameter " + std::to_string(i));
  }
  state.step += 1;
  const double b1 = opts.beta1, b2 = opts.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (size_t i = 0; i < params.size(); ++i) {
    double* p = params[i].raw();
    const double* g = grads[i].raw();
    double* m = state.m[i].raw();
    double* v = state.v[i].raw();
    for (int64_t k = 0; k < params[i].numel(); ++k) {
      double gk = g[k];
      if (opts.signed_gradient) gk = gk > 0 ? 1.0 : (gk < 0 ? -1.0 : 0.0);
      m[k] = b1 * m[k] + (1.0 - b1) * gk;
      v[k] = b2 * v[k] + (1.0 - b2) * gk * gk;
      const double mhat = m[k] / c1, vhat = v[k] / c2;
      p[k] -= opts.learning_rate * mhat / (std::sqrt(vhat) + opts.epsilon);
    }
  }
}

void RecoveryOptions::Validate() const {
  Require(adam.learning_rate > 0, ErrorCode::kInvalidArgument, "learning rate must be > 0");
  Require(iterations >= 0, ErrorCode::kInvalidArgument, "iterations must be >= 0");
  Require(trace_stride >= 1, ErrorCode::kInvalidArgument, "trace stride must be >= 1");
  Require(adam.beta1 >= 0 && adam.beta1 < 1 && adam.beta2 >= 0 && adam.beta2 < 1 &&
              adam.epsilon > 0,
          ErrorCode::kInvalidArgument, "invalid Adam hyperparameters");
}

std::vector<Tensor> MatchingLossGradient(const Decoder& decoder, std::span<const Tensor> params,
                                         const Tensor& z0, const AttackTarget& target,
                                         double* loss) {
  ad::Graph graph;
  std::vector<ad::Var> phi;
  for (const Tensor& t : params) phi.push_back(graph.variable(t));
  const ad::Var x = decoder.Forward(graph.constant(z0), phi);
  const ad::Var l = GradientMatchingLoss(graph, x, target, true);
  if (loss != nullptr) *loss = l.value().item();
  const auto r = ad::grad(l, phi, false);
  std::vector<Tensor> out;
  out.reserve(r.grads.size());
  for (const auto& g : r.grads) out.push_back(g.value());
  return out;
}

RecoveryResult Recover(const Decoder& decoder, const Tensor& z0, const AttackTarget& target,
                       const RecoveryOptions& opts, const StepCallback& on_step) {
  opts.Validate();
  RecoveryResult result;
  for (const auto& p : decoder.parameters()) result.parameters.push_back(p.value);
  AdamState state;

  auto abort = [&](int64_t step, double loss) {
    result.ok = false;
    result.error = "non-finite loss " + std::to_string(loss) + " at step " + std::to_string(step);
  };

  for (int64_t step = 0; step < opts.iterations; ++step) {
    double loss = 0.0;
    const auto grads = MatchingLossGradient(decoder, result.parameters, z0, target, &loss);
    if (!std::isfinite(loss)) {
      result.trace.push_back({step, loss});
      abort(step, loss);
      break;
    }
    if (step % opts.trace_stride == 0) result.trace.push_back({step, loss});
    if (on_step) on_step(step, loss);
    AdamStep(result.parameters, grads, state, opts.adam);
  }
  if (result.ok) {
    const double final_loss = MatchingLoss(decoder, result.parameters, z0, target);
    result.trace.push_back({opts.iterations, final_loss});
    if (!std::isfinite(final_loss)) abort(opts.iterations, final_loss);
  }
  result.reconstruction = Reconstruct(decoder, result.parameters, z0);
  uint64_t h = kChecksumInit;
  for (const Tensor& t : result.parameters) h = ChecksumUpdate(h, t);
  result.parameter_checksum = h;
  return result;
}

void WriteLossTraceCsv(std::ostream& os, std::span<const TracePoint> trace) {
  os << "step,loss\n";
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& t : trace) os << t.step << ',' << t.loss << '\n';
}

}  // namespace ginas
