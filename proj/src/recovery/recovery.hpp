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

#ifndef GINAS_RECOVERY_RECOVERY_HPP_
#define GINAS_RECOVERY_RECOVERY_HPP_

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "core/tensor.hpp"
#include "nas/nas.hpp"
#include "search/search.hpp"

namespace ginas {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Replace the gradient by its elementwise sign before the moment updates.
  bool signed_gradient = true;
};

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  int64_t step = 0;
};

// One bias-corrected Adam update in place. Moments are zero-initialized on
// the first call.
void AdamStep(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state,
              const AdamOptions& opts);

struct RecoveryOptions {
  AdamOptions adam;
  int64_t iterations = 2000;
  int64_t trace_stride = 1;
  void Validate() const;
};

struct TracePoint {
  int64_t step = 0;
  double loss = 0.0;
};

struct RecoveryResult {
  Tensor reconstruction;
  // Loss at every trace_stride-th step before its update, plus the loss of
  // the final parameters at step == iterations.
  std::vector<TracePoint> trace;
  std::vector<Tensor> parameters;
  uint64_t parameter_checksum = 0;
  bool ok = true;
  std::string error;
};

// Optional per-step observer: (step, loss).
using StepCallback = std::function<void(int64_t, double)>;

// Minimizes the gradient-matching loss over the decoder parameters with z0
// held fixed. A non-finite loss stops the run with ok == false and the trace
// collected so far.
RecoveryResult Recover(const Decoder& decoder, const Tensor& z0, const AttackTarget& target,
                       const RecoveryOptions& opts, const StepCallback& on_step = nullptr);

// Gradient of the matching loss w.r.t. the given decoder parameter values.
std::vector<Tensor> MatchingLossGradient(const Decoder& decoder, std::span<const Tensor> params,
                                         const Tensor& z0, const AttackTarget& target,
                                         double* loss = nullptr);

// Header "step,loss".
void WriteLossTraceCsv(std::ostream& os, std::span<const TracePoint> trace);

}  // namespace ginas

#endif  // GINAS_RECOVERY_RECOVERY_HPP_
