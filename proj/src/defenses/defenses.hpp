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

#ifndef GINAS_DEFENSES_DEFENSES_HPP_
#define GINAS_DEFENSES_DEFENSES_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/graph.hpp"
#include "victim/victim.hpp"

namespace ginas {

enum class DefenseKind { kNone, kGaussianNoise, kClipping, kSparsification };

struct DefenseConfig {
  DefenseKind kind = DefenseKind::kNone;
  double sigma = 0.1;        // gaussian noise std
  double bound = 4.0;        // clipping L2 bound
  double prune_rate = 0.9;   // fraction of coordinates zeroed
  bool per_layer = false;    // sparsify each tensor separately
  uint64_t seed = 0;

  void Validate() const;
  // Compact form used on the command line: none | noise:<sigma> |
  // clip:<bound> | sparsify:<rate>[:per_layer].
  std::string ToString() const;
  static DefenseConfig Parse(const std::string& text);
};

// Number of coordinates that survive sparsification of a d-vector.
int64_t SparsificationKeepCount(int64_t d, double prune_rate);

// Victim-side perturbation of the uploaded gradients.
GradientSet ApplyDefense(const GradientSet& gradients, const DefenseConfig& cfg);

// Attacker-side surrogate of the defense applied to differentiable dummy
// gradients. Noise cannot be estimated and maps to the identity; clipping
// reuses the norm rule; sparsification copies the observed zero pattern.
std::vector<ad::Var> EstimateTransform(std::span<const ad::Var> dummy,
                                       const GradientSet& observed,
                                       const DefenseConfig& cfg);

}  // namespace ginas

#endif  // GINAS_DEFENSES_DEFENSES_HPP_
