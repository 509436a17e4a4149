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

#ifndef GINAS_SEARCH_SEARCH_HPP_
#define GINAS_SEARCH_SEARCH_HPP_

#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include "core/graph.hpp"
#include "core/tensor.hpp"
#include "defenses/defenses.hpp"
#include "nas/nas.hpp"
#include "victim/victim.hpp"

namespace ginas {

// What the attacker knows: the victim weights, the observed (possibly
// defended) gradients, the inferred labels and the defense in force.
struct AttackTarget {
  const Classifier* victim = nullptr;
  const GradientSet* observed = nullptr;
  std::vector<int> labels;
  DefenseConfig defense;
};

// Cosine distance between the transformed dummy gradients of `images` and
// the observed gradients. With create_graph the result is differentiable
// w.r.t. whatever produced `images`.
ad::Var GradientMatchingLoss(ad::Graph& graph, const ad::Var& images, const AttackTarget& target,
                             bool create_graph);

// Loss of a freshly initialized decoder; no parameter is updated.
double InitialLoss(const Decoder& decoder, const Tensor& z0, const AttackTarget& target);

struct CandidateScore {
  size_t genome_id = 0;
  double initial_loss = 0.0;
};

struct Selection {
  size_t index = 0;
  std::vector<CandidateScore> scores;
};

// Lowest index among the minima. Throws on empty input or NaN.
size_t ArgminLowestIndex(std::span<const double> values);

Selection SelectOptimal(std::span<const ArchGenome> genomes, const Tensor& z0,
                        const Shape& out_shape, const AttackTarget& target);

// Tie-adjusted Kendall tau (tau-b).
double KendallTau(std::span<const double> a, std::span<const double> b);

// Header "genome_id,initial_loss", one row per candidate.
void WriteCandidateCsv(std::ostream& os, std::span<const CandidateScore> scores);

}  // namespace ginas

#endif  // GINAS_SEARCH_SEARCH_HPP_
