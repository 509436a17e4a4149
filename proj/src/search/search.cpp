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

#include "search/search.hpp"

#include <cmath>
#include <iomanip>
#include <limits>

#include "core/error.hpp"
#include "core/ops.hpp"

namespace ginas {

ad::Var GradientMatchingLoss(ad::Graph& graph, const ad::Var& images, const AttackTarget& target,
                             bool create_graph) {
  Require(target.victim != nullptr && target.observed != nullptr, ErrorCode::kInvalidArgument,
          "attack target is incomplete");
  const auto theta = target.victim->Bind(graph);
  const auto dummy =
      ParameterGradients(*target.victim, theta, images, target.labels, create_graph);
  const auto estimated = EstimateTransform(dummy, *target.observed, target.defense);
  std::vector<ad::Var> observed;
  observed.reserve(target.observed->tensors.size());
  for (const Tensor& t : target.observed->tensors) observed.push_back(graph.constant(t));
  return ad::cosine_distance(estimated, observed);
}

double InitialLoss(const Decoder& decoder, const Tensor& z0, const AttackTarget& target) {
  ad::Graph graph;
  const auto phi = decoder.Bind(graph, false);
  const ad::Var images = decoder.Forward(graph.constant(z0), phi);
  const double loss = GradientMatchingLoss(graph, images, target, false).value().item();
  Require(std::isfinite(loss), ErrorCode::kNumerical, "initial loss is not finite");
  return loss;
}

size_t ArgminLowestIndex(std::span<const double> values) {
  Require(!values.empty(), ErrorCode::kInvalidArgument, "argmin of an empty list");
  size_t best = 0;
  for (size_t i = 0; i < values.size(); ++i) {
    Require(!std::isnan(values[i]), ErrorCode::kNumerical, "NaN score");
    if (values[i] < values[best]) best = i;
  }
  return best;
}

Selection SelectOptimal(std::span<const ArchGenome> genomes, const Tensor& z0,
                        const Shape& out_shape, const AttackTarget& target) {
  Require(!genomes.empty(), ErrorCode::kInvalidArgument, "no candidate genomes");
  Selection sel;
  std::vector<double> losses;
  for (size_t i = 0; i < genomes.size(); ++i) {
    const Decoder d = Decoder::Build(genomes[i], z0.shape(), out_shape);
    losses.push_back(InitialLoss(d, z0, target));
    sel.scores.push_back({i, losses.back()});
  }
  sel.index = ArgminLowestIndex(losses);
  return sel;
}

double KendallTau(std::span<const double> a, std::span<const double> b) {
  Require(a.size() == b.size(), ErrorCode::kShapeMismatch, "kendall tau needs equal lengths");
  Require(a.size() >= 2, ErrorCode::kInvalidArgument, "kendall tau needs at least 2 items");
  double concordant = 0, discordant = 0, ties_a = 0, ties_b = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    for (size_t j = i + 1; j < a.size(); ++j) {
      const double da = a[j] - a[i], db = b[j] - b[i];
      if (da == 0 && db == 0) continue;
      if (da == 0) {
        ties_a += 1;
      } else if (db == 0) {
        ties_b += 1;
      } else if ((da > 0) == (db > 0)) {
        concordant += 1;
      } else {
        discordant += 1;
      }
    }
  }
  const double n_a = concordant + discordant + ties_b;  // pairs untied in a
  const double n_b = concordant + discordant + ties_a;  // pairs untied in b
  Require(n_a > 0 && n_b > 0, ErrorCode::kDomain, "kendall tau undefined for constant input");
  return (concordant - discordant) / std::sqrt(n_a * n_b);
}

void WriteCandidateCsv(std::ostream& os, std::span<const CandidateScore> scores) {
  os << "genome_id,initial_loss\n";
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& s : scores) os << s.genome_id << ',' << s.initial_loss << '\n';
}

}  // namespace ginas
