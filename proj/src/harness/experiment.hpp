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

#ifndef GINAS_HARNESS_EXPERIMENT_HPP_
#define GINAS_HARNESS_EXPERIMENT_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/error.hpp"
#include "defenses/defenses.hpp"
#include "nas/nas.hpp"
#include "recovery/recovery.hpp"
#include "victim/victim.hpp"

namespace ginas {

enum class DatasetKind { kSynthetic, kCifar10, kImageDir };

enum class SearchMode { kFixedGenome, kFull, kUpsampleOnly, kConnectionOnly };

const char* SearchModeName(SearchMode mode);

struct ExperimentConfig {
  DatasetKind dataset = DatasetKind::kSynthetic;
  std::string data_path;
  std::vector<int64_t> indices;  // cifar10; empty means 0..batch-1
  int64_t image_size = 16;       // synthetic
  int64_t channels = 1;          // synthetic
  ClassifierKind victim = ClassifierKind::kTinyConvNet;
  int64_t classes = 10;
  int64_t batch = 1;
  DefenseConfig defense;
  SearchMode mode = SearchMode::kFull;
  int64_t n = 50;
  int levels = 3;
  std::vector<int64_t> widths = {16, 32, 64};
  int64_t latent_channels = 16;
  bool force_same_scale = false;
  std::string genome_file;  // fixed_genome; empty means the baseline
  RecoveryOptions recovery;
  uint64_t seed = 0;
  std::string out_dir;  // empty: nothing written

  // String interface shared by the CLI, the C API and report replay.
  void Set(const std::string& key, const std::string& value);
  std::string Get(const std::string& key) const;
  void Validate() const;

  struct KeyInfo {
    const char* key;
    const char* help;
  };
  static const std::vector<KeyInfo>& Keys();

  // "config.<key>=<value>" lines.
  std::string Echo() const;
  // Reads the config.* lines of a report (other lines are ignored).
  static ExperimentConfig FromReport(const std::string& text);
};

// Ordered key=value record.
class Report {
 public:
  void Set(const std::string& key, const std::string& value);
  void Set(const std::string& key, double value);
  void Set(const std::string& key, int64_t value);
  std::optional<std::string> Get(const std::string& key) const;
  double GetDouble(const std::string& key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string ToText() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::string FormatDouble(double v);

struct AttackOutcome {
  Report report;
  bool ok = true;
  ErrorCode error_code = ErrorCode::kInvalidArgument;
  std::vector<CandidateScore> scores;
  std::vector<TracePoint> trace;
  Tensor reconstruction;
  Tensor truth;
};

// Load, gradients, defense, label inference, search, recovery, alignment and
// metrics. Stage failures are recorded under error.* rather than thrown.
AttackOutcome RunAttack(const ExperimentConfig& config);

struct DiagnosticRow {
  size_t genome_id = 0;
  double initial_loss = 0.0;
  double final_psnr = 0.0;
  double final_ssim = 0.0;
};

struct DiagnosticOutcome {
  Report report;
  bool ok = true;
  ErrorCode error_code = ErrorCode::kInvalidArgument;
  std::vector<DiagnosticRow> rows;
  size_t selected = 0;
  double kendall_tau = 0.0;
};

// Scores n candidates, then fully recovers every one of them on the same
// batch and relates initial loss to final PSNR.
DiagnosticOutcome RunSearchDiagnostic(const ExperimentConfig& config);

struct GradcheckOutcome {
  Report report;
  double first_order_max = 0.0;
  double second_order_max = 0.0;
  int instances = 0;
};

// Random-instance finite-difference checks of first-order op gradients and
// of a grad-of-grad through conv, activation, linear, cross-entropy and
// cosine distance.
GradcheckOutcome RunGradcheck(uint64_t seed, int instances);

}  // namespace ginas

#endif  // GINAS_HARNESS_EXPERIMENT_HPP_
