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

#include "harness/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

#include "core/error.hpp"
#include "core/seeding.hpp"
#include "harness/dataset.hpp"
#include "harness/image_io.hpp"
#include "metrics/metrics.hpp"
#include "search/search.hpp"

namespace ginas {
namespace {

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) parts.push_back(p);
  return parts;
}

int64_t ToInt(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  Fail(ErrorCode::kInvalidArgument, key + ": expected an integer, got '" + v + "'");
}

uint64_t ToUint(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    if (!v.empty() && v[0] != '-') {
      const unsigned long long x = std::stoull(v, &used);
      if (used == v.size()) return x;
    }
  } catch (const std::exception&) {
  }
  Fail(ErrorCode::kInvalidArgument, key + ": expected an unsigned integer, got '" + v + "'");
}

double ToDouble(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  Fail(ErrorCode::kInvalidArgument, key + ": expected a number, got '" + v + "'");
}

bool ToBool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  Fail(ErrorCode::kInvalidArgument, key + ": expected 0/1/true/false, got '" + v + "'");
}

template <typename T>
std::string JoinList(const std::vector<T>& xs) {
  std::string s;
  for (size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

const char* DatasetName(DatasetKind k) {
  switch (k) {
    case DatasetKind::kSynthetic: return "synthetic";
    case DatasetKind::kCifar10: return "cifar10";
    case DatasetKind::kImageDir: return "image_dir";
  }
  return "?";
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Everything both pipelines share up to candidate scoring.
class Pipeline {
 public:
  explicit Pipeline(const ExperimentConfig& config) : config_(config) {
    report_.Set("status", std::string("running"));
    for (const auto& line : SplitLines(config.Echo())) {
      const size_t eq = line.find('=');
      report_.Set(line.substr(0, eq), line.substr(eq + 1));
    }
  }

  Report& report() { return report_; }
  bool ok() const { return ok_; }
  ErrorCode code() const { return code_; }

  // Runs `fn` as stage `name`; the first failure is recorded and later
  // stages are skipped.
  bool Stage(const std::string& name, const std::function<void()>& fn) {
    if (!ok_) return false;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn();
    } catch (const Error& e) {
      Record(name, e.code(), e.what());
    } catch (const std::exception& e) {
      Record(name, ErrorCode::kNumerical, e.what());
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    timings_.emplace_back("timing." + name + "_s", dt);
    return ok_;
  }

  void Record(const std::string& stage, ErrorCode code, const std::string& message) {
    ok_ = false;
    code_ = code;
    report_.Set("error.stage", stage);
    report_.Set("error.code", std::string(ErrorCodeName(code)));
    report_.Set("error.message", message);
  }

  void Finish() {
    report_.Set("status", std::string(ok_ ? "ok" : "error"));
    for (const auto& [k, v] : timings_) report_.Set(k, v);
  }

  // load -> victim -> gradients -> defense -> labels -> candidate scoring.
  void Prepare(bool allow_fixed) {
    const uint64_t seed = config_.seed;
    Stage("config", [&] {
      config_.Validate();
      Require(allow_fixed || config_.mode != SearchMode::kFixedGenome,
              ErrorCode::kInvalidArgument, "search-diag needs a sampling mode, not fixed_genome");
    });
    Stage("load", [&] {
      switch (config_.dataset) {
        case DatasetKind::kSynthetic:
          batch_ = SyntheticBatch(DeriveSeed(seed, "data"), config_.batch, config_.channels,
                                  config_.image_size, config_.classes);
          break;
        case DatasetKind::kCifar10: {
          std::vector<int64_t> idx = config_.indices;
          if (idx.empty())
            for (int64_t i = 0; i < config_.batch; ++i) idx.push_back(i);
          Require(static_cast<int64_t>(idx.size()) == config_.batch, ErrorCode::kInvalidArgument,
                  "indices must list exactly batch entries");
          batch_ = LoadCifar10(config_.data_path, idx);
          break;
        }
        case DatasetKind::kImageDir:
          batch_ = LoadImageDirectory(config_.data_path, config_.batch, DeriveSeed(seed, "data"),
                                      config_.classes);
          break;
      }
      for (int label : batch_.labels)
        Require(label < config_.classes, ErrorCode::kOutOfRange, "label exceeds class count");
      report_.Set("data.shape", ShapeToString(batch_.images.shape()));
      report_.Set("data.labels", JoinList(batch_.labels));
    });
    Stage("victim", [&] {
      ClassifierSpec spec;
      spec.kind = config_.victim;
      spec.batch = batch_.size();
      spec.channels = batch_.images.dim(1);
      spec.height = batch_.images.dim(2);
      spec.width = batch_.images.dim(3);
      spec.classes = config_.classes;
      spec.seed = DeriveSeed(seed, "victim");
      victim_ = Classifier::Build(spec);
      report_.Set("victim.parameters", victim_.parameter_count());
      report_.Set("victim.checksum", std::to_string(victim_.Checksum()));
    });
    Stage("gradients", [&] { real_ = ComputeGradients(victim_, batch_); });
    Stage("defense", [&] {
      defense_ = config_.defense;
      defense_.seed = DeriveSeed(seed, "defense");
      observed_ = ApplyDefense(real_, defense_);
      double norm = 0;
      for (double v : observed_.Flatten()) norm += v * v;
      report_.Set("defense.observed_norm", std::sqrt(norm));
    });
    Stage("labels", [&] {
      const LabelInference inf = InferLabels(observed_, victim_, batch_.size());
      labels_ = inf.labels;
      std::vector<int> a = labels_, b = batch_.labels;
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      report_.Set("labels.inferred", JoinList(labels_));
      report_.Set("labels.partial", static_cast<int64_t>(inf.partial));
      report_.Set("labels.match", static_cast<int64_t>(a == b));
    });
    Stage("search", [&] {
      const int t = config_.levels;
      const int64_t factor = int64_t{1} << t;
      const int64_t h = batch_.images.dim(2), w = batch_.images.dim(3);
      Require(h % factor == 0 && w % factor == 0, ErrorCode::kShapeMismatch,
              "image sides must be divisible by 2^levels");
      out_shape_ = batch_.images.shape();
      z0_ = SampleLatent({batch_.size(), config_.latent_channels, h / factor, w / factor},
                         DeriveSeed(seed, "latent"));
      ArchGenome base = ArchGenome::Baseline(t, config_.widths);
      base.latent_channels = config_.latent_channels;
      if (config_.mode == SearchMode::kFixedGenome) {
        ArchGenome g = base;
        if (!config_.genome_file.empty()) {
          std::ifstream in(config_.genome_file);
          Require(static_cast<bool>(in), ErrorCode::kIo, "cannot open " + config_.genome_file);
          std::stringstream ss;
          ss << in.rdbuf();
          g = ArchGenome::FromRecord(ss.str());
        } else {
          g.init_seed = DeriveSeed(seed, "fixed_genome");
        }
        genomes_ = {g};
      } else {
        const SampleMode mode = config_.mode == SearchMode::kFull ? SampleMode::kFull
                                : config_.mode == SearchMode::kUpsampleOnly
                                    ? SampleMode::kUpsampleOnly
                                    : SampleMode::kConnectionOnly;
        for (int64_t i = 0; i < config_.n; ++i) {
          std::mt19937_64 rng(DeriveSeed(seed, "candidate", static_cast<uint64_t>(i)));
          genomes_.push_back(SampleGenome(rng, mode, base, config_.force_same_scale));
        }
      }
      target_ = AttackTarget{&victim_, &observed_, labels_, defense_};
      selection_ = SelectOptimal(genomes_, z0_, out_shape_, target_);
      report_.Set("search.candidates", static_cast<int64_t>(genomes_.size()));
      report_.Set("search.selected", static_cast<int64_t>(selection_.index));
      report_.Set("search.selected_loss", selection_.scores[selection_.index].initial_loss);
      std::stringstream rec(genomes_[selection_.index].ToRecord());
      for (std::string line; std::getline(rec, line);) {
        const size_t eq = line.find('=');
        report_.Set("genome." + line.substr(0, eq), line.substr(eq + 1));
      }
    });
  }

  MetricReport Metrics(const Tensor& recon) const { return EvaluateBatch(recon, batch_.images); }

  void SetMetrics(const std::string& prefix, const MetricReport& m) {
    for (size_t i = 0; i < m.psnr.size(); ++i) {
      report_.Set(prefix + "psnr." + std::to_string(i), m.psnr[i]);
      report_.Set(prefix + "ssim." + std::to_string(i), m.ssim[i]);
    }
    report_.Set(prefix + "mean_psnr", m.mean_psnr);
    report_.Set(prefix + "mean_ssim", m.mean_ssim);
    report_.Set(prefix + "permutation", JoinList(m.permutation));
  }

  void WriteText(const std::string& name, const std::string& text) {
    std::ofstream out(std::filesystem::path(config_.out_dir) / name);
    Require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + name + " in " + config_.out_dir);
    out << text;
  }

  void MakeOutDir() {
    std::error_code ec;
    std::filesystem::create_directories(config_.out_dir, ec);
    Require(!ec, ErrorCode::kIo, "cannot create " + config_.out_dir + ": " + ec.message());
  }

  const ExperimentConfig& config() const { return config_; }
  const PrivateBatch& batch() const { return batch_; }
  const std::vector<ArchGenome>& genomes() const { return genomes_; }
  const Selection& selection() const { return selection_; }
  const Tensor& z0() const { return z0_; }
  const Shape& out_shape() const { return out_shape_; }
  const AttackTarget& target() const { return target_; }

 private:
  static std::vector<std::string> SplitLines(const std::string& text) {
    std::vector<std::string> lines;
    std::stringstream ss(text);
    for (std::string l; std::getline(ss, l);) lines.push_back(l);
    return lines;
  }

  ExperimentConfig config_;
  Report report_;
  bool ok_ = true;
  ErrorCode code_ = ErrorCode::kInvalidArgument;
  std::vector<std::pair<std::string, double>> timings_;
  PrivateBatch batch_;
  Classifier victim_;
  GradientSet real_;
  GradientSet observed_;
  DefenseConfig defense_;
  std::vector<int> labels_;
  std::vector<ArchGenome> genomes_;
  Selection selection_;
  Tensor z0_;
  Shape out_shape_;
  AttackTarget target_;
};

}  // namespace

const char* SearchModeName(SearchMode mode) {
  switch (mode) {
    case SearchMode::kFixedGenome: return "fixed_genome";
    case SearchMode::kFull: return "full";
    case SearchMode::kUpsampleOnly: return "upsample_only";
    case SearchMode::kConnectionOnly: return "connection_only";
  }
  return "?";
}

const std::vector<ExperimentConfig::KeyInfo>& ExperimentConfig::Keys() {
  static const std::vector<KeyInfo> keys = {
      {"dataset", "synthetic | cifar10 | image_dir"},
      {"data_path", "CIFAR-10 binary file or image directory"},
      {"indices", "comma-separated CIFAR-10 record indices (default 0..batch-1)"},
      {"image_size", "synthetic image side length"},
      {"channels", "synthetic image channels"},
      {"victim", "tiny_convnet | lenet_zhu_like | mini_resnet"},
      {"classes", "number of victim classes"},
      {"batch", "private batch size B"},
      {"defense", "none | noise:<sigma> | clip:<bound> | sparsify:<rate>[:per_layer]"},
      {"mode", "fixed_genome | full | upsample_only | connection_only"},
      {"n", "number of sampled candidate genomes"},
      {"levels", "encoder/decoder levels t"},
      {"widths", "comma-separated channel widths, one per level"},
      {"latent_channels", "channels of the latent code z0"},
      {"force_same_scale", "0/1: always include same-resolution skips"},
      {"genome_file", "genome record for fixed_genome mode (default: baseline)"},
      {"lr", "Adam learning rate"},
      {"iterations", "recovery steps m"},
      {"signed", "0/1: feed sign(gradient) to Adam"},
      {"trace_stride", "record the loss every k steps"},
      {"seed", "master seed"},
      {"out", "output directory (empty: write nothing)"},
  };
  return keys;
}

void ExperimentConfig::Set(const std::string& key, const std::string& v) {
  if (key == "dataset") {
    if (v == "synthetic") dataset = DatasetKind::kSynthetic;
    else if (v == "cifar10") dataset = DatasetKind::kCifar10;
    else if (v == "image_dir") dataset = DatasetKind::kImageDir;
    else Fail(ErrorCode::kInvalidArgument, "unknown dataset '" + v + "'");
  } else if (key == "data_path") {
    data_path = v;
  } else if (key == "indices") {
    indices.clear();
    for (const auto& p : SplitList(v)) indices.push_back(ToInt(key, p));
  } else if (key == "image_size") {
    image_size = ToInt(key, v);
  } else if (key == "channels") {
    channels = ToInt(key, v);
  } else if (key == "victim") {
    victim = ParseClassifierKind(v);
  } else if (key == "classes") {
    classes = ToInt(key, v);
  } else if (key == "batch") {
    batch = ToInt(key, v);
  } else if (key == "defense") {
    defense = DefenseConfig::Parse(v);
  } else if (key == "mode") {
    if (v == "fixed_genome") mode = SearchMode::kFixedGenome;
    else if (v == "full") mode = SearchMode::kFull;
    else if (v == "upsample_only") mode = SearchMode::kUpsampleOnly;
    else if (v == "connection_only") mode = SearchMode::kConnectionOnly;
    else Fail(ErrorCode::kInvalidArgument, "unknown mode '" + v + "'");
  } else if (key == "n") {
    n = ToInt(key, v);
  } else if (key == "levels") {
    levels = static_cast<int>(ToInt(key, v));
  } else if (key == "widths") {
    widths.clear();
    for (const auto& p : SplitList(v)) widths.push_back(ToInt(key, p));
  } else if (key == "latent_channels") {
    latent_channels = ToInt(key, v);
  } else if (key == "force_same_scale") {
    force_same_scale = ToBool(key, v);
  } else if (key == "genome_file") {
    genome_file = v;
  } else if (key == "lr") {
    recovery.adam.learning_rate = ToDouble(key, v);
  } else if (key == "iterations") {
    recovery.iterations = ToInt(key, v);
  } else if (key == "signed") {
    recovery.adam.signed_gradient = ToBool(key, v);
  } else if (key == "trace_stride") {
    recovery.trace_stride = ToInt(key, v);
  } else if (key == "seed") {
    seed = ToUint(key, v);
  } else if (key == "out") {
    out_dir = v;
  } else {
    Fail(ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
  }
}

std::string ExperimentConfig::Get(const std::string& key) const {
  if (key == "dataset") return DatasetName(dataset);
  if (key == "data_path") return data_path;
  if (key == "indices") return JoinList(indices);
  if (key == "image_size") return std::to_string(image_size);
  if (key == "channels") return std::to_string(channels);
  if (key == "victim") return ClassifierKindName(victim);
  if (key == "classes") return std::to_string(classes);
  if (key == "batch") return std::to_string(batch);
  if (key == "defense") return defense.ToString();
  if (key == "mode") return SearchModeName(mode);
  if (key == "n") return std::to_string(n);
  if (key == "levels") return std::to_string(levels);
  if (key == "widths") return JoinList(widths);
  if (key == "latent_channels") return std::to_string(latent_channels);
  if (key == "force_same_scale") return force_same_scale ? "1" : "0";
  if (key == "genome_file") return genome_file;
  if (key == "lr") return FormatDouble(recovery.adam.learning_rate);
  if (key == "iterations") return std::to_string(recovery.iterations);
  if (key == "signed") return recovery.adam.signed_gradient ? "1" : "0";
  if (key == "trace_stride") return std::to_string(recovery.trace_stride);
  if (key == "seed") return std::to_string(seed);
  if (key == "out") return out_dir;
  Fail(ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
}

void ExperimentConfig::Validate() const {
  Require(batch >= 1 && batch <= kMaxBatch, ErrorCode::kInvalidArgument,
          "batch must be in [1, " + std::to_string(kMaxBatch) + "]");
  Require(classes >= 2, ErrorCode::kInvalidArgument, "need at least 2 classes");
  Require(image_size >= 1 && channels >= 1, ErrorCode::kInvalidArgument, "bad synthetic shape");
  Require(n >= 1, ErrorCode::kInvalidArgument, "n must be >= 1");
  Require(levels >= 1 && static_cast<int>(widths.size()) == levels, ErrorCode::kInvalidArgument,
          "widths must list one entry per level");
  Require(latent_channels >= 1, ErrorCode::kInvalidArgument, "latent_channels must be >= 1");
  Require(dataset == DatasetKind::kSynthetic || !data_path.empty(), ErrorCode::kInvalidArgument,
          "data_path is required for this dataset");
  defense.Validate();
  recovery.Validate();
}

std::string ExperimentConfig::Echo() const {
  std::string s;
  for (const auto& k : Keys()) s += std::string("config.") + k.key + "=" + Get(k.key) + "\n";
  return s;
}

ExperimentConfig ExperimentConfig::FromReport(const std::string& text) {
  ExperimentConfig c;
  std::stringstream ss(text);
  bool any = false;
  for (std::string line; std::getline(ss, line);) {
    if (line.rfind("config.", 0) != 0) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    c.Set(line.substr(7, eq - 7), line.substr(eq + 1));
    any = true;
  }
  Require(any, ErrorCode::kInvalidArgument, "report holds no config.* lines");
  return c;
}

std::string FormatDouble(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

void Report::Set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void Report::Set(const std::string& key, double value) { Set(key, FormatDouble(value)); }

void Report::Set(const std::string& key, int64_t value) { Set(key, std::to_string(value)); }

std::optional<std::string> Report::Get(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  return std::nullopt;
}

double Report::GetDouble(const std::string& key) const {
  const auto v = Get(key);
  Require(v.has_value(), ErrorCode::kInvalidArgument, "report has no key '" + key + "'");
  return ToDouble(key, *v);
}

std::string Report::ToText() const {
  std::string s;
  for (const auto& [k, v] : entries_) s += k + "=" + v + "\n";
  return s;
}

AttackOutcome RunAttack(const ExperimentConfig& config) {
  AttackOutcome out;
  Pipeline p(config);
  p.Prepare(true);
  if (p.ok()) out.scores = p.selection().scores;
  RecoveryResult rec;
  p.Stage("recovery", [&] {
    const Decoder d = Decoder::Build(p.genomes()[p.selection().index], p.z0().shape(), p.out_shape());
    p.report().Set("recovery.decoder_parameters", d.parameter_count());
    rec = Recover(d, p.z0(), p.target(), config.recovery);
    out.trace = rec.trace;
    if (!rec.trace.empty()) {
      p.report().Set("recovery.initial_loss", rec.trace.front().loss);
      p.report().Set("recovery.final_loss", rec.trace.back().loss);
    }
    p.report().Set("recovery.parameter_checksum", std::to_string(rec.parameter_checksum));
    Require(rec.ok, ErrorCode::kNumerical, rec.error);
    out.reconstruction = rec.reconstruction;
  });
  MetricReport metrics;
  p.Stage("metrics", [&] {
    out.truth = p.batch().images;
    metrics = p.Metrics(out.reconstruction);
    p.SetMetrics("metrics.", metrics);
  });
  if (!config.out_dir.empty()) {
    // Written even after a failure so the stage error is on disk.
    const bool earlier_ok = p.ok();
    auto write = [&] {
      p.MakeOutDir();
      std::ostringstream cand, loss;
      WriteCandidateCsv(cand, out.scores);
      WriteLossTraceCsv(loss, out.trace);
      p.WriteText("candidates.csv", cand.str());
      p.WriteText("loss.csv", loss.str());
      if (!earlier_ok) return;
      int64_t clamped = 0;
      const std::string ext = p.batch().images.dim(1) == 3 ? ".ppm" : ".pgm";
      for (int64_t i = 0; i < p.batch().size(); ++i) {
        const auto dir = std::filesystem::path(config.out_dir);
        const int64_t j = metrics.permutation[static_cast<size_t>(i)];
        clamped += WriteImage(BatchImage(out.reconstruction, i),
                              (dir / ("recon_" + std::to_string(i) + ext)).string());
        clamped += WriteImage(BatchImage(p.batch().images, j),
                              (dir / ("original_" + std::to_string(i) + ext)).string());
      }
      p.report().Set("output.clamped", clamped);
    };
    if (earlier_ok) {
      p.Stage("output", write);
    } else {
      try {
        write();
      } catch (const std::exception&) {
      }
    }
  }
  p.Finish();
  out.ok = p.ok();
  out.error_code = p.code();
  if (!config.out_dir.empty()) {
    try {
      p.MakeOutDir();
      p.WriteText("report.txt", p.report().ToText());
    } catch (const Error& e) {
      out.ok = false;
      out.error_code = e.code();
    }
  }
  out.report = p.report();
  return out;
}

DiagnosticOutcome RunSearchDiagnostic(const ExperimentConfig& config) {
  DiagnosticOutcome out;
  Pipeline p(config);
  p.Prepare(false);
  p.Stage("recovery", [&] {
    const auto& scores = p.selection().scores;
    for (size_t i = 0; i < p.genomes().size(); ++i) {
      const Decoder d = Decoder::Build(p.genomes()[i], p.z0().shape(), p.out_shape());
      const RecoveryResult r = Recover(d, p.z0(), p.target(), config.recovery);
      Require(r.ok, ErrorCode::kNumerical, "candidate " + std::to_string(i) + ": " + r.error);
      const MetricReport m = p.Metrics(r.reconstruction);
      out.rows.push_back({i, scores[i].initial_loss, m.mean_psnr, m.mean_ssim});
    }
  });
  p.Stage("metrics", [&] {
    std::vector<double> loss, psnr;
    for (const auto& r : out.rows) {
      loss.push_back(r.initial_loss);
      psnr.push_back(r.final_psnr);
    }
    out.selected = p.selection().index;
    const double median = Median(psnr);
    p.report().Set("diag.kendall_tau", out.kendall_tau = KendallTau(loss, psnr));
    p.report().Set("diag.selected_psnr", psnr[out.selected]);
    p.report().Set("diag.median_psnr", median);
    p.report().Set("diag.best_psnr", *std::max_element(psnr.begin(), psnr.end()));
    p.report().Set("diag.selected_at_least_median", static_cast<int64_t>(psnr[out.selected] >= median));
  });
  if (!config.out_dir.empty()) {
    p.Stage("output", [&] {
      p.MakeOutDir();
      std::ostringstream csv;
      csv << "genome_id,initial_loss,final_psnr,final_ssim\n";
      for (const auto& r : out.rows) {
        csv << r.genome_id << ',' << FormatDouble(r.initial_loss) << ','
            << FormatDouble(r.final_psnr) << ',' << FormatDouble(r.final_ssim) << '\n';
      }
      p.WriteText("diagnostic.csv", csv.str());
      std::ostringstream cand;
      WriteCandidateCsv(cand, p.selection().scores);
      p.WriteText("candidates.csv", cand.str());
    });
  }
  p.Finish();
  out.ok = p.ok();
  out.error_code = p.code();
  if (!config.out_dir.empty()) {
    try {
      p.MakeOutDir();
      p.WriteText("report.txt", p.report().ToText());
    } catch (const Error& e) {
      out.ok = false;
      out.error_code = e.code();
    }
  }
  out.report = p.report();
  return out;
}

}  // namespace ginas
