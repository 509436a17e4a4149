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
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "core/error.hpp"
#include "harness/dataset.hpp"
#include "harness/experiment.hpp"
#include "harness/image_io.hpp"

namespace ginas {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("ginas_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string str() const { return path_.string(); }

 private:
  fs::path path_;
};

std::string ReadAll(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<unsigned char> Record(int label, int offset) {
  std::vector<unsigned char> r(3073);
  r[0] = static_cast<unsigned char>(label);
  for (size_t i = 1; i < r.size(); ++i) r[i] = static_cast<unsigned char>((i * 7 + offset) % 256);
  return r;
}

void WriteBytes(const std::string& path, const std::vector<std::vector<unsigned char>>& recs,
                size_t trim = 0) {
  std::string all;
  for (const auto& r : recs) all.append(r.begin(), r.end());
  all.resize(all.size() - trim);
  std::ofstream(path, std::ios::binary) << all;
}

TEST(Cifar10Test, LoadsTwoRecords) {
  TempDir dir;
  const auto r0 = Record(7, 0), r1 = Record(2, 5);
  WriteBytes(dir.file("data.bin"), {r0, r1});
  const std::vector<int64_t> idx{0, 1};
  const PrivateBatch b = LoadCifar10(dir.file("data.bin"), idx);
  EXPECT_EQ(b.images.shape(), (Shape{2, 3, 32, 32}));
  EXPECT_EQ(b.labels, (std::vector<int>{7, 2}));
  // Channel-planar layout: byte 1 + c*1024 + y*32 + x.
  EXPECT_EQ(b.images.at(0, 1, 3, 4), r0[1 + 1024 + 3 * 32 + 4] / 255.0);
  EXPECT_EQ(b.images.at(1, 2, 31, 31), r1[3072] / 255.0);
  const std::vector<int64_t> back{1};
  EXPECT_EQ(LoadCifar10(dir.file("data.bin"), back).labels, (std::vector<int>{2}));
}

TEST(Cifar10Test, WriteThenReadIsExact) {
  TempDir dir;
  WriteBytes(dir.file("a.bin"), {Record(3, 1), Record(9, 2), Record(0, 3)});
  const std::vector<int64_t> idx{2, 0, 1};
  const PrivateBatch b = LoadCifar10(dir.file("a.bin"), idx);
  WriteCifar10(dir.file("b.bin"), b);
  const std::vector<int64_t> same{0, 1, 2};
  const PrivateBatch c = LoadCifar10(dir.file("b.bin"), same);
  EXPECT_EQ(c.labels, b.labels);
  EXPECT_EQ(c.images.storage(), b.images.storage());
  // Re-encoded bytes equal the originals, reordered.
  const std::string a = ReadAll(dir.file("a.bin")), rb = ReadAll(dir.file("b.bin"));
  EXPECT_EQ(rb.substr(0, 3073), a.substr(2 * 3073, 3073));
}

TEST(Cifar10Test, Errors) {
  TempDir dir;
  WriteBytes(dir.file("t.bin"), {Record(1, 0), Record(1, 1)}, 100);
  const std::vector<int64_t> idx{0};
  try {
    LoadCifar10(dir.file("t.bin"), idx);
    FAIL() << "truncated file accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
  WriteBytes(dir.file("ok.bin"), {Record(1, 0)});
  const std::vector<int64_t> bad{1};
  try {
    LoadCifar10(dir.file("ok.bin"), bad);
    FAIL() << "index out of range accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOutOfRange);
  }
  EXPECT_THROW(LoadCifar10(dir.file("missing.bin"), idx), Error);
}

TEST(WriteImageTest, WhitePixelPayload) {
  TempDir dir;
  EXPECT_EQ(WriteImage(Tensor(Shape{3, 1, 1}, 1.0), dir.file("w.ppm")), 0);
  EXPECT_EQ(ReadAll(dir.file("w.ppm")), std::string("P6\n1 1\n255\n\xff\xff\xff", 14));
  WriteImage(Tensor(Shape{1, 1, 1}, 0.5), dir.file("h.pgm"));
  EXPECT_EQ(ReadAll(dir.file("h.pgm")), std::string("P5\n1 1\n255\n\x80", 12));
  EXPECT_EQ(QuantizePixel(0.5), 128);
  EXPECT_EQ(QuantizePixel(0.0), 0);
}

TEST(WriteImageTest, RereadWithinOneStep) {
  TempDir dir;
  Tensor img(Shape{3, 5, 7});
  for (int64_t i = 0; i < img.numel(); ++i) img[i] = std::fmod(i * 0.137, 1.0);
  WriteImage(img, dir.file("r.ppm"));
  const Tensor back = ReadImage(dir.file("r.ppm"));
  ASSERT_EQ(back.shape(), img.shape());
  for (int64_t i = 0; i < img.numel(); ++i) EXPECT_LE(std::fabs(back[i] - img[i]), 1.0 / 255.0);
}

TEST(WriteImageTest, ClampsAndCounts) {
  TempDir dir;
  const Tensor img(Shape{1, 1, 3}, {-0.1, 0.5, 1.2});
  EXPECT_EQ(WriteImage(img, dir.file("c.pgm")), 2);
  const Tensor back = ReadImage(dir.file("c.pgm"));
  EXPECT_EQ(back[0], 0.0);
  EXPECT_EQ(back[2], 1.0);
  EXPECT_THROW(WriteImage(Tensor(Shape{2, 1, 1}), dir.file("x.pgm")), Error);
}

TEST(SyntheticBatchTest, DeterministicSmoothAndLabelled) {
  const PrivateBatch a = SyntheticBatch(5, 4, 1, 16, 10);
  const PrivateBatch b = SyntheticBatch(5, 4, 1, 16, 10);
  EXPECT_EQ(a.images.storage(), b.images.storage());
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(std::set<int>(a.labels.begin(), a.labels.end()).size(), 4u);
  double max_step = 0;
  for (double v : a.images.data()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  for (int64_t y = 0; y < 16; ++y)
    for (int64_t x = 0; x + 1 < 16; ++x)
      max_step = std::max(max_step, std::fabs(a.images.at(0, 0, y, x + 1) - a.images.at(0, 0, y, x)));
  EXPECT_LT(max_step, 0.5);
  EXPECT_NE(SyntheticBatch(6, 4, 1, 16, 10).images.storage(), a.images.storage());
}

TEST(ImageDirectoryTest, LoadsSortedFiles) {
  TempDir dir;
  WriteImage(Tensor(Shape{1, 4, 4}, 0.2), dir.file("b.pgm"));
  WriteImage(Tensor(Shape{1, 4, 4}, 0.8), dir.file("a.pgm"));
  const PrivateBatch b = LoadImageDirectory(dir.str(), 2, 1, 10);
  EXPECT_EQ(b.images.shape(), (Shape{2, 1, 4, 4}));
  EXPECT_EQ(b.images[0], QuantizePixel(0.8) / 255.0);
  EXPECT_THROW(LoadImageDirectory(dir.str(), 3, 1, 10), Error);
}

TEST(ExperimentConfigTest, KeysRoundTrip) {
  ExperimentConfig c;
  c.Set("defense", "sparsify:0.9:per_layer");
  c.Set("mode", "connection_only");
  c.Set("widths", "8,16,32");
  c.Set("lr", "0.002");
  c.Set("seed", "18446744073709551615");
  for (const auto& k : ExperimentConfig::Keys()) {
    ExperimentConfig d;
    d.Set(k.key, c.Get(k.key));
    EXPECT_EQ(d.Get(k.key), c.Get(k.key)) << k.key;
  }
  const ExperimentConfig e = ExperimentConfig::FromReport("status=ok\n" + c.Echo());
  EXPECT_EQ(e.Echo(), c.Echo());
  EXPECT_THROW(c.Set("bogus", "1"), Error);
  EXPECT_THROW(c.Set("n", "ten"), Error);
  EXPECT_THROW(c.Set("seed", "-1"), Error);
  EXPECT_THROW(c.Set("mode", "random"), Error);
}

ExperimentConfig Small(const std::string& out = "") {
  ExperimentConfig c;
  c.n = 4;
  c.recovery.iterations = 15;
  c.seed = 3;
  c.out_dir = out;
  return c;
}

std::string WithoutTimings(const std::string& report) {
  std::stringstream ss(report);
  std::string out;
  for (std::string l; std::getline(ss, l);)
    if (l.rfind("timing.", 0) != 0 && l.rfind("config.out=", 0) != 0) out += l + "\n";
  return out;
}

TEST(RunAttackTest, WritesArtifactsAndIsDeterministic) {
  TempDir a, b;
  const AttackOutcome x = RunAttack(Small(a.str()));
  ASSERT_TRUE(x.ok) << x.report.ToText();
  const AttackOutcome y = RunAttack(Small(b.str()));
  EXPECT_EQ(WithoutTimings(ReadAll(a.file("report.txt"))), WithoutTimings(ReadAll(b.file("report.txt"))));
  EXPECT_EQ(ReadAll(a.file("candidates.csv")), ReadAll(b.file("candidates.csv")));
  EXPECT_EQ(ReadAll(a.file("loss.csv")), ReadAll(b.file("loss.csv")));
  EXPECT_TRUE(fs::exists(a.file("recon_0.pgm")));
  EXPECT_TRUE(fs::exists(a.file("original_0.pgm")));

  // Candidate CSV: n rows, selected id attains the minimum.
  std::stringstream csv(ReadAll(a.file("candidates.csv")));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "genome_id,initial_loss");
  std::vector<double> losses;
  while (std::getline(csv, line)) losses.push_back(std::stod(line.substr(line.find(',') + 1)));
  ASSERT_EQ(losses.size(), 4u);
  const auto sel = static_cast<size_t>(std::stoll(*x.report.Get("search.selected")));
  EXPECT_EQ(losses[sel], *std::min_element(losses.begin(), losses.end()));
  EXPECT_EQ(x.report.Get("status"), "ok");
}

TEST(RunAttackTest, ReplayFromReportReproducesMetrics) {
  const AttackOutcome x = RunAttack(Small());
  ASSERT_TRUE(x.ok);
  const ExperimentConfig again = ExperimentConfig::FromReport(x.report.ToText());
  const AttackOutcome y = RunAttack(again);
  EXPECT_EQ(x.report.Get("metrics.mean_psnr"), y.report.Get("metrics.mean_psnr"));
  EXPECT_EQ(x.report.Get("metrics.mean_ssim"), y.report.Get("metrics.mean_ssim"));
  EXPECT_EQ(x.report.Get("recovery.parameter_checksum"), y.report.Get("recovery.parameter_checksum"));
}

TEST(RunAttackTest, FixedGenomeIsSingleCandidate) {
  ExperimentConfig c = Small();
  c.mode = SearchMode::kFixedGenome;
  c.n = 7;
  const AttackOutcome x = RunAttack(c);
  ASSERT_TRUE(x.ok);
  EXPECT_EQ(x.scores.size(), 1u);
  EXPECT_EQ(x.report.Get("search.selected"), "0");
  EXPECT_EQ(x.report.Get("genome.skips"), "001,010,100");
}

TEST(RunAttackTest, FixedGenomeFromFile) {
  TempDir dir;
  ArchGenome g = ArchGenome::Baseline();
  g.skips = SkipMatrix::Parse("000,000,000");
  g.init_seed = 99;
  std::ofstream(dir.file("g.txt")) << g.ToRecord();
  ExperimentConfig c = Small();
  c.mode = SearchMode::kFixedGenome;
  c.genome_file = dir.file("g.txt");
  const AttackOutcome x = RunAttack(c);
  ASSERT_TRUE(x.ok);
  EXPECT_EQ(x.report.Get("genome.init_seed"), "99");
}

TEST(RunAttackTest, StageTaggedErrors) {
  TempDir dir;
  ExperimentConfig c = Small(dir.str());
  c.dataset = DatasetKind::kCifar10;
  c.data_path = dir.file("missing.bin");
  const AttackOutcome x = RunAttack(c);
  EXPECT_FALSE(x.ok);
  EXPECT_EQ(x.error_code, ErrorCode::kIo);
  EXPECT_EQ(x.report.Get("error.stage"), "load");
  EXPECT_EQ(x.report.Get("status"), "error");
  EXPECT_NE(ReadAll(dir.file("report.txt")).find("error.stage=load"), std::string::npos);

  ExperimentConfig bad = Small();
  bad.image_size = 12;  // not divisible by 2^3
  const AttackOutcome y = RunAttack(bad);
  EXPECT_EQ(y.report.Get("error.stage"), "search");

  ExperimentConfig neg = Small();
  neg.batch = 0;
  EXPECT_EQ(RunAttack(neg).report.Get("error.stage"), "config");
}

TEST(RunAttackTest, DefendedRunsComplete) {
  for (const char* d : {"noise:0.01", "clip:4", "sparsify:0.9"}) {
    ExperimentConfig c = Small();
    c.n = 2;
    c.defense = DefenseConfig::Parse(d);
    const AttackOutcome x = RunAttack(c);
    EXPECT_TRUE(x.ok) << d << "\n" << x.report.ToText();
  }
}

TEST(SearchDiagnosticTest, ScoresEveryCandidate) {
  TempDir dir;
  ExperimentConfig c = Small(dir.str());
  c.n = 4;
  const DiagnosticOutcome d = RunSearchDiagnostic(c);
  ASSERT_TRUE(d.ok) << d.report.ToText();
  ASSERT_EQ(d.rows.size(), 4u);
  EXPECT_GE(d.kendall_tau, -1.0);
  EXPECT_LE(d.kendall_tau, 1.0);
  EXPECT_TRUE(fs::exists(dir.file("diagnostic.csv")));
  c.mode = SearchMode::kFixedGenome;
  c.out_dir.clear();
  EXPECT_EQ(RunSearchDiagnostic(c).report.Get("error.stage"), "config");
}

TEST(GradcheckTest, SuitePasses) {
  const GradcheckOutcome g = RunGradcheck(1, 3);
  EXPECT_LT(g.first_order_max, 1e-6);
  EXPECT_LT(g.second_order_max, 1e-4);
  EXPECT_EQ(g.report.Get("gradcheck.first_order_pass"), "1");
}

}  // namespace
}  // namespace ginas
