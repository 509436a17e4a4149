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

#ifndef GINAS_NAS_NAS_HPP_
#define GINAS_NAS_NAS_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "core/graph.hpp"
#include "core/ops.hpp"
#include "core/tensor.hpp"

namespace ginas {

enum class FeatureTransform { kConv2d, kSeparable, kDepthwise };
enum class ActivationKind { kRelu, kLeakyRelu, kPrelu };

inline constexpr double kLeakySlope = 0.2;
inline constexpr double kPreluInit = 0.25;

// One decoder level's upsampling module: the five searched components.
struct UpsampleConfig {
  ad::Interp interp = ad::Interp::kBilinear;
  FeatureTransform transform = FeatureTransform::kConv2d;
  ActivationKind activation = ActivationKind::kLeakyRelu;
  int kernel = 3;
  int dilation = 1;

  bool operator==(const UpsampleConfig&) const = default;
  std::string ToString() const;
  static UpsampleConfig Parse(const std::string& text);
};

// t x t binary matrix; at(i, j) == true wires encoder level i into decoder
// level j (both 0-based here).
class SkipMatrix {
 public:
  SkipMatrix() = default;
  explicit SkipMatrix(int levels) : levels_(levels), bits_(static_cast<size_t>(levels * levels), 0) {}

  int levels() const { return levels_; }
  bool at(int i, int j) const { return bits_[static_cast<size_t>(i * levels_ + j)] != 0; }
  void set(int i, int j, bool on) { bits_[static_cast<size_t>(i * levels_ + j)] = on ? 1 : 0; }
  int count() const;

  // Encoder/decoder pairs at equal resolution (the classic U-Net wiring).
  static SkipMatrix SameScale(int levels);

  bool operator==(const SkipMatrix&) const = default;
  // Rows joined by ',', e.g. "010,001,100".
  std::string ToString() const;
  static SkipMatrix Parse(const std::string& text);

 private:
  int levels_ = 0;
  std::vector<uint8_t> bits_;
};

struct ArchGenome {
  int levels = 3;
  std::vector<int64_t> widths = {16, 32, 64};
  int64_t latent_channels = 16;
  std::vector<UpsampleConfig> upsample;
  SkipMatrix skips;
  uint64_t init_seed = 0;

  bool operator==(const ArchGenome&) const = default;

  // Plain-text record, one "key=value" field per line.
  std::string ToRecord() const;
  static ArchGenome FromRecord(const std::string& record);

  // Fixed reference architecture: bilinear / conv2d / leaky_relu / 3x3 /
  // dilation 1 at every level with same-scale skips.
  static ArchGenome Baseline(int levels = 3, std::vector<int64_t> widths = {16, 32, 64});
  void Validate() const;
};

enum class SampleMode { kFull, kUpsampleOnly, kConnectionOnly };

const char* SampleModeName(SampleMode mode);

// Draws a genome. Restricted modes copy the frozen axis from `base`; widths
// and latent channels always come from `base`. With force_same_scale the
// same-scale skips are OR-ed into the sampled matrix.
ArchGenome SampleGenome(std::mt19937_64& rng, SampleMode mode, const ArchGenome& base,
                        bool force_same_scale = false);

struct ScaleChain {
  ad::ResampleDirection direction = ad::ResampleDirection::kUp;
  int steps = 0;
};

// Decomposes a power-of-two resolution ratio into repeated 2x steps.
ScaleChain ResolveScale(int64_t src, int64_t dst);

// Over-parameterized encoder-decoder generator described by a genome.
class Decoder {
 public:
  struct SkipPath {
    int encoder = 0;
    int decoder = 0;
    ScaleChain chain;
    size_t projection = 0;  // index of the 1x1 projection weight
    size_t resampler = 0;   // index of the shared 3x3 depthwise kernel; unused when chain.steps == 0
  };

  // latent_shape [B, latent_channels, h, w]; out_shape [B, C, h*2^t, w*2^t].
  static Decoder Build(const ArchGenome& genome, const Shape& latent_shape,
                       const Shape& out_shape);

  const ArchGenome& genome() const { return genome_; }
  const Shape& latent_shape() const { return latent_shape_; }
  const Shape& output_shape() const { return out_shape_; }
  const std::vector<ad::Parameter>& parameters() const { return params_; }
  std::vector<ad::Parameter>& mutable_parameters() { return params_; }
  const std::vector<SkipPath>& skip_paths() const { return skips_; }
  int64_t parameter_count() const;

  // Registers parameters; trainable ones become variables when `trainable`,
  // constants otherwise.
  std::vector<ad::Var> Bind(ad::Graph& graph, bool trainable) const;

  // Output is sigmoid-squashed into (0, 1).
  ad::Var Forward(const ad::Var& z0, std::span<const ad::Var> params) const;

 private:
  struct Level {
    UpsampleConfig config;
    int64_t in_channels = 0;
    int64_t out_channels = 0;
    std::vector<size_t> weights;  // transform weights, in application order
    size_t bias = 0;
    size_t slope = 0;  // prelu only
  };

  size_t Add(std::string name, Tensor value);
  ad::Var Transform(const Level& level, const ad::Var& x, std::span<const ad::Var> p) const;
  ad::Var Activate(const Level& level, const ad::Var& x, std::span<const ad::Var> p) const;

  ArchGenome genome_;
  Shape latent_shape_;
  Shape out_shape_;
  std::vector<ad::Parameter> params_;
  std::vector<size_t> encoder_weight_;
  std::vector<size_t> encoder_bias_;
  std::vector<Level> levels_;
  std::vector<SkipPath> skips_;
  size_t head_weight_ = 0;
  size_t head_bias_ = 0;
};

// Standard-normal latent code of the given shape.
Tensor SampleLatent(const Shape& shape, uint64_t seed);

}  // namespace ginas

#endif  // GINAS_NAS_NAS_HPP_
