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

#include "nas/nas.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "core/error.hpp"
#include "core/init.hpp"

namespace ginas {
namespace {

using ad::Var;

const char* InterpName(ad::Interp v) {
  switch (v) {
    case ad::Interp::kNearest: return "nearest";
    case ad::Interp::kBilinear: return "bilinear";
    case ad::Interp::kBicubic: return "bicubic";
  }
  return "?";
}

const char* TransformName(FeatureTransform v) {
  switch (v) {
    case FeatureTransform::kConv2d: return "conv2d";
    case FeatureTransform::kSeparable: return "separable";
    case FeatureTransform::kDepthwise: return "depthwise";
  }
  return "?";
}

const char* ActivationName(ActivationKind v) {
  switch (v) {
    case ActivationKind::kRelu: return "relu";
    case ActivationKind::kLeakyRelu: return "leaky_relu";
    case ActivationKind::kPrelu: return "prelu";
  }
  return "?";
}

std::vector<std::string> Split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, sep);) parts.push_back(part);
  return parts;
}

int64_t ParseInt(const std::string& text, const std::string& what) {
  try {
    size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  Fail(ErrorCode::kInvalidArgument, "bad " + what + " '" + text + "'");
}

bool IsPowerOfTwo(int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

constexpr int kKernelOptions[] = {1, 3, 5};
constexpr int kDilationOptions[] = {1, 3, 5};

}  // namespace

std::string UpsampleConfig::ToString() const {
  std::ostringstream os;
  os << InterpName(interp) << ',' << TransformName(transform) << ','
     << ActivationName(activation) << ',' << kernel << ',' << dilation;
  return os.str();
}

UpsampleConfig UpsampleConfig::Parse(const std::string& text) {
  const auto parts = Split(text, ',');
  Require(parts.size() == 5, ErrorCode::kInvalidArgument,
          "upsample config needs 5 fields: '" + text + "'");
  UpsampleConfig c;
  if (parts[0] == "nearest") c.interp = ad::Interp::kNearest;
  else if (parts[0] == "bilinear") c.interp = ad::Interp::kBilinear;
  else if (parts[0] == "bicubic") c.interp = ad::Interp::kBicubic;
  else Fail(ErrorCode::kInvalidArgument, "unknown interpolation '" + parts[0] + "'");
  if (parts[1] == "conv2d") c.transform = FeatureTransform::kConv2d;
  else if (parts[1] == "separable") c.transform = FeatureTransform::kSeparable;
  else if (parts[1] == "depthwise") c.transform = FeatureTransform::kDepthwise;
  else Fail(ErrorCode::kInvalidArgument, "unknown transform '" + parts[1] + "'");
  if (parts[2] == "relu") c.activation = ActivationKind::kRelu;
  else if (parts[2] == "leaky_relu") c.activation = ActivationKind::kLeakyRelu;
  else if (parts[2] == "prelu") c.activation = ActivationKind::kPrelu;
  else Fail(ErrorCode::kInvalidArgument, "unknown activation '" + parts[2] + "'");
  c.kernel = static_cast<int>(ParseInt(parts[3], "kernel"));
  c.dilation = static_cast<int>(ParseInt(parts[4], "dilation"));
  Require(std::find(std::begin(kKernelOptions), std::end(kKernelOptions), c.kernel) !=
                  std::end(kKernelOptions) &&
              std::find(std::begin(kDilationOptions), std::end(kDilationOptions), c.dilation) !=
                  std::end(kDilationOptions),
          ErrorCode::kInvalidArgument, "kernel and dilation must be 1, 3 or 5: '" + text + "'");
  return c;
}

int SkipMatrix::count() const {
  return static_cast<int>(std::count(bits_.begin(), bits_.end(), 1));
}

SkipMatrix SkipMatrix::SameScale(int levels) {
  SkipMatrix m(levels);
  for (int i = 0; i < levels; ++i) m.set(i, levels - 1 - i, true);
  return m;
}

std::string SkipMatrix::ToString() const {
  std::string s;
  for (int i = 0; i < levels_; ++i) {
    if (i) s += ',';
    for (int j = 0; j < levels_; ++j) s += at(i, j) ? '1' : '0';
  }
  return s;
}

SkipMatrix SkipMatrix::Parse(const std::string& text) {
  const auto rows = Split(text, ',');
  const int t = static_cast<int>(rows.size());
  Require(t >= 1, ErrorCode::kInvalidArgument, "empty skip matrix");
  SkipMatrix m(t);
  for (int i = 0; i < t; ++i) {
    Require(static_cast<int>(rows[static_cast<size_t>(i)].size()) == t,
            ErrorCode::kInvalidArgument, "skip matrix must be square: '" + text + "'");
    for (int j = 0; j < t; ++j) {
      const char c = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
      Require(c == '0' || c == '1', ErrorCode::kInvalidArgument,
              "skip matrix entries must be 0 or 1");
      m.set(i, j, c == '1');
    }
  }
  return m;
}

std::string ArchGenome::ToRecord() const {
  std::ostringstream os;
  os << "levels=" << levels << '\n';
  os << "widths=";
  for (size_t i = 0; i < widths.size(); ++i) os << (i ? "," : "") << widths[i];
  os << '\n';
  os << "latent_channels=" << latent_channels << '\n';
  os << "init_seed=" << init_seed << '\n';
  for (size_t i = 0; i < upsample.size(); ++i) {
    os << "upsample." << i << '=' << upsample[i].ToString() << '\n';
  }
  os << "skips=" << skips.ToString() << '\n';
  return os.str();
}

ArchGenome ArchGenome::FromRecord(const std::string& record) {
  ArchGenome g;
  g.widths.clear();
  std::stringstream ss(record);
  bool have_levels = false;
  std::vector<std::pair<size_t, UpsampleConfig>> ups;
  for (std::string line; std::getline(ss, line);) {
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    Require(eq != std::string::npos, ErrorCode::kInvalidArgument,
            "genome record line without '=': " + line);
    const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    if (key == "levels") {
      g.levels = static_cast<int>(ParseInt(value, "levels"));
      have_levels = true;
    } else if (key == "widths") {
      for (const auto& w : Split(value, ',')) g.widths.push_back(ParseInt(w, "width"));
    } else if (key == "latent_channels") {
      g.latent_channels = ParseInt(value, "latent_channels");
    } else if (key == "init_seed") {
      g.init_seed = std::stoull(value);
    } else if (key.rfind("upsample.", 0) == 0) {
      ups.emplace_back(static_cast<size_t>(ParseInt(key.substr(9), "upsample index")),
                       UpsampleConfig::Parse(value));
    } else if (key == "skips") {
      g.skips = SkipMatrix::Parse(value);
    } else {
      Fail(ErrorCode::kInvalidArgument, "unknown genome field '" + key + "'");
    }
  }
  Require(have_levels, ErrorCode::kInvalidArgument, "genome record lacks levels");
  g.upsample.assign(ups.size(), UpsampleConfig{});
  for (const auto& [i, c] : ups) {
    Require(i < g.upsample.size(), ErrorCode::kInvalidArgument, "upsample index out of range");
    g.upsample[i] = c;
  }
  g.Validate();
  return g;
}

ArchGenome ArchGenome::Baseline(int levels, std::vector<int64_t> widths) {
  ArchGenome g;
  g.levels = levels;
  g.widths = std::move(widths);
  g.upsample.assign(static_cast<size_t>(levels), UpsampleConfig{});
  g.skips = SkipMatrix::SameScale(levels);
  g.Validate();
  return g;
}

void ArchGenome::Validate() const {
  Require(levels >= 1, ErrorCode::kInvalidArgument, "genome needs >= 1 level");
  Require(static_cast<int>(widths.size()) == levels &&
              static_cast<int>(upsample.size()) == levels && skips.levels() == levels,
          ErrorCode::kInvalidArgument, "genome fields disagree on the level count");
  Require(latent_channels >= 1, ErrorCode::kInvalidArgument, "latent channels must be >= 1");
  for (int64_t w : widths) Require(w >= 1, ErrorCode::kInvalidArgument, "widths must be >= 1");
  for (const auto& u : upsample) {
    Require(std::find(std::begin(kKernelOptions), std::end(kKernelOptions), u.kernel) !=
                std::end(kKernelOptions),
            ErrorCode::kInvalidArgument, "kernel must be 1, 3 or 5");
    Require(std::find(std::begin(kDilationOptions), std::end(kDilationOptions), u.dilation) !=
                std::end(kDilationOptions),
            ErrorCode::kInvalidArgument, "dilation must be 1, 3 or 5");
  }
}

const char* SampleModeName(SampleMode mode) {
  switch (mode) {
    case SampleMode::kFull: return "full";
    case SampleMode::kUpsampleOnly: return "upsample_only";
    case SampleMode::kConnectionOnly: return "connection_only";
  }
  return "?";
}

ArchGenome SampleGenome(std::mt19937_64& rng, SampleMode mode, const ArchGenome& base,
                        bool force_same_scale) {
  base.Validate();
  const int t = base.levels;
  std::uniform_int_distribution<int> three(0, 2);
  std::vector<UpsampleConfig> ups(static_cast<size_t>(t));
  for (auto& u : ups) {
    u.interp = static_cast<ad::Interp>(three(rng));
    u.transform = static_cast<FeatureTransform>(three(rng));
    u.activation = static_cast<ActivationKind>(three(rng));
    u.kernel = kKernelOptions[three(rng)];
    u.dilation = kDilationOptions[three(rng)];
  }
  SkipMatrix skips(t);
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < t; ++j) skips.set(i, j, coin(rng));

  ArchGenome g = base;
  g.init_seed = rng();
  g.upsample = mode == SampleMode::kConnectionOnly ? base.upsample : ups;
  g.skips = mode == SampleMode::kUpsampleOnly ? base.skips : skips;
  if (force_same_scale) {
    for (int i = 0; i < t; ++i) g.skips.set(i, t - 1 - i, true);
  }
  return g;
}

ScaleChain ResolveScale(int64_t src, int64_t dst) {
  Require(src > 0 && dst > 0, ErrorCode::kInvalidArgument, "resolutions must be positive");
  const int64_t big = std::max(src, dst), small = std::min(src, dst);
  Require(big % small == 0 && IsPowerOfTwo(big / small), ErrorCode::kInvalidArgument,
          "scale ratio " + std::to_string(src) + " -> " + std::to_string(dst) +
              " is not a power of two");
  ScaleChain c;
  c.direction = dst >= src ? ad::ResampleDirection::kUp : ad::ResampleDirection::kDown;
  for (int64_t r = big / small; r > 1; r /= 2) ++c.steps;
  return c;
}

size_t Decoder::Add(std::string name, Tensor value) {
  params_.push_back({std::move(name), std::move(value), true});
  return params_.size() - 1;
}

Decoder Decoder::Build(const ArchGenome& genome, const Shape& latent_shape,
                       const Shape& out_shape) {
  genome.Validate();
  const int t = genome.levels;
  Require(latent_shape.size() == 4 && out_shape.size() == 4, ErrorCode::kShapeMismatch,
          "decoder shapes must be NCHW");
  Require(latent_shape[1] == genome.latent_channels, ErrorCode::kShapeMismatch,
          "latent channels do not match the genome");
  const int64_t factor = int64_t{1} << t;
  Require(out_shape[0] == latent_shape[0] && out_shape[2] == latent_shape[2] * factor &&
              out_shape[3] == latent_shape[3] * factor,
          ErrorCode::kShapeMismatch,
          "output " + ShapeToString(out_shape) + " is not latent " +
              ShapeToString(latent_shape) + " upscaled by 2^" + std::to_string(t));

  Decoder d;
  d.genome_ = genome;
  d.latent_shape_ = latent_shape;
  d.out_shape_ = out_shape;
  std::mt19937_64 rng(genome.init_seed);
  const auto& w = genome.widths;

  for (int i = 0; i < t; ++i) {
    const int64_t cin = i == 0 ? genome.latent_channels : w[static_cast<size_t>(i - 1)];
    const int64_t cout = w[static_cast<size_t>(i)];
    const std::string name = "enc" + std::to_string(i);
    d.encoder_weight_.push_back(d.Add(name + ".weight", KaimingUniform({cout, cin, 3, 3}, cin * 9, rng)));
    d.encoder_bias_.push_back(d.Add(name + ".bias", BiasUniform(cout, cin * 9, rng)));
  }

  const int64_t full_h = out_shape[2];
  for (int j = 0; j < t; ++j) {
    Level level;
    level.config = genome.upsample[static_cast<size_t>(j)];
    level.in_channels = j == 0 ? w[static_cast<size_t>(t - 1)] : d.levels_.back().out_channels;
    level.out_channels = w[static_cast<size_t>(std::max(t - 2 - j, 0))];
    const int64_t cin = level.in_channels, cout = level.out_channels;
    const std::string name = "dec" + std::to_string(j);

    for (int i = 0; i < t; ++i) {
      if (!genome.skips.at(i, j)) continue;
      SkipPath path;
      path.encoder = i;
      path.decoder = j;
      path.chain = ResolveScale(full_h >> (i + 1), full_h >> (t - j));
      const int64_t src_c = w[static_cast<size_t>(i)];
      const std::string sname = "skip" + std::to_string(i) + std::to_string(j);
      path.projection = d.Add(sname + ".proj.weight", KaimingUniform({cin, src_c, 1, 1}, src_c, rng));
      d.Add(sname + ".proj.bias", BiasUniform(cin, src_c, rng));
      if (path.chain.steps > 0) {
        path.resampler = d.Add(sname + ".resample.weight", KaimingUniform({cin, 1, 3, 3}, 9, rng));
      }
      d.skips_.push_back(path);
    }

    const int64_t k = level.config.kernel;
    switch (level.config.transform) {
      case FeatureTransform::kConv2d:
        level.weights.push_back(d.Add(name + ".weight", KaimingUniform({cout, cin, k, k}, cin * k * k, rng)));
        level.bias = d.Add(name + ".bias", BiasUniform(cout, cin * k * k, rng));
        break;
      case FeatureTransform::kSeparable:
        level.weights.push_back(d.Add(name + ".depthwise", KaimingUniform({cin, 1, k, k}, k * k, rng)));
        level.weights.push_back(d.Add(name + ".pointwise", KaimingUniform({cout, cin, 1, 1}, cin, rng)));
        level.bias = d.Add(name + ".bias", BiasUniform(cout, cin, rng));
        break;
      case FeatureTransform::kDepthwise: {
        const int64_t groups = std::gcd(cin, cout);
        const int64_t fan_in = (cin / groups) * k * k;
        level.weights.push_back(d.Add(name + ".weight", KaimingUniform({cout, cin / groups, k, k}, fan_in, rng)));
        level.bias = d.Add(name + ".bias", BiasUniform(cout, fan_in, rng));
        break;
      }
    }
    if (level.config.activation == ActivationKind::kPrelu) {
      level.slope = d.Add(name + ".prelu", Tensor(Shape{cout}, kPreluInit));
    }
    d.levels_.push_back(std::move(level));
  }

  const int64_t last = d.levels_.back().out_channels;
  d.head_weight_ = d.Add("head.weight", KaimingUniform({out_shape[1], last, 1, 1}, last, rng));
  d.head_bias_ = d.Add("head.bias", BiasUniform(out_shape[1], last, rng));
  return d;
}

int64_t Decoder::parameter_count() const {
  int64_t n = 0;
  for (const auto& p : params_) n += p.value.numel();
  return n;
}

std::vector<Var> Decoder::Bind(ad::Graph& graph, bool trainable) const {
  std::vector<Var> vars;
  vars.reserve(params_.size());
  for (const auto& p : params_) {
    vars.push_back(trainable && p.trainable ? graph.variable(p.value) : graph.constant(p.value));
  }
  return vars;
}

Var Decoder::Transform(const Level& level, const Var& x, std::span<const Var> p) const {
  const int64_t k = level.config.kernel, dil = level.config.dilation;
  const int64_t pad = dil * (k - 1) / 2;
  switch (level.config.transform) {
    case FeatureTransform::kConv2d:
      return ad::conv2d(x, p[level.weights[0]], p[level.bias], {1, pad, dil, 1});
    case FeatureTransform::kSeparable: {
      Var h = ad::conv2d(x, p[level.weights[0]], std::nullopt, {1, pad, dil, level.in_channels});
      return ad::conv2d(h, p[level.weights[1]], p[level.bias], {1, 0, 1, 1});
    }
    case FeatureTransform::kDepthwise: {
      const int64_t groups = std::gcd(level.in_channels, level.out_channels);
      return ad::conv2d(x, p[level.weights[0]], p[level.bias], {1, pad, dil, groups});
    }
  }
  Fail(ErrorCode::kInvalidArgument, "unknown transform");
}

Var Decoder::Activate(const Level& level, const Var& x, std::span<const Var> p) const {
  switch (level.config.activation) {
    case ActivationKind::kRelu: return ad::relu(x);
    case ActivationKind::kLeakyRelu: return ad::leaky_relu(x, kLeakySlope);
    case ActivationKind::kPrelu: return ad::prelu(x, p[level.slope]);
  }
  Fail(ErrorCode::kInvalidArgument, "unknown activation");
}

Var Decoder::Forward(const Var& z0, std::span<const Var> p) const {
  Require(z0.shape() == latent_shape_, ErrorCode::kShapeMismatch,
          "latent " + ShapeToString(z0.shape()) + " does not match decoder input " +
              ShapeToString(latent_shape_));
  Require(p.size() == params_.size(), ErrorCode::kInvalidArgument,
          "wrong number of bound decoder parameters");
  const int t = genome_.levels;

  // Lift the latent to full resolution, then encode with stride-2 blocks.
  Var x = z0;
  for (int s = 0; s < t; ++s) x = ad::resample2x(x, ad::ResampleDirection::kUp, ad::Interp::kNearest);
  std::vector<Var> enc;
  for (int i = 0; i < t; ++i) {
    x = ad::leaky_relu(ad::conv2d(x, p[encoder_weight_[static_cast<size_t>(i)]],
                                  p[encoder_bias_[static_cast<size_t>(i)]], {2, 1, 1, 1}),
                       kLeakySlope);
    enc.push_back(x);
  }

  Var h = enc.back();
  size_t next_skip = 0;
  for (int j = 0; j < t; ++j) {
    const Level& level = levels_[static_cast<size_t>(j)];
    Var in = h;
    for (; next_skip < skips_.size() && skips_[next_skip].decoder == j; ++next_skip) {
      const SkipPath& path = skips_[next_skip];
      Var s = ad::conv2d(enc[static_cast<size_t>(path.encoder)], p[path.projection],
                         p[path.projection + 1], {1, 0, 1, 1});
      for (int step = 0; step < path.chain.steps; ++step) {
        s = ad::resample2x(s, path.chain.direction, level.config.interp);
        s = ad::conv2d(s, p[path.resampler], std::nullopt, {1, 1, 1, level.in_channels});
      }
      in = ad::add(in, s);
    }
    Var up = ad::resample2x(in, ad::ResampleDirection::kUp, level.config.interp);
    h = Activate(level, Transform(level, up, p), p);
  }
  return ad::sigmoid(ad::conv2d(h, p[head_weight_], p[head_bias_], {1, 0, 1, 1}));
}

Tensor SampleLatent(const Shape& shape, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor t(shape);
  for (double& v : t.data()) v = normal(rng);
  return t;
}

}  // namespace ginas
