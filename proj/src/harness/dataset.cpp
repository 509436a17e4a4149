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

#include "harness/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "core/error.hpp"
#include "harness/image_io.hpp"

namespace ginas {

PrivateBatch LoadCifar10(const std::string& path, std::span<const int64_t> indices) {
  Require(!indices.empty(), ErrorCode::kInvalidArgument, "no CIFAR-10 indices requested");
  Require(static_cast<int64_t>(indices.size()) <= kMaxBatch, ErrorCode::kInvalidArgument,
          "batch too large");
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  Require(static_cast<bool>(in), ErrorCode::kIo, "cannot open " + path);
  const int64_t size = static_cast<int64_t>(in.tellg());
  Require(size > 0 && size % kCifarRecordBytes == 0, ErrorCode::kIo,
          path + " is truncated or not a CIFAR-10 binary file (" + std::to_string(size) +
              " bytes)");
  const int64_t records = size / kCifarRecordBytes;
  const int64_t b = static_cast<int64_t>(indices.size());
  const int64_t plane = kCifarSide * kCifarSide;
  PrivateBatch batch;
  batch.images = Tensor(Shape{b, 3, kCifarSide, kCifarSide});
  std::vector<unsigned char> rec(static_cast<size_t>(kCifarRecordBytes));
  for (int64_t n = 0; n < b; ++n) {
    const int64_t idx = indices[static_cast<size_t>(n)];
    Require(idx >= 0 && idx < records, ErrorCode::kOutOfRange,
            "CIFAR-10 index " + std::to_string(idx) + " outside [0, " +
                std::to_string(records) + ")");
    in.seekg(idx * kCifarRecordBytes);
    in.read(reinterpret_cast<char*>(rec.data()), kCifarRecordBytes);
    Require(in.gcount() == kCifarRecordBytes, ErrorCode::kIo, "short read from " + path);
    Require(rec[0] < 10, ErrorCode::kIo, "label byte out of range in record " + std::to_string(idx));
    batch.labels.push_back(rec[0]);
    for (int64_t k = 0; k < 3 * plane; ++k) {
      batch.images[n * 3 * plane + k] = rec[static_cast<size_t>(1 + k)] / 255.0;
    }
  }
  return batch;
}

void WriteCifar10(const std::string& path, const PrivateBatch& batch) {
  Require(batch.images.shape() == Shape{batch.size(), 3, kCifarSide, kCifarSide},
          ErrorCode::kShapeMismatch, "CIFAR-10 records are 3x32x32");
  std::ofstream out(path, std::ios::binary);
  Require(static_cast<bool>(out), ErrorCode::kIo, "cannot open " + path + " for writing");
  const int64_t per = 3 * kCifarSide * kCifarSide;
  for (int64_t n = 0; n < batch.size(); ++n) {
    const int label = batch.labels[static_cast<size_t>(n)];
    Require(label >= 0 && label < 10, ErrorCode::kInvalidArgument, "label out of range");
    out.put(static_cast<char>(label));
    for (int64_t k = 0; k < per; ++k) out.put(static_cast<char>(QuantizePixel(batch.images[n * per + k])));
  }
  Require(static_cast<bool>(out), ErrorCode::kIo, "failed writing " + path);
}

std::vector<int> DrawLabels(uint64_t seed, int64_t count, int64_t classes) {
  Require(count >= 1 && classes >= 1, ErrorCode::kInvalidArgument, "bad label request");
  std::mt19937_64 rng(seed);
  std::vector<int> labels;
  if (count <= classes) {
    std::vector<int> all(static_cast<size_t>(classes));
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    labels.assign(all.begin(), all.begin() + count);
  } else {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(classes) - 1);
    for (int64_t i = 0; i < count; ++i) labels.push_back(pick(rng));
  }
  return labels;
}

PrivateBatch SyntheticBatch(uint64_t seed, int64_t batch, int64_t channels, int64_t size,
                            int64_t classes) {
  Require(batch >= 1 && batch <= kMaxBatch, ErrorCode::kInvalidArgument, "bad batch size");
  Require(channels >= 1 && size >= 1, ErrorCode::kInvalidArgument, "bad image shape");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PrivateBatch out;
  out.images = Tensor(Shape{batch, channels, size, size});
  const double s = static_cast<double>(size);
  for (int64_t n = 0; n < batch; ++n) {
    std::vector<double> background(static_cast<size_t>(channels));
    for (double& b : background) b = 0.2 + 0.6 * u(rng);
    const int blobs = 3 + static_cast<int>(u(rng) * 3.0);
    struct Blob {
      double cy, cx, sigma;
      std::vector<double> amp;
    };
    std::vector<Blob> list;
    for (int k = 0; k < blobs; ++k) {
      Blob b{u(rng) * s, u(rng) * s, s * (0.12 + 0.2 * u(rng)), {}};
      for (int64_t c = 0; c < channels; ++c) b.amp.push_back(u(rng) - 0.5);
      list.push_back(std::move(b));
    }
    for (int64_t c = 0; c < channels; ++c)
      for (int64_t y = 0; y < size; ++y)
        for (int64_t x = 0; x < size; ++x) {
          double v = background[static_cast<size_t>(c)];
          for (const Blob& b : list) {
            const double d2 = (y + 0.5 - b.cy) * (y + 0.5 - b.cy) + (x + 0.5 - b.cx) * (x + 0.5 - b.cx);
            v += b.amp[static_cast<size_t>(c)] * std::exp(-d2 / (2 * b.sigma * b.sigma));
          }
          out.images.at(n, c, y, x) = std::min(1.0, std::max(0.0, v));
        }
  }
  out.labels = DrawLabels(rng(), batch, classes);
  return out;
}

PrivateBatch LoadImageDirectory(const std::string& dir, int64_t batch, uint64_t label_seed,
                                int64_t classes) {
  namespace fs = std::filesystem;
  Require(fs::is_directory(dir), ErrorCode::kIo, dir + " is not a directory");
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto ext = e.path().extension().string();
    if (e.is_regular_file() && (ext == ".pgm" || ext == ".ppm")) files.push_back(e.path().string());
  }
  std::sort(files.begin(), files.end());
  Require(static_cast<int64_t>(files.size()) >= batch, ErrorCode::kInvalidArgument,
          dir + " holds " + std::to_string(files.size()) + " images, need " + std::to_string(batch));
  PrivateBatch out;
  for (int64_t n = 0; n < batch; ++n) {
    const Tensor img = ReadImage(files[static_cast<size_t>(n)]);
    if (n == 0) out.images = Tensor(Shape{batch, img.dim(0), img.dim(1), img.dim(2)});
    Require(img.dim(0) == out.images.dim(1) && img.dim(1) == out.images.dim(2) &&
                img.dim(2) == out.images.dim(3),
            ErrorCode::kShapeMismatch, files[static_cast<size_t>(n)] + " differs in shape");
    std::copy(img.data().begin(), img.data().end(), out.images.data().begin() + n * img.numel());
  }
  out.labels = DrawLabels(label_seed, batch, classes);
  return out;
}

}  // namespace ginas
