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

#include "harness/image_io.hpp"

#include <cmath>
#include <fstream>
#include <vector>

#include "core/error.hpp"

namespace ginas {

uint8_t QuantizePixel(double v) {
  const double c = std::min(1.0, std::max(0.0, v));
  return static_cast<uint8_t>(std::floor(c * 255.0 + 0.5));
}

int64_t WriteImage(const Tensor& image, const std::string& path) {
  Require(image.rank() == 3, ErrorCode::kShapeMismatch, "write_image expects [C,H,W]");
  const int64_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
  Require(c == 1 || c == 3, ErrorCode::kInvalidArgument, "write_image needs 1 or 3 channels");
  int64_t clamped = 0;
  std::vector<char> bytes(static_cast<size_t>(c * h * w));
  for (int64_t y = 0; y < h; ++y)
    for (int64_t x = 0; x < w; ++x)
      for (int64_t ch = 0; ch < c; ++ch) {
        const double v = image[(ch * h + y) * w + x];
        if (!(v >= 0.0 && v <= 1.0)) ++clamped;
        bytes[static_cast<size_t>((y * w + x) * c + ch)] = static_cast<char>(QuantizePixel(v));
      }
  std::ofstream out(path, std::ios::binary);
  Require(static_cast<bool>(out), ErrorCode::kIo, "cannot open " + path + " for writing");
  out << (c == 3 ? "P6" : "P5") << '\n' << w << ' ' << h << "\n255\n";
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  Require(static_cast<bool>(out), ErrorCode::kIo, "failed writing " + path);
  return clamped;
}

Tensor ReadImage(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(static_cast<bool>(in), ErrorCode::kIo, "cannot open " + path);
  std::string magic;
  int64_t w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  Require(static_cast<bool>(in) && (magic == "P5" || magic == "P6") && w > 0 && h > 0 &&
              maxval == 255,
          ErrorCode::kIo, path + " is not an 8-bit binary PGM/PPM");
  in.get();  // single whitespace before the raster
  const int64_t c = magic == "P6" ? 3 : 1;
  std::vector<unsigned char> bytes(static_cast<size_t>(c * h * w));
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  Require(in.gcount() == static_cast<std::streamsize>(bytes.size()), ErrorCode::kIo,
          path + " is truncated");
  Tensor t(Shape{c, h, w});
  for (int64_t y = 0; y < h; ++y)
    for (int64_t x = 0; x < w; ++x)
      for (int64_t ch = 0; ch < c; ++ch)
        t[(ch * h + y) * w + x] = bytes[static_cast<size_t>((y * w + x) * c + ch)] / 255.0;
  return t;
}

}  // namespace ginas
