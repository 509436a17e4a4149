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

#ifndef GINAS_HARNESS_IMAGE_IO_HPP_
#define GINAS_HARNESS_IMAGE_IO_HPP_

#include <cstdint>
#include <string>

#include "core/tensor.hpp"

namespace ginas {

// Binary PGM (C=1) or PPM (C=3), maxval 255, round half up. Values outside
// [0, 1] are clamped; returns how many were.
int64_t WriteImage(const Tensor& image, const std::string& path);

// Reads P5 / P6 with maxval 255 into [C, H, W] scaled by 1/255.
Tensor ReadImage(const std::string& path);

// round(clamp(v, 0, 1) * 255) with halves rounded up.
uint8_t QuantizePixel(double v);

}  // namespace ginas

#endif  // GINAS_HARNESS_IMAGE_IO_HPP_
