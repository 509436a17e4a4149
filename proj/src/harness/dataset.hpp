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

#ifndef GINAS_HARNESS_DATASET_HPP_
#define GINAS_HARNESS_DATASET_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "victim/victim.hpp"

namespace ginas {

inline constexpr int64_t kCifarSide = 32;
inline constexpr int64_t kCifarRecordBytes = 1 + 3 * kCifarSide * kCifarSide;

// CIFAR-10 binary batch file: records of one label byte followed by the
// 1024 R, 1024 G and 1024 B bytes, row-major.
PrivateBatch LoadCifar10(const std::string& path, std::span<const int64_t> indices);

// Inverse of LoadCifar10 for pixels already on the 1/255 grid.
void WriteCifar10(const std::string& path, const PrivateBatch& batch);

// Smooth random blobs on a flat background, values in [0, 1]. Labels are
// distinct while batch <= classes.
PrivateBatch SyntheticBatch(uint64_t seed, int64_t batch, int64_t channels, int64_t size,
                            int64_t classes);

// Every .pgm / .ppm file in `dir`, sorted by name; the first `batch` are
// used. All must share one shape. Labels are drawn as for SyntheticBatch.
PrivateBatch LoadImageDirectory(const std::string& dir, int64_t batch, uint64_t label_seed,
                                int64_t classes);

// Distinct labels when count <= classes, otherwise uniform draws.
std::vector<int> DrawLabels(uint64_t seed, int64_t count, int64_t classes);

}  // namespace ginas

#endif  // GINAS_HARNESS_DATASET_HPP_
