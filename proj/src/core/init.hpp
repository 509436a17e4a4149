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

#ifndef GINAS_CORE_INIT_HPP_
#define GINAS_CORE_INIT_HPP_

#include <cmath>
#include <random>

#include "core/tensor.hpp"

namespace ginas {

inline Tensor UniformTensor(Shape shape, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = dist(rng);
  return t;
}

// Kaiming-uniform with negative slope sqrt(5), the torch.nn layer default:
// bound = sqrt(6 / ((1 + 5) fan_in)) = 1 / sqrt(fan_in).
inline Tensor KaimingUniform(Shape shape, int64_t fan_in, std::mt19937_64& rng) {
  return UniformTensor(std::move(shape), 1.0 / std::sqrt(static_cast<double>(fan_in)), rng);
}

inline Tensor BiasUniform(int64_t size, int64_t fan_in, std::mt19937_64& rng) {
  return UniformTensor(Shape{size}, 1.0 / std::sqrt(static_cast<double>(fan_in)), rng);
}

}  // namespace ginas

#endif  // GINAS_CORE_INIT_HPP_
