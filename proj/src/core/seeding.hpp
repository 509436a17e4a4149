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

#ifndef GINAS_CORE_SEEDING_HPP_
#define GINAS_CORE_SEEDING_HPP_

#include <cstdint>
#include <string_view>

namespace ginas {

// Stable seed derivation: FNV-1a over (master, role, index) followed by a
// splitmix64 finalizer. Independent of std::hash so seeds survive toolchain
// changes, and keyed by index so adding candidates never shifts earlier ones.
uint64_t DeriveSeed(uint64_t master, std::string_view role, uint64_t index = 0);

}  // namespace ginas

#endif  // GINAS_CORE_SEEDING_HPP_
