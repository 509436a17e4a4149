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

#ifndef GINAS_CORE_ERROR_HPP_
#define GINAS_CORE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace ginas {

enum class ErrorCode {
  kInvalidArgument = 1,
  kShapeMismatch = 2,
  kDomain = 3,
  kIo = 4,
  kNumerical = 5,
  kOutOfRange = 6,
};

const char* ErrorCodeName(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// C API can map it onto a stable integer status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void Fail(ErrorCode code, const std::string& message);

inline void Require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) Fail(code, message);
}

}  // namespace ginas

#endif  // GINAS_CORE_ERROR_HPP_
