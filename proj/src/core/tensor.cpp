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

#include "core/tensor.hpp"

#include <cmath>
#include <cstring>
#include <sstream>
#include <utility>

#include "core/error.hpp"

namespace ginas {

int64_t NumElements(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {
void CheckShape(const Shape& shape) {
  for (int64_t d : shape) {
    Require(d > 0, ErrorCode::kInvalidArgument,
            "tensor dimensions must be positive, got " + ShapeToString(shape));
  }
}
}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  CheckShape(shape_);
  data_.assign(static_cast<size_t>(NumElements(shape_)), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  CheckShape(shape_);
  Require(NumElements(shape_) == static_cast<int64_t>(data_.size()),
          ErrorCode::kShapeMismatch,
          "data length " + std::to_string(data_.size()) +
              " does not match shape " + ShapeToString(shape_));
}

Tensor Tensor::Scalar(double value) { return Tensor(Shape{1}, {value}); }

int64_t Tensor::dim(int64_t axis) const {
  Require(axis >= 0 && axis < rank(), ErrorCode::kOutOfRange,
          "axis out of range for shape " + ShapeToString(shape_));
  return shape_[static_cast<size_t>(axis)];
}

double& Tensor::at(int64_t n, int64_t c, int64_t h, int64_t w) {
  return data_[static_cast<size_t>(
      ((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
}

double Tensor::at(int64_t n, int64_t c, int64_t h, int64_t w) const {
  return data_[static_cast<size_t>(
      ((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
}

double Tensor::item() const {
  Require(data_.size() == 1, ErrorCode::kShapeMismatch,
          "item() requires a single-element tensor, got " +
              ShapeToString(shape_));
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  Require(NumElements(shape) == numel(), ErrorCode::kShapeMismatch,
          "cannot reshape " + ShapeToString(shape_) + " to " +
              ShapeToString(shape));
  return Tensor(std::move(shape), data_);
}

bool Tensor::AllFinite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool SameShape(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape();
}

uint64_t ChecksumUpdate(uint64_t h, const Tensor& t) {
  for (double v : t.data()) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ull;
    }
  }
  return h;
}

}  // namespace ginas
