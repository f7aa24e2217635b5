// src/numerics/tensor.cc

// Copyright 2026  The simuls2s Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "simuls2s/numerics/tensor.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "simuls2s/base/error.h"

namespace simuls2s {

std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? " x " : "") << shape[i];
  os << "]";
  return os.str();
}

std::size_t NumElements(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ShapeError("negative dimension in " + ShapeToString(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

void CheckFinite(std::span<const double> values, const char* where) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string("non-finite value produced by ") + where);
    }
  }
}

Tensor::Tensor() : shape_{0}, data_(std::make_shared<const std::vector<double>>()) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)) {
  if (NumElements(shape_) != data.size()) {
    throw ShapeError("tensor data length " + std::to_string(data.size()) +
                     " does not match shape " + ShapeToString(shape_));
  }
  CheckFinite(data, "tensor construction");
  data_ = std::make_shared<const std::vector<double>>(std::move(data));
}

Tensor Tensor::Zeros(Shape shape) {
  std::size_t n = NumElements(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::Filled(Shape shape, double value) {
  std::size_t n = NumElements(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::Scalar(double value) { return Tensor({1, 1}, {value}); }

Tensor Tensor::Matrix(int rows, int cols, std::vector<double> data) {
  return Tensor({rows, cols}, std::move(data));
}

Tensor Tensor::Identity(int n) {
  std::vector<double> d(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i) * n + i] = 1.0;
  return Matrix(n, n, std::move(d));
}

int Tensor::rows() const {
  if (rank() == 2) return shape_[0];
  if (rank() <= 1) return 1;
  throw ShapeError("rows() on tensor of rank " + std::to_string(rank()));
}

int Tensor::cols() const {
  if (rank() == 2) return shape_[1];
  if (rank() == 1) return shape_[0];
  if (rank() == 0) return 1;
  throw ShapeError("cols() on tensor of rank " + std::to_string(rank()));
}

std::span<const double> Tensor::row(int r) const {
  const int c = cols();
  return {data_->data() + static_cast<std::size_t>(r) * c, static_cast<std::size_t>(c)};
}

double Tensor::at(int r, int c) const {
  return (*data_)[static_cast<std::size_t>(r) * cols() + c];
}

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() on tensor of shape " + ShapeToString(shape_));
  return (*data_)[0];
}

Tensor Tensor::Reshaped(Shape shape) const {
  if (NumElements(shape) != size()) {
    throw ShapeError("cannot reshape " + ShapeToString(shape_) + " to " + ShapeToString(shape));
  }
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = data_;
  return t;
}

double MaxAbsDiff(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

Mask::Mask(int rows, int cols, bool value)
    : rows_(rows), cols_(cols),
      bits_(static_cast<std::size_t>(rows) * cols, value ? 1 : 0) {}

Mask Mask::Causal(int n) {
  Mask m(n, n, false);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c <= r; ++c) m.Set(r, c, true);
  return m;
}

Mask Mask::Chunked(int n, int chunk_size) {
  S2S_CHECK(chunk_size >= 1, "chunk size must be positive");
  Mask m(n, n, false);
  for (int r = 0; r < n; ++r) {
    const int limit = std::min(n, (r / chunk_size + 1) * chunk_size);
    for (int c = 0; c < limit; ++c) m.Set(r, c, true);
  }
  return m;
}

}  // namespace simuls2s
