// include/simuls2s/numerics/tensor.h

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

#ifndef SIMULS2S_NUMERICS_TENSOR_H_
#define SIMULS2S_NUMERICS_TENSOR_H_

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace simuls2s {

using Shape = std::vector<int>;

std::string ShapeToString(const Shape& shape);
std::size_t NumElements(const Shape& shape);

// Immutable dense tensor of 64-bit floats in row-major order. Copies share the
// underlying buffer. Construction rejects NaN/Inf with NumericError.
//
// Almost every op in the library works on rank-2 tensors; rows()/cols() view a
// rank-1 tensor of length n as 1 x n and a rank-0 tensor as 1 x 1.
class Tensor {
 public:
  Tensor();
  Tensor(Shape shape, std::vector<double> data);

  static Tensor Zeros(Shape shape);
  static Tensor Filled(Shape shape, double value);
  static Tensor Scalar(double value);
  static Tensor Matrix(int rows, int cols, std::vector<double> data);
  static Tensor Identity(int n);

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_->size(); }
  bool empty() const { return data_->empty(); }

  int rows() const;
  int cols() const;

  std::span<const double> data() const { return {data_->data(), data_->size()}; }
  std::span<const double> row(int r) const;
  double operator[](std::size_t i) const { return (*data_)[i]; }
  double at(int r, int c) const;
  double item() const;

  // Same data, new shape with the same element count.
  Tensor Reshaped(Shape shape) const;
  std::vector<double> ToVector() const { return *data_; }

 private:
  Shape shape_;
  std::shared_ptr<const std::vector<double>> data_;
};

// Throws NumericError naming `where` if any value is NaN or infinite.
void CheckFinite(std::span<const double> values, const char* where);

double MaxAbsDiff(const Tensor& a, const Tensor& b);

// Column-contiguous boolean matrix; true marks an allowed attention edge.
class Mask {
 public:
  Mask() = default;
  Mask(int rows, int cols, bool value);

  static Mask Causal(int n);
  // Row i may attend to columns c with chunk(c) <= chunk(i) for chunk(x) =
  // x / chunk_size.
  static Mask Chunked(int n, int chunk_size);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool operator()(int r, int c) const { return bits_[static_cast<std::size_t>(r) * cols_ + c] != 0; }
  void Set(int r, int c, bool value) { bits_[static_cast<std::size_t>(r) * cols_ + c] = value ? 1 : 0; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<unsigned char> bits_;
};

}  // namespace simuls2s

#endif  // SIMULS2S_NUMERICS_TENSOR_H_
