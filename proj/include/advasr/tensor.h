// include/advasr/tensor.h

// Copyright 2026  The advasr authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef ADVASR_TENSOR_H_
#define ADVASR_TENSOR_H_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "advasr/common.h"

namespace advasr {

/// Dense row-major tensor of 64-bit floats.  Rank is 1 or 2 everywhere in
/// this codebase; the shape is kept generic so reductions can report it.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int64_t> shape) : shape_(std::move(shape)) {
    v_.assign(static_cast<size_t>(numel_of(shape_)), 0.0);
  }

  Tensor(std::vector<int64_t> shape, std::vector<double> values)
      : shape_(std::move(shape)), v_(std::move(values)) {
    if (numel_of(shape_) != static_cast<int64_t>(v_.size()))
      throw ShapeError(str_cat("Tensor: ", v_.size(), " values for shape ",
                               shape_str(shape_)));
  }

  static Tensor zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }

  static Tensor full(std::vector<int64_t> shape, double value) {
    Tensor t(std::move(shape));
    for (auto &x : t.v_) x = value;
    return t;
  }

  static Tensor scalar(double value) { return Tensor({1}, {value}); }

  const std::vector<int64_t> &shape() const { return shape_; }
  int64_t numel() const { return static_cast<int64_t>(v_.size()); }
  bool empty() const { return v_.empty(); }

  /// Rows/cols of a rank-1 or rank-2 tensor (a vector counts as one row).
  int64_t rows() const { return shape_.size() == 2 ? shape_[0] : 1; }
  int64_t cols() const {
    return shape_.size() == 2 ? shape_[1] : (shape_.empty() ? 0 : shape_[0]);
  }

  double *data() { return v_.data(); }
  const double *data() const { return v_.data(); }
  std::vector<double> &values() { return v_; }
  const std::vector<double> &values() const { return v_; }

  double &operator[](int64_t i) { return v_[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return v_[static_cast<size_t>(i)]; }

  double &at(int64_t r, int64_t c) { return v_[static_cast<size_t>(r * cols() + c)]; }
  double at(int64_t r, int64_t c) const { return v_[static_cast<size_t>(r * cols() + c)]; }

  bool same_shape(const Tensor &o) const { return shape_ == o.shape_; }

  bool all_finite() const {
    for (double x : v_)
      if (!std::isfinite(x)) return false;
    return true;
  }

  std::string shape_str() const { return shape_str(shape_); }

  static std::string shape_str(const std::vector<int64_t> &s) {
    std::string out = "[";
    for (size_t i = 0; i < s.size(); ++i) {
      if (i) out += "x";
      out += std::to_string(s[i]);
    }
    return out + "]";
  }

  static int64_t numel_of(const std::vector<int64_t> &s) {
    int64_t n = 1;
    for (int64_t d : s) {
      if (d < 0) throw ShapeError("Tensor: negative dimension in " + shape_str(s));
      n *= d;
    }
    return n;
  }

 private:
  std::vector<int64_t> shape_;
  std::vector<double> v_;
};

}  // namespace advasr

#endif  // ADVASR_TENSOR_H_
