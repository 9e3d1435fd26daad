#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "hgnn/common.hpp"

namespace hgnn::diff {

// Dense row-major tensor of doubles. Everything in this project is rank-2
// (scalars are 1x1, per-row values are n x 1).
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
      : shape_{rows, cols}, data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) throw InvalidInput("tensor dims must be positive");
  }

  static Tensor from_rows(std::size_t rows, std::size_t cols,
                          std::vector<double> values) {
    if (values.size() != rows * cols)
      throw InvalidInput("tensor data length does not match shape");
    Tensor t;
    t.shape_ = {rows, cols};
    t.data_ = std::move(values);
    return t;
  }

  static Tensor scalar(double v) {
    Tensor t(1, 1);
    t.data_[0] = v;
    return t;
  }

  std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const { return shape_.size() < 2 ? 0 : shape_[1]; }
  std::size_t size() const { return data_.size(); }
  const std::vector<std::size_t>& shape() const { return shape_; }
  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  bool empty() const { return data_.empty(); }

  double& at(std::size_t i, std::size_t j) { return data_[i * cols() + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * cols() + j]; }
  double& operator[](std::size_t k) { return data_[k]; }
  double operator[](std::size_t k) const { return data_[k]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

}  // namespace hgnn::diff
