#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace sniper {

// Dense row-major array of 64-bit floats; the sole numeric carrier.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<size_t> shape);  // zero-filled
  Tensor(std::vector<size_t> shape, std::vector<double> data);

  static Tensor zeros(std::vector<size_t> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<size_t> shape, double v);

  const std::vector<size_t>& shape() const { return shape_; }
  size_t ndim() const { return shape_.size(); }
  size_t numel() const { return data_.size(); }

  // 2-d accessors; a 1-d tensor behaves as a single row.
  size_t rows() const;
  size_t cols() const;
  double& at(size_t r, size_t c) { return data_[r * cols() + c]; }
  double at(size_t r, size_t c) const { return data_[r * cols() + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& vec() { return data_; }
  const std::vector<double>& vec() const { return data_; }

  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  bool bitwise_equal(const Tensor& o) const;

  void fill(double v);
  // Throws std::runtime_error naming `context` if any entry is NaN/Inf.
  void check_finite(const char* context) const;

  std::string shape_str() const;  // e.g. "[8 x 4]"

 private:
  std::vector<size_t> shape_;
  std::vector<double> data_;
};

size_t shape_numel(const std::vector<size_t>& shape);
std::string shape_to_string(const std::vector<size_t>& shape);

}  // namespace sniper
