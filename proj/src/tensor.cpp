#include "sniper/tensor.hpp"

#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace sniper {

size_t shape_numel(const std::vector<size_t>& shape) {
  size_t n = 1;
  for (size_t d : shape) n *= d;
  return n;
}

std::string shape_to_string(const std::vector<size_t>& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << " x ";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

Tensor::Tensor(std::vector<size_t> shape) : shape_(std::move(shape)) {
  for (size_t d : shape_) {
    if (d == 0) throw std::invalid_argument("tensor: zero-sized dimension in " + shape_to_string(shape_));
  }
  if (shape_.empty()) throw std::invalid_argument("tensor: shape must have at least one dimension");
  data_.assign(shape_numel(shape_), 0.0);
}

Tensor::Tensor(std::vector<size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_.empty()) throw std::invalid_argument("tensor: shape must have at least one dimension");
  if (data_.size() != shape_numel(shape_)) {
    throw std::invalid_argument("tensor: data length " + std::to_string(data_.size()) +
                                " does not match shape " + shape_to_string(shape_));
  }
}

Tensor Tensor::full(std::vector<size_t> shape, double v) {
  Tensor t(std::move(shape));
  t.fill(v);
  return t;
}

size_t Tensor::rows() const { return shape_.size() >= 2 ? shape_[0] : 1; }

size_t Tensor::cols() const {
  return shape_.size() >= 2 ? shape_[shape_.size() - 1] : (shape_.empty() ? 0 : shape_[0]);
}

bool Tensor::bitwise_equal(const Tensor& o) const {
  if (shape_ != o.shape_) return false;
  return std::memcmp(data_.data(), o.data_.data(), data_.size() * sizeof(double)) == 0;
}

void Tensor::fill(double v) {
  for (double& x : data_) x = v;
}

void Tensor::check_finite(const char* context) const {
  for (size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw std::runtime_error(std::string(context) + ": non-finite value at flat index " +
                               std::to_string(i));
    }
  }
}

}  // namespace sniper
