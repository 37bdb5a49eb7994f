#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ndt/errors.hpp"

namespace ndt {

// Dense rectangular array in row-major order, the sole numeric carrier of
// the framework. Rank is almost always 1 (bias vectors) or 2 (matrices).
template <typename T>
class TensorT {
 public:
  TensorT() = default;
  explicit TensorT(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(checked_volume(shape_), T(0)) {}
  TensorT(std::vector<std::size_t> shape, std::vector<T> values)
      : shape_(std::move(shape)), data_(std::move(values)) {
    if (checked_volume(shape_) != data_.size()) {
      throw DimensionError("tensor value count " + std::to_string(data_.size()) +
                           " does not match shape " + shape_string(shape_));
    }
  }

  static TensorT zeros(std::vector<std::size_t> shape) { return TensorT(std::move(shape)); }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t rows() const {
    require_rank2("rows()");
    return shape_[0];
  }
  std::size_t cols() const {
    require_rank2("cols()");
    return shape_[1];
  }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  T operator()(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }
  T& operator[](std::size_t i) { return data_[i]; }
  T operator[](std::size_t i) const { return data_[i]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  bool same_shape(const TensorT& other) const { return shape_ == other.shape_; }

  std::string shape_str() const { return shape_string(shape_); }

  bool all_finite() const;

  static std::string shape_string(const std::vector<std::size_t>& shape);

 private:
  void require_rank2(const char* what) const {
    if (shape_.size() != 2) {
      throw DimensionError(std::string(what) + " requires a rank-2 tensor, got shape " + shape_str());
    }
  }
  static std::size_t checked_volume(const std::vector<std::size_t>& shape);

  std::vector<std::size_t> shape_;
  std::vector<T> data_;
};

using Tensor = TensorT<double>;

// Matrix products. The *_tn and *_nt forms fold the transpose of the first
// or second operand into the product so backward passes never materialize
// transposed weight or activation matrices.
template <typename T>
TensorT<T> matmul(const TensorT<T>& a, const TensorT<T>& b);  // a [n x k] * b [k x m]
template <typename T>
TensorT<T> matmul_tn(const TensorT<T>& a, const TensorT<T>& b);  // a^T [k x n] * b [k x m]
template <typename T>
TensorT<T> matmul_nt(const TensorT<T>& a, const TensorT<T>& b);  // a [n x k] * b^T [m x k]

extern template class TensorT<float>;
extern template class TensorT<double>;
extern template TensorT<float> matmul(const TensorT<float>&, const TensorT<float>&);
extern template TensorT<double> matmul(const TensorT<double>&, const TensorT<double>&);
extern template TensorT<float> matmul_tn(const TensorT<float>&, const TensorT<float>&);
extern template TensorT<double> matmul_tn(const TensorT<double>&, const TensorT<double>&);
extern template TensorT<float> matmul_nt(const TensorT<float>&, const TensorT<float>&);
extern template TensorT<double> matmul_nt(const TensorT<double>&, const TensorT<double>&);

}  // namespace ndt
