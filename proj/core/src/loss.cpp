#include "ndt/loss.hpp"

#include <cmath>

#include "ndt/errors.hpp"

namespace ndt {

template <typename T>
SoftmaxCrossEntropyResultT<T> softmax_cross_entropy(const TensorT<T>& logits, const std::vector<int>& labels) {
  if (logits.rank() != 2) {
    throw DimensionError("softmax_cross_entropy expects [n x C] logits, got " + logits.shape_str());
  }
  const std::size_t n = logits.rows(), c = logits.cols();
  if (labels.size() != n) {
    throw DimensionError("softmax_cross_entropy got " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(n) + " logit rows");
  }
  if (n == 0) {
    throw DataError("softmax_cross_entropy on an empty batch");
  }

  SoftmaxCrossEntropyResultT<T> result;
  result.dlogits = TensorT<T>({n, c});
  double total = 0.0;
  std::vector<double> p(c);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= c) {
      throw DataError("label " + std::to_string(label) + " out of range [0, " + std::to_string(c) +
                      ") at sample " + std::to_string(i));
    }
    const T* row = logits.data() + i * c;
    double max_logit = static_cast<double>(row[0]);
    for (std::size_t j = 1; j < c; ++j) max_logit = std::max(max_logit, static_cast<double>(row[j]));
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      p[j] = std::exp(static_cast<double>(row[j]) - max_logit);
      sum += p[j];
    }
    total += std::log(sum) - (static_cast<double>(row[label]) - max_logit);
    T* drow = result.dlogits.data() + i * c;
    const double inv = 1.0 / (sum * static_cast<double>(n));
    for (std::size_t j = 0; j < c; ++j) drow[j] = static_cast<T>(p[j] * inv);
    drow[label] -= static_cast<T>(1.0 / static_cast<double>(n));
  }
  result.loss = total / static_cast<double>(n);
  return result;
}

template SoftmaxCrossEntropyResultT<float> softmax_cross_entropy(const TensorT<float>&, const std::vector<int>&);
template SoftmaxCrossEntropyResultT<double> softmax_cross_entropy(const TensorT<double>&, const std::vector<int>&);

}  // namespace ndt
