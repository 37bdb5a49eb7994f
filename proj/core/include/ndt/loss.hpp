#pragma once

#include <vector>

#include "ndt/tensor.hpp"

namespace ndt {

template <typename T>
struct SoftmaxCrossEntropyResultT {
  double loss = 0.0;     // mean over samples of -ln softmax(logits)[label]
  TensorT<T> dlogits;    // (softmax - onehot) / n
};

// Numerically stable softmax cross entropy. Per-row reductions run in
// double regardless of T.
template <typename T>
SoftmaxCrossEntropyResultT<T> softmax_cross_entropy(const TensorT<T>& logits, const std::vector<int>& labels);

extern template SoftmaxCrossEntropyResultT<float> softmax_cross_entropy(const TensorT<float>&,
                                                                        const std::vector<int>&);
extern template SoftmaxCrossEntropyResultT<double> softmax_cross_entropy(const TensorT<double>&,
                                                                         const std::vector<int>&);

}  // namespace ndt
