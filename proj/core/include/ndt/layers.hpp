#pragma once

#include <cstdint>
#include <vector>

#include "ndt/rng.hpp"
#include "ndt/tensor.hpp"

namespace ndt {

enum class Activation { identity, tanh };

// Fully connected layer y = act(x W + b) with explicit forward/backward.
template <typename T>
struct DenseLayerT {
  TensorT<T> weights;  // [fan_in x fan_out]
  TensorT<T> bias;     // [fan_out]
  Activation activation = Activation::tanh;

  std::size_t fan_in() const { return weights.shape()[0]; }
  std::size_t fan_out() const { return weights.shape()[1]; }
};

// Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero bias. Weights
// are drawn row-major in a fixed order, so a seed pins every parameter.
template <typename T>
DenseLayerT<T> make_dense_layer(std::size_t fan_in, std::size_t fan_out, Activation activation, Rng& rng);

template <typename T>
struct DenseCacheT {
  const DenseLayerT<T>* layer = nullptr;
  TensorT<T> input;   // x
  TensorT<T> output;  // act(x W + b); tanh backward reads it directly
};

template <typename T>
struct DenseForwardResultT {
  TensorT<T> output;
  DenseCacheT<T> cache;
};

template <typename T>
struct DenseGradsT {
  TensorT<T> dinput;
  TensorT<T> dweights;
  TensorT<T> dbias;
};

template <typename T>
DenseForwardResultT<T> dense_forward(const DenseLayerT<T>& layer, const TensorT<T>& x);

// Exact gradients of the forward map. The cache must come from the matching
// forward call; mismatched shapes or a foreign cache raise ContractError.
template <typename T>
DenseGradsT<T> dense_backward(const DenseCacheT<T>& cache, const TensorT<T>& dy);

// A stack of dense layers. An empty stack is the identity map, which is the
// default feature network.
template <typename T>
struct MlpT {
  std::vector<DenseLayerT<T>> layers;

  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().fan_in(); }
  std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().fan_out(); }
};

// dims lists every width including input and output, e.g. {784, 300, 1}.
// Hidden layers use tanh; the last layer uses final_activation.
template <typename T>
MlpT<T> make_mlp(const std::vector<std::size_t>& dims, Activation final_activation, Rng& rng);

template <typename T>
struct MlpCacheT {
  std::vector<DenseCacheT<T>> layers;  // empty for the identity stack
};

template <typename T>
struct MlpForwardResultT {
  TensorT<T> output;
  MlpCacheT<T> cache;
};

// Per-layer parameter gradients, accumulated across calls.
template <typename T>
struct MlpGradsT {
  std::vector<TensorT<T>> dweights;
  std::vector<TensorT<T>> dbias;
};

template <typename T>
MlpGradsT<T> make_mlp_grads(const MlpT<T>& mlp);

template <typename T>
MlpForwardResultT<T> mlp_forward(const MlpT<T>& mlp, const TensorT<T>& x);

// Accumulates parameter gradients into `grads` and returns the gradient
// with respect to the stack input.
template <typename T>
TensorT<T> mlp_backward(const MlpT<T>& mlp, const MlpCacheT<T>& cache, const TensorT<T>& dy, MlpGradsT<T>& grads);

extern template struct DenseLayerT<float>;
extern template struct DenseLayerT<double>;
extern template DenseLayerT<float> make_dense_layer(std::size_t, std::size_t, Activation, Rng&);
extern template DenseLayerT<double> make_dense_layer(std::size_t, std::size_t, Activation, Rng&);
extern template DenseForwardResultT<float> dense_forward(const DenseLayerT<float>&, const TensorT<float>&);
extern template DenseForwardResultT<double> dense_forward(const DenseLayerT<double>&, const TensorT<double>&);
extern template DenseGradsT<float> dense_backward(const DenseCacheT<float>&, const TensorT<float>&);
extern template DenseGradsT<double> dense_backward(const DenseCacheT<double>&, const TensorT<double>&);
extern template MlpT<float> make_mlp(const std::vector<std::size_t>&, Activation, Rng&);
extern template MlpT<double> make_mlp(const std::vector<std::size_t>&, Activation, Rng&);
extern template MlpGradsT<float> make_mlp_grads(const MlpT<float>&);
extern template MlpGradsT<double> make_mlp_grads(const MlpT<double>&);
extern template MlpForwardResultT<float> mlp_forward(const MlpT<float>&, const TensorT<float>&);
extern template MlpForwardResultT<double> mlp_forward(const MlpT<double>&, const TensorT<double>&);
extern template TensorT<float> mlp_backward(const MlpT<float>&, const MlpCacheT<float>&, const TensorT<float>&,
                                            MlpGradsT<float>&);
extern template TensorT<double> mlp_backward(const MlpT<double>&, const MlpCacheT<double>&, const TensorT<double>&,
                                             MlpGradsT<double>&);

}  // namespace ndt
