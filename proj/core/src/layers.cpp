#include "ndt/layers.hpp"

#include <cmath>

namespace ndt {

template <typename T>
DenseLayerT<T> make_dense_layer(std::size_t fan_in, std::size_t fan_out, Activation activation, Rng& rng) {
  if (fan_in == 0 || fan_out == 0) {
    throw ConfigError("dense layer dimensions must be positive, got " + std::to_string(fan_in) + " -> " +
                      std::to_string(fan_out));
  }
  DenseLayerT<T> layer;
  layer.weights = TensorT<T>({fan_in, fan_out});
  layer.bias = TensorT<T>({fan_out});
  layer.activation = activation;
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (std::size_t i = 0; i < layer.weights.size(); ++i) {
    layer.weights[i] = static_cast<T>(rng.uniform(-bound, bound));
  }
  return layer;
}

template <typename T>
DenseForwardResultT<T> dense_forward(const DenseLayerT<T>& layer, const TensorT<T>& x) {
  if (x.rank() != 2 || x.cols() != layer.fan_in()) {
    throw DimensionError("dense_forward input " + x.shape_str() + " does not match layer weights " +
                         layer.weights.shape_str());
  }
  TensorT<T> y = matmul(x, layer.weights);
  const std::size_t n = y.rows(), m = y.cols();
  const T* b = layer.bias.data();
  T* yd = y.data();
  for (std::size_t i = 0; i < n; ++i) {
    T* row = yd + i * m;
    for (std::size_t j = 0; j < m; ++j) row[j] += b[j];
  }
  if (layer.activation == Activation::tanh) {
    for (std::size_t i = 0; i < y.size(); ++i) yd[i] = std::tanh(yd[i]);
  }
  DenseForwardResultT<T> result;
  result.cache.layer = &layer;
  result.cache.input = x;
  result.cache.output = y;
  result.output = std::move(y);
  return result;
}

template <typename T>
DenseGradsT<T> dense_backward(const DenseCacheT<T>& cache, const TensorT<T>& dy) {
  if (cache.layer == nullptr) {
    throw ContractError("dense_backward called with an empty cache");
  }
  const DenseLayerT<T>& layer = *cache.layer;
  if (!dy.same_shape(cache.output)) {
    throw ContractError("dense_backward upstream gradient " + dy.shape_str() + " does not match cached output " +
                        cache.output.shape_str());
  }
  if (cache.input.rank() != 2 || cache.input.cols() != layer.fan_in() || cache.output.cols() != layer.fan_out()) {
    throw ContractError("dense_backward cache is stale for layer " + layer.weights.shape_str());
  }

  TensorT<T> dz = dy;
  if (layer.activation == Activation::tanh) {
    const T* y = cache.output.data();
    T* d = dz.data();
    for (std::size_t i = 0; i < dz.size(); ++i) d[i] *= T(1) - y[i] * y[i];
  }

  DenseGradsT<T> grads;
  grads.dweights = matmul_tn(cache.input, dz);  // x^T dz
  grads.dbias = TensorT<T>({layer.fan_out()});
  const std::size_t n = dz.rows(), m = dz.cols();
  T* db = grads.dbias.data();
  const T* dzd = dz.data();
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = dzd + i * m;
    for (std::size_t j = 0; j < m; ++j) db[j] += row[j];
  }
  grads.dinput = matmul_nt(dz, layer.weights);  // dz W^T
  return grads;
}

template <typename T>
MlpT<T> make_mlp(const std::vector<std::size_t>& dims, Activation final_activation, Rng& rng) {
  if (dims.size() < 2) {
    throw ConfigError("an MLP needs at least an input and an output width, got " +
                      std::to_string(dims.size()) + " entries");
  }
  MlpT<T> mlp;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const bool last = (i + 2 == dims.size());
    mlp.layers.push_back(make_dense_layer<T>(dims[i], dims[i + 1], last ? final_activation : Activation::tanh, rng));
  }
  return mlp;
}

template <typename T>
MlpGradsT<T> make_mlp_grads(const MlpT<T>& mlp) {
  MlpGradsT<T> grads;
  grads.dweights.reserve(mlp.layers.size());
  grads.dbias.reserve(mlp.layers.size());
  for (const auto& layer : mlp.layers) {
    grads.dweights.emplace_back(layer.weights.shape());
    grads.dbias.emplace_back(layer.bias.shape());
  }
  return grads;
}

template <typename T>
MlpForwardResultT<T> mlp_forward(const MlpT<T>& mlp, const TensorT<T>& x) {
  MlpForwardResultT<T> result;
  if (mlp.layers.empty()) {
    result.output = x;  // identity stack
    return result;
  }
  TensorT<T> cur = x;
  result.cache.layers.reserve(mlp.layers.size());
  for (const auto& layer : mlp.layers) {
    auto step = dense_forward(layer, cur);
    cur = std::move(step.output);
    result.cache.layers.push_back(std::move(step.cache));
  }
  result.output = std::move(cur);
  return result;
}

template <typename T>
TensorT<T> mlp_backward(const MlpT<T>& mlp, const MlpCacheT<T>& cache, const TensorT<T>& dy, MlpGradsT<T>& grads) {
  if (mlp.layers.empty()) {
    return dy;  // identity stack
  }
  if (cache.layers.size() != mlp.layers.size() || grads.dweights.size() != mlp.layers.size()) {
    throw ContractError("mlp_backward cache/grads do not match the stack, " + std::to_string(cache.layers.size()) +
                        " cached layers vs " + std::to_string(mlp.layers.size()));
  }
  TensorT<T> cur = dy;
  for (std::size_t i = mlp.layers.size(); i-- > 0;) {
    auto layer_grads = dense_backward(cache.layers[i], cur);
    T* dw = grads.dweights[i].data();
    const T* src_w = layer_grads.dweights.data();
    for (std::size_t j = 0; j < grads.dweights[i].size(); ++j) dw[j] += src_w[j];
    T* db = grads.dbias[i].data();
    const T* src_b = layer_grads.dbias.data();
    for (std::size_t j = 0; j < grads.dbias[i].size(); ++j) db[j] += src_b[j];
    cur = std::move(layer_grads.dinput);
  }
  return cur;
}

template struct DenseLayerT<float>;
template struct DenseLayerT<double>;
template DenseLayerT<float> make_dense_layer(std::size_t, std::size_t, Activation, Rng&);
template DenseLayerT<double> make_dense_layer(std::size_t, std::size_t, Activation, Rng&);
template DenseForwardResultT<float> dense_forward(const DenseLayerT<float>&, const TensorT<float>&);
template DenseForwardResultT<double> dense_forward(const DenseLayerT<double>&, const TensorT<double>&);
template DenseGradsT<float> dense_backward(const DenseCacheT<float>&, const TensorT<float>&);
template DenseGradsT<double> dense_backward(const DenseCacheT<double>&, const TensorT<double>&);
template MlpT<float> make_mlp(const std::vector<std::size_t>&, Activation, Rng&);
template MlpT<double> make_mlp(const std::vector<std::size_t>&, Activation, Rng&);
template MlpGradsT<float> make_mlp_grads(const MlpT<float>&);
template MlpGradsT<double> make_mlp_grads(const MlpT<double>&);
template MlpForwardResultT<float> mlp_forward(const MlpT<float>&, const TensorT<float>&);
template MlpForwardResultT<double> mlp_forward(const MlpT<double>&, const TensorT<double>&);
template TensorT<float> mlp_backward(const MlpT<float>&, const MlpCacheT<float>&, const TensorT<float>&,
                                     MlpGradsT<float>&);
template TensorT<double> mlp_backward(const MlpT<double>&, const MlpCacheT<double>&, const TensorT<double>&,
                                      MlpGradsT<double>&);

}  // namespace ndt
