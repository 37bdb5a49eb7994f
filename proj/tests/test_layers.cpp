#include <doctest.h>

#include <cmath>

#include "ndt/layers.hpp"
#include "ndt/testing.hpp"
#include "util.hpp"

using namespace ndt;

TEST_SUITE_BEGIN("layers");

TEST_CASE("zero weights and bias with tanh produce zeros") {
  DenseLayerT<double> layer;
  layer.weights = Tensor({3, 2});
  layer.bias = Tensor({2});
  layer.activation = Activation::tanh;
  Tensor x({2, 3}, {1, -2, 3, 0.5, 0.25, -1});
  auto fwd = dense_forward(layer, x);
  for (std::size_t i = 0; i < fwd.output.size(); ++i) CHECK(fwd.output[i] == 0.0);
}

TEST_CASE("identity activation with identity weights reproduces the input") {
  DenseLayerT<double> layer;
  layer.weights = Tensor({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  layer.bias = Tensor({3});
  layer.activation = Activation::identity;
  Rng rng(3);
  Tensor x({4, 3});
  testing::fill_uniform(x, rng);
  auto fwd = dense_forward(layer, x);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(fwd.output[i] == x[i]);
}

TEST_CASE("forward matches an independent recomputation") {
  Rng rng(17);
  DenseLayerT<double> layer = make_dense_layer<double>(4, 3, Activation::tanh, rng);
  Tensor x({5, 4});
  testing::fill_uniform(x, rng);
  auto fwd = dense_forward(layer, x);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      double acc = layer.bias[j];
      for (std::size_t k = 0; k < 4; ++k) acc += x(i, k) * layer.weights(k, j);
      CHECK(std::abs(fwd.output(i, j) - std::tanh(acc)) < 1e-12);
    }
  }
}

TEST_CASE("zero upstream gradient zeroes every gradient") {
  Rng rng(5);
  DenseLayerT<double> layer = make_dense_layer<double>(3, 2, Activation::tanh, rng);
  Tensor x({4, 3});
  testing::fill_uniform(x, rng);
  auto fwd = dense_forward(layer, x);
  Tensor dy({4, 2});
  auto grads = dense_backward(fwd.cache, dy);
  for (std::size_t i = 0; i < grads.dweights.size(); ++i) CHECK(grads.dweights[i] == 0.0);
  for (std::size_t i = 0; i < grads.dbias.size(); ++i) CHECK(grads.dbias[i] == 0.0);
  for (std::size_t i = 0; i < grads.dinput.size(); ++i) CHECK(grads.dinput[i] == 0.0);
}

TEST_CASE("linear single-output closed form: dW equals x^T dy") {
  DenseLayerT<double> layer;
  layer.weights = Tensor({2, 1}, {0.3, -0.7});
  layer.bias = Tensor({1}, {0.1});
  layer.activation = Activation::identity;
  Tensor x({1, 2}, {2.0, -1.5});
  auto fwd = dense_forward(layer, x);
  Tensor dy({1, 1}, {0.25});
  auto grads = dense_backward(fwd.cache, dy);
  CHECK(grads.dweights(0, 0) == 2.0 * 0.25);
  CHECK(grads.dweights(1, 0) == -1.5 * 0.25);
  CHECK(grads.dbias[0] == 0.25);
}

TEST_CASE("backward matches central finite differences on 100 random instances") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t fan_in = 1 + rng.index(5);
    const std::size_t fan_out = 1 + rng.index(5);
    const std::size_t n = 1 + rng.index(4);
    const Activation act = rng.index(2) ? Activation::tanh : Activation::identity;
    DenseLayerT<double> layer = make_dense_layer<double>(fan_in, fan_out, act, rng);
    testing::fill_uniform(layer.bias, rng, -0.5, 0.5);
    Tensor x({n, fan_in});
    testing::fill_uniform(x, rng);
    Tensor probe({n, fan_out});
    testing::fill_uniform(probe, rng);

    // scalar objective s = sum(forward(...) * probe)
    auto objective = [&]() {
      auto out = dense_forward(layer, x).output;
      double s = 0.0;
      for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * probe[i];
      return s;
    };

    auto fwd = dense_forward(layer, x);
    auto grads = dense_backward(fwd.cache, probe);

    const double h = 1e-6;
    auto check_block = [&](Tensor& params, const Tensor& analytic) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + h;
        const double up = objective();
        params[i] = saved - h;
        const double down = objective();
        params[i] = saved;
        const double fd = (up - down) / (2.0 * h);
        CHECK(rel_err(analytic[i], fd) < 1e-5);
      }
    };
    check_block(layer.weights, grads.dweights);
    check_block(layer.bias, grads.dbias);
    check_block(x, grads.dinput);
  }
}

TEST_CASE("backward rejects a mismatched cache") {
  Rng rng(1);
  DenseLayerT<double> layer = make_dense_layer<double>(3, 2, Activation::tanh, rng);
  Tensor x({4, 3});
  auto fwd = dense_forward(layer, x);
  Tensor wrong_dy({3, 2});
  CHECK_THROWS_AS(dense_backward(fwd.cache, wrong_dy), ContractError);
  DenseCacheT<double> empty;
  Tensor dy({4, 2});
  CHECK_THROWS_AS(dense_backward(empty, dy), ContractError);
}

TEST_CASE("forward rejects shape mismatches") {
  Rng rng(2);
  DenseLayerT<double> layer = make_dense_layer<double>(3, 2, Activation::tanh, rng);
  Tensor bad({4, 5});
  CHECK_THROWS_AS(dense_forward(layer, bad), DimensionError);
}

TEST_CASE("mlp stacks layers and an empty stack is the identity") {
  Rng rng(4);
  MlpT<double> mlp = make_mlp<double>({4, 6, 2}, Activation::identity, rng);
  REQUIRE(mlp.layers.size() == 2);
  CHECK(mlp.layers[0].activation == Activation::tanh);
  CHECK(mlp.layers[1].activation == Activation::identity);

  Tensor x({3, 4});
  testing::fill_uniform(x, rng);
  auto fwd = mlp_forward(mlp, x);
  CHECK(fwd.output.rows() == 3);
  CHECK(fwd.output.cols() == 2);

  MlpT<double> identity;
  auto id_fwd = mlp_forward(identity, x);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(id_fwd.output[i] == x[i]);
  MlpGradsT<double> no_grads;
  Tensor dx = mlp_backward(identity, id_fwd.cache, x, no_grads);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(dx[i] == x[i]);
}

TEST_CASE("empty-row input flows through a dense stack") {
  Rng rng(12);
  MlpT<double> mlp = make_mlp<double>({4, 3, 2}, Activation::identity, rng);
  Tensor x({0, 4});
  auto fwd = mlp_forward(mlp, x);
  CHECK(fwd.output.rows() == 0);
  CHECK(fwd.output.cols() == 2);
  MlpGradsT<double> grads = make_mlp_grads(mlp);
  Tensor dy({0, 2});
  Tensor dx = mlp_backward(mlp, fwd.cache, dy, grads);
  CHECK(dx.rows() == 0);
  CHECK(dx.cols() == 4);
  for (std::size_t i = 0; i < grads.dweights[0].size(); ++i) CHECK(grads.dweights[0][i] == 0.0);
}

TEST_CASE("same seed gives bit-identical layers") {
  Rng a(42), b(42);
  auto la = make_dense_layer<double>(7, 5, Activation::tanh, a);
  auto lb = make_dense_layer<double>(7, 5, Activation::tanh, b);
  for (std::size_t i = 0; i < la.weights.size(); ++i) CHECK(la.weights[i] == lb.weights[i]);
}

TEST_SUITE_END();
