#include <doctest.h>

#include <cmath>

#include "ndt/optimizer.hpp"
#include "ndt/testing.hpp"

using namespace ndt;

TEST_SUITE_BEGIN("optimizer");

TEST_CASE("zero gradient leaves parameters and accumulators untouched") {
  auto state = make_adadelta_state<double>({3}, 0.6, 1e-6);
  state.accum_grad_sq[1] = 0.25;
  state.accum_update_sq[2] = 0.5;
  Tensor params({3}, {1.0, -2.0, 3.0});
  Tensor grads({3});
  adadelta_step(state, params, grads, "block");
  CHECK(params[0] == 1.0);
  CHECK(params[1] == -2.0);
  CHECK(params[2] == 3.0);
  CHECK(state.accum_grad_sq[1] == 0.25);
  CHECK(state.accum_update_sq[2] == 0.5);
}

TEST_CASE("hand-derived first step: rho 0.6, eps 1e-6, g 1") {
  auto state = make_adadelta_state<double>({1}, 0.6, 1e-6);
  Tensor params({1}, {0.0});
  Tensor grads({1}, {1.0});
  adadelta_step(state, params, grads, "scalar");
  // E[g^2] = 0.4; delta = -sqrt(1e-6)/sqrt(0.4 + 1e-6); E[dx^2] = 0.4 delta^2
  CHECK(std::abs(params[0] - (-0.0015811)) < 1e-7);
  CHECK(state.accum_grad_sq[0] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(state.accum_update_sq[0] == doctest::Approx(1.0e-6).epsilon(1e-4));
}

TEST_CASE("two identical runs produce identical trajectories") {
  auto run = [] {
    Rng rng(31);
    auto state = make_adadelta_state<double>({4}, 0.6, 1e-6);
    Tensor params({4});
    for (int step = 0; step < 50; ++step) {
      Tensor grads({4});
      testing::fill_uniform(grads, rng);
      adadelta_step(state, params, grads);
    }
    return params;
  };
  Tensor a = run(), b = run();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("accumulators stay finite and non-negative") {
  Rng rng(77);
  auto state = make_adadelta_state<double>({8}, 0.6, 1e-6);
  Tensor params({8});
  for (int step = 0; step < 200; ++step) {
    Tensor grads({8});
    testing::fill_uniform(grads, rng, -100.0, 100.0);
    adadelta_step(state, params, grads);
  }
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(state.accum_grad_sq[i] >= 0.0);
    CHECK(state.accum_update_sq[i] >= 0.0);
    CHECK(std::isfinite(params[i]));
  }
}

TEST_CASE("non-finite gradient names the parameter block") {
  auto state = make_adadelta_state<double>({2}, 0.6, 1e-6);
  Tensor params({2});
  Tensor grads({2}, {1.0, std::numeric_limits<double>::quiet_NaN()});
  CHECK_THROWS_WITH_AS(adadelta_step(state, params, grads, "target[3].layer1.weights"),
                       doctest::Contains("target[3].layer1.weights"), OptimizerError);
}

TEST_CASE("shape mismatches are rejected") {
  auto state = make_adadelta_state<double>({2}, 0.6, 1e-6);
  Tensor params({3});
  Tensor grads({3}, {1.0, 1.0, 1.0});
  CHECK_THROWS_AS(adadelta_step(state, params, grads), DimensionError);
}

TEST_CASE("invalid hyperparameters are rejected") {
  CHECK_THROWS_AS(make_adadelta_state<double>({1}, 1.5, 1e-6), ConfigError);
  CHECK_THROWS_AS(make_adadelta_state<double>({1}, 0.6, 0.0), ConfigError);
}

TEST_SUITE_END();
