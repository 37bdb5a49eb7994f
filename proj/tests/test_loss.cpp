#include <doctest.h>

#include <cmath>

#include "ndt/loss.hpp"
#include "ndt/testing.hpp"

using namespace ndt;

TEST_SUITE_BEGIN("loss");

TEST_CASE("uniform two-class logits") {
  Tensor logits({1, 2}, {0.0, 0.0});
  auto result = softmax_cross_entropy(logits, {0});
  CHECK(result.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(result.dlogits(0, 0) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(result.dlogits(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("saturated correct class has near-zero loss") {
  Tensor logits({1, 2}, {30.0, 0.0});
  auto result = softmax_cross_entropy(logits, {0});
  CHECK(result.loss < 1e-12);
  CHECK(result.loss >= 0.0);
}

TEST_CASE("gradient rows sum to zero") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.index(8), c = 2 + rng.index(6);
    Tensor logits({n, c});
    testing::fill_uniform(logits, rng, -5.0, 5.0);
    std::vector<int> labels(n);
    for (auto& l : labels) l = static_cast<int>(rng.index(c));
    auto result = softmax_cross_entropy(logits, labels);
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < c; ++j) sum += result.dlogits(i, j);
      CHECK(std::abs(sum) <= 1e-12);
    }
  }
}

TEST_CASE("loss is the mean and gradients scale with 1/n") {
  Tensor one({1, 3}, {0.2, -0.4, 1.0});
  Tensor two({2, 3}, {0.2, -0.4, 1.0, 0.2, -0.4, 1.0});
  auto r1 = softmax_cross_entropy(one, {2});
  auto r2 = softmax_cross_entropy(two, {2, 2});
  CHECK(r2.loss == doctest::Approx(r1.loss).epsilon(1e-12));
  CHECK(r2.dlogits(0, 0) == doctest::Approx(r1.dlogits(0, 0) / 2.0).epsilon(1e-12));
}

TEST_CASE("label out of range names the sample") {
  Tensor logits({2, 2}, {0.0, 0.0, 0.0, 0.0});
  CHECK_THROWS_WITH_AS(softmax_cross_entropy(logits, {0, 5}), doctest::Contains("sample 1"), DataError);
  CHECK_THROWS_AS(softmax_cross_entropy(logits, {0, -1}), DataError);
}

TEST_CASE("empty batch is rejected") {
  Tensor logits({0, 4});
  CHECK_THROWS_AS(softmax_cross_entropy(logits, {}), DataError);
}

TEST_SUITE_END();
