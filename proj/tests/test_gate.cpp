#include <doctest.h>

#include <cmath>

#include "ndt/gate.hpp"
#include "ndt/testing.hpp"
#include "util.hpp"

using namespace ndt;

TEST_SUITE_BEGIN("gate");

TEST_CASE("dirac indicator with zero falling right") {
  CHECK(dirac_forward(0.5) == 1);
  CHECK(dirac_forward(-0.3) == 0);
  CHECK(dirac_forward(0.0) == 0);
  CHECK(dirac_forward(1e-300) == 1);
}

TEST_CASE("surrogate derivative closed-form values at alpha 1000") {
  SurrogateConfig cfg{1000.0};
  CHECK(surrogate_derivative(0.001, cfg) == doctest::Approx(1000.0 * std::exp(-1.0)).epsilon(1e-12));
  CHECK(surrogate_derivative(-0.001, cfg) == doctest::Approx(-1000.0 * std::exp(-1.0)).epsilon(1e-12));
  CHECK(surrogate_derivative(0.001, cfg) == doctest::Approx(367.879441).epsilon(1e-6));
  CHECK(surrogate_derivative(0.0, cfg) == 0.0);
}

TEST_CASE("surrogate derivative is odd and bounded by alpha") {
  SurrogateConfig cfg{250.0};
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const double x = rng.uniform(-1.0, 1.0);
    CHECK(surrogate_derivative(-x, cfg) == -surrogate_derivative(x, cfg));
    CHECK(std::abs(surrogate_derivative(x, cfg)) <= cfg.alpha);
  }
  // the bound is approached from below as x -> 0+
  CHECK(surrogate_derivative(1e-9, cfg) > 0.999 * cfg.alpha);
}

TEST_CASE("surrogate derivative matches finite differences of 1 - exp(-alpha|x|)") {
  SurrogateConfig cfg{10.0};  // alpha 10 keeps exp terms well above underflow
  auto g = [&](double x) { return 1.0 - std::exp(-cfg.alpha * std::abs(x)); };
  Rng rng(14);
  // h balances truncation (alpha^2 h^2 / 6) against rounding noise in
  // g(x +- h), which both sit near 1 for large |x|.
  const double h = 5e-4;
  for (int trial = 0; trial < 100; ++trial) {
    double x = rng.uniform(0.2, 2.0);
    if (rng.index(2)) x = -x;
    const double fd = testing::central_difference(g, x, h);
    CHECK(rel_err(surrogate_derivative(x, cfg), fd, 1e-12) < 1e-4);
  }
}

TEST_CASE("right-branch sign flag flips only the right branch") {
  SurrogateConfig cfg{100.0};
  const double d_left = branch_surrogate_derivative(0.01, BranchSide::left, cfg, RightBranchSign::paper);
  CHECK(d_left == surrogate_derivative(0.01, cfg));
  CHECK(branch_surrogate_derivative(0.01, BranchSide::left, cfg, RightBranchSign::negated) == d_left);

  const double d_right = branch_surrogate_derivative(-0.01, BranchSide::right, cfg, RightBranchSign::paper);
  CHECK(d_right == surrogate_derivative(-0.01, cfg));
  CHECK(branch_surrogate_derivative(-0.01, BranchSide::right, cfg, RightBranchSign::negated) == -d_right);
}

TEST_CASE("gate forward is a bit-exact identity on its branch") {
  Rng rng(19);
  SurrogateConfig cfg;
  Tensor h({4, 3});
  testing::fill_uniform(h, rng);
  Tensor cn({4, 1}, {0.2, 0.01, 1.5, 0.004});
  auto gated = gate_apply(h, cn, BranchSide::left, cfg);
  for (std::size_t i = 0; i < h.size(); ++i) CHECK(gated.output[i] == h[i]);
}

TEST_CASE("routed-branch precondition is enforced") {
  SurrogateConfig cfg;
  Tensor h({2, 2}, {1, 2, 3, 4});
  Tensor cn({2, 1}, {0.5, -0.5});
  CHECK_THROWS_AS(gate_apply(h, cn, BranchSide::left, cfg), ContractError);
  CHECK_THROWS_AS(gate_apply(h, cn, BranchSide::right, cfg), ContractError);
  Tensor cn_zero({1, 1}, {0.0});
  Tensor h1({1, 2}, {1, 2});
  // zero goes right
  CHECK_NOTHROW(gate_apply(h1, cn_zero, BranchSide::right, cfg));
  CHECK_THROWS_AS(gate_apply(h1, cn_zero, BranchSide::left, cfg), ContractError);
}

TEST_CASE("zero upstream gradient gives zero condition contribution") {
  SurrogateConfig cfg{1000.0};
  Tensor h({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor cn({2, 1}, {0.001, 0.02});
  auto gated = gate_apply(h, cn, BranchSide::left, cfg);
  Tensor dh({2, 3});
  auto back = gate_backward(gated.cache, dh, cfg, RightBranchSign::paper);
  CHECK(back.dcn(0, 0) == 0.0);
  CHECK(back.dcn(1, 0) == 0.0);
  for (std::size_t i = 0; i < dh.size(); ++i) CHECK(back.dinput[i] == 0.0);
}

TEST_CASE("closed-form chain rule example: <3, 2> * surrogate'(0.001)") {
  SurrogateConfig cfg{1000.0};
  Tensor h({1, 1}, {2.0});
  Tensor cn({1, 1}, {0.001});
  auto gated = gate_apply(h, cn, BranchSide::left, cfg);
  Tensor dh({1, 1}, {3.0});
  auto back = gate_backward(gated.cache, dh, cfg, RightBranchSign::paper);
  CHECK(back.dcn(0, 0) == doctest::Approx(6.0 * 1000.0 * std::exp(-1.0)).epsilon(1e-12));
  CHECK(back.dcn(0, 0) == doctest::Approx(2207.276647).epsilon(1e-6));
  CHECK(back.dinput(0, 0) == 3.0);  // passthrough untouched
}

TEST_CASE("alpha must be positive") {
  SurrogateConfig bad{0.0};
  CHECK_THROWS_AS(surrogate_derivative(0.5, bad), ConfigError);
}

TEST_SUITE_END();
