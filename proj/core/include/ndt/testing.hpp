#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ndt/rng.hpp"
#include "ndt/tensor.hpp"

// Reference implementations used by tests and `ndt selftest`. Everything in
// here is deliberately independent of the production kernels it checks.
namespace ndt::testing {

// Plain triple-loop matrix product.
Tensor naive_matmul(const Tensor& a, const Tensor& b);

template <typename T>
void fill_uniform(TensorT<T>& t, Rng& rng, double lo = -1.0, double hi = 1.0) {
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(rng.uniform(lo, hi));
}

// (f(x+h) - f(x-h)) / 2h
double central_difference(const std::function<double(double)>& f, double x, double h);

// Split objective relaxed with independent per-branch membership weights,
// mirroring how the two branch indicators enter the objective as separate
// symbols. At (mask, 1-mask) this equals info_gain, and its partial
// derivative in a sample's own-branch weight is ln(p_child[label]) / N.
double relaxed_info_gain_decoupled(const std::vector<int>& labels, const std::vector<double>& left_membership,
                                   const std::vector<double>& right_membership, int num_classes);

}  // namespace ndt::testing
