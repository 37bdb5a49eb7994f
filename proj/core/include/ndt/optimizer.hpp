#pragma once

#include <string_view>

#include "ndt/tensor.hpp"

namespace ndt {

// AdaDelta accumulators for one parameter block.
template <typename T>
struct AdaDeltaStateT {
  TensorT<T> accum_grad_sq;    // E[g^2]
  TensorT<T> accum_update_sq;  // E[dx^2]
  T rho{};
  T epsilon{};
};

template <typename T>
AdaDeltaStateT<T> make_adadelta_state(const std::vector<std::size_t>& shape, T rho, T epsilon);

// E[g^2] <- rho E[g^2] + (1-rho) g^2
// dx     = -sqrt(E[dx^2]+eps) / sqrt(E[g^2]+eps) * g
// E[dx^2]<- rho E[dx^2] + (1-rho) dx^2
// params <- params + dx
// An all-zero gradient leaves parameters and accumulators untouched, so
// optimizer state of networks skipped by routing does not decay.
template <typename T>
void adadelta_step(AdaDeltaStateT<T>& state, TensorT<T>& params, const TensorT<T>& grads,
                   std::string_view block_name = "");

extern template struct AdaDeltaStateT<float>;
extern template struct AdaDeltaStateT<double>;
extern template AdaDeltaStateT<float> make_adadelta_state(const std::vector<std::size_t>&, float, float);
extern template AdaDeltaStateT<double> make_adadelta_state(const std::vector<std::size_t>&, double, double);
extern template void adadelta_step(AdaDeltaStateT<float>&, TensorT<float>&, const TensorT<float>&, std::string_view);
extern template void adadelta_step(AdaDeltaStateT<double>&, TensorT<double>&, const TensorT<double>&,
                                   std::string_view);

}  // namespace ndt
