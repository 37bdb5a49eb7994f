#include "ndt/optimizer.hpp"

#include <cmath>
#include <string>

#include "ndt/errors.hpp"

namespace ndt {

template <typename T>
AdaDeltaStateT<T> make_adadelta_state(const std::vector<std::size_t>& shape, T rho, T epsilon) {
  if (!(rho > T(0) && rho < T(1))) {
    throw ConfigError("adadelta rho must be in (0,1), got " + std::to_string(static_cast<double>(rho)));
  }
  if (!(epsilon > T(0))) {
    throw ConfigError("adadelta epsilon must be positive, got " + std::to_string(static_cast<double>(epsilon)));
  }
  AdaDeltaStateT<T> state;
  state.accum_grad_sq = TensorT<T>(shape);
  state.accum_update_sq = TensorT<T>(shape);
  state.rho = rho;
  state.epsilon = epsilon;
  return state;
}

template <typename T>
void adadelta_step(AdaDeltaStateT<T>& state, TensorT<T>& params, const TensorT<T>& grads,
                   std::string_view block_name) {
  const std::string name = block_name.empty() ? std::string("<unnamed>") : std::string(block_name);
  if (!params.same_shape(grads) || !params.same_shape(state.accum_grad_sq) ||
      !params.same_shape(state.accum_update_sq)) {
    throw DimensionError("adadelta_step shape mismatch for block " + name + ": params " + params.shape_str() +
                         ", grads " + grads.shape_str() + ", accumulators " + state.accum_grad_sq.shape_str());
  }

  const std::size_t n = params.size();
  const T* g = grads.data();
  bool any_nonzero = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(static_cast<double>(g[i]))) {
      throw OptimizerError("non-finite gradient in parameter block " + name);
    }
    any_nonzero |= (g[i] != T(0));
  }
  if (!any_nonzero) return;

  const T rho = state.rho, eps = state.epsilon;
  T* eg2 = state.accum_grad_sq.data();
  T* ed2 = state.accum_update_sq.data();
  T* p = params.data();
  for (std::size_t i = 0; i < n; ++i) {
    eg2[i] = rho * eg2[i] + (T(1) - rho) * g[i] * g[i];
    const T delta = -std::sqrt(ed2[i] + eps) / std::sqrt(eg2[i] + eps) * g[i];
    ed2[i] = rho * ed2[i] + (T(1) - rho) * delta * delta;
    p[i] += delta;
  }
}

template struct AdaDeltaStateT<float>;
template struct AdaDeltaStateT<double>;
template AdaDeltaStateT<float> make_adadelta_state(const std::vector<std::size_t>&, float, float);
template AdaDeltaStateT<double> make_adadelta_state(const std::vector<std::size_t>&, double, double);
template void adadelta_step(AdaDeltaStateT<float>&, TensorT<float>&, const TensorT<float>&, std::string_view);
template void adadelta_step(AdaDeltaStateT<double>&, TensorT<double>&, const TensorT<double>&, std::string_view);

}  // namespace ndt
