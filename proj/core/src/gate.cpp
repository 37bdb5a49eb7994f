#include "ndt/gate.hpp"

#include <cmath>
#include <string>

#include "ndt/errors.hpp"

namespace ndt {

double surrogate_derivative(double x, const SurrogateConfig& cfg) {
  if (!(cfg.alpha > 0.0)) {
    throw ConfigError("surrogate alpha must be positive, got " + std::to_string(cfg.alpha));
  }
  if (x == 0.0) return 0.0;
  const double sign = x > 0.0 ? 1.0 : -1.0;
  return cfg.alpha * std::exp(-cfg.alpha * std::abs(x)) * sign;
}

double branch_surrogate_derivative(double cn, BranchSide side, const SurrogateConfig& cfg, RightBranchSign mode) {
  const double d = surrogate_derivative(cn, cfg);
  if (side == BranchSide::right && mode == RightBranchSign::negated) return -d;
  return d;
}

namespace {

template <typename T>
void check_gate_args(const TensorT<T>& h, const TensorT<T>& cn, BranchSide side) {
  if (h.rank() != 2 || cn.rank() != 2 || cn.cols() != 1 || cn.rows() != h.rows()) {
    throw DimensionError("gate expects h [n x d] and cn [n x 1], got " + h.shape_str() + " and " + cn.shape_str());
  }
  for (std::size_t i = 0; i < cn.rows(); ++i) {
    const bool left = cn(i, 0) > T(0);
    if (left != (side == BranchSide::left)) {
      throw ContractError("gate_apply: sample " + std::to_string(i) + " with condition output " +
                          std::to_string(static_cast<double>(cn(i, 0))) + " is not routed to the " +
                          (side == BranchSide::left ? "left" : "right") + " branch");
    }
  }
}

}  // namespace

template <typename T>
GateForwardResultT<T> gate_apply(const TensorT<T>& h, const TensorT<T>& cn, BranchSide side,
                                 const SurrogateConfig& cfg) {
  if (!(cfg.alpha > 0.0)) {
    throw ConfigError("surrogate alpha must be positive, got " + std::to_string(cfg.alpha));
  }
  check_gate_args(h, cn, side);
  GateForwardResultT<T> result;
  result.cache.input = h;
  result.cache.cn = cn;
  result.cache.side = side;
  result.output = h;  // indicator is 1 on its own branch
  return result;
}

template <typename T>
GateBackwardResultT<T> gate_backward(const GateCacheT<T>& cache, const TensorT<T>& dh, const SurrogateConfig& cfg,
                                     RightBranchSign mode) {
  if (!dh.same_shape(cache.input)) {
    throw ContractError("gate_backward upstream gradient " + dh.shape_str() + " does not match gated block " +
                        cache.input.shape_str());
  }
  const std::size_t n = cache.input.rows();
  const std::size_t d = cache.input.cols();
  GateBackwardResultT<T> result;
  result.dinput = dh;
  result.dcn = TensorT<T>({n, 1});
  for (std::size_t i = 0; i < n; ++i) {
    const T* hrow = cache.input.data() + i * d;
    const T* drow = dh.data() + i * d;
    double dot = 0.0;
    for (std::size_t j = 0; j < d; ++j) dot += static_cast<double>(drow[j]) * static_cast<double>(hrow[j]);
    const double factor =
        branch_surrogate_derivative(static_cast<double>(cache.cn(i, 0)), cache.side, cfg, mode);
    result.dcn(i, 0) = static_cast<T>(dot * factor);
  }
  return result;
}

template struct GateCacheT<float>;
template struct GateCacheT<double>;
template GateForwardResultT<float> gate_apply(const TensorT<float>&, const TensorT<float>&, BranchSide,
                                              const SurrogateConfig&);
template GateForwardResultT<double> gate_apply(const TensorT<double>&, const TensorT<double>&, BranchSide,
                                               const SurrogateConfig&);
template GateBackwardResultT<float> gate_backward(const GateCacheT<float>&, const TensorT<float>&,
                                                  const SurrogateConfig&, RightBranchSign);
template GateBackwardResultT<double> gate_backward(const GateCacheT<double>&, const TensorT<double>&,
                                                   const SurrogateConfig&, RightBranchSign);

}  // namespace ndt
