#pragma once

#include "ndt/tensor.hpp"

namespace ndt {

// Sharpness of the continuous stand-in 1 - exp(-alpha |x|) for the hard
// indicator. Large alpha confines nonzero surrogate derivatives to a
// narrow band around the routing boundary.
struct SurrogateConfig {
  double alpha = 1000.0;
};

enum class BranchSide { left, right };

// Sign convention for the right-branch surrogate factor. `paper` applies
// the same signed derivative to both branch indicators; `negated` flips it
// for the right branch.
enum class RightBranchSign { paper, negated };

// Hard routing indicator: 1 if x > 0, else 0. Zero falls to the right
// (else) branch.
inline int dirac_forward(double x) { return x > 0.0 ? 1 : 0; }

// d/dx of 1 - exp(-alpha |x|): alpha * exp(-alpha |x|) * sign(x), with
// sign(0) taken as 0.
double surrogate_derivative(double x, const SurrogateConfig& cfg);

// Surrogate factor used when chaining through a branch indicator. The left
// branch always uses surrogate_derivative; the right branch obeys `mode`.
double branch_surrogate_derivative(double cn, BranchSide side, const SurrogateConfig& cfg, RightBranchSign mode);

template <typename T>
struct GateCacheT {
  TensorT<T> input;  // h rows routed to this branch
  TensorT<T> cn;     // [n x 1] condition outputs for the same rows
  BranchSide side = BranchSide::left;
};

template <typename T>
struct GateForwardResultT {
  TensorT<T> output;  // equals the input bit-exactly
  GateCacheT<T> cache;
};

// Multiplies branch contents by the branch indicator. On its own branch the
// indicator is 1, so forward is the identity; the value of the gate is its
// backward contract, which feeds <dL/dh_i, h_i> * surrogate'(cn_i) into each
// sample's condition gradient while passing dL/dh through unchanged.
template <typename T>
GateForwardResultT<T> gate_apply(const TensorT<T>& h, const TensorT<T>& cn, BranchSide side,
                                 const SurrogateConfig& cfg);

template <typename T>
struct GateBackwardResultT {
  TensorT<T> dinput;  // == dh
  TensorT<T> dcn;     // [n x 1]
};

template <typename T>
GateBackwardResultT<T> gate_backward(const GateCacheT<T>& cache, const TensorT<T>& dh, const SurrogateConfig& cfg,
                                     RightBranchSign mode);

extern template struct GateCacheT<float>;
extern template struct GateCacheT<double>;
extern template GateForwardResultT<float> gate_apply(const TensorT<float>&, const TensorT<float>&, BranchSide,
                                                     const SurrogateConfig&);
extern template GateForwardResultT<double> gate_apply(const TensorT<double>&, const TensorT<double>&, BranchSide,
                                                      const SurrogateConfig&);
extern template GateBackwardResultT<float> gate_backward(const GateCacheT<float>&, const TensorT<float>&,
                                                         const SurrogateConfig&, RightBranchSign);
extern template GateBackwardResultT<double> gate_backward(const GateCacheT<double>&, const TensorT<double>&,
                                                          const SurrogateConfig&, RightBranchSign);

}  // namespace ndt
