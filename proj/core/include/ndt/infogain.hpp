#pragma once

#include <cstdint>
#include <vector>

#include "ndt/gate.hpp"
#include "ndt/tensor.hpp"

namespace ndt {

// Counts and class distributions of one binary split.
struct SplitStats {
  std::size_t n_left = 0;
  std::size_t n_right = 0;
  std::vector<double> p_left;   // length num_classes; all-zero when the child is empty
  std::vector<double> p_right;
  Tensor labels_onehot;         // [n x num_classes], one-hot rows
};

SplitStats split_stats(const std::vector<int>& labels, const std::vector<std::uint8_t>& mask, int num_classes);

// Split objective: sum over children of (N_child/N) * sum_j p_j ln p_j,
// with 0 ln 0 := 0 and empty children contributing 0. Always <= 0; equals 0
// exactly when every nonempty child holds a single class.
double info_gain(const std::vector<int>& labels, const std::vector<std::uint8_t>& mask, int num_classes);

// Per-sample derivative of info_gain with respect to the sample's own
// branch indicator: ln(p_child[label_i]) / N.
std::vector<double> indicator_gradient(const std::vector<int>& labels, const std::vector<std::uint8_t>& mask,
                                       int num_classes);

// Chains the indicator gradient with the surrogate derivative of the
// condition output, giving d info_gain / d cn per sample. Requires
// mask[i] == (cn_i > 0).
template <typename T>
TensorT<T> condition_gradient(const TensorT<T>& cn, const std::vector<int>& labels,
                              const std::vector<std::uint8_t>& mask, int num_classes, const SurrogateConfig& cfg,
                              RightBranchSign mode);

// Continuous relaxation of info_gain with membership m_i in [0,1] standing
// in for the left indicator and 1-m_i for the right. Tight at vertices:
// memberships in {0,1} reproduce info_gain exactly.
double relaxed_info_gain_oracle(const std::vector<int>& labels, const std::vector<double>& memberships,
                                int num_classes);

extern template TensorT<float> condition_gradient(const TensorT<float>&, const std::vector<int>&,
                                                  const std::vector<std::uint8_t>&, int, const SurrogateConfig&,
                                                  RightBranchSign);
extern template TensorT<double> condition_gradient(const TensorT<double>&, const std::vector<int>&,
                                                   const std::vector<std::uint8_t>&, int, const SurrogateConfig&,
                                                   RightBranchSign);

}  // namespace ndt
