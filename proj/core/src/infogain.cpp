#include "ndt/infogain.hpp"

#include <cmath>
#include <string>

#include "ndt/errors.hpp"

namespace ndt {

namespace {

void check_labels(const std::vector<int>& labels, const std::vector<std::uint8_t>& mask, int num_classes) {
  if (labels.size() != mask.size()) {
    throw DimensionError("labels length " + std::to_string(labels.size()) + " does not match mask length " +
                         std::to_string(mask.size()));
  }
  if (num_classes <= 0) {
    throw ConfigError("num_classes must be positive, got " + std::to_string(num_classes));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw DataError("label " + std::to_string(labels[i]) + " out of range [0, " + std::to_string(num_classes) +
                      ") at sample " + std::to_string(i));
    }
  }
}

}  // namespace

SplitStats split_stats(const std::vector<int>& labels, const std::vector<std::uint8_t>& mask, int num_classes) {
  check_labels(labels, mask, num_classes);
  const std::size_t n = labels.size();
  const std::size_t c = static_cast<std::size_t>(num_classes);

  SplitStats stats;
  stats.p_left.assign(c, 0.0);
  stats.p_right.assign(c, 0.0);
  stats.labels_onehot = Tensor({n, c});
  for (std::size_t i = 0; i < n; ++i) {
    stats.labels_onehot(i, static_cast<std::size_t>(labels[i])) = 1.0;
    auto& p = mask[i] ? stats.p_left : stats.p_right;
    auto& count = mask[i] ? stats.n_left : stats.n_right;
    p[static_cast<std::size_t>(labels[i])] += 1.0;
    ++count;
  }
  if (stats.n_left > 0) {
    for (double& v : stats.p_left) v /= static_cast<double>(stats.n_left);
  }
  if (stats.n_right > 0) {
    for (double& v : stats.p_right) v /= static_cast<double>(stats.n_right);
  }
  return stats;
}

namespace {

// (N_child / N) * sum_j p_j ln p_j, with 0 ln 0 := 0.
double child_term(const std::vector<double>& p, std::size_t n_child, std::size_t n_total) {
  if (n_child == 0) return 0.0;
  double sum = 0.0;
  for (double v : p) {
    if (v > 0.0) sum += v * std::log(v);
  }
  return sum * static_cast<double>(n_child) / static_cast<double>(n_total);
}

}  // namespace

double info_gain(const std::vector<int>& labels, const std::vector<std::uint8_t>& mask, int num_classes) {
  if (labels.empty()) {
    throw DataError("info_gain on an empty batch");
  }
  const SplitStats stats = split_stats(labels, mask, num_classes);
  const std::size_t n = labels.size();
  return child_term(stats.p_left, stats.n_left, n) + child_term(stats.p_right, stats.n_right, n);
}

std::vector<double> indicator_gradient(const std::vector<int>& labels, const std::vector<std::uint8_t>& mask,
                                       int num_classes) {
  if (labels.empty()) {
    throw DataError("indicator_gradient on an empty batch");
  }
  const SplitStats stats = split_stats(labels, mask, num_classes);
  const double n = static_cast<double>(labels.size());
  std::vector<double> grads(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& p = mask[i] ? stats.p_left : stats.p_right;
    // The sample belongs to this child, so p[label] >= 1/N_child > 0.
    grads[i] = std::log(p[static_cast<std::size_t>(labels[i])]) / n;
  }
  return grads;
}

template <typename T>
TensorT<T> condition_gradient(const TensorT<T>& cn, const std::vector<int>& labels,
                              const std::vector<std::uint8_t>& mask, int num_classes, const SurrogateConfig& cfg,
                              RightBranchSign mode) {
  if (cn.rank() != 2 || cn.cols() != 1 || cn.rows() != labels.size()) {
    throw DimensionError("condition_gradient expects cn [n x 1] matching " + std::to_string(labels.size()) +
                         " labels, got " + cn.shape_str());
  }
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const bool left = cn(i, 0) > T(0);
    if (left != static_cast<bool>(mask[i])) {
      throw ContractError("condition_gradient: mask[" + std::to_string(i) + "] disagrees with condition output " +
                          std::to_string(static_cast<double>(cn(i, 0))));
    }
  }
  const std::vector<double> igrad = indicator_gradient(labels, mask, num_classes);
  TensorT<T> out({labels.size(), 1});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const BranchSide side = mask[i] ? BranchSide::left : BranchSide::right;
    const double factor = branch_surrogate_derivative(static_cast<double>(cn(i, 0)), side, cfg, mode);
    out(i, 0) = static_cast<T>(igrad[i] * factor);
  }
  return out;
}

double relaxed_info_gain_oracle(const std::vector<int>& labels, const std::vector<double>& memberships,
                                int num_classes) {
  if (labels.size() != memberships.size()) {
    throw DimensionError("labels length " + std::to_string(labels.size()) + " does not match memberships length " +
                         std::to_string(memberships.size()));
  }
  if (labels.empty()) {
    throw DataError("relaxed_info_gain_oracle on an empty batch");
  }
  for (std::size_t i = 0; i < memberships.size(); ++i) {
    if (!(memberships[i] >= 0.0 && memberships[i] <= 1.0)) {
      throw DataError("membership " + std::to_string(memberships[i]) + " outside [0,1] at sample " +
                      std::to_string(i));
    }
  }
  const std::size_t c = static_cast<std::size_t>(num_classes);
  std::vector<double> left_counts(c, 0.0), right_counts(c, 0.0);
  double n_left = 0.0, n_right = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= c) {
      throw DataError("label " + std::to_string(labels[i]) + " out of range [0, " + std::to_string(num_classes) +
                      ") at sample " + std::to_string(i));
    }
    left_counts[static_cast<std::size_t>(labels[i])] += memberships[i];
    right_counts[static_cast<std::size_t>(labels[i])] += 1.0 - memberships[i];
    n_left += memberships[i];
    n_right += 1.0 - memberships[i];
  }
  auto term = [&](const std::vector<double>& counts, double n_child) {
    if (n_child <= 0.0) return 0.0;
    double sum = 0.0;
    for (double v : counts) {
      if (v > 0.0) sum += v * std::log(v / n_child);
    }
    return sum;
  };
  return (term(left_counts, n_left) + term(right_counts, n_right)) / static_cast<double>(labels.size());
}

template TensorT<float> condition_gradient(const TensorT<float>&, const std::vector<int>&,
                                           const std::vector<std::uint8_t>&, int, const SurrogateConfig&,
                                           RightBranchSign);
template TensorT<double> condition_gradient(const TensorT<double>&, const std::vector<int>&,
                                            const std::vector<std::uint8_t>&, int, const SurrogateConfig&,
                                            RightBranchSign);

}  // namespace ndt
