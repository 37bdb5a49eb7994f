#include "ndt/testing.hpp"

#include <cmath>

#include "ndt/errors.hpp"

namespace ndt::testing {

Tensor naive_matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) {
    throw DimensionError("naive_matmul shapes " + a.shape_str() + " and " + b.shape_str());
  }
  Tensor c({a.rows(), b.cols()});
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      c(i, j) = acc;
    }
  }
  return c;
}

double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

double relaxed_info_gain_decoupled(const std::vector<int>& labels, const std::vector<double>& left_membership,
                                   const std::vector<double>& right_membership, int num_classes) {
  if (labels.size() != left_membership.size() || labels.size() != right_membership.size()) {
    throw DimensionError("relaxed_info_gain_decoupled length mismatch");
  }
  const std::size_t c = static_cast<std::size_t>(num_classes);
  std::vector<double> left_counts(c, 0.0), right_counts(c, 0.0);
  double n_left = 0.0, n_right = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    left_counts[static_cast<std::size_t>(labels[i])] += left_membership[i];
    right_counts[static_cast<std::size_t>(labels[i])] += right_membership[i];
    n_left += left_membership[i];
    n_right += right_membership[i];
  }
  auto term = [](const std::vector<double>& counts, double n_child) {
    if (n_child <= 0.0) return 0.0;
    double sum = 0.0;
    for (double v : counts) {
      if (v > 0.0) sum += v * std::log(v / n_child);
    }
    return sum;
  };
  return (term(left_counts, n_left) + term(right_counts, n_right)) / static_cast<double>(labels.size());
}

}  // namespace ndt::testing
