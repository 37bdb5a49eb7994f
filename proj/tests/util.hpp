#pragma once

#include <algorithm>
#include <cmath>

// Relative error with a floor so near-zero entries are judged on an
// absolute scale instead of exploding.
inline double rel_err(double a, double b, double floor_scale = 1e-3) {
  return std::abs(a - b) / std::max({floor_scale, std::abs(a), std::abs(b)});
}
