#pragma once

#include <string>

#include "ndt/model.hpp"

namespace ndt {

// Binary model file, all integers little-endian u32 and all parameters
// little-endian IEEE-754 f64:
//
//   bytes 0..3   magic "NDT1"
//   u32          depth
//   u32          input_dim
//   u32          num_classes
//   u32          feature layer count, then per layer: fan_in, fan_out,
//                activation (0 = identity, 1 = tanh)
//   u32          condition layer count + per-layer dims (shared by all
//                2^depth - 1 condition networks; 0 layers when depth = 0)
//   u32          target layer count + per-layer dims
//   f64...       parameters: feature layers, condition networks in node
//                order, target networks in leaf order; each layer stores
//                its weight matrix row-major, then its bias
//
// Loading validates the magic, every dimension, and that the file ends
// exactly after the last parameter, and reproduces the saved model
// bit-exactly.
void save_model(const NdtModel& model, const std::string& path);

NdtModel load_model(const std::string& path);

}  // namespace ndt
