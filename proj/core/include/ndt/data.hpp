#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ndt/routing.hpp"
#include "ndt/tensor.hpp"

namespace ndt {

// An immutable labeled dataset. Features are flattened pixels scaled to
// [0,1]; byte 0 maps to 0.0 and byte 255 to 1.0 exactly.
struct Dataset {
  Tensor features;  // [n x d]
  std::vector<int> labels;
  int num_classes = 0;
  std::string name;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.rank() == 2 ? features.cols() : 0; }
};

struct DatasetPair {
  Dataset train;
  Dataset test;
};

// MNIST IDX files: 4-byte big-endian magic (2051 for images, 2049 for
// labels), big-endian dimension sizes, then raw bytes. Expects the
// canonical file names train-images-idx3-ubyte, train-labels-idx1-ubyte,
// t10k-images-idx3-ubyte, t10k-labels-idx1-ubyte under `dir`.
DatasetPair load_mnist(const std::string& dir);

enum class CifarVariant { c10, c100 };

// CIFAR binary batches. c10: five data_batch_*.bin files plus
// test_batch.bin of 3073-byte records (label + 3072 pixels). c100:
// train.bin/test.bin of 3074-byte records (coarse label, fine label,
// 3072 pixels); the fine label is used.
DatasetPair load_cifar(const std::string& dir, CifarVariant variant);

// Takes `count` samples for validation from a seeded permutation of the
// dataset; the remainder becomes the new training split.
std::pair<Dataset, Dataset> split_validation(const Dataset& dataset, std::size_t count, std::uint64_t seed);

// One pass over the dataset in mini-batches. With shuffle the order is a
// seeded permutation; the final short batch is emitted. Batch positions
// hold original dataset indices.
class BatchIter {
 public:
  BatchIter(const Dataset& dataset, std::size_t batch_size, std::uint64_t seed, bool shuffle);

  bool next(Batch& out);
  const std::vector<std::size_t>& order() const { return order_; }

 private:
  const Dataset& dataset_;
  std::size_t batch_size_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

// Mixes a base seed with an epoch number into a fresh stream seed.
std::uint64_t epoch_seed(std::uint64_t seed, std::uint64_t epoch);

}  // namespace ndt
