#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ndt/tensor.hpp"

namespace ndt {

// A mini-batch flowing through the tree: feature rows, labels, and each
// row's position in the batch it was carved from.
template <typename T>
struct BatchT {
  TensorT<T> features;                  // [n x d]
  std::vector<int> labels;              // length n
  std::vector<std::size_t> positions;   // original indices, distinct

  std::size_t size() const { return labels.size(); }
};

using Batch = BatchT<double>;

// Records one binary partition so the split can be inverted exactly and
// gradients scattered back along it.
struct PartitionRecord {
  std::vector<std::uint8_t> mask;         // mask[i] != 0  <=>  row i went left
  std::vector<std::size_t> left_index;    // ascending
  std::vector<std::size_t> right_index;   // ascending

  std::size_t size() const { return mask.size(); }
};

PartitionRecord make_partition_record(const std::vector<std::uint8_t>& mask);

// Dynamic (source row, destination row) links recorded in a forward pass.
struct LinkRecord {
  std::vector<std::pair<std::size_t, std::size_t>> links;
};

template <typename T>
struct SubBatchResultT {
  BatchT<T> left;
  BatchT<T> right;
  PartitionRecord record;
};

// Splits by mask, preserving relative order on both sides.
template <typename T>
SubBatchResultT<T> sub_batch(const BatchT<T>& batch, const std::vector<std::uint8_t>& mask);

// Row gather helper used by sub_batch and the tree.
template <typename T>
TensorT<T> select_rows(const TensorT<T>& x, const std::vector<std::size_t>& indices);

// Inverse of the split permutation: output row i comes from the left block
// if mask[i], else the right block.
template <typename T>
TensorT<T> join_batch(const TensorT<T>& left, const TensorT<T>& right, const PartitionRecord& record);

template <typename T>
struct SplitGradientsResultT {
  TensorT<T> dleft;
  TensorT<T> dright;
};

// Adjoint of join_batch: routes each gradient row back to the sub-batch
// that produced it.
template <typename T>
SplitGradientsResultT<T> split_gradients(const TensorT<T>& djoined, const PartitionRecord& record);

// Gather along recorded links; destination rows without a link stay zero.
template <typename T>
TensorT<T> allocate_batch(const TensorT<T>& source, const LinkRecord& links, std::size_t out_rows);

// Adjoint of allocate_batch: scatter-adds output gradients back along the
// same links, accumulating when a source row fans out to several
// destinations.
template <typename T>
TensorT<T> allocate_batch_backward(const TensorT<T>& doutput, const LinkRecord& links, std::size_t source_rows);

extern template struct BatchT<float>;
extern template struct BatchT<double>;
extern template SubBatchResultT<float> sub_batch(const BatchT<float>&, const std::vector<std::uint8_t>&);
extern template SubBatchResultT<double> sub_batch(const BatchT<double>&, const std::vector<std::uint8_t>&);
extern template TensorT<float> select_rows(const TensorT<float>&, const std::vector<std::size_t>&);
extern template TensorT<double> select_rows(const TensorT<double>&, const std::vector<std::size_t>&);
extern template TensorT<float> join_batch(const TensorT<float>&, const TensorT<float>&, const PartitionRecord&);
extern template TensorT<double> join_batch(const TensorT<double>&, const TensorT<double>&, const PartitionRecord&);
extern template SplitGradientsResultT<float> split_gradients(const TensorT<float>&, const PartitionRecord&);
extern template SplitGradientsResultT<double> split_gradients(const TensorT<double>&, const PartitionRecord&);
extern template TensorT<float> allocate_batch(const TensorT<float>&, const LinkRecord&, std::size_t);
extern template TensorT<double> allocate_batch(const TensorT<double>&, const LinkRecord&, std::size_t);
extern template TensorT<float> allocate_batch_backward(const TensorT<float>&, const LinkRecord&, std::size_t);
extern template TensorT<double> allocate_batch_backward(const TensorT<double>&, const LinkRecord&, std::size_t);

}  // namespace ndt
