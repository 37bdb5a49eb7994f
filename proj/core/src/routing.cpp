#include "ndt/routing.hpp"

#include <cstring>
#include <string>

#include "ndt/errors.hpp"

namespace ndt {

PartitionRecord make_partition_record(const std::vector<std::uint8_t>& mask) {
  PartitionRecord rec;
  rec.mask = mask;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    (mask[i] ? rec.left_index : rec.right_index).push_back(i);
  }
  return rec;
}

template <typename T>
TensorT<T> select_rows(const TensorT<T>& x, const std::vector<std::size_t>& indices) {
  if (x.rank() != 2) {
    throw DimensionError("select_rows expects a rank-2 tensor, got " + x.shape_str());
  }
  const std::size_t d = x.cols();
  TensorT<T> out({indices.size(), d});
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= x.rows()) {
      throw IndexError("row index " + std::to_string(indices[i]) + " out of range for " + x.shape_str());
    }
    std::memcpy(out.data() + i * d, x.data() + indices[i] * d, d * sizeof(T));
  }
  return out;
}

template <typename T>
SubBatchResultT<T> sub_batch(const BatchT<T>& batch, const std::vector<std::uint8_t>& mask) {
  const std::size_t n = batch.size();
  if (mask.size() != n) {
    throw DimensionError("sub_batch mask length " + std::to_string(mask.size()) + " does not match batch size " +
                         std::to_string(n));
  }
  if (batch.features.rank() != 2 || batch.features.rows() != n) {
    throw DimensionError("sub_batch features " + batch.features.shape_str() + " do not match batch size " +
                         std::to_string(n));
  }

  SubBatchResultT<T> result;
  result.record = make_partition_record(mask);
  auto take = [&](const std::vector<std::size_t>& idx, BatchT<T>& side) {
    side.features = select_rows(batch.features, idx);
    side.labels.reserve(idx.size());
    side.positions.reserve(idx.size());
    for (std::size_t i : idx) {
      side.labels.push_back(batch.labels[i]);
      side.positions.push_back(batch.positions.empty() ? i : batch.positions[i]);
    }
  };
  take(result.record.left_index, result.left);
  take(result.record.right_index, result.right);
  return result;
}

namespace {

void check_join_sides(std::size_t left_rows, std::size_t right_rows, const PartitionRecord& rec, const char* op) {
  if (left_rows != rec.left_index.size() || right_rows != rec.right_index.size()) {
    throw DimensionError(std::string(op) + ": block rows (" + std::to_string(left_rows) + ", " +
                         std::to_string(right_rows) + ") do not match record (" +
                         std::to_string(rec.left_index.size()) + ", " + std::to_string(rec.right_index.size()) + ")");
  }
}

}  // namespace

template <typename T>
TensorT<T> join_batch(const TensorT<T>& left, const TensorT<T>& right, const PartitionRecord& record) {
  check_join_sides(left.rank() == 2 ? left.rows() : 0, right.rank() == 2 ? right.rows() : 0, record, "join_batch");
  std::size_t d = 0;
  if (!record.left_index.empty()) {
    d = left.cols();
  } else if (!record.right_index.empty()) {
    d = right.cols();
  } else if (left.rank() == 2) {
    d = left.cols();
  } else if (right.rank() == 2) {
    d = right.cols();
  }
  if (!record.left_index.empty() && !record.right_index.empty() && left.cols() != right.cols()) {
    throw DimensionError("join_batch column mismatch: " + left.shape_str() + " vs " + right.shape_str());
  }
  TensorT<T> out({record.size(), d});
  std::size_t l = 0, r = 0;
  for (std::size_t i = 0; i < record.size(); ++i) {
    const T* src = record.mask[i] ? left.data() + (l++) * d : right.data() + (r++) * d;
    std::memcpy(out.data() + i * d, src, d * sizeof(T));
  }
  return out;
}

template <typename T>
SplitGradientsResultT<T> split_gradients(const TensorT<T>& djoined, const PartitionRecord& record) {
  if (djoined.rank() != 2 || djoined.rows() != record.size()) {
    throw DimensionError("split_gradients input " + djoined.shape_str() + " does not match record length " +
                         std::to_string(record.size()));
  }
  SplitGradientsResultT<T> result;
  result.dleft = select_rows(djoined, record.left_index);
  result.dright = select_rows(djoined, record.right_index);
  return result;
}

namespace {

std::string link_str(const std::pair<std::size_t, std::size_t>& link) {
  return "(" + std::to_string(link.first) + ", " + std::to_string(link.second) + ")";
}

void check_links(const LinkRecord& links, std::size_t source_rows, std::size_t out_rows) {
  std::vector<std::uint8_t> seen(out_rows, 0);
  for (const auto& link : links.links) {
    if (link.first >= source_rows || link.second >= out_rows) {
      throw IndexError("link " + link_str(link) + " out of range for source rows " + std::to_string(source_rows) +
                       ", output rows " + std::to_string(out_rows));
    }
    if (seen[link.second]) {
      throw IndexError("duplicate destination in link " + link_str(link));
    }
    seen[link.second] = 1;
  }
}

}  // namespace

template <typename T>
TensorT<T> allocate_batch(const TensorT<T>& source, const LinkRecord& links, std::size_t out_rows) {
  if (source.rank() != 2) {
    throw DimensionError("allocate_batch expects a rank-2 source, got " + source.shape_str());
  }
  check_links(links, source.rows(), out_rows);
  const std::size_t d = source.cols();
  TensorT<T> out({out_rows, d});  // unlinked rows stay zero
  for (const auto& [src, dst] : links.links) {
    std::memcpy(out.data() + dst * d, source.data() + src * d, d * sizeof(T));
  }
  return out;
}

template <typename T>
TensorT<T> allocate_batch_backward(const TensorT<T>& doutput, const LinkRecord& links, std::size_t source_rows) {
  if (doutput.rank() != 2) {
    throw DimensionError("allocate_batch_backward expects a rank-2 gradient, got " + doutput.shape_str());
  }
  check_links(links, source_rows, doutput.rows());
  const std::size_t d = doutput.cols();
  TensorT<T> dsource({source_rows, d});
  for (const auto& [src, dst] : links.links) {
    T* acc = dsource.data() + src * d;
    const T* g = doutput.data() + dst * d;
    for (std::size_t j = 0; j < d; ++j) acc[j] += g[j];
  }
  return dsource;
}

template struct BatchT<float>;
template struct BatchT<double>;
template SubBatchResultT<float> sub_batch(const BatchT<float>&, const std::vector<std::uint8_t>&);
template SubBatchResultT<double> sub_batch(const BatchT<double>&, const std::vector<std::uint8_t>&);
template TensorT<float> select_rows(const TensorT<float>&, const std::vector<std::size_t>&);
template TensorT<double> select_rows(const TensorT<double>&, const std::vector<std::size_t>&);
template TensorT<float> join_batch(const TensorT<float>&, const TensorT<float>&, const PartitionRecord&);
template TensorT<double> join_batch(const TensorT<double>&, const TensorT<double>&, const PartitionRecord&);
template SplitGradientsResultT<float> split_gradients(const TensorT<float>&, const PartitionRecord&);
template SplitGradientsResultT<double> split_gradients(const TensorT<double>&, const PartitionRecord&);
template TensorT<float> allocate_batch(const TensorT<float>&, const LinkRecord&, std::size_t);
template TensorT<double> allocate_batch(const TensorT<double>&, const LinkRecord&, std::size_t);
template TensorT<float> allocate_batch_backward(const TensorT<float>&, const LinkRecord&, std::size_t);
template TensorT<double> allocate_batch_backward(const TensorT<double>&, const LinkRecord&, std::size_t);

}  // namespace ndt
