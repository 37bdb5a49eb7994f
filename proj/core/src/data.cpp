#include "ndt/data.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "ndt/errors.hpp"
#include "ndt/rng.hpp"

namespace ndt {

namespace {

struct File {
  explicit File(const std::string& path) : path_(path), f_(std::fopen(path.c_str(), "rb")) {
    if (!f_) throw DataError("cannot open " + path);
  }
  ~File() {
    if (f_) std::fclose(f_);
  }
  File(const File&) = delete;
  File& operator=(const File&) = delete;

  std::size_t offset() const { return offset_; }

  void read(void* dst, std::size_t bytes) {
    if (std::fread(dst, 1, bytes, f_) != bytes) {
      throw DataError(path_ + ": truncated at offset " + std::to_string(offset_));
    }
    offset_ += bytes;
  }

  std::uint32_t read_be32() {
    unsigned char b[4];
    read(b, 4);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
           std::uint32_t(b[3]);
  }

  void expect_eof() {
    unsigned char b;
    if (std::fread(&b, 1, 1, f_) != 0) {
      throw DataError(path_ + ": trailing bytes at offset " + std::to_string(offset_));
    }
  }

  std::size_t size() {
    const long cur = std::ftell(f_);
    std::fseek(f_, 0, SEEK_END);
    const long end = std::ftell(f_);
    std::fseek(f_, cur, SEEK_SET);
    return static_cast<std::size_t>(end);
  }

  const std::string path_;
  std::FILE* f_;
  std::size_t offset_ = 0;
};

constexpr std::uint32_t kIdxImagesMagic = 2051;  // 0x00000803
constexpr std::uint32_t kIdxLabelsMagic = 2049;  // 0x00000801

Tensor read_idx_images(const std::string& path, std::size_t& count) {
  File f(path);
  const std::uint32_t magic = f.read_be32();
  if (magic != kIdxImagesMagic) {
    throw DataError(path + ": bad image magic " + std::to_string(magic) + " at offset 0, expected 2051");
  }
  const std::uint32_t n = f.read_be32();
  const std::uint32_t rows = f.read_be32();
  const std::uint32_t cols = f.read_be32();
  if (rows == 0 || cols == 0) {
    throw DataError(path + ": zero image dimensions at offset 8");
  }
  const std::size_t d = std::size_t(rows) * cols;
  std::vector<unsigned char> raw(std::size_t(n) * d);
  f.read(raw.data(), raw.size());
  f.expect_eof();

  Tensor features({n, d});
  for (std::size_t i = 0; i < raw.size(); ++i) features[i] = static_cast<double>(raw[i]) / 255.0;
  count = n;
  return features;
}

std::vector<int> read_idx_labels(const std::string& path, std::size_t expected_count, int num_classes) {
  File f(path);
  const std::uint32_t magic = f.read_be32();
  if (magic != kIdxLabelsMagic) {
    throw DataError(path + ": bad label magic " + std::to_string(magic) + " at offset 0, expected 2049");
  }
  const std::uint32_t n = f.read_be32();
  if (n != expected_count) {
    throw DataError(path + ": label count " + std::to_string(n) + " does not match image count " +
                    std::to_string(expected_count));
  }
  std::vector<unsigned char> raw(n);
  f.read(raw.data(), raw.size());
  f.expect_eof();

  std::vector<int> labels(n);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (static_cast<int>(raw[i]) >= num_classes) {
      throw DataError(path + ": label " + std::to_string(int(raw[i])) + " out of range at sample " +
                      std::to_string(i));
    }
    labels[i] = raw[i];
  }
  return labels;
}

Dataset load_idx_split(const std::string& images_path, const std::string& labels_path, const std::string& name) {
  Dataset ds;
  std::size_t count = 0;
  ds.features = read_idx_images(images_path, count);
  ds.labels = read_idx_labels(labels_path, count, 10);
  ds.num_classes = 10;
  ds.name = name;
  return ds;
}

void append_cifar_file(const std::string& path, CifarVariant variant, std::vector<double>& pixels,
                       std::vector<int>& labels) {
  constexpr std::size_t kPixels = 3072;
  const std::size_t label_bytes = variant == CifarVariant::c10 ? 1 : 2;
  const std::size_t record = label_bytes + kPixels;
  const int num_classes = variant == CifarVariant::c10 ? 10 : 100;

  File f(path);
  const std::size_t bytes = f.size();
  if (bytes == 0 || bytes % record != 0) {
    throw DataError(path + ": size " + std::to_string(bytes) + " is not a multiple of the " +
                    std::to_string(record) + "-byte record");
  }
  const std::size_t n = bytes / record;
  std::vector<unsigned char> buf(record);
  for (std::size_t i = 0; i < n; ++i) {
    f.read(buf.data(), record);
    // c100 records carry (coarse, fine); the fine label is the class.
    const unsigned char label = buf[label_bytes - 1];
    if (static_cast<int>(label) >= num_classes) {
      throw DataError(path + ": label " + std::to_string(int(label)) + " out of range at record " +
                      std::to_string(i));
    }
    labels.push_back(label);
    for (std::size_t j = 0; j < kPixels; ++j) {
      pixels.push_back(static_cast<double>(buf[label_bytes + j]) / 255.0);
    }
  }
}

Dataset load_cifar_split(const std::vector<std::string>& paths, CifarVariant variant, const std::string& name) {
  Dataset ds;
  std::vector<double> pixels;
  std::vector<int> labels;
  for (const auto& path : paths) append_cifar_file(path, variant, pixels, labels);
  ds.features = Tensor({labels.size(), std::size_t(3072)}, std::move(pixels));
  ds.labels = std::move(labels);
  ds.num_classes = variant == CifarVariant::c10 ? 10 : 100;
  ds.name = name;
  return ds;
}

}  // namespace

DatasetPair load_mnist(const std::string& dir) {
  DatasetPair pair;
  pair.train = load_idx_split(dir + "/train-images-idx3-ubyte", dir + "/train-labels-idx1-ubyte", "mnist-train");
  pair.test = load_idx_split(dir + "/t10k-images-idx3-ubyte", dir + "/t10k-labels-idx1-ubyte", "mnist-test");
  return pair;
}

DatasetPair load_cifar(const std::string& dir, CifarVariant variant) {
  DatasetPair pair;
  if (variant == CifarVariant::c10) {
    std::vector<std::string> train_files;
    for (int i = 1; i <= 5; ++i) train_files.push_back(dir + "/data_batch_" + std::to_string(i) + ".bin");
    pair.train = load_cifar_split(train_files, variant, "cifar10-train");
    pair.test = load_cifar_split({dir + "/test_batch.bin"}, variant, "cifar10-test");
  } else {
    pair.train = load_cifar_split({dir + "/train.bin"}, variant, "cifar100-train");
    pair.test = load_cifar_split({dir + "/test.bin"}, variant, "cifar100-test");
  }
  return pair;
}

std::pair<Dataset, Dataset> split_validation(const Dataset& dataset, std::size_t count, std::uint64_t seed) {
  const std::size_t n = dataset.size();
  if (count >= n) {
    throw ConfigError("validation size " + std::to_string(count) + " must be smaller than the dataset (" +
                      std::to_string(n) + ")");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t(0));
  Rng rng(seed);
  rng.shuffle(order);

  auto gather = [&](std::size_t begin, std::size_t end, const std::string& suffix) {
    Dataset out;
    const std::size_t d = dataset.dim();
    out.features = Tensor({end - begin, d});
    out.labels.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t src = order[i];
      std::copy_n(dataset.features.data() + src * d, d, out.features.data() + (i - begin) * d);
      out.labels.push_back(dataset.labels[src]);
    }
    out.num_classes = dataset.num_classes;
    out.name = dataset.name + suffix;
    return out;
  };
  // The validation block comes from the tail of the permutation.
  Dataset train = gather(0, n - count, "");
  Dataset val = gather(n - count, n, "-val");
  return {std::move(train), std::move(val)};
}

BatchIter::BatchIter(const Dataset& dataset, std::size_t batch_size, std::uint64_t seed, bool shuffle)
    : dataset_(dataset), batch_size_(batch_size) {
  if (batch_size_ < 1) {
    throw ConfigError("batch_size must be >= 1, got " + std::to_string(batch_size_));
  }
  order_.resize(dataset.size());
  std::iota(order_.begin(), order_.end(), std::size_t(0));
  if (shuffle) {
    Rng rng(seed);
    rng.shuffle(order_);
  }
}

bool BatchIter::next(Batch& out) {
  if (cursor_ >= order_.size()) return false;
  const std::size_t end = std::min(cursor_ + batch_size_, order_.size());
  const std::size_t n = end - cursor_;
  const std::size_t d = dataset_.dim();
  out.features = Tensor({n, d});
  out.labels.resize(n);
  out.positions.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = order_[cursor_ + i];
    std::copy_n(dataset_.features.data() + src * d, d, out.features.data() + i * d);
    out.labels[i] = dataset_.labels[src];
    out.positions[i] = src;
  }
  cursor_ = end;
  return true;
}

std::uint64_t epoch_seed(std::uint64_t seed, std::uint64_t epoch) {
  // splitmix64 over the combined value
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (epoch + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace ndt
