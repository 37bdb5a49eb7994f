#include "ndt/serialize.hpp"

#include <bit>
#include <cstdio>
#include <cstring>

#include "ndt/errors.hpp"

namespace ndt {

namespace {

constexpr char kMagic[4] = {'N', 'D', 'T', '1'};

struct Writer {
  explicit Writer(const std::string& path) : path_(path), f_(std::fopen(path.c_str(), "wb")) {
    if (!f_) throw ConfigError("cannot write model file " + path);
  }
  ~Writer() {
    if (f_) std::fclose(f_);
  }
  Writer(const Writer&) = delete;
  Writer& operator=(const Writer&) = delete;

  void bytes(const void* src, std::size_t n) {
    if (std::fwrite(src, 1, n, f_) != n) throw ConfigError("short write to model file " + path_);
  }
  void u32(std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    bytes(b, 4);
  }
  void f64(double v) {
    const std::uint64_t u = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    bytes(b, 8);
  }

  const std::string path_;
  std::FILE* f_;
};

struct Reader {
  explicit Reader(const std::string& path) : path_(path), f_(std::fopen(path.c_str(), "rb")) {
    if (!f_) throw ConfigError("cannot open model file " + path);
  }
  ~Reader() {
    if (f_) std::fclose(f_);
  }
  Reader(const Reader&) = delete;
  Reader& operator=(const Reader&) = delete;

  void bytes(void* dst, std::size_t n) {
    if (std::fread(dst, 1, n, f_) != n) {
      throw ConfigError("model file " + path_ + " truncated at offset " + std::to_string(offset_));
    }
    offset_ += n;
  }
  std::uint32_t u32() {
    unsigned char b[4];
    bytes(b, 4);
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
  }
  double f64() {
    unsigned char b[8];
    bytes(b, 8);
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= std::uint64_t(b[i]) << (8 * i);
    return std::bit_cast<double>(u);
  }
  void expect_eof() {
    unsigned char b;
    if (std::fread(&b, 1, 1, f_) != 0) {
      throw ConfigError("model file " + path_ + " has trailing bytes at offset " + std::to_string(offset_));
    }
  }

  const std::string path_;
  std::FILE* f_;
  std::size_t offset_ = 0;
};

void write_arch(Writer& w, const MlpT<double>& mlp) {
  w.u32(static_cast<std::uint32_t>(mlp.layers.size()));
  for (const auto& layer : mlp.layers) {
    w.u32(static_cast<std::uint32_t>(layer.fan_in()));
    w.u32(static_cast<std::uint32_t>(layer.fan_out()));
    w.u32(layer.activation == Activation::identity ? 0u : 1u);
  }
}

void write_params(Writer& w, const MlpT<double>& mlp) {
  for (const auto& layer : mlp.layers) {
    for (std::size_t i = 0; i < layer.weights.size(); ++i) w.f64(layer.weights[i]);
    for (std::size_t i = 0; i < layer.bias.size(); ++i) w.f64(layer.bias[i]);
  }
}

struct LayerSpec {
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;
  Activation activation = Activation::tanh;
};

std::vector<LayerSpec> read_arch(Reader& r) {
  const std::uint32_t count = r.u32();
  if (count > 64) {
    throw ConfigError("model file " + r.path_ + " declares an implausible layer count " + std::to_string(count));
  }
  std::vector<LayerSpec> specs(count);
  for (auto& spec : specs) {
    spec.fan_in = r.u32();
    spec.fan_out = r.u32();
    const std::uint32_t act = r.u32();
    if (spec.fan_in == 0 || spec.fan_out == 0 || act > 1) {
      throw ConfigError("model file " + r.path_ + " has an invalid layer record at offset " +
                        std::to_string(r.offset_));
    }
    spec.activation = act == 0 ? Activation::identity : Activation::tanh;
  }
  for (std::size_t i = 0; i + 1 < specs.size(); ++i) {
    if (specs[i].fan_out != specs[i + 1].fan_in) {
      throw ConfigError("model file " + r.path_ + " has mismatched layer widths");
    }
  }
  return specs;
}

MlpT<double> read_params(Reader& r, const std::vector<LayerSpec>& specs) {
  MlpT<double> mlp;
  mlp.layers.reserve(specs.size());
  for (const auto& spec : specs) {
    DenseLayerT<double> layer;
    layer.weights = Tensor({spec.fan_in, spec.fan_out});
    layer.bias = Tensor({spec.fan_out});
    layer.activation = spec.activation;
    for (std::size_t i = 0; i < layer.weights.size(); ++i) layer.weights[i] = r.f64();
    for (std::size_t i = 0; i < layer.bias.size(); ++i) layer.bias[i] = r.f64();
    mlp.layers.push_back(std::move(layer));
  }
  return mlp;
}

}  // namespace

void save_model(const NdtModel& model, const std::string& path) {
  Writer w(path);
  w.bytes(kMagic, 4);
  w.u32(static_cast<std::uint32_t>(model.depth));
  w.u32(static_cast<std::uint32_t>(model.input_dim));
  w.u32(static_cast<std::uint32_t>(model.num_classes));
  write_arch(w, model.feature_net);
  if (model.condition_nets.empty()) {
    w.u32(0);
  } else {
    write_arch(w, model.condition_nets.front());
  }
  if (model.target_nets.empty()) {
    throw ConfigError("model has no target networks");
  }
  write_arch(w, model.target_nets.front());
  write_params(w, model.feature_net);
  for (const auto& net : model.condition_nets) write_params(w, net);
  for (const auto& net : model.target_nets) write_params(w, net);
}

NdtModel load_model(const std::string& path) {
  Reader r(path);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw ConfigError("model file " + path + " has a bad magic header");
  }
  NdtModel model;
  const std::uint32_t depth = r.u32();
  if (depth > 20) {
    throw ConfigError("model file " + path + " declares an implausible depth " + std::to_string(depth));
  }
  model.depth = static_cast<int>(depth);
  model.input_dim = r.u32();
  model.num_classes = r.u32();
  if (model.input_dim == 0 || model.num_classes == 0) {
    throw ConfigError("model file " + path + " has zero input_dim or num_classes");
  }

  const auto feature_spec = read_arch(r);
  const auto condition_spec = read_arch(r);
  const auto target_spec = read_arch(r);
  const std::size_t internal = (std::size_t(1) << model.depth) - 1;
  const std::size_t leaves = std::size_t(1) << model.depth;
  if (internal > 0 && condition_spec.empty()) {
    throw ConfigError("model file " + path + " is missing its condition network architecture");
  }
  if (!condition_spec.empty() && condition_spec.back().fan_out != 1) {
    throw ConfigError("model file " + path + " condition networks must end in one output");
  }
  if (target_spec.empty() || target_spec.back().fan_out != model.num_classes) {
    throw ConfigError("model file " + path + " target networks must end in num_classes outputs");
  }

  model.feature_net = read_params(r, feature_spec);
  model.condition_nets.reserve(internal);
  for (std::size_t i = 0; i < internal; ++i) model.condition_nets.push_back(read_params(r, condition_spec));
  model.target_nets.reserve(leaves);
  for (std::size_t i = 0; i < leaves; ++i) model.target_nets.push_back(read_params(r, target_spec));
  r.expect_eof();
  return model;
}

}  // namespace ndt
