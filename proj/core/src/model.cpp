#include "ndt/model.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "ndt/errors.hpp"
#include "ndt/loss.hpp"

namespace ndt {

void validate_config(const TrainConfig& cfg) {
  if (!(cfg.alpha > 0.0)) throw ConfigError("alpha must be positive, got " + std::to_string(cfg.alpha));
  if (cfg.lambda_ig < 0.0) throw ConfigError("lambda_ig must be >= 0, got " + std::to_string(cfg.lambda_ig));
  if (cfg.depth < 0) throw ConfigError("depth must be >= 0, got " + std::to_string(cfg.depth));
  if (!(cfg.rho > 0.0 && cfg.rho < 1.0)) throw ConfigError("rho must be in (0,1), got " + std::to_string(cfg.rho));
  if (!(cfg.epsilon > 0.0)) throw ConfigError("epsilon must be positive, got " + std::to_string(cfg.epsilon));
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1, got " + std::to_string(cfg.batch_size));
  if (cfg.max_rounds < 0) throw ConfigError("max_rounds must be >= 0, got " + std::to_string(cfg.max_rounds));
  if (cfg.patience < 1) throw ConfigError("patience must be >= 1, got " + std::to_string(cfg.patience));
  if (cfg.precision != 32 && cfg.precision != 64) {
    throw ConfigError("precision must be 32 or 64, got " + std::to_string(cfg.precision));
  }
}

template <typename T>
NdtModelT<T> build_model(int depth, const ModelDims& dims, std::size_t num_classes, std::uint64_t seed) {
  if (depth < 0 || depth > 20) throw ConfigError("depth must be in [0, 20], got " + std::to_string(depth));
  if (dims.input_dim == 0) throw ConfigError("input_dim must be positive");
  if (num_classes < 2) throw ConfigError("num_classes must be >= 2, got " + std::to_string(num_classes));
  if (!dims.feature_dims.empty()) {
    if (dims.feature_dims.size() < 2 || dims.feature_dims.front() != dims.input_dim) {
      throw ConfigError("feature_dims must start at input_dim and list at least two widths");
    }
  }

  NdtModelT<T> model;
  model.depth = depth;
  model.input_dim = dims.input_dim;
  model.num_classes = num_classes;

  Rng rng(seed);
  if (!dims.feature_dims.empty()) {
    model.feature_net = make_mlp<T>(dims.feature_dims, Activation::tanh, rng);
  }
  const std::size_t feature_dim = dims.feature_dims.empty() ? dims.input_dim : dims.feature_dims.back();

  std::vector<std::size_t> cond_dims;
  cond_dims.push_back(feature_dim);
  cond_dims.insert(cond_dims.end(), dims.condition_hidden.begin(), dims.condition_hidden.end());
  cond_dims.push_back(1);
  std::vector<std::size_t> target_dims;
  target_dims.push_back(feature_dim);
  target_dims.insert(target_dims.end(), dims.target_hidden.begin(), dims.target_hidden.end());
  target_dims.push_back(num_classes);

  const std::size_t internal = (std::size_t(1) << depth) - 1;
  const std::size_t leaves = std::size_t(1) << depth;
  model.condition_nets.reserve(internal);
  for (std::size_t i = 0; i < internal; ++i) {
    model.condition_nets.push_back(make_mlp<T>(cond_dims, Activation::tanh, rng));
  }
  model.target_nets.reserve(leaves);
  for (std::size_t i = 0; i < leaves; ++i) {
    model.target_nets.push_back(make_mlp<T>(target_dims, Activation::identity, rng));
  }
  return model;
}

template <typename To, typename From>
NdtModelT<To> model_cast(const NdtModelT<From>& model) {
  NdtModelT<To> out;
  out.depth = model.depth;
  out.input_dim = model.input_dim;
  out.num_classes = model.num_classes;
  auto cast_tensor = [](const TensorT<From>& t) {
    TensorT<To> r(t.shape());
    for (std::size_t i = 0; i < t.size(); ++i) r[i] = static_cast<To>(t[i]);
    return r;
  };
  auto cast_mlp = [&](const MlpT<From>& mlp) {
    MlpT<To> r;
    r.layers.reserve(mlp.layers.size());
    for (const auto& layer : mlp.layers) {
      DenseLayerT<To> l;
      l.weights = cast_tensor(layer.weights);
      l.bias = cast_tensor(layer.bias);
      l.activation = layer.activation;
      r.layers.push_back(std::move(l));
    }
    return r;
  };
  out.feature_net = cast_mlp(model.feature_net);
  out.condition_nets.reserve(model.condition_nets.size());
  for (const auto& net : model.condition_nets) out.condition_nets.push_back(cast_mlp(net));
  out.target_nets.reserve(model.target_nets.size());
  for (const auto& net : model.target_nets) out.target_nets.push_back(cast_mlp(net));
  return out;
}

namespace {

template <typename T>
void add_into(TensorT<T>& dst, const TensorT<T>& src) {
  if (!dst.same_shape(src)) {
    throw DimensionError("gradient accumulation shape mismatch: " + dst.shape_str() + " vs " + src.shape_str());
  }
  T* d = dst.data();
  const T* s = src.data();
  for (std::size_t i = 0; i < dst.size(); ++i) d[i] += s[i];
}

template <typename T>
struct ForwardCtx {
  const NdtModelT<T>& model;
  ForwardTraceT<T>& trace;
  SurrogateConfig scfg;  // gate forward only validates alpha
};

template <typename T>
TensorT<T> node_forward(ForwardCtx<T>& ctx, std::size_t node, BatchT<T>&& batch) {
  const std::size_t internal = ctx.model.internal_nodes();
  if (node >= internal) {
    const std::size_t leaf = node - internal;
    auto out = mlp_forward(ctx.model.target_nets[leaf], batch.features);
    ctx.trace.leaf_caches[leaf] = std::move(out.cache);
    ctx.trace.leaf_counts[leaf] = batch.size();
    return std::move(out.output);
  }

  NodeTraceT<T>& nt = ctx.trace.nodes[node];
  auto cond = mlp_forward(ctx.model.condition_nets[node], batch.features);
  if (cond.output.cols() != 1) {
    throw DimensionError("condition network at node " + std::to_string(node) + " produced " +
                         cond.output.shape_str() + ", expected a single column");
  }
  nt.cn = cond.output;
  nt.condition_cache = std::move(cond.cache);
  nt.count = batch.size();
  nt.labels = batch.labels;
  nt.mask.resize(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) nt.mask[i] = nt.cn(i, 0) > T(0) ? 1 : 0;

  auto split = sub_batch(batch, nt.mask);
  nt.record = std::move(split.record);
  TensorT<T> cn_left = select_rows(nt.cn, nt.record.left_index);
  TensorT<T> cn_right = select_rows(nt.cn, nt.record.right_index);
  auto gate_left = gate_apply(split.left.features, cn_left, BranchSide::left, ctx.scfg);
  auto gate_right = gate_apply(split.right.features, cn_right, BranchSide::right, ctx.scfg);
  nt.left_gate = std::move(gate_left.cache);
  nt.right_gate = std::move(gate_right.cache);

  BatchT<T> left{std::move(gate_left.output), std::move(split.left.labels), std::move(split.left.positions)};
  BatchT<T> right{std::move(gate_right.output), std::move(split.right.labels), std::move(split.right.positions)};
  TensorT<T> out_left = node_forward(ctx, 2 * node + 1, std::move(left));
  TensorT<T> out_right = node_forward(ctx, 2 * node + 2, std::move(right));
  return join_batch(out_left, out_right, nt.record);
}

}  // namespace

template <typename T>
ForwardResultT<T> forward(const NdtModelT<T>& model, const BatchT<T>& batch) {
  const std::size_t n = batch.size();
  if (batch.features.rank() != 2 || batch.features.rows() != n) {
    throw DimensionError("forward features " + batch.features.shape_str() + " do not match batch size " +
                         std::to_string(n));
  }
  if (batch.features.cols() != model.input_dim) {
    throw DimensionError("forward features " + batch.features.shape_str() + " do not match model input dim " +
                         std::to_string(model.input_dim));
  }

  ForwardResultT<T> result;
  ForwardTraceT<T>& trace = result.trace;
  trace.model = &model;
  trace.labels = batch.labels;
  trace.nodes.resize(model.internal_nodes());
  trace.leaf_caches.resize(model.num_leaves());
  trace.leaf_counts.assign(model.num_leaves(), 0);

  auto feat = mlp_forward(model.feature_net, batch.features);
  trace.feature_cache = std::move(feat.cache);

  BatchT<T> root;
  root.features = std::move(feat.output);
  root.labels = batch.labels;
  root.positions = batch.positions;
  if (root.positions.empty()) {
    root.positions.resize(n);
    std::iota(root.positions.begin(), root.positions.end(), std::size_t(0));
  }

  ForwardCtx<T> ctx{model, trace, SurrogateConfig{}};
  trace.logits = node_forward(ctx, 0, std::move(root));
  result.logits = trace.logits;
  return result;
}

template <typename T>
ForwardResultT<T> forward(const NdtModelT<T>& model, const TensorT<T>& features) {
  BatchT<T> batch;
  batch.features = features;
  batch.labels.assign(features.rank() == 2 ? features.rows() : 0, 0);
  return forward(model, batch);
}

template <typename T>
LossParts compute_loss(const ForwardTraceT<T>& trace, const TrainConfig& cfg) {
  if (trace.model == nullptr) {
    throw ContractError("compute_loss called with an empty trace");
  }
  LossParts parts;
  parts.cross_entropy = softmax_cross_entropy(trace.logits, trace.labels).loss;
  parts.info_gain_per_node.assign(trace.nodes.size(), 0.0);
  double ig_sum = 0.0;
  for (std::size_t i = 0; i < trace.nodes.size(); ++i) {
    const auto& nt = trace.nodes[i];
    if (nt.count < 2) continue;  // degenerate split objective
    parts.info_gain_per_node[i] =
        info_gain(nt.labels, nt.mask, static_cast<int>(trace.model->num_classes));
    ig_sum += parts.info_gain_per_node[i];
  }
  parts.total = parts.cross_entropy - cfg.lambda_ig * ig_sum;
  return parts;
}

namespace {

template <typename T>
struct BackwardCtx {
  const NdtModelT<T>& model;
  const ForwardTraceT<T>& trace;
  const TrainConfig& cfg;
  ModelGradsT<T>& grads;
};

template <typename T>
TensorT<T> node_backward(BackwardCtx<T>& ctx, std::size_t node, const TensorT<T>& dy) {
  const std::size_t internal = ctx.model.internal_nodes();
  if (node >= internal) {
    const std::size_t leaf = node - internal;
    return mlp_backward(ctx.model.target_nets[leaf], ctx.trace.leaf_caches[leaf], dy, ctx.grads.target[leaf]);
  }

  const NodeTraceT<T>& nt = ctx.trace.nodes[node];
  auto dsplit = split_gradients(dy, nt.record);
  TensorT<T> dh_left = node_backward(ctx, 2 * node + 1, dsplit.dleft);
  TensorT<T> dh_right = node_backward(ctx, 2 * node + 2, dsplit.dright);

  TensorT<T> dcn({nt.count, 1});
  const SurrogateConfig scfg = ctx.cfg.surrogate();
  if (ctx.cfg.gate_downstream_grad) {
    auto gate_left = gate_backward(nt.left_gate, dh_left, scfg, ctx.cfg.right_branch_sign);
    auto gate_right = gate_backward(nt.right_gate, dh_right, scfg, ctx.cfg.right_branch_sign);
    for (std::size_t k = 0; k < nt.record.left_index.size(); ++k) {
      dcn(nt.record.left_index[k], 0) += gate_left.dcn(k, 0);
    }
    for (std::size_t k = 0; k < nt.record.right_index.size(); ++k) {
      dcn(nt.record.right_index[k], 0) += gate_right.dcn(k, 0);
    }
    dh_left = std::move(gate_left.dinput);
    dh_right = std::move(gate_right.dinput);
  }
  if (nt.count >= 2 && ctx.cfg.lambda_ig != 0.0) {
    TensorT<T> ig_grad = condition_gradient(nt.cn, nt.labels, nt.mask, static_cast<int>(ctx.model.num_classes),
                                            scfg, ctx.cfg.right_branch_sign);
    // joint loss subtracts lambda * info gain
    const T lambda = static_cast<T>(ctx.cfg.lambda_ig);
    for (std::size_t i = 0; i < nt.count; ++i) dcn(i, 0) -= lambda * ig_grad(i, 0);
  }

  TensorT<T> dh = join_batch(dh_left, dh_right, nt.record);
  TensorT<T> dh_cond =
      mlp_backward(ctx.model.condition_nets[node], nt.condition_cache, dcn, ctx.grads.condition[node]);
  add_into(dh, dh_cond);
  return dh;
}

}  // namespace

template <typename T>
ModelGradsT<T> make_model_grads(const NdtModelT<T>& model) {
  ModelGradsT<T> grads;
  grads.feature = make_mlp_grads(model.feature_net);
  grads.condition.reserve(model.condition_nets.size());
  for (const auto& net : model.condition_nets) grads.condition.push_back(make_mlp_grads(net));
  grads.target.reserve(model.target_nets.size());
  for (const auto& net : model.target_nets) grads.target.push_back(make_mlp_grads(net));
  return grads;
}

template <typename T>
ModelGradsT<T> backward(const NdtModelT<T>& model, const ForwardTraceT<T>& trace, const TrainConfig& cfg) {
  if (trace.model != &model) {
    throw ContractError("backward called with a trace produced by a different model");
  }
  ModelGradsT<T> grads = make_model_grads(model);
  auto ce = softmax_cross_entropy(trace.logits, trace.labels);
  BackwardCtx<T> ctx{model, trace, cfg, grads};
  TensorT<T> dfeature = node_backward(ctx, 0, ce.dlogits);
  mlp_backward(model.feature_net, trace.feature_cache, dfeature, grads.feature);
  return grads;
}

template <typename T>
std::vector<int> predict(const NdtModelT<T>& model, const TensorT<T>& features) {
  auto result = forward(model, features);
  const std::size_t n = result.logits.rows(), c = result.logits.cols();
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = result.logits.data() + i * c;
    std::size_t best = 0;
    for (std::size_t j = 1; j < c; ++j) {
      if (row[j] > row[best]) best = j;  // ties keep the lowest index
    }
    labels[i] = static_cast<int>(best);
  }
  return labels;
}

namespace {

template <typename T>
void route_rec(const NdtModelT<T>& model, std::size_t node, BatchT<T>&& batch, std::vector<int>& out) {
  const std::size_t internal = model.internal_nodes();
  if (node >= internal) {
    const int leaf = static_cast<int>(node - internal);
    for (std::size_t pos : batch.positions) out[pos] = leaf;
    return;
  }
  auto cond = mlp_forward(model.condition_nets[node], batch.features);
  std::vector<std::uint8_t> mask(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) mask[i] = cond.output(i, 0) > T(0) ? 1 : 0;
  auto split = sub_batch(batch, mask);
  route_rec(model, 2 * node + 1, std::move(split.left), out);
  route_rec(model, 2 * node + 2, std::move(split.right), out);
}

}  // namespace

template <typename T>
std::vector<int> route_to_leaves(const NdtModelT<T>& model, const TensorT<T>& features) {
  if (features.rank() != 2 || features.cols() != model.input_dim) {
    throw DimensionError("route_to_leaves features " + features.shape_str() + " do not match model input dim " +
                         std::to_string(model.input_dim));
  }
  const std::size_t n = features.rows();
  std::vector<int> out(n, 0);
  auto feat = mlp_forward(model.feature_net, features);
  BatchT<T> root;
  root.features = std::move(feat.output);
  root.labels.assign(n, 0);
  root.positions.resize(n);
  std::iota(root.positions.begin(), root.positions.end(), std::size_t(0));
  route_rec(model, 0, std::move(root), out);
  return out;
}

template <typename T>
LeafStats leaf_statistics(const NdtModelT<T>& model, const TensorT<T>& features, const std::vector<int>& labels) {
  if (features.rank() != 2 || features.rows() != labels.size()) {
    throw DimensionError("leaf_statistics features " + features.shape_str() + " do not match " +
                         std::to_string(labels.size()) + " labels");
  }
  const std::size_t leaves = model.num_leaves();
  const std::size_t classes = model.num_classes;
  LeafStats stats;
  stats.counts.assign(leaves, std::vector<std::int64_t>(classes, 0));
  const std::vector<int> leaf_of = route_to_leaves(model, features);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
      throw DataError("label " + std::to_string(labels[i]) + " out of range [0, " + std::to_string(classes) +
                      ") at sample " + std::to_string(i));
    }
    stats.counts[static_cast<std::size_t>(leaf_of[i])][static_cast<std::size_t>(labels[i])] += 1;
  }
  stats.modal_leaf.assign(classes, 0);
  std::int64_t modal_total = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    std::size_t best_leaf = 0;
    for (std::size_t l = 1; l < leaves; ++l) {
      if (stats.counts[l][c] > stats.counts[best_leaf][c]) best_leaf = l;
    }
    stats.modal_leaf[c] = best_leaf;
    modal_total += stats.counts[best_leaf][c];
  }
  stats.purity = labels.empty() ? 0.0 : static_cast<double>(modal_total) / static_cast<double>(labels.size());
  return stats;
}

template struct NdtModelT<float>;
template struct NdtModelT<double>;
template NdtModelT<float> build_model(int, const ModelDims&, std::size_t, std::uint64_t);
template NdtModelT<double> build_model(int, const ModelDims&, std::size_t, std::uint64_t);
template NdtModelT<float> model_cast(const NdtModelT<double>&);
template NdtModelT<double> model_cast(const NdtModelT<float>&);
template NdtModelT<float> model_cast(const NdtModelT<float>&);
template NdtModelT<double> model_cast(const NdtModelT<double>&);
template ForwardResultT<float> forward(const NdtModelT<float>&, const BatchT<float>&);
template ForwardResultT<double> forward(const NdtModelT<double>&, const BatchT<double>&);
template ForwardResultT<float> forward(const NdtModelT<float>&, const TensorT<float>&);
template ForwardResultT<double> forward(const NdtModelT<double>&, const TensorT<double>&);
template LossParts compute_loss(const ForwardTraceT<float>&, const TrainConfig&);
template LossParts compute_loss(const ForwardTraceT<double>&, const TrainConfig&);
template ModelGradsT<float> make_model_grads(const NdtModelT<float>&);
template ModelGradsT<double> make_model_grads(const NdtModelT<double>&);
template ModelGradsT<float> backward(const NdtModelT<float>&, const ForwardTraceT<float>&, const TrainConfig&);
template ModelGradsT<double> backward(const NdtModelT<double>&, const ForwardTraceT<double>&, const TrainConfig&);
template std::vector<int> predict(const NdtModelT<float>&, const TensorT<float>&);
template std::vector<int> predict(const NdtModelT<double>&, const TensorT<double>&);
template std::vector<int> route_to_leaves(const NdtModelT<float>&, const TensorT<float>&);
template std::vector<int> route_to_leaves(const NdtModelT<double>&, const TensorT<double>&);
template LeafStats leaf_statistics(const NdtModelT<float>&, const TensorT<float>&, const std::vector<int>&);
template LeafStats leaf_statistics(const NdtModelT<double>&, const TensorT<double>&, const std::vector<int>&);

}  // namespace ndt
