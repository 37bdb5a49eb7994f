#pragma once

#include <cstdint>
#include <vector>

#include "ndt/gate.hpp"
#include "ndt/infogain.hpp"
#include "ndt/layers.hpp"
#include "ndt/routing.hpp"

namespace ndt {

// Every tunable of a training run. Defaults follow the reference
// configuration; the CLI overrides per dataset.
struct TrainConfig {
  double alpha = 1000.0;             // surrogate sharpness
  double lambda_ig = 1.0;            // weight of the info-gain term in the joint loss
  int depth = 2;
  double rho = 0.6;                  // AdaDelta decay
  double epsilon = 1e-6;             // AdaDelta epsilon
  int batch_size = 128;
  int max_rounds = 1000;             // epoch cap
  int patience = 20;                 // early-stopping patience in epochs
  std::uint64_t seed = 1;
  bool gate_downstream_grad = true;  // feed branch-body gradients into condition nets
  RightBranchSign right_branch_sign = RightBranchSign::paper;
  int precision = 64;                // 32 or 64

  SurrogateConfig surrogate() const { return SurrogateConfig{alpha}; }
};

void validate_config(const TrainConfig& cfg);

// Hard-routed binary tree: one shared feature network, a condition network
// per internal node (scalar tanh output), a target network per leaf.
// Nodes are stored in heap order (children of i at 2i+1, 2i+2); leaf k of
// 2^depth sits at heap index (2^depth - 1) + k.
template <typename T>
struct NdtModelT {
  int depth = 0;
  std::size_t input_dim = 0;
  std::size_t num_classes = 0;
  MlpT<T> feature_net;                  // empty stack = identity
  std::vector<MlpT<T>> condition_nets;  // 2^depth - 1
  std::vector<MlpT<T>> target_nets;     // 2^depth

  std::size_t internal_nodes() const { return condition_nets.size(); }
  std::size_t num_leaves() const { return target_nets.size(); }
  std::size_t feature_dim() const {
    return feature_net.layers.empty() ? input_dim : feature_net.output_dim();
  }
};

using NdtModel = NdtModelT<double>;

struct ModelDims {
  std::size_t input_dim = 0;
  std::vector<std::size_t> feature_dims;      // full width list incl. input/output; empty = identity
  std::vector<std::size_t> condition_hidden;  // hidden widths, e.g. {300}
  std::vector<std::size_t> target_hidden;     // hidden widths, e.g. {300, 100}
};

// Deterministic seeded initialization. Networks are initialized in a fixed
// order (feature, conditions in node order, targets in leaf order), so one
// seed pins every parameter.
template <typename T>
NdtModelT<T> build_model(int depth, const ModelDims& dims, std::size_t num_classes, std::uint64_t seed);

template <typename To, typename From>
NdtModelT<To> model_cast(const NdtModelT<From>& model);

template <typename T>
struct NodeTraceT {
  std::size_t count = 0;
  std::vector<int> labels;
  TensorT<T> cn;  // [count x 1]
  std::vector<std::uint8_t> mask;
  PartitionRecord record;
  MlpCacheT<T> condition_cache;
  GateCacheT<T> left_gate;
  GateCacheT<T> right_gate;
};

template <typename T>
struct ForwardTraceT {
  const NdtModelT<T>* model = nullptr;
  std::vector<int> labels;  // original order
  MlpCacheT<T> feature_cache;
  std::vector<NodeTraceT<T>> nodes;       // internal nodes, heap order
  std::vector<MlpCacheT<T>> leaf_caches;  // per leaf
  std::vector<std::size_t> leaf_counts;   // rows that reached each leaf
  TensorT<T> logits;                      // [n x C], original row order
};

template <typename T>
struct ForwardResultT {
  TensorT<T> logits;
  ForwardTraceT<T> trace;
};

// Hard-routed forward pass. Output row order equals input row order.
template <typename T>
ForwardResultT<T> forward(const NdtModelT<T>& model, const BatchT<T>& batch);

// Convenience overload for label-free evaluation.
template <typename T>
ForwardResultT<T> forward(const NdtModelT<T>& model, const TensorT<T>& features);

struct LossParts {
  double total = 0.0;          // cross_entropy - lambda_ig * sum(info_gain_per_node)
  double cross_entropy = 0.0;
  std::vector<double> info_gain_per_node;  // zero where a node saw fewer than 2 samples
};

template <typename T>
LossParts compute_loss(const ForwardTraceT<T>& trace, const TrainConfig& cfg);

template <typename T>
struct ModelGradsT {
  MlpGradsT<T> feature;
  std::vector<MlpGradsT<T>> condition;
  std::vector<MlpGradsT<T>> target;
};

template <typename T>
ModelGradsT<T> make_model_grads(const NdtModelT<T>& model);

// Gradients of the joint loss for every parameter. Feature and target
// parameters receive exact cross-entropy gradients through the routing
// permutation; condition parameters receive the chained info-gain gradient
// plus, when enabled, the gate contribution of their branch bodies.
template <typename T>
ModelGradsT<T> backward(const NdtModelT<T>& model, const ForwardTraceT<T>& trace, const TrainConfig& cfg);

// Argmax of forward logits; ties break toward the lowest class index.
template <typename T>
std::vector<int> predict(const NdtModelT<T>& model, const TensorT<T>& features);

// Leaf index of every sample, running condition networks only.
template <typename T>
std::vector<int> route_to_leaves(const NdtModelT<T>& model, const TensorT<T>& features);

struct LeafStats {
  std::vector<std::vector<std::int64_t>> counts;  // [num_leaves x num_classes]
  std::vector<std::size_t> modal_leaf;            // per class: leaf holding most of its samples
  double purity = 0.0;  // fraction of samples landing in their class's modal leaf
};

template <typename T>
LeafStats leaf_statistics(const NdtModelT<T>& model, const TensorT<T>& features, const std::vector<int>& labels);

extern template struct NdtModelT<float>;
extern template struct NdtModelT<double>;
extern template NdtModelT<float> build_model(int, const ModelDims&, std::size_t, std::uint64_t);
extern template NdtModelT<double> build_model(int, const ModelDims&, std::size_t, std::uint64_t);
extern template NdtModelT<float> model_cast(const NdtModelT<double>&);
extern template NdtModelT<double> model_cast(const NdtModelT<float>&);
extern template NdtModelT<float> model_cast(const NdtModelT<float>&);
extern template NdtModelT<double> model_cast(const NdtModelT<double>&);
extern template ForwardResultT<float> forward(const NdtModelT<float>&, const BatchT<float>&);
extern template ForwardResultT<double> forward(const NdtModelT<double>&, const BatchT<double>&);
extern template ForwardResultT<float> forward(const NdtModelT<float>&, const TensorT<float>&);
extern template ForwardResultT<double> forward(const NdtModelT<double>&, const TensorT<double>&);
extern template LossParts compute_loss(const ForwardTraceT<float>&, const TrainConfig&);
extern template LossParts compute_loss(const ForwardTraceT<double>&, const TrainConfig&);
extern template ModelGradsT<float> make_model_grads(const NdtModelT<float>&);
extern template ModelGradsT<double> make_model_grads(const NdtModelT<double>&);
extern template ModelGradsT<float> backward(const NdtModelT<float>&, const ForwardTraceT<float>&,
                                            const TrainConfig&);
extern template ModelGradsT<double> backward(const NdtModelT<double>&, const ForwardTraceT<double>&,
                                             const TrainConfig&);
extern template std::vector<int> predict(const NdtModelT<float>&, const TensorT<float>&);
extern template std::vector<int> predict(const NdtModelT<double>&, const TensorT<double>&);
extern template std::vector<int> route_to_leaves(const NdtModelT<float>&, const TensorT<float>&);
extern template std::vector<int> route_to_leaves(const NdtModelT<double>&, const TensorT<double>&);
extern template LeafStats leaf_statistics(const NdtModelT<float>&, const TensorT<float>&, const std::vector<int>&);
extern template LeafStats leaf_statistics(const NdtModelT<double>&, const TensorT<double>&, const std::vector<int>&);

}  // namespace ndt
