#include "ndt/train.hpp"

#include <cmath>
#include <string>

#include "ndt/errors.hpp"

namespace ndt {

namespace {

// AdaDelta accumulators for every parameter block of a model.
template <typename T>
struct ModelOptState {
  std::vector<AdaDeltaStateT<T>> feature_w, feature_b;
  std::vector<std::vector<AdaDeltaStateT<T>>> condition_w, condition_b;
  std::vector<std::vector<AdaDeltaStateT<T>>> target_w, target_b;
};

template <typename T>
std::vector<AdaDeltaStateT<T>> mlp_states(const MlpT<T>& mlp, bool biases, T rho, T eps) {
  std::vector<AdaDeltaStateT<T>> states;
  states.reserve(mlp.layers.size());
  for (const auto& layer : mlp.layers) {
    states.push_back(make_adadelta_state<T>(biases ? layer.bias.shape() : layer.weights.shape(), rho, eps));
  }
  return states;
}

template <typename T>
ModelOptState<T> make_opt_state(const NdtModelT<T>& model, const TrainConfig& cfg) {
  const T rho = static_cast<T>(cfg.rho), eps = static_cast<T>(cfg.epsilon);
  ModelOptState<T> state;
  state.feature_w = mlp_states(model.feature_net, false, rho, eps);
  state.feature_b = mlp_states(model.feature_net, true, rho, eps);
  for (const auto& net : model.condition_nets) {
    state.condition_w.push_back(mlp_states(net, false, rho, eps));
    state.condition_b.push_back(mlp_states(net, true, rho, eps));
  }
  for (const auto& net : model.target_nets) {
    state.target_w.push_back(mlp_states(net, false, rho, eps));
    state.target_b.push_back(mlp_states(net, true, rho, eps));
  }
  return state;
}

template <typename T>
void apply_mlp_grads(MlpT<T>& mlp, MlpGradsT<T>& grads, std::vector<AdaDeltaStateT<T>>& w_states,
                     std::vector<AdaDeltaStateT<T>>& b_states, const std::string& prefix) {
  for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
    const std::string layer_name = prefix + ".layer" + std::to_string(i);
    adadelta_step(w_states[i], mlp.layers[i].weights, grads.dweights[i], layer_name + ".weights");
    adadelta_step(b_states[i], mlp.layers[i].bias, grads.dbias[i], layer_name + ".bias");
  }
}

template <typename T>
void apply_grads(NdtModelT<T>& model, ModelGradsT<T>& grads, ModelOptState<T>& state) {
  apply_mlp_grads(model.feature_net, grads.feature, state.feature_w, state.feature_b, "feature");
  for (std::size_t i = 0; i < model.condition_nets.size(); ++i) {
    apply_mlp_grads(model.condition_nets[i], grads.condition[i], state.condition_w[i], state.condition_b[i],
                    "condition[" + std::to_string(i) + "]");
  }
  for (std::size_t i = 0; i < model.target_nets.size(); ++i) {
    apply_mlp_grads(model.target_nets[i], grads.target[i], state.target_w[i], state.target_b[i],
                    "target[" + std::to_string(i) + "]");
  }
}

template <typename T>
BatchT<T> to_precision(Batch&& batch) {
  if constexpr (std::is_same_v<T, double>) {
    return std::move(batch);
  } else {
    BatchT<T> out;
    out.features = TensorT<T>(batch.features.shape());
    for (std::size_t i = 0; i < batch.features.size(); ++i) out.features[i] = static_cast<T>(batch.features[i]);
    out.labels = std::move(batch.labels);
    out.positions = std::move(batch.positions);
    return out;
  }
}

}  // namespace

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
  if (predictions.size() != labels.size()) {
    throw DimensionError("accuracy: " + std::to_string(predictions.size()) + " predictions vs " +
                         std::to_string(labels.size()) + " labels");
  }
  if (predictions.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) hits += predictions[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

template <typename T>
double evaluate_accuracy(const NdtModelT<T>& model, const Dataset& dataset, std::size_t chunk) {
  const std::size_t n = dataset.size();
  if (n == 0) return 0.0;
  const std::size_t d = dataset.dim();
  std::size_t hits = 0;
  for (std::size_t begin = 0; begin < n; begin += chunk) {
    const std::size_t end = std::min(begin + chunk, n);
    TensorT<T> block({end - begin, d});
    for (std::size_t i = 0; i < (end - begin) * d; ++i) {
      block[i] = static_cast<T>(dataset.features[begin * d + i]);
    }
    const std::vector<int> pred = predict(model, block);
    for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == dataset.labels[begin + i];
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

template <typename T>
TrainLog train(NdtModelT<T>& model, const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg,
               const EpochCallback& on_epoch) {
  validate_config(cfg);
  if (train_set.size() == 0) {
    throw ConfigError("training set is empty");
  }
  if (train_set.dim() != model.input_dim) {
    throw ConfigError("training data dim " + std::to_string(train_set.dim()) + " does not match model input dim " +
                      std::to_string(model.input_dim));
  }
  if (static_cast<std::size_t>(train_set.num_classes) != model.num_classes) {
    throw ConfigError("training data classes " + std::to_string(train_set.num_classes) +
                      " do not match model classes " + std::to_string(model.num_classes));
  }

  TrainLog log;
  if (cfg.max_rounds == 0) return log;

  ModelOptState<T> opt = make_opt_state(model, cfg);
  const double live_band = 5.0 / cfg.alpha;
  const std::size_t internal = model.internal_nodes();

  NdtModelT<T> best_model;
  int stall = 0;

  for (int epoch = 1; epoch <= cfg.max_rounds; ++epoch) {
    BatchIter iter(train_set, static_cast<std::size_t>(cfg.batch_size), epoch_seed(cfg.seed, epoch), true);
    Batch batch;
    double ce_sum = 0.0, ig_sum = 0.0;
    std::size_t sample_count = 0;
    std::size_t live_hits = 0, node_visits = 0;
    std::vector<std::size_t> left_counts(internal, 0), node_counts(internal, 0);

    while (iter.next(batch)) {
      const std::size_t n = batch.size();
      BatchT<T> tb = to_precision<T>(std::move(batch));
      auto fwd = forward(model, tb);
      const LossParts parts = compute_loss(fwd.trace, cfg);
      ModelGradsT<T> grads = backward(model, fwd.trace, cfg);
      apply_grads(model, grads, opt);

      ce_sum += parts.cross_entropy * static_cast<double>(n);
      double batch_ig = 0.0;
      for (double v : parts.info_gain_per_node) batch_ig += v;
      ig_sum += batch_ig * static_cast<double>(n);
      sample_count += n;
      for (std::size_t node = 0; node < internal; ++node) {
        const auto& nt = fwd.trace.nodes[node];
        node_counts[node] += nt.count;
        left_counts[node] += nt.record.left_index.size();
        node_visits += nt.count;
        for (std::size_t i = 0; i < nt.count; ++i) {
          live_hits += std::abs(static_cast<double>(nt.cn(i, 0))) < live_band;
        }
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_ce = ce_sum / static_cast<double>(sample_count);
    rec.train_ig = ig_sum / static_cast<double>(sample_count);
    rec.val_acc = evaluate_accuracy(model, val_set);
    rec.live_grad_fraction =
        node_visits == 0 ? 0.0 : static_cast<double>(live_hits) / static_cast<double>(node_visits);
    rec.left_fraction.resize(internal);
    for (std::size_t node = 0; node < internal; ++node) {
      rec.left_fraction[node] =
          node_counts[node] == 0 ? 0.0 : static_cast<double>(left_counts[node]) / static_cast<double>(node_counts[node]);
    }
    log.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (rec.val_acc > log.best_val_acc || log.best_epoch == 0) {
      log.best_val_acc = rec.val_acc;
      log.best_epoch = epoch;
      best_model = model;
      stall = 0;
    } else {
      ++stall;
      if (stall >= cfg.patience) break;
    }
  }

  if (log.best_epoch > 0 && val_set.size() > 0) {
    model = std::move(best_model);  // restore the best-validation parameters
  }
  return log;
}

template TrainLog train(NdtModelT<float>&, const Dataset&, const Dataset&, const TrainConfig&, const EpochCallback&);
template TrainLog train(NdtModelT<double>&, const Dataset&, const Dataset&, const TrainConfig&,
                        const EpochCallback&);
template double evaluate_accuracy(const NdtModelT<float>&, const Dataset&, std::size_t);
template double evaluate_accuracy(const NdtModelT<double>&, const Dataset&, std::size_t);

}  // namespace ndt
