#pragma once

#include <functional>

#include "ndt/data.hpp"
#include "ndt/model.hpp"
#include "ndt/optimizer.hpp"

namespace ndt {

// One machine-readable record per epoch.
struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_ce = 0.0;
  double train_ig = 0.0;  // mean over batches of the per-node info-gain sum
  double val_acc = 0.0;
  double live_grad_fraction = 0.0;    // share of (sample, node) visits with |cn| < 5/alpha
  std::vector<double> left_fraction;  // per internal node, share routed left
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  // 1-based; 0 when no epoch ran
  double best_val_acc = 0.0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Epoch loop of shuffled mini-batches with AdaDelta updates. Stops early
// when validation accuracy has not improved for cfg.patience epochs and
// restores the best-validation parameters. Single-threaded and
// deterministic for a fixed config.
template <typename T>
TrainLog train(NdtModelT<T>& model, const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg,
               const EpochCallback& on_epoch = {});

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels);

// Chunked prediction accuracy over a dataset.
template <typename T>
double evaluate_accuracy(const NdtModelT<T>& model, const Dataset& dataset, std::size_t chunk = 2048);

extern template TrainLog train(NdtModelT<float>&, const Dataset&, const Dataset&, const TrainConfig&,
                               const EpochCallback&);
extern template TrainLog train(NdtModelT<double>&, const Dataset&, const Dataset&, const TrainConfig&,
                               const EpochCallback&);
extern template double evaluate_accuracy(const NdtModelT<float>&, const Dataset&, std::size_t);
extern template double evaluate_accuracy(const NdtModelT<double>&, const Dataset&, std::size_t);

}  // namespace ndt
