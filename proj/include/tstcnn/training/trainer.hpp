#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "tstcnn/core/random.hpp"
#include "tstcnn/model/checkpoint.hpp"
#include "tstcnn/training/evaluate.hpp"
#include "tstcnn/training/sgd.hpp"

namespace tstcnn::training {

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_acc = 0.0;  // from the train-mode predictions of the epoch's batches
  double val_acc = 0.0;    // NaN when there is no validation split
};

struct TrainState {
  std::size_t epoch = 0;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_acc = -1.0;
  io::NamedTensors best_state;
};

inline std::string training_log_csv(const std::vector<EpochRecord>& history) {
  std::ostringstream os;
  os << "epoch,train_loss,train_acc,val_acc\n";
  os.precision(8);
  for (const auto& r : history) os << r.epoch << ',' << r.train_loss << ',' << r.train_acc << ',' << r.val_acc << '\n';
  return os.str();
}

/// Mini-batch SGD on cross-entropy. The sample order of each epoch is a seeded shuffle.
/// After every epoch the validation split is scored and the parameters of the best
/// epoch (earliest on ties) are kept; they are restored into `net` before returning.
/// Without a validation split, train accuracy drives the selection.
template <typename T>
TrainState train(model::Tstcnn<T>& net, const std::vector<Sample>& train_set, const std::vector<Sample>& val_set,
                 const SgdConfig& cfg, const std::function<void(const EpochRecord&)>& on_epoch = {}) {
  cfg.validate();
  tstcnn::detail::require(!train_set.empty(), "training split is empty");
  Sgd<T> opt(cfg);
  Rng rng(cfg.seed);
  TrainState state;
  auto params = net.parameters();
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::vector<std::size_t> idx(order.begin() + long(b),
                                         order.begin() + long(std::min(order.size(), b + cfg.batch_size)));
      const auto labels = labels_of(train_set, idx);
      params.zero_grad();
      const auto step = net.forward_backward(make_batch<T>(train_set, idx, net.config()), labels);
      if (!std::isfinite(step.loss))
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch starting " +
                           std::to_string(b));
      try {
        opt.step(params);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + " aborted: " + e.what());
      }
      loss_sum += step.loss * double(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) correct += step.scores.argmax(i) == labels[i];
    }
    EpochRecord rec{epoch, loss_sum / double(order.size()), double(correct) / double(order.size()),
                    std::numeric_limits<double>::quiet_NaN()};
    if (!val_set.empty()) rec.val_acc = evaluate(net, val_set, cfg.batch_size).accuracy;
    const double score = val_set.empty() ? rec.train_acc : rec.val_acc;
    if (score > state.best_val_acc) {
      state.best_val_acc = score;
      state.best_epoch = epoch;
      state.best_state = model::export_state(net);
    }
    state.epoch = epoch;
    state.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  model::import_state(net, state.best_state);
  return state;
}

}  // namespace tstcnn::training
