#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gwkae/kae_model.hpp"
#include "gwkae/signal_model.hpp"

namespace gwkae {

struct TrainConfig {
    double learning_rate = 0.001;
    int batch_size = 16;
    int epochs = 100;
    double weight_decay = 1e-6;
    double gamma = 0.95;  // per-epoch learning-rate decay
    std::uint64_t seed = 0;
    double split_fraction = 0.8;

    void validate() const;  // throws ConfigError
    double learning_rate_at(int epoch) const;
};

struct LossHistory {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
};

// Train/validation split over measurements: signals are grouped by
// repetition and the first floor(fraction * n_reps) repetitions (in
// ascending order) train the model. With a single repetition the split runs
// over signals instead. Both parts are kept non-empty.
struct DatasetSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

DatasetSplit split_dataset(const std::vector<GWSignal>& signals, double fraction);

using EpochCallback = std::function<void(int epoch, double train_loss, double val_loss)>;

// Minibatch Adam over the training split for cfg.epochs epochs with a seeded
// per-epoch shuffle (last partial batch kept). Signals must already be
// normalized to [0, 1] and match the model input width. Updates `model` in
// place. Train loss is the mean per-signal loss over the epoch's batches;
// validation loss is evaluated after each epoch.
LossHistory train(KAEModel& model, const std::vector<GWSignal>& baselines, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

// Mean per-signal loss of the model over the given signals.
double mean_loss(const KAEModel& model, const std::vector<GWSignal>& signals, std::span<const std::size_t> index);

}  // namespace gwkae
