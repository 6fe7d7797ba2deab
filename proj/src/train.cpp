#include "gwkae/train.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "gwkae/adam.hpp"
#include "gwkae/errors.hpp"

namespace gwkae {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in (0, 1]");
    if (!(split_fraction > 0.0 && split_fraction < 1.0)) throw ConfigError("split_fraction must be in (0, 1)");
}

double TrainConfig::learning_rate_at(int epoch) const { return learning_rate * std::pow(gamma, epoch); }

DatasetSplit split_dataset(const std::vector<GWSignal>& signals, double fraction) {
    if (signals.size() < 2) {
        throw DataError("training needs at least 2 signals, got " + std::to_string(signals.size()));
    }
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw ConfigError("split_fraction must be in (0, 1)");
    }
    auto n_train_of = [fraction](std::size_t n) {
        auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
        return std::clamp<std::size_t>(k, 1, n - 1);
    };

    std::map<int, std::vector<std::size_t>> by_rep;
    for (std::size_t i = 0; i < signals.size(); ++i) {
        by_rep[signals[i].repetition].push_back(i);
    }
    DatasetSplit split;
    if (by_rep.size() == 1) {
        const std::size_t k = n_train_of(signals.size());
        for (std::size_t i = 0; i < signals.size(); ++i) {
            (i < k ? split.train : split.validation).push_back(i);
        }
        return split;
    }
    const std::size_t k = n_train_of(by_rep.size());
    std::size_t r = 0;
    for (const auto& [rep, idx] : by_rep) {
        auto& dst = (r++ < k) ? split.train : split.validation;
        dst.insert(dst.end(), idx.begin(), idx.end());
    }
    return split;
}

namespace {

void check_signals(const KAEModel& model, const std::vector<GWSignal>& signals) {
    const std::size_t m = static_cast<std::size_t>(model.input_width());
    for (std::size_t i = 0; i < signals.size(); ++i) {
        const auto& s = signals[i].samples;
        if (s.size() != m) {
            throw DataError("signal " + std::to_string(i) + " has width " + std::to_string(s.size()) +
                            ", model expects " + std::to_string(m));
        }
        for (double v : s) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw DataError("signal " + std::to_string(i) + " is not normalized to [0, 1]");
            }
        }
    }
}

void gather(const std::vector<GWSignal>& signals, std::span<const std::size_t> index, RowMatrix& out) {
    const Eigen::Index m = static_cast<Eigen::Index>(signals[index[0]].samples.size());
    out.resize(static_cast<Eigen::Index>(index.size()), m);
    for (std::size_t b = 0; b < index.size(); ++b) {
        const auto& s = signals[index[b]].samples;
        std::copy(s.begin(), s.end(), out.row(static_cast<Eigen::Index>(b)).data());
    }
}

std::vector<ParamBlock> parameter_blocks(KAEModel& model, const ModelGradients& grads) {
    std::vector<ParamBlock> blocks;
    auto layers = model.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::string name = model.layer_name(l);
        blocks.push_back({name + ".coeffs", layers[l]->coeffs(), grads.d_coeffs[l]});
        blocks.push_back({name + ".w_base", layers[l]->w_base(), grads.d_w_base[l]});
        blocks.push_back({name + ".w_spline", layers[l]->w_spline(), grads.d_w_spline[l]});
    }
    return blocks;
}

}  // namespace

double mean_loss(const KAEModel& model, const std::vector<GWSignal>& signals, std::span<const std::size_t> index) {
    if (index.empty()) return 0.0;
    constexpr std::size_t chunk = 64;
    double total = 0.0;
    RowMatrix x;
    for (std::size_t start = 0; start < index.size(); start += chunk) {
        const auto part = index.subspan(start, std::min(chunk, index.size() - start));
        gather(signals, part, x);
        const RowMatrix y = reconstruct_batch(model, x);
        for (Eigen::Index b = 0; b < x.rows(); ++b) {
            total += loss(std::span<const double>(x.row(b).data(), x.cols()),
                          std::span<const double>(y.row(b).data(), y.cols()), model.reduction());
        }
    }
    return total / static_cast<double>(index.size());
}

LossHistory train(KAEModel& model, const std::vector<GWSignal>& baselines, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
    cfg.validate();
    if (baselines.empty()) {
        throw DataError("training dataset is empty");
    }
    check_signals(model, baselines);
    LossHistory history;
    if (cfg.epochs == 0) {
        return history;
    }
    const DatasetSplit split = split_dataset(baselines, cfg.split_fraction);

    std::mt19937_64 rng(cfg.seed);
    ModelGradients grads(model);
    AdamState adam;
    BatchTrainer trainer;
    RowMatrix batch;
    std::vector<std::size_t> order = split.train;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        const double lr = cfg.learning_rate_at(epoch);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t n = std::min(static_cast<std::size_t>(cfg.batch_size), order.size() - start);
            gather(baselines, std::span<const std::size_t>(order).subspan(start, n), batch);
            grads.zero();
            const auto losses = trainer.forward_backward(model, batch, grads);
            for (double l : losses) {
                if (!std::isfinite(l)) {
                    throw TrainingError("non-finite training loss at epoch " + std::to_string(epoch));
                }
                epoch_loss += l;
            }
            auto blocks = parameter_blocks(model, grads);
            adam_step(blocks, adam, lr, cfg.weight_decay);
        }
        const double train_loss = epoch_loss / static_cast<double>(order.size());
        const double val_loss = mean_loss(model, baselines, split.validation);
        if (!std::isfinite(val_loss)) {
            throw TrainingError("non-finite validation loss at epoch " + std::to_string(epoch));
        }
        history.train_loss.push_back(train_loss);
        history.val_loss.push_back(val_loss);
        if (on_epoch) on_epoch(epoch, train_loss, val_loss);
    }
    return history;
}

}  // namespace gwkae
