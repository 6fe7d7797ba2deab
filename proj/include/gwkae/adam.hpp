#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gwkae {

struct AdamHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct ParamBlock {
    std::string name;
    std::span<double> values;
    std::span<const double> grads;
};

// First/second moment accumulators per parameter block and the step counter.
struct AdamState {
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;
    std::int64_t step = 0;
};

// One bias-corrected Adam update with decoupled weight decay:
//   p <- p * (1 - lr * wd), then p <- p - lr * m_hat / (sqrt(v_hat) + eps).
// All gradients are checked before any parameter is touched; a non-finite
// gradient raises TrainingError naming its block.
void adam_step(std::span<ParamBlock> blocks, AdamState& state, double learning_rate, double weight_decay,
               const AdamHyper& hyper = {});

}  // namespace gwkae
