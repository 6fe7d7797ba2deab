#include "gwkae/adam.hpp"

#include <cmath>

#include "gwkae/errors.hpp"

namespace gwkae {

void adam_step(std::span<ParamBlock> blocks, AdamState& state, double learning_rate, double weight_decay,
               const AdamHyper& hyper) {
    if (state.first_moment.empty() && state.step == 0) {
        for (const auto& b : blocks) {
            state.first_moment.emplace_back(b.values.size(), 0.0);
            state.second_moment.emplace_back(b.values.size(), 0.0);
        }
    }
    if (state.first_moment.size() != blocks.size()) {
        throw ShapeError("Adam state holds " + std::to_string(state.first_moment.size()) + " blocks, got " +
                         std::to_string(blocks.size()));
    }
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        const auto& b = blocks[k];
        if (b.values.size() != b.grads.size() || b.values.size() != state.first_moment[k].size()) {
            throw ShapeError("parameter block '" + b.name + "' does not match its gradient or Adam state");
        }
        for (double g : b.grads) {
            if (!std::isfinite(g)) {
                throw TrainingError("non-finite gradient in parameter block '" + b.name + "'");
            }
        }
    }

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double bias1 = 1.0 - std::pow(hyper.beta1, t);
    const double bias2 = 1.0 - std::pow(hyper.beta2, t);
    const double decay = 1.0 - learning_rate * weight_decay;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        auto& b = blocks[k];
        auto& m = state.first_moment[k];
        auto& v = state.second_moment[k];
        for (std::size_t i = 0; i < b.values.size(); ++i) {
            const double g = b.grads[i];
            m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * g;
            v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * g * g;
            const double m_hat = m[i] / bias1;
            const double v_hat = v[i] / bias2;
            b.values[i] = b.values[i] * decay - learning_rate * m_hat / (std::sqrt(v_hat) + hyper.eps);
        }
    }
}

}  // namespace gwkae
