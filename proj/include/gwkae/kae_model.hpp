#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gwkae/kan_layer.hpp"

namespace gwkae {

enum class Reduction { Mean, Sum };

std::string to_string(Reduction r);
Reduction reduction_from_string(const std::string& s);

// sum_j (x_j - x'_j)^2, divided by m for Reduction::Mean.
double loss(std::span<const double> x, std::span<const double> reconstructed, Reduction reduction = Reduction::Mean);

// Stacked KAN encoder [m, h_1, ..., latent] and mirrored decoder.
class KAEModel {
public:
    KAEModel() = default;
    // Zero-parameter model.
    KAEModel(std::vector<int> encoder_widths, BSplineGrid grid, Reduction reduction = Reduction::Mean);

    static KAEModel random(std::vector<int> encoder_widths, const BSplineGrid& grid, std::uint64_t seed,
                           Reduction reduction = Reduction::Mean);
    // m -> 512 -> 256 -> 8 -> 256 -> 512 -> m
    static KAEModel standard(int input_width, std::uint64_t seed, const BSplineGrid& grid = {});

    int input_width() const { return encoder_widths_.front(); }
    int latent_width() const { return encoder_widths_.back(); }
    const std::vector<int>& encoder_widths() const { return encoder_widths_; }
    std::vector<int> decoder_widths() const;
    const BSplineGrid& grid() const { return grid_; }
    Reduction reduction() const { return reduction_; }
    void set_reduction(Reduction r) { reduction_ = r; }

    std::vector<KANLayer>& encoder() { return encoder_; }
    const std::vector<KANLayer>& encoder() const { return encoder_; }
    std::vector<KANLayer>& decoder() { return decoder_; }
    const std::vector<KANLayer>& decoder() const { return decoder_; }

    // Encoder layers followed by decoder layers.
    std::vector<KANLayer*> layers();
    std::vector<const KANLayer*> layers() const;
    std::string layer_name(std::size_t index) const;

    std::size_t parameter_count() const;

private:
    std::vector<int> encoder_widths_;
    BSplineGrid grid_;
    Reduction reduction_ = Reduction::Mean;
    std::vector<KANLayer> encoder_;
    std::vector<KANLayer> decoder_;
};

std::vector<double> encode(const KAEModel& model, std::span<const double> x);
std::vector<double> decode(const KAEModel& model, std::span<const double> latent);
std::vector<double> reconstruct(const KAEModel& model, std::span<const double> x);

// Row-wise reconstruction of a batch.
RowMatrix reconstruct_batch(const KAEModel& model, const RowMatrix& x);

// Gradient buffers mirroring every layer's parameters.
struct ModelGradients {
    std::vector<std::vector<double>> d_coeffs;
    std::vector<std::vector<double>> d_w_base;
    std::vector<std::vector<double>> d_w_spline;

    explicit ModelGradients(const KAEModel& model);
    void zero();
};

// Forward + backward of the batch objective (1/B) sum_b loss(x_b, x'_b).
// Gradients are accumulated into `grads` (caller zeroes); returns the
// per-sample losses. If `d_input` is non-null it receives d objective / d x.
class BatchTrainer {
public:
    std::vector<double> forward_backward(const KAEModel& model, const RowMatrix& x, ModelGradients& grads,
                                         RowMatrix* d_input = nullptr);

private:
    std::vector<LayerCache> caches_;
    std::vector<RowMatrix> activations_;
    RowMatrix upstream_;
    RowMatrix next_upstream_;
    RowMatrix scratch_;
};

}  // namespace gwkae
