#include "gwkae/kae_model.hpp"

#include <cmath>
#include <random>

#include "gwkae/errors.hpp"

namespace gwkae {

std::string to_string(Reduction r) { return r == Reduction::Mean ? "mean" : "sum"; }

Reduction reduction_from_string(const std::string& s) {
    if (s == "mean") return Reduction::Mean;
    if (s == "sum") return Reduction::Sum;
    throw ConfigError("unknown loss reduction '" + s + "' (expected mean or sum)");
}

double loss(std::span<const double> x, std::span<const double> reconstructed, Reduction reduction) {
    if (x.size() != reconstructed.size()) {
        throw ShapeError("loss: lengths differ (" + std::to_string(x.size()) + " vs " +
                         std::to_string(reconstructed.size()) + ")");
    }
    if (x.empty()) {
        throw ShapeError("loss: empty input");
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double d = x[j] - reconstructed[j];
        acc += d * d;
    }
    return reduction == Reduction::Mean ? acc / static_cast<double>(x.size()) : acc;
}

KAEModel::KAEModel(std::vector<int> encoder_widths, BSplineGrid grid, Reduction reduction)
    : encoder_widths_(std::move(encoder_widths)), grid_(grid), reduction_(reduction) {
    grid_.validate();
    if (encoder_widths_.size() < 2) {
        throw ShapeError("encoder needs an input and a latent width");
    }
    for (int w : encoder_widths_) {
        if (w < 1) throw ShapeError("layer widths must be positive");
    }
    const auto dec = decoder_widths();
    for (std::size_t l = 0; l + 1 < encoder_widths_.size(); ++l) {
        encoder_.emplace_back(encoder_widths_[l], encoder_widths_[l + 1], grid_);
        decoder_.emplace_back(dec[l], dec[l + 1], grid_);
    }
}

KAEModel KAEModel::random(std::vector<int> encoder_widths, const BSplineGrid& grid, std::uint64_t seed,
                          Reduction reduction) {
    KAEModel model(std::move(encoder_widths), grid, reduction);
    std::mt19937_64 rng(seed);
    for (KANLayer* layer : model.layers()) {
        *layer = KANLayer::random(layer->in_dim(), layer->out_dim(), grid, rng);
    }
    return model;
}

KAEModel KAEModel::standard(int input_width, std::uint64_t seed, const BSplineGrid& grid) {
    return random({input_width, 512, 256, 8}, grid, seed);
}

std::vector<int> KAEModel::decoder_widths() const { return {encoder_widths_.rbegin(), encoder_widths_.rend()}; }

std::vector<KANLayer*> KAEModel::layers() {
    std::vector<KANLayer*> out;
    for (auto& l : encoder_) out.push_back(&l);
    for (auto& l : decoder_) out.push_back(&l);
    return out;
}

std::vector<const KANLayer*> KAEModel::layers() const {
    std::vector<const KANLayer*> out;
    for (const auto& l : encoder_) out.push_back(&l);
    for (const auto& l : decoder_) out.push_back(&l);
    return out;
}

std::string KAEModel::layer_name(std::size_t index) const {
    if (index < encoder_.size()) return "encoder." + std::to_string(index);
    return "decoder." + std::to_string(index - encoder_.size());
}

std::size_t KAEModel::parameter_count() const {
    std::size_t n = 0;
    for (const KANLayer* l : layers()) n += l->parameter_count();
    return n;
}

namespace {

std::vector<double> run_stack(const std::vector<KANLayer>& stack, std::span<const double> x, const char* what) {
    if (static_cast<int>(x.size()) != stack.front().in_dim()) {
        throw ShapeError(std::string(what) + " expects width " + std::to_string(stack.front().in_dim()) + ", got " +
                         std::to_string(x.size()));
    }
    std::vector<double> h(x.begin(), x.end());
    for (const auto& layer : stack) {
        h = layer_forward(layer, h);
    }
    return h;
}

}  // namespace

std::vector<double> encode(const KAEModel& model, std::span<const double> x) {
    return run_stack(model.encoder(), x, "encode");
}

std::vector<double> decode(const KAEModel& model, std::span<const double> latent) {
    return run_stack(model.decoder(), latent, "decode");
}

std::vector<double> reconstruct(const KAEModel& model, std::span<const double> x) {
    if (static_cast<int>(x.size()) != model.input_width()) {
        throw ShapeError("reconstruct expects width " + std::to_string(model.input_width()) + ", got " +
                         std::to_string(x.size()));
    }
    RowMatrix xm = Eigen::Map<const RowMatrix>(x.data(), 1, model.input_width());
    RowMatrix y = reconstruct_batch(model, xm);
    return {y.data(), y.data() + y.size()};
}

RowMatrix reconstruct_batch(const KAEModel& model, const RowMatrix& x) {
    if (x.cols() != model.input_width()) {
        throw ShapeError("reconstruct expects width " + std::to_string(model.input_width()) + ", got " +
                         std::to_string(x.cols()));
    }
    RowMatrix h = x;
    RowMatrix next;
    LayerCache cache;
    for (const KANLayer* layer : model.layers()) {
        layer_forward_batch(*layer, h, next, cache);
        std::swap(h, next);
    }
    return h;
}

ModelGradients::ModelGradients(const KAEModel& model) {
    for (const KANLayer* l : model.layers()) {
        d_coeffs.emplace_back(l->coeffs().size(), 0.0);
        d_w_base.emplace_back(l->w_base().size(), 0.0);
        d_w_spline.emplace_back(l->w_spline().size(), 0.0);
    }
}

void ModelGradients::zero() {
    for (auto& v : d_coeffs) std::fill(v.begin(), v.end(), 0.0);
    for (auto& v : d_w_base) std::fill(v.begin(), v.end(), 0.0);
    for (auto& v : d_w_spline) std::fill(v.begin(), v.end(), 0.0);
}

std::vector<double> BatchTrainer::forward_backward(const KAEModel& model, const RowMatrix& x, ModelGradients& grads,
                                                   RowMatrix* d_input) {
    const auto layers = model.layers();
    const std::size_t n_layers = layers.size();
    if (x.cols() != model.input_width()) {
        throw ShapeError("training batch width " + std::to_string(x.cols()) + " does not match model input " +
                         std::to_string(model.input_width()));
    }
    caches_.resize(n_layers);
    activations_.resize(n_layers + 1);
    activations_[0] = x;
    for (std::size_t l = 0; l < n_layers; ++l) {
        layer_forward_batch(*layers[l], activations_[l], activations_[l + 1], caches_[l]);
    }
    const RowMatrix& out = activations_[n_layers];
    const Eigen::Index batch = x.rows();
    const Eigen::Index m = x.cols();

    std::vector<double> losses(batch);
    upstream_.resize(batch, m);
    const double scale = (model.reduction() == Reduction::Mean ? 1.0 / static_cast<double>(m) : 1.0) /
                         static_cast<double>(batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            const double d = x(b, j) - out(b, j);
            acc += d * d;
            upstream_(b, j) = -2.0 * d * scale;
        }
        losses[b] = model.reduction() == Reduction::Mean ? acc / static_cast<double>(m) : acc;
    }

    // the objective also depends on x directly through the target
    RowMatrix direct;
    if (d_input != nullptr) direct = -upstream_;

    for (std::size_t l = n_layers; l-- > 0;) {
        RowMatrix* d_in = (l > 0) ? &next_upstream_ : d_input;
        layer_backward_batch(*layers[l], caches_[l], upstream_, d_in, grads.d_coeffs[l], grads.d_w_base[l],
                             grads.d_w_spline[l], scratch_);
        if (l > 0) std::swap(upstream_, next_upstream_);
    }
    if (d_input != nullptr) *d_input += direct;
    return losses;
}

}  // namespace gwkae
