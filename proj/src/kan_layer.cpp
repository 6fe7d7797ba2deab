#include "gwkae/kan_layer.hpp"

#include <cmath>
#include <string>

#include "gwkae/errors.hpp"

namespace gwkae {

double silu(double x) { return x / (1.0 + std::exp(-x)); }

double silu_derivative(double x) {
    const double s = 1.0 / (1.0 + std::exp(-x));
    return s * (1.0 + x * (1.0 - s));
}

double edge_activation(double x, const KANEdge& edge, const BSplineGrid& grid) {
    if (static_cast<int>(edge.spline_coeffs.size()) != grid.num_basis()) {
        throw ShapeError("edge has " + std::to_string(edge.spline_coeffs.size()) + " coefficients, grid needs " +
                         std::to_string(grid.num_basis()));
    }
    const auto basis = bspline_basis(x, grid);
    double spline = 0.0;
    for (std::size_t m = 0; m < basis.size(); ++m) {
        spline += edge.spline_coeffs[m] * basis[m];
    }
    return edge.w_base * silu(x) + edge.w_spline * spline;
}

KANLayer::KANLayer(int in_dim, int out_dim, BSplineGrid grid) : in_dim_(in_dim), out_dim_(out_dim), grid_(grid) {
    grid_.validate();
    if (in_dim < 1 || out_dim < 1) {
        throw ShapeError("layer dimensions must be positive");
    }
    const std::size_t edges = static_cast<std::size_t>(in_dim) * out_dim;
    coeffs_.assign(edges * grid_.num_basis(), 0.0);
    w_base_.assign(edges, 0.0);
    w_spline_.assign(edges, 0.0);
}

KANLayer KANLayer::random(int in_dim, int out_dim, const BSplineGrid& grid, std::mt19937_64& rng) {
    KANLayer layer(in_dim, out_dim, grid);
    std::normal_distribution<double> coeff_dist(0.0, 0.1);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
    std::uniform_real_distribution<double> base_dist(-bound, bound);
    for (auto& c : layer.coeffs_) c = coeff_dist(rng);
    for (auto& w : layer.w_base_) w = base_dist(rng);
    for (auto& w : layer.w_spline_) w = bound;
    return layer;
}

KANEdge KANLayer::edge(int out, int in) const {
    const std::size_t e = static_cast<std::size_t>(out) * in_dim_ + in;
    const int nb = num_basis();
    KANEdge edge;
    edge.spline_coeffs.assign(coeffs_.begin() + e * nb, coeffs_.begin() + (e + 1) * nb);
    edge.w_base = w_base_[e];
    edge.w_spline = w_spline_[e];
    return edge;
}

void KANLayer::set_edge(int out, int in, const KANEdge& edge) {
    const int nb = num_basis();
    if (static_cast<int>(edge.spline_coeffs.size()) != nb) {
        throw ShapeError("edge coefficient count does not match the grid");
    }
    const std::size_t e = static_cast<std::size_t>(out) * in_dim_ + in;
    std::copy(edge.spline_coeffs.begin(), edge.spline_coeffs.end(), coeffs_.begin() + e * nb);
    w_base_[e] = edge.w_base;
    w_spline_[e] = edge.w_spline;
}

void layer_forward_batch(const KANLayer& layer, const RowMatrix& x, RowMatrix& y, LayerCache& cache) {
    const int in = layer.in_dim();
    const int out = layer.out_dim();
    const int nb = layer.num_basis();
    if (x.cols() != in) {
        throw ShapeError("layer expects " + std::to_string(in) + " inputs, got " + std::to_string(x.cols()));
    }
    const Eigen::Index batch = x.rows();
    const Eigen::Index cols = static_cast<Eigen::Index>(in) * (1 + nb);

    cache.features.resize(batch, cols);
    cache.basis_deriv.resize(batch, static_cast<Eigen::Index>(in) * nb);
    cache.silu_deriv.resize(batch, in);
    for (Eigen::Index b = 0; b < batch; ++b) {
        double* feat = cache.features.row(b).data();
        double* dbasis = cache.basis_deriv.row(b).data();
        for (int i = 0; i < in; ++i) {
            const double xi = x(b, i);
            if (!std::isfinite(xi)) {
                throw TrainingError("non-finite layer input");
            }
            feat[i] = silu(xi);
            cache.silu_deriv(b, i) = silu_derivative(xi);
            bspline_basis(xi, layer.grid(), std::span<double>(feat + in + static_cast<std::size_t>(i) * nb, nb),
                          std::span<double>(dbasis + static_cast<std::size_t>(i) * nb, nb));
        }
    }

    cache.weights.resize(out, cols);
    const auto coeffs = layer.coeffs();
    const auto w_base = layer.w_base();
    const auto w_spline = layer.w_spline();
    for (int o = 0; o < out; ++o) {
        double* w = cache.weights.row(o).data();
        for (int i = 0; i < in; ++i) {
            const std::size_t e = static_cast<std::size_t>(o) * in + i;
            w[i] = w_base[e];
            const double ws = w_spline[e];
            const double* c = coeffs.data() + e * nb;
            double* dst = w + in + static_cast<std::size_t>(i) * nb;
            for (int m = 0; m < nb; ++m) dst[m] = ws * c[m];
        }
    }
    y.resize(batch, out);
    y.noalias() = cache.features * cache.weights.transpose();
}

void layer_backward_batch(const KANLayer& layer, const LayerCache& cache, const RowMatrix& upstream,
                          RowMatrix* d_input, std::span<double> d_coeffs, std::span<double> d_w_base,
                          std::span<double> d_w_spline, RowMatrix& scratch) {
    const int in = layer.in_dim();
    const int out = layer.out_dim();
    const int nb = layer.num_basis();
    if (upstream.cols() != out || upstream.rows() != cache.features.rows()) {
        throw ShapeError("upstream gradient shape does not match the layer output");
    }
    if (d_coeffs.size() != layer.coeffs().size() || d_w_base.size() != layer.w_base().size() ||
        d_w_spline.size() != layer.w_spline().size()) {
        throw ShapeError("gradient buffers do not match the layer parameters");
    }

    scratch.resize(out, cache.features.cols());
    scratch.noalias() = upstream.transpose() * cache.features;

    const auto coeffs = layer.coeffs();
    const auto w_spline = layer.w_spline();
    for (int o = 0; o < out; ++o) {
        const double* g = scratch.row(o).data();
        for (int i = 0; i < in; ++i) {
            const std::size_t e = static_cast<std::size_t>(o) * in + i;
            d_w_base[e] += g[i];
            const double* gs = g + in + static_cast<std::size_t>(i) * nb;
            const double* c = coeffs.data() + e * nb;
            double* dc = d_coeffs.data() + e * nb;
            const double ws = w_spline[e];
            double acc = 0.0;
            for (int m = 0; m < nb; ++m) {
                dc[m] += ws * gs[m];
                acc += c[m] * gs[m];
            }
            d_w_spline[e] += acc;
        }
    }

    if (d_input == nullptr) return;
    RowMatrix d_features = upstream * cache.weights;
    d_input->resize(upstream.rows(), in);
    for (Eigen::Index b = 0; b < upstream.rows(); ++b) {
        const double* df = d_features.row(b).data();
        const double* dbasis = cache.basis_deriv.row(b).data();
        for (int i = 0; i < in; ++i) {
            double acc = df[i] * cache.silu_deriv(b, i);
            const double* dfs = df + in + static_cast<std::size_t>(i) * nb;
            const double* db = dbasis + static_cast<std::size_t>(i) * nb;
            for (int m = 0; m < nb; ++m) acc += dfs[m] * db[m];
            (*d_input)(b, i) = acc;
        }
    }
}

std::vector<double> layer_forward(const KANLayer& layer, std::span<const double> x) {
    if (static_cast<int>(x.size()) != layer.in_dim()) {
        throw ShapeError("layer expects " + std::to_string(layer.in_dim()) + " inputs, got " +
                         std::to_string(x.size()));
    }
    RowMatrix xm = Eigen::Map<const RowMatrix>(x.data(), 1, layer.in_dim());
    RowMatrix y;
    LayerCache cache;
    layer_forward_batch(layer, xm, y, cache);
    return {y.data(), y.data() + y.size()};
}

LayerGradients layer_backward(const KANLayer& layer, std::span<const double> x, std::span<const double> upstream) {
    if (static_cast<int>(x.size()) != layer.in_dim() || static_cast<int>(upstream.size()) != layer.out_dim()) {
        throw ShapeError("layer_backward: input or upstream length does not match the layer");
    }
    RowMatrix xm = Eigen::Map<const RowMatrix>(x.data(), 1, layer.in_dim());
    RowMatrix y;
    LayerCache cache;
    layer_forward_batch(layer, xm, y, cache);
    RowMatrix g = Eigen::Map<const RowMatrix>(upstream.data(), 1, layer.out_dim());

    LayerGradients grads;
    grads.d_coeffs.assign(layer.coeffs().size(), 0.0);
    grads.d_w_base.assign(layer.w_base().size(), 0.0);
    grads.d_w_spline.assign(layer.w_spline().size(), 0.0);
    RowMatrix d_in;
    RowMatrix scratch;
    layer_backward_batch(layer, cache, g, &d_in, grads.d_coeffs, grads.d_w_base, grads.d_w_spline, scratch);
    grads.d_input.assign(d_in.data(), d_in.data() + d_in.size());
    return grads;
}

}  // namespace gwkae
