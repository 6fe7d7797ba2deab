#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gwkae/bspline.hpp"

namespace gwkae {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double silu(double x);
double silu_derivative(double x);

// One learnable univariate function:
//   phi(x) = w_base * silu(x) + w_spline * sum_m c_m B_m(x)
struct KANEdge {
    std::vector<double> spline_coeffs;
    double w_base = 0.0;
    double w_spline = 0.0;
};

double edge_activation(double x, const KANEdge& edge, const BSplineGrid& grid);

// out_dim x in_dim matrix of edges sharing one grid. Parameters live in flat
// arrays: coeffs[(o * in + i) * nb + m], w_base[o * in + i], w_spline[o * in + i].
class KANLayer {
public:
    KANLayer() = default;
    KANLayer(int in_dim, int out_dim, BSplineGrid grid);  // all parameters zero

    // c ~ N(0, 0.1^2), w_base ~ U(-1/sqrt(in), 1/sqrt(in)), w_spline = 1/sqrt(in).
    static KANLayer random(int in_dim, int out_dim, const BSplineGrid& grid, std::mt19937_64& rng);

    int in_dim() const { return in_dim_; }
    int out_dim() const { return out_dim_; }
    int num_basis() const { return grid_.num_basis(); }
    const BSplineGrid& grid() const { return grid_; }

    KANEdge edge(int out, int in) const;
    void set_edge(int out, int in, const KANEdge& edge);

    std::span<double> coeffs() { return coeffs_; }
    std::span<const double> coeffs() const { return coeffs_; }
    std::span<double> w_base() { return w_base_; }
    std::span<const double> w_base() const { return w_base_; }
    std::span<double> w_spline() { return w_spline_; }
    std::span<const double> w_spline() const { return w_spline_; }

    std::size_t parameter_count() const { return coeffs_.size() + w_base_.size() + w_spline_.size(); }

private:
    int in_dim_ = 0;
    int out_dim_ = 0;
    BSplineGrid grid_;
    std::vector<double> coeffs_;
    std::vector<double> w_base_;
    std::vector<double> w_spline_;
};

struct LayerGradients {
    std::vector<double> d_input;
    std::vector<double> d_coeffs;
    std::vector<double> d_w_base;
    std::vector<double> d_w_spline;
};

// y_j = sum_i phi_{j,i}(x_i)
std::vector<double> layer_forward(const KANLayer& layer, std::span<const double> x);

// Exact partial derivatives of <upstream, layer_forward(x)>.
LayerGradients layer_backward(const KANLayer& layer, std::span<const double> x, std::span<const double> upstream);

// Batched evaluation used by training. A forward pass keeps what the
// backward pass needs; the effective weight matrix is
//   [ w_base | w_spline (x) coeffs ]  (out x in * (1 + nb))
// and the per-sample feature row is [ silu(x) | B(x_0) ... B(x_{in-1}) ].
struct LayerCache {
    RowMatrix features;
    RowMatrix basis_deriv;
    RowMatrix silu_deriv;
    RowMatrix weights;
};

void layer_forward_batch(const KANLayer& layer, const RowMatrix& x, RowMatrix& y, LayerCache& cache);

// Accumulates parameter gradients (+=) into the given spans and, when
// d_input is non-null, writes the input gradient.
void layer_backward_batch(const KANLayer& layer, const LayerCache& cache, const RowMatrix& upstream,
                          RowMatrix* d_input, std::span<double> d_coeffs, std::span<double> d_w_base,
                          std::span<double> d_w_spline, RowMatrix& scratch);

}  // namespace gwkae
