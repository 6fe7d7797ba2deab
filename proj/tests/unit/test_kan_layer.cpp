#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gwkae/kan_layer.hpp"

using namespace gwkae;

namespace {

double silu_ref(double x) { return x / (1.0 + std::exp(-x)); }

double edge_ref(double x, const KANEdge& e, const BSplineGrid& g) {
    const auto b = bspline_basis(x, g);
    double s = 0.0;
    for (int m = 0; m < g.num_basis(); ++m) s += e.spline_coeffs[m] * b[m];
    return e.w_base * silu_ref(x) + e.w_spline * s;
}

KANLayer make_layer(int in, int out, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto layer = KANLayer::random(in, out, BSplineGrid{}, rng);
    // perturb w_spline so it is not constant
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (double& w : layer.w_spline()) w *= u(rng);
    return layer;
}

std::vector<double> random_input(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.4, 2.3);  // includes the extrapolated tails
    std::vector<double> x(n);
    for (double& v : x) v = u(rng);
    return x;
}

double weighted_output(const KANLayer& layer, const std::vector<double>& x, const std::vector<double>& w) {
    const auto y = layer_forward(layer, x);
    double s = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) s += w[j] * y[j];
    return s;
}

}  // namespace

TEST(KANLayer, SiluValues) {
    EXPECT_DOUBLE_EQ(silu(0.0), 0.0);
    EXPECT_NEAR(silu(1.0), 1.0 / (1.0 + std::exp(-1.0)), 1e-15);
    EXPECT_NEAR(silu(-30.0), -30.0 * std::exp(-30.0), 1e-15);
    const double h = 1e-6;
    for (double x : {-3.0, -0.5, 0.0, 0.7, 4.0}) {
        EXPECT_NEAR(silu_derivative(x), (silu(x + h) - silu(x - h)) / (2 * h), 1e-8);
    }
}

TEST(KANLayer, EdgeActivationMatchesOracle) {
    BSplineGrid g;
    KANEdge e{{0.3, -0.2, 0.5, 0.1, -0.4, 0.25, 0.0, 0.7}, 0.8, 1.3};
    for (double x : {-2.0, -1.0, 0.0, 0.42, 1.0, 2.0, 3.1}) {
        EXPECT_NEAR(edge_activation(x, e, g), edge_ref(x, e, g), 1e-13);
    }
}

TEST(KANLayer, ZeroLayerOutputsZero) {
    KANLayer layer(4, 3, BSplineGrid{});
    const auto y = layer_forward(layer, std::vector<double>{0.1, 0.2, 0.3, 0.4});
    for (double v : y) EXPECT_EQ(v, 0.0);
}

TEST(KANLayer, ForwardIsSumOfEdges) {
    const auto layer = make_layer(5, 3, 11);
    const auto x = random_input(5, 12);
    const auto y = layer_forward(layer, x);
    ASSERT_EQ(y.size(), 3u);
    for (int o = 0; o < 3; ++o) {
        double ref = 0.0;
        for (int i = 0; i < 5; ++i) ref += edge_ref(x[i], layer.edge(o, i), layer.grid());
        EXPECT_NEAR(y[o], ref, 1e-12);
    }
}

TEST(KANLayer, EdgeAccessorsRoundTrip) {
    KANLayer layer(2, 2, BSplineGrid{});
    KANEdge e{{1, 2, 3, 4, 5, 6, 7, 8}, -0.5, 2.0};
    layer.set_edge(1, 0, e);
    const auto back = layer.edge(1, 0);
    EXPECT_EQ(back.spline_coeffs, e.spline_coeffs);
    EXPECT_EQ(back.w_base, e.w_base);
    EXPECT_EQ(back.w_spline, e.w_spline);
    EXPECT_EQ(layer.coeffs()[(1 * 2 + 0) * 8 + 3], 4.0);
}

TEST(KANLayer, BackwardMatchesFiniteDifferences) {
    auto layer = make_layer(4, 3, 21);
    const auto x = random_input(4, 22);
    const std::vector<double> w{0.7, -1.1, 0.4};
    const auto g = layer_backward(layer, x, w);
    const double h = 1e-6;
    const auto check = [&](std::span<double> params, const std::vector<double>& grads) {
        ASSERT_EQ(params.size(), grads.size());
        for (std::size_t k = 0; k < params.size(); ++k) {
            const double keep = params[k];
            params[k] = keep + h;
            const double fp = weighted_output(layer, x, w);
            params[k] = keep - h;
            const double fm = weighted_output(layer, x, w);
            params[k] = keep;
            EXPECT_NEAR(grads[k], (fp - fm) / (2 * h), 1e-7);
        }
    };
    check(layer.coeffs(), g.d_coeffs);
    check(layer.w_base(), g.d_w_base);
    check(layer.w_spline(), g.d_w_spline);
    for (int i = 0; i < 4; ++i) {
        auto xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        EXPECT_NEAR(g.d_input[i], (weighted_output(layer, xp, w) - weighted_output(layer, xm, w)) / (2 * h), 1e-7);
    }
}

TEST(KANLayer, BatchAgreesWithPerSample) {
    const auto layer = make_layer(6, 4, 31);
    const int batch = 5;
    RowMatrix x(batch, 6), up(batch, 4);
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(-1.2, 2.2);
    for (int b = 0; b < batch; ++b) {
        for (int i = 0; i < 6; ++i) x(b, i) = u(rng);
        for (int o = 0; o < 4; ++o) up(b, o) = u(rng);
    }
    RowMatrix y, d_in, scratch;
    LayerCache cache;
    layer_forward_batch(layer, x, y, cache);
    std::vector<double> dc(layer.coeffs().size()), dwb(layer.w_base().size()), dws(layer.w_spline().size());
    layer_backward_batch(layer, cache, up, &d_in, dc, dwb, dws, scratch);

    std::vector<double> rc(dc.size()), rwb(dwb.size()), rws(dws.size());
    for (int b = 0; b < batch; ++b) {
        std::vector<double> xb(6), ub(4);
        for (int i = 0; i < 6; ++i) xb[i] = x(b, i);
        for (int o = 0; o < 4; ++o) ub[o] = up(b, o);
        const auto yb = layer_forward(layer, xb);
        for (int o = 0; o < 4; ++o) EXPECT_NEAR(y(b, o), yb[o], 1e-12);
        const auto g = layer_backward(layer, xb, ub);
        for (int i = 0; i < 6; ++i) EXPECT_NEAR(d_in(b, i), g.d_input[i], 1e-12);
        for (std::size_t k = 0; k < rc.size(); ++k) rc[k] += g.d_coeffs[k];
        for (std::size_t k = 0; k < rwb.size(); ++k) rwb[k] += g.d_w_base[k];
        for (std::size_t k = 0; k < rws.size(); ++k) rws[k] += g.d_w_spline[k];
    }
    for (std::size_t k = 0; k < rc.size(); ++k) EXPECT_NEAR(dc[k], rc[k], 1e-11);
    for (std::size_t k = 0; k < rwb.size(); ++k) EXPECT_NEAR(dwb[k], rwb[k], 1e-11);
    for (std::size_t k = 0; k < rws.size(); ++k) EXPECT_NEAR(dws[k], rws[k], 1e-11);
}

TEST(KANLayer, RandomInitStatistics) {
    std::mt19937_64 rng(5);
    const auto layer = KANLayer::random(100, 50, BSplineGrid{}, rng);
    const double bound = 1.0 / std::sqrt(100.0);
    double mean = 0.0, sq = 0.0;
    for (double c : layer.coeffs()) {
        mean += c;
        sq += c * c;
    }
    const double n = static_cast<double>(layer.coeffs().size());
    EXPECT_NEAR(mean / n, 0.0, 0.005);
    EXPECT_NEAR(std::sqrt(sq / n), 0.1, 0.005);
    for (double w : layer.w_base()) EXPECT_LE(std::abs(w), bound);
    for (double w : layer.w_spline()) EXPECT_DOUBLE_EQ(w, bound);
}
