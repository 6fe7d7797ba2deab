#include "gwkae/bspline.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "gwkae/errors.hpp"

namespace gwkae {

void BSplineGrid::validate() const {
    if (order < 1 || order > 8) {
        throw ConfigError("spline order must be in [1, 8]");
    }
    if (intervals < 1) {
        throw ConfigError("spline grid needs at least one interval");
    }
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
        throw ConfigError("spline domain must satisfy lo < hi");
    }
}

namespace {

constexpr int kMaxOrder = 8;

// Knot span s with t_s <= x < t_{s+1}, restricted to the domain intervals;
// x == hi falls into the last interval.
int find_span(double x, const BSplineGrid& g) {
    const int first = g.order;
    const int last = g.order + g.intervals - 1;
    int s = first + static_cast<int>(std::floor((x - g.lo) / g.step()));
    s = std::clamp(s, first, last);
    while (s > first && x < g.knot(s)) --s;
    while (s < last && x >= g.knot(s + 1)) ++s;
    return s;
}

// Nonzero degree-`deg` basis values at x inside span s: out[r] = B_{s-deg+r}.
void nonzero_basis(double x, int s, int deg, const BSplineGrid& g, double* out) {
    std::array<double, kMaxOrder + 1> left{};
    std::array<double, kMaxOrder + 1> right{};
    out[0] = 1.0;
    for (int j = 1; j <= deg; ++j) {
        left[j] = x - g.knot(s + 1 - j);
        right[j] = g.knot(s + j) - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double temp = out[r] / (right[r + 1] + left[j - r]);
            out[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        out[j] = saved;
    }
}

void eval_inside(double x, int s, const BSplineGrid& g, std::span<double> values, std::span<double> derivs) {
    const int k = g.order;
    std::fill(values.begin(), values.end(), 0.0);
    std::array<double, kMaxOrder + 1> n{};
    nonzero_basis(x, s, k, g, n.data());
    for (int r = 0; r <= k; ++r) {
        values[s - k + r] = n[r];
    }
    if (derivs.empty()) return;
    std::fill(derivs.begin(), derivs.end(), 0.0);
    if (k == 0) return;
    // B'_{j,k} = (B_{j,k-1} - B_{j+1,k-1}) / h on a uniform grid
    std::array<double, kMaxOrder + 1> lower{};
    nonzero_basis(x, s, k - 1, g, lower.data());
    const double inv_h = 1.0 / g.step();
    for (int r = 0; r < k; ++r) {
        const int j = s - k + 1 + r;  // index of B_{j,k-1} = lower[r]
        derivs[j] += lower[r] * inv_h;
        derivs[j - 1] -= lower[r] * inv_h;
    }
}

}  // namespace

void bspline_basis(double x, const BSplineGrid& grid, std::span<double> values, std::span<double> derivs) {
    const int nb = grid.num_basis();
    if (static_cast<int>(values.size()) != nb || (!derivs.empty() && static_cast<int>(derivs.size()) != nb)) {
        throw ShapeError("basis output span must hold num_basis() values");
    }
    if (x >= grid.lo && x <= grid.hi) {
        eval_inside(x, find_span(x, grid), grid, values, derivs);
        return;
    }
    const bool below = x < grid.lo;
    const double edge = below ? grid.lo : grid.hi;
    const int s = below ? grid.order : grid.order + grid.intervals - 1;
    std::array<double, 2 * kMaxOrder + 64> slope_buf{};
    std::vector<double> heap;
    std::span<double> slope;
    if (nb <= static_cast<int>(slope_buf.size())) {
        slope = std::span<double>(slope_buf.data(), nb);
    } else {
        heap.resize(nb);
        slope = heap;
    }
    eval_inside(edge, s, grid, values, slope);
    const double dx = x - edge;
    for (int j = 0; j < nb; ++j) {
        values[j] += slope[j] * dx;
    }
    if (!derivs.empty()) {
        std::copy(slope.begin(), slope.end(), derivs.begin());
    }
}

std::vector<double> bspline_basis(double x, const BSplineGrid& grid) {
    std::vector<double> v(grid.num_basis());
    bspline_basis(x, grid, v, {});
    return v;
}

}  // namespace gwkae
