#pragma once

#include <span>
#include <vector>

namespace gwkae {

// Uniform B-spline grid on [lo, hi] with `intervals` interior intervals,
// extended by `order` knots on each side so that intervals + order basis
// functions of degree `order` are active on the domain.
struct BSplineGrid {
    int order = 3;
    int intervals = 5;
    double lo = -1.0;
    double hi = 2.0;

    void validate() const;  // throws ConfigError
    int num_basis() const { return intervals + order; }
    double step() const { return (hi - lo) / intervals; }
    // t_j = lo + (j - order) * step, j = 0 .. intervals + 2 * order
    double knot(int j) const { return lo + (j - order) * step(); }
    int num_knots() const { return intervals + 2 * order + 1; }

    bool operator==(const BSplineGrid&) const = default;
};

// Cox-de Boor basis values at x. Outside [lo, hi] every basis function is
// continued linearly from its value and slope at the nearest boundary.
std::vector<double> bspline_basis(double x, const BSplineGrid& grid);

// Writes num_basis() values (and, if non-empty, d/dx of each) into the spans.
void bspline_basis(double x, const BSplineGrid& grid, std::span<double> values, std::span<double> derivs);

}  // namespace gwkae
