#pragma once

#include "hrvem/mesh.hpp"

#include <vector>

namespace hrvem {

/// Gauss-Legendre rule on [-1,1].
struct QuadratureRule1D {
    std::vector<double> points;
    std::vector<double> weights;
    int size() const { return static_cast<int>(points.size()); }
};

/// 2D rule; the reference domain depends on the producing function.
struct QuadratureRule {
    std::vector<Vec2> points;
    std::vector<double> weights;
    int size() const { return static_cast<int>(points.size()); }
    double weight_sum() const;
};

/// n-point Gauss-Legendre rule, exact for degree <= 2n-1. 1 <= n <= 20.
QuadratureRule1D gauss_1d(int n_points);

/// Rule on the reference triangle (0,0),(1,0),(0,1), exact for total degree
/// <= degree (<= 20). Collapsed tensor-Gauss construction; weights positive.
QuadratureRule triangle_rule(int degree);

/// Rule on the polygon behind `geom`, exact for total degree <= degree:
/// the triangle rule mapped over the star fan.
QuadratureRule polygon_rule(const CellGeometry& geom, int degree);

namespace detail {
/// Exact monomial moment over a polygon via the divergence theorem:
/// integral of ((x-c)/h)^ax * ((y-c)/h)^ay. Internal cross-check utility.
double monomial_moment_green(const std::vector<Vec2>& loop, Vec2 center, double h,
                             int ax, int ay);
} // namespace detail

} // namespace hrvem
