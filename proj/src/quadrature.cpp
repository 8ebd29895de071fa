#include "hrvem/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace hrvem {

double QuadratureRule::weight_sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

QuadratureRule1D gauss_1d(int n_points) {
    if (n_points < 1 || n_points > 20)
        throw std::invalid_argument("gauss_1d supports 1..20 points");
    QuadratureRule1D rule;
    rule.points.resize(n_points);
    rule.weights.resize(n_points);
    const int n = n_points;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton iteration on P_n from the Chebyshev-like initial guess
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.points[i] = -x;
        rule.weights[i] = w;
        rule.points[n - 1 - i] = x;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.points[n / 2] = 0.0;
    return rule;
}

QuadratureRule triangle_rule(int degree) {
    if (degree < 0 || degree > 20)
        throw std::invalid_argument("triangle_rule supports degree 0..20");
    // Duffy collapse of [0,1]^2: x = u, y = v(1-u), jacobian (1-u).
    const int nu = (degree + 3) / 2;  // u-integrand degree <= degree+1
    const int nv = (degree + 2) / 2;
    const auto gu = gauss_1d(std::max(nu, 1));
    const auto gv = gauss_1d(std::max(nv, 1));
    QuadratureRule rule;
    rule.points.reserve(gu.size() * gv.size());
    rule.weights.reserve(gu.size() * gv.size());
    for (int i = 0; i < gu.size(); ++i) {
        const double u = 0.5 * (gu.points[i] + 1.0);
        const double wu = 0.5 * gu.weights[i];
        for (int j = 0; j < gv.size(); ++j) {
            const double v = 0.5 * (gv.points[j] + 1.0);
            const double wv = 0.5 * gv.weights[j];
            rule.points.push_back({u, v * (1.0 - u)});
            rule.weights.push_back(wu * wv * (1.0 - u));
        }
    }
    return rule;
}

QuadratureRule polygon_rule(const CellGeometry& geom, int degree) {
    const auto ref = triangle_rule(degree);
    QuadratureRule rule;
    rule.points.reserve(ref.size() * geom.fan.size());
    rule.weights.reserve(ref.size() * geom.fan.size());
    for (const auto& tri : geom.fan) {
        const Vec2 e1 = tri[1] - tri[0];
        const Vec2 e2 = tri[2] - tri[0];
        const double jac = cross(e1, e2);  // 2*area, positive for a valid fan
        if (jac <= 0.0) throw std::invalid_argument("polygon_rule: inverted fan triangle");
        for (int q = 0; q < ref.size(); ++q) {
            rule.points.push_back(tri[0] + ref.points[q].x * e1 + ref.points[q].y * e2);
            rule.weights.push_back(ref.weights[q] * jac);
        }
    }
    return rule;
}

namespace detail {

double monomial_moment_green(const std::vector<Vec2>& loop, Vec2 center, double h,
                             int ax, int ay) {
    // integral of m = xi^ax eta^ay over the polygon, xi=(x-cx)/h, eta=(y-cy)/h,
    // via F = (h/(ax+1) xi^(ax+1) eta^ay, 0), div F = m:
    //   int_E m = sum_edges int_e F . n ds
    const int m = static_cast<int>(loop.size());
    const auto g = gauss_1d(std::min(20, (ax + ay) / 2 + 2));
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
        const Vec2 a = loop[i];
        const Vec2 b = loop[(i + 1) % m];
        const Vec2 t = b - a;
        const double len = norm(t);
        if (len == 0.0) continue;
        const Vec2 n = perp(t) / len;  // outward for CCW loops
        double acc = 0.0;
        for (int q = 0; q < g.size(); ++q) {
            const Vec2 x = a + (0.5 * (g.points[q] + 1.0)) * t;
            const double xi = (x.x - center.x) / h;
            const double eta = (x.y - center.y) / h;
            acc += g.weights[q] * std::pow(xi, ax + 1) * std::pow(eta, ay);
        }
        total += (len / 2.0) * acc * n.x * h / (ax + 1);
    }
    return total;
}

} // namespace detail

} // namespace hrvem
