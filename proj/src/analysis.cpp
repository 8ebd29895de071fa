#include "hrvem/analysis.hpp"

#include "hrvem/element.hpp"
#include "hrvem/polybasis.hpp"
#include "hrvem/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace hrvem {

ManufacturedSolution make_test(char label) {
    ManufacturedSolution sol;
    sol.label = label;
    switch (label) {
        case 'a': {
            sol.field = plane_strain_isotropic(1.0, 1.0);
            sol.displacement = [](Vec2 p) {
                return Vec2{p.x * p.x * p.x - 3.0 * p.x * p.y * p.y,
                            p.y * p.y * p.y - 3.0 * p.x * p.x * p.y};
            };
            // trace-free strain, lambda term drops: sigma = 2 eps(u)
            sol.stress = [](Vec2 p) {
                return Eigen::Vector3d{6.0 * (p.x * p.x - p.y * p.y),
                                       6.0 * (p.y * p.y - p.x * p.x),
                                       -12.0 * p.x * p.y};
            };
            sol.body_force = [](Vec2) { return Vec2{0.0, 0.0}; };
            sol.divergence = [](Vec2) { return Vec2{0.0, 0.0}; };
            sol.zero_body_force = true;
            break;
        }
        case 'b': {
            sol.field = plane_strain_isotropic(1.0, 1.0);
            sol.displacement = [](Vec2 p) {
                const double w = std::sin(M_PI * p.x) * std::sin(M_PI * p.y);
                return Vec2{w, w};
            };
            sol.stress = [](Vec2 p) {
                const double wx = M_PI * std::cos(M_PI * p.x) * std::sin(M_PI * p.y);
                const double wy = M_PI * std::sin(M_PI * p.x) * std::cos(M_PI * p.y);
                // lambda = mu = 1: s11 = 3 wx + wy, s22 = wx + 3 wy, s12 = wx + wy
                return Eigen::Vector3d{3.0 * wx + wy, wx + 3.0 * wy, wx + wy};
            };
            sol.body_force = [](Vec2 p) {
                const double ss = std::sin(M_PI * p.x) * std::sin(M_PI * p.y);
                const double cc = std::cos(M_PI * p.x) * std::cos(M_PI * p.y);
                const double f = -M_PI * M_PI * (-4.0 * ss + 2.0 * cc);
                return Vec2{f, f};
            };
            sol.divergence = [](Vec2 p) {
                const double ss = std::sin(M_PI * p.x) * std::sin(M_PI * p.y);
                const double cc = std::cos(M_PI * p.x) * std::cos(M_PI * p.y);
                const double f = -M_PI * M_PI * (-4.0 * ss + 2.0 * cc);
                return Vec2{-f, -f};
            };
            sol.zero_boundary_data = true;
            break;
        }
        case 'c': {
            sol.field = variable_field_test_c();
            sol.displacement = [](Vec2 p) {
                return Vec2{p.x * p.x * p.x - 3.0 * p.x * p.y * p.y,
                            p.y * p.y * p.y - 3.0 * p.x * p.x * p.y};
            };
            sol.stress = [](Vec2 p) {
                const double dx = p.x - 0.5, dy = p.y - 0.5;
                const double m = 1.0 - (dx * dx + dy * dy);
                return Eigen::Vector3d{m * 6.0 * (p.x * p.x - p.y * p.y),
                                       m * 6.0 * (p.y * p.y - p.x * p.x),
                                       m * (-12.0 * p.x * p.y)};
            };
            // hand differentiation of sigma = 2(1-d^2) eps(u)
            sol.body_force = [](Vec2 p) {
                const double x = p.x, y = p.y;
                const double f1 = 12.0 * (x - 0.5) * (x * x - y * y) - 24.0 * x * y * (y - 0.5);
                const double f2 = -24.0 * x * y * (x - 0.5) - 12.0 * (y - 0.5) * (x * x - y * y);
                return Vec2{f1, f2};
            };
            sol.divergence = [](Vec2 p) {
                const double x = p.x, y = p.y;
                const double f1 = 12.0 * (x - 0.5) * (x * x - y * y) - 24.0 * x * y * (y - 0.5);
                const double f2 = -24.0 * x * y * (x - 0.5) - 12.0 * (y - 0.5) * (x * x - y * y);
                return Vec2{-f1, -f2};
            };
            break;
        }
        default:
            throw std::invalid_argument(std::string("unknown test label: ") + label);
    }
    return sol;
}

double error_sigma(const PolygonMesh& mesh, const ManufacturedSolution& sol,
                   const Eigen::VectorXd& stress_dofs, int k, const ErrorOptions& opt) {
    const int npts = (opt.edge_points > 0) ? opt.edge_points : k + 6;
    const auto rule = gauss_1d(std::min(20, npts));
    const GlobalDofMap map = number_dofs(mesh, k);
    double total = 0.0;
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const Vec2 n = mesh.edge_normal(e);
        const double len = mesh.edge_length(e);
        const long base = map.edge_block(e);
        double acc = 0.0;
        for (int q = 0; q < rule.size(); ++q) {
            const Vec2 x = mesh.edge_point(e, rule.points[q]);
            Vec2 th{0.0, 0.0};
            double sm = 1.0;
            for (int m = 0; m <= k; ++m) {
                th.x += stress_dofs[base + m] * sm;
                th.y += stress_dofs[base + (k + 1) + m] * sm;
                sm *= rule.points[q];
            }
            const Vec2 diff = traction(sol.stress(x), n) - th;
            acc += rule.weights[q] * kappa(sol.field, x) * dot(diff, diff);
        }
        total += len * (len / 2.0) * acc;
    }
    return std::sqrt(total);
}

double error_sigma_div(const PolygonMesh& mesh, const ManufacturedSolution& sol,
                       const Eigen::VectorXd& stress_dofs, int k, const ErrorOptions& opt) {
    const int degree = (opt.volume_degree > 0) ? opt.volume_degree : 2 * k + 8;
    const GlobalDofMap map = number_dofs(mesh, k);
    double total = 0.0;
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const Element element(mesh, c, k, degree, -1);
        const auto dofs = cell_stress_dofs(mesh, map, c);
        Eigen::VectorXd local(dofs.size());
        for (std::size_t i = 0; i < dofs.size(); ++i) local[i] = stress_dofs[dofs[i]];
        const Eigen::VectorXd div_coeffs = element.divergence_from_dofs(local);
        const ScalarBasis sb(k, element.geom());
        const auto rule = polygon_rule(element.geom(), degree);
        for (int q = 0; q < rule.size(); ++q) {
            const Vec2 dh = eval_vector_poly(sb, div_coeffs, rule.points[q]);
            const Vec2 diff = sol.divergence(rule.points[q]) - dh;
            total += rule.weights[q] * dot(diff, diff);
        }
    }
    return std::sqrt(total);
}

double error_u(const PolygonMesh& mesh, const ManufacturedSolution& sol,
               const Eigen::VectorXd& displacement, int k, const ErrorOptions& opt) {
    const int degree = (opt.volume_degree > 0) ? opt.volume_degree : 2 * k + 8;
    const GlobalDofMap map = number_dofs(mesh, k);
    const int nu = vector_basis_size(k);
    double total = 0.0;
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const CellGeometry geom = compute_cell_geometry(mesh, c);
        const ScalarBasis sb(k, geom);
        const auto rule = polygon_rule(geom, degree);
        const Eigen::VectorXd coeffs = displacement.segment(map.displacement_block(c), nu);
        for (int q = 0; q < rule.size(); ++q) {
            const Vec2 uh = eval_vector_poly(sb, coeffs, rule.points[q]);
            const Vec2 diff = sol.displacement(rule.points[q]) - uh;
            total += rule.weights[q] * dot(diff, diff);
        }
    }
    return std::sqrt(total);
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& levels, double exact_threshold) {
    std::vector<std::pair<double, double>> usable;
    for (const auto& [h, err] : levels)
        if (err > exact_threshold) usable.push_back({h, err});
    RateFit fit;
    if (usable.empty()) {
        fit.exact = true;
        return fit;
    }
    if (usable.size() < 2)
        throw std::invalid_argument("fit_rate needs at least 2 non-exact levels");
    // finest min(3, available) levels; input is ordered coarse -> fine
    const int use = std::min<std::size_t>(3, usable.size());
    const int start = static_cast<int>(usable.size()) - use;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = start; i < static_cast<int>(usable.size()); ++i) {
        const double lx = std::log(usable[i].first);
        const double ly = std::log(usable[i].second);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    fit.levels_used = use;
    fit.slope = (use * sxy - sx * sy) / (use * sxx - sx * sx);
    return fit;
}

double check_commuting_diagram(const PolygonMesh& mesh, const ManufacturedSolution& sol, int k) {
    const int degree = 2 * k + 8;
    double div_norm2 = 0.0;
    double worst = 0.0;
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const Element element(mesh, c, k, degree, k + 6);
        const auto& geom = element.geom();
        const auto rule = polygon_rule(geom, degree);
        const Eigen::VectorXd dofs = element.interpolate_stress(sol.stress, sol.divergence);
        const Eigen::VectorXd reconstructed = element.divergence_from_dofs(dofs);
        const Eigen::VectorXd projected = l2_project_Pk(sol.divergence, k, geom, rule);
        const ScalarBasis sb(k, geom);
        double cell_err2 = 0.0;
        for (int q = 0; q < rule.size(); ++q) {
            const Vec2 a = eval_vector_poly(sb, reconstructed, rule.points[q]);
            const Vec2 b = eval_vector_poly(sb, projected, rule.points[q]);
            const Vec2 d = sol.divergence(rule.points[q]);
            cell_err2 += rule.weights[q] * dot(a - b, a - b);
            div_norm2 += rule.weights[q] * dot(d, d);
        }
        worst = std::max(worst, std::sqrt(cell_err2));
    }
    const double div_norm = std::sqrt(div_norm2);
    return (div_norm > 1e-14) ? worst / div_norm : worst;
}

} // namespace hrvem
