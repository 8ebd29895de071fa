#pragma once

#include "hrvem/assembly.hpp"
#include "hrvem/material.hpp"
#include "hrvem/mesh.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hrvem {

/// Analytic benchmark problem: displacement u, stress sigma = C eps(u) in
/// Voigt form, body force f = -div sigma, boundary data g = u on the
/// boundary, and the material field it belongs to.
struct ManufacturedSolution {
    char label = 'a';
    ElasticityField field;
    std::function<Vec2(Vec2)> displacement;
    std::function<Eigen::Vector3d(Vec2)> stress;
    std::function<Vec2(Vec2)> body_force;
    std::function<Vec2(Vec2)> divergence;  // div sigma = -f
    bool zero_body_force = false;
    bool zero_boundary_data = false;
};

/// label in {'a','b','c'}: polynomial solution with f = 0, trigonometric
/// solution with homogeneous boundary data, and the variable-coefficient
/// variant of the first.
ManufacturedSolution make_test(char label);

struct ErrorOptions {
    int edge_points = -1;    // default k+6 Gauss points per edge
    int volume_degree = -1;  // default 2k+8
};

/// Weighted traction-jump norm over all mesh edges:
/// sqrt( sum_e |e| int_e kappa |(sigma - sigma_h) n|^2 ).
double error_sigma(const PolygonMesh& mesh, const ManufacturedSolution& sol,
                   const Eigen::VectorXd& stress_dofs, int k, const ErrorOptions& opt = {});

/// L2 norm of div sigma - div sigma_h with the discrete divergence
/// reconstructed per cell from the DOFs.
double error_sigma_div(const PolygonMesh& mesh, const ManufacturedSolution& sol,
                       const Eigen::VectorXd& stress_dofs, int k, const ErrorOptions& opt = {});

/// L2 displacement error.
double error_u(const PolygonMesh& mesh, const ManufacturedSolution& sol,
               const Eigen::VectorXd& displacement, int k, const ErrorOptions& opt = {});

struct RateFit {
    bool exact = false;   // all usable levels at machine precision
    double slope = 0.0;
    int levels_used = 0;
};

/// Least-squares slope of log(error) vs log(h) over the finest min(3, n)
/// levels; levels with error <= exact_threshold are excluded and, if none
/// remain, the fit is flagged exact.
RateFit fit_rate(const std::vector<std::pair<double, double>>& levels,
                 double exact_threshold = 1e-12);

/// Max over cells of || div(I_E sigma) - P_k(div sigma) ||_{L2(E)}, divided
/// by ||div sigma||_{L2} when that is nonzero.
double check_commuting_diagram(const PolygonMesh& mesh, const ManufacturedSolution& sol, int k);

} // namespace hrvem
