#pragma once

#include "hrvem/element.hpp"
#include "hrvem/material.hpp"
#include "hrvem/mesh.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <string>
#include <vector>

namespace hrvem {

/// Global numbering: shared per-edge traction blocks first (by edge id),
/// then per-cell divergence blocks; displacement blocks per cell follow in
/// their own index space appended after all stress DOFs.
struct GlobalDofMap {
    int k = 1;
    int n_edges = 0;
    int n_cells = 0;
    int m_k = 0;
    long n_stress = 0;
    long n_displacement = 0;

    long edge_block(int e) const { return static_cast<long>(2 * (k + 1)) * e; }
    long gamma_block(int c) const {
        return static_cast<long>(2 * (k + 1)) * n_edges + static_cast<long>(m_k) * c;
    }
    long displacement_block(int c) const {
        return static_cast<long>((k + 1) * (k + 2)) * c;  // within the u space
    }
    long total() const { return n_stress + n_displacement; }
};

GlobalDofMap number_dofs(const PolygonMesh& mesh, int k);

/// Global stress DOF ids of one cell, ordered to match Element's local
/// layout (edge blocks in cell-local edge order, then the gamma block).
std::vector<long> cell_stress_dofs(const PolygonMesh& mesh, const GlobalDofMap& map, int cell);

struct SaddleSystem {
    Eigen::SparseMatrix<double> matrix;  // [[A, B^T], [B, 0]], symmetric
    Eigen::VectorXd rhs;                 // [dirichlet terms; -(f, v)]
    GlobalDofMap dofs;
    double symmetry_deviation = 0.0;     // max local deviation before averaging
};

struct AssemblyOptions {
    int volume_degree = -1;  // -1: per-element default 2k+4
    int edge_points = -1;    // -1: default k+3
};

/// f and g may be null for zero body force / boundary data.
SaddleSystem assemble(const PolygonMesh& mesh, const ElasticityField& field, int k,
                      const std::function<Vec2(Vec2)>& f,
                      const std::function<Vec2(Vec2)>& g,
                      const AssemblyOptions& options = {});

struct SolveResult {
    Eigen::VectorXd stress;
    Eigen::VectorXd displacement;
    double residual = 0.0;  // relative, or absolute for zero right sides
    bool converged = false;
    std::string message;
};

/// Direct sparse factorization of the saddle system. Throws on a singular
/// factorization; an unmet residual is reported in the result.
SolveResult solve(const SaddleSystem& system, double tol = 1e-10);

/// Coordinate-format dump (1-based, lower triangle, symmetric header).
void write_matrix_market(const SaddleSystem& system, const std::string& path);

} // namespace hrvem
