#include "hrvem/assembly.hpp"

#include <Eigen/SparseLU>

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace hrvem {

GlobalDofMap number_dofs(const PolygonMesh& mesh, int k) {
    if (k < 1) throw std::invalid_argument("number_dofs: k >= 1 required");
    GlobalDofMap map;
    map.k = k;
    map.n_edges = mesh.num_edges();
    map.n_cells = mesh.num_cells();
    map.m_k = (k + 1) * (k + 2) - 3;
    map.n_stress = static_cast<long>(2 * (k + 1)) * map.n_edges +
                   static_cast<long>(map.m_k) * map.n_cells;
    map.n_displacement = static_cast<long>((k + 1) * (k + 2)) * map.n_cells;
    return map;
}

std::vector<long> cell_stress_dofs(const PolygonMesh& mesh, const GlobalDofMap& map, int cell) {
    std::vector<long> dofs;
    const int per_edge = 2 * (map.k + 1);
    dofs.reserve(per_edge * mesh.cell_edges[cell].size() + map.m_k);
    for (const EdgeUse& use : mesh.cell_edges[cell]) {
        const long base = map.edge_block(use.edge);
        for (int i = 0; i < per_edge; ++i) dofs.push_back(base + i);
    }
    const long gbase = map.gamma_block(cell);
    for (int i = 0; i < map.m_k; ++i) dofs.push_back(gbase + i);
    return dofs;
}

SaddleSystem assemble(const PolygonMesh& mesh, const ElasticityField& field, int k,
                      const std::function<Vec2(Vec2)>& f,
                      const std::function<Vec2(Vec2)>& g,
                      const AssemblyOptions& options) {
    SaddleSystem system;
    system.dofs = number_dofs(mesh, k);
    const GlobalDofMap& map = system.dofs;
    const long total = map.total();
    system.rhs = Eigen::VectorXd::Zero(total);

    std::vector<Eigen::Triplet<double>> triplets;
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const Element element = (options.volume_degree > 0 || options.edge_points > 0)
            ? Element(mesh, c, k,
                      options.volume_degree > 0 ? options.volume_degree : 2 * k + 4,
                      options.edge_points > 0 ? options.edge_points : k + 3)
            : Element(mesh, c, k);
        const LocalMatrices mats = element.local_matrices(field);
        system.symmetry_deviation = std::max(system.symmetry_deviation, mats.symmetry_deviation);

        const std::vector<long> sdofs = cell_stress_dofs(mesh, map, c);
        const long ubase = map.n_stress + map.displacement_block(c);
        const int ns = static_cast<int>(sdofs.size());
        const int nu = element.num_displacement_dofs();

        for (int i = 0; i < ns; ++i)
            for (int j = 0; j < ns; ++j)
                if (mats.ah(i, j) != 0.0)
                    triplets.emplace_back(sdofs[i], sdofs[j], mats.ah(i, j));
        for (int i = 0; i < ns; ++i)
            for (int j = 0; j < nu; ++j)
                if (mats.b(i, j) != 0.0) {
                    triplets.emplace_back(sdofs[i], ubase + j, mats.b(i, j));
                    triplets.emplace_back(ubase + j, sdofs[i], mats.b(i, j));
                }

        if (g) {
            const Eigen::VectorXd bc = element.dirichlet_vector(g);
            for (int i = 0; i < ns; ++i) system.rhs[sdofs[i]] += bc[i];
        }
        if (f) {
            const Eigen::VectorXd load = element.load_vector(f);
            for (int j = 0; j < nu; ++j) system.rhs[ubase + j] -= load[j];
        }
    }

    system.matrix.resize(total, total);
    system.matrix.setFromTriplets(triplets.begin(), triplets.end());
    system.matrix.makeCompressed();
    return system;
}

SolveResult solve(const SaddleSystem& system, double tol) {
    SolveResult result;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(system.matrix);
    lu.factorize(system.matrix);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("saddle system factorization failed (mesh or BC defect): " +
                                 lu.lastErrorMessage());
    const Eigen::VectorXd x = lu.solve(system.rhs);
    const double rhs_norm = system.rhs.norm();
    const double res = (system.matrix * x - system.rhs).norm();
    if (rhs_norm > 0.0) {
        result.residual = res / rhs_norm;
        result.converged = result.residual <= tol;
    } else {
        result.residual = res;
        result.converged = res <= 1e-12;
    }
    if (!result.converged) {
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "solver residual %.3e above tolerance %.3e (ill-conditioned system)",
                      result.residual, tol);
        result.message = buf;
    }
    result.stress = x.head(system.dofs.n_stress);
    result.displacement = x.tail(system.dofs.n_displacement);
    return result;
}

void write_matrix_market(const SaddleSystem& system, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    long nnz_lower = 0;
    for (int col = 0; col < system.matrix.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(system.matrix, col); it; ++it)
            if (it.row() >= it.col()) ++nnz_lower;
    out << system.matrix.rows() << " " << system.matrix.cols() << " " << nnz_lower << "\n";
    char buf[96];
    for (int col = 0; col < system.matrix.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(system.matrix, col); it; ++it) {
            if (it.row() < it.col()) continue;
            std::snprintf(buf, sizeof buf, "%ld %ld %.17g\n", static_cast<long>(it.row() + 1),
                          static_cast<long>(it.col() + 1), it.value());
            out << buf;
        }
}

} // namespace hrvem
