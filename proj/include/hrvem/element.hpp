#pragma once

#include "hrvem/material.hpp"
#include "hrvem/mesh.hpp"
#include "hrvem/polybasis.hpp"
#include "hrvem/quadrature.hpp"

#include <Eigen/Dense>

#include <functional>

namespace hrvem {

/// Cell-local view of one mesh edge. `a` is the lower-global-id endpoint,
/// where the edge coordinate s = -1 sits; `normal` is the global unit normal.
/// sign = +1 when the cell outward normal equals the global normal.
struct LocalEdge {
    int edge_id = -1;
    double sign = 1.0;
    Vec2 a, b;
    double length = 0.0;
    Vec2 normal;
    bool boundary = false;
};

struct LocalMatrices {
    Eigen::MatrixXd pi;  // stress DOFs -> coefficients of p_{k+1} (RM part pinned to zero)
    Eigen::MatrixXd se;  // stabilization, symmetric PSD
    Eigen::MatrixXd ah;  // consistency + stabilization, SPD
    Eigen::MatrixXd b;   // divergence coupling, stress DOFs x displacement DOFs
    double symmetry_deviation = 0.0;  // of ah before symmetrization
};

/// Per-cell machinery of the mixed scheme.
///
/// Stress DOF layout: for each edge (cell-local order) 2(k+1) coefficients
/// of the traction w.r.t. the global edge normal, component 1 monomials
/// {1..s^k} first, then component 2; after all edge blocks the m_k
/// divergence coefficients w.r.t. the RM-perp basis.
class Element {
public:
    Element(const PolygonMesh& mesh, int cell, int k);
    /// Custom quadrature: volume rule degree and edge Gauss point count
    /// (defaults are 2k+4 and k+3).
    Element(const PolygonMesh& mesh, int cell, int k, int volume_degree, int edge_points);

    int k() const { return k_; }
    int cell() const { return cell_; }
    int num_edges() const { return static_cast<int>(edges_.size()); }
    const CellGeometry& geom() const { return geom_; }
    const std::vector<LocalEdge>& edges() const { return edges_; }
    const RMPerpBasis& psi() const { return psi_; }
    const QuadratureRule& volume_rule() const { return vol_rule_; }

    int m_k() const { return psi_.m_k; }
    int num_stress_dofs() const { return 2 * (k_ + 1) * num_edges() + psi_.m_k; }
    int num_displacement_dofs() const { return vector_basis_size(k_); }

    int edge_block(int local_edge) const { return 2 * (k_ + 1) * local_edge; }
    int edge_dof(int local_edge, int comp, int mono) const {
        return edge_block(local_edge) + comp * (k_ + 1) + mono;
    }
    int gamma_block() const { return 2 * (k_ + 1) * num_edges(); }

    /// DOFs -> coefficients of div tau in the degree-k vector basis.
    /// The RM part comes from boundary integrals of the DOF tractions, the
    /// RM-perp part directly from the gamma block.
    const Eigen::MatrixXd& divergence_matrix() const { return div_matrix_; }
    Eigen::VectorXd divergence_from_dofs(const Eigen::VectorXd& dofs) const {
        return div_matrix_ * dofs;
    }

    /// Energy projector onto C eps(P_{k+1}): DOFs -> p_{k+1} coefficients.
    Eigen::MatrixXd projector(const ElasticityField& field) const;
    /// Boundary-traction stabilization of the (Id - Pi) part.
    Eigen::MatrixXd stabilization(const ElasticityField& field, const Eigen::MatrixXd& pi) const;
    /// All local matrices in one pass (shares the projector Gram).
    LocalMatrices local_matrices(const ElasticityField& field) const;

    Eigen::VectorXd load_vector(const std::function<Vec2(Vec2)>& f) const;
    /// Boundary term of the first discrete equation for displacement data g;
    /// zero except on this cell's boundary-edge DOFs.
    Eigen::VectorXd dirichlet_vector(const std::function<Vec2(Vec2)>& g) const;

    /// Canonical interpolation: edge blocks match the traction moments of
    /// sigma, gamma block the RM-perp moments of div sigma.
    Eigen::VectorXd interpolate_stress(const std::function<Eigen::Vector3d(Vec2)>& sigma,
                                       const std::function<Vec2(Vec2)>& div_sigma) const;

private:
    void build_divergence_matrix();
    /// Gram of C eps(p_i) : eps(p_j) over P_{k+1}^2 and the DOF right side of
    /// the projector system.
    void projector_system(const ElasticityField& field, Eigen::MatrixXd& gram,
                          Eigen::MatrixXd& rhs) const;
    Eigen::MatrixXd solve_projector(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& rhs) const;

    int cell_ = -1;
    int k_ = 1;
    CellGeometry geom_;
    std::vector<LocalEdge> edges_;
    QuadratureRule vol_rule_;
    QuadratureRule1D edge_rule_;
    RMPerpBasis psi_;
    Eigen::MatrixXd div_matrix_;
};

} // namespace hrvem
