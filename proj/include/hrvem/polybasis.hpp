#pragma once

#include "hrvem/mesh.hpp"
#include "hrvem/quadrature.hpp"

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace hrvem {

/// Exponent pairs (ax, ay) for total degree <= k, ordered by degree then by
/// descending x power: (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...
std::vector<std::array<int, 2>> monomial_exponents(int k);

inline int scalar_basis_size(int k) { return (k + 1) * (k + 2) / 2; }
inline int vector_basis_size(int k) { return (k + 1) * (k + 2); }

/// Scaled monomials m_a(x) = ((x-c)/h)^a on a cell; m_0 = 1 at the centroid
/// and all the others vanish there.
class ScalarBasis {
public:
    ScalarBasis(int degree, const CellGeometry& geom)
        : degree_(degree), center_(geom.centroid), h_(geom.diameter),
          exponents_(monomial_exponents(degree)) {}

    int degree() const { return degree_; }
    int size() const { return static_cast<int>(exponents_.size()); }
    double h() const { return h_; }
    Vec2 center() const { return center_; }
    const std::vector<std::array<int, 2>>& exponents() const { return exponents_; }

    double eval_one(int i, Vec2 x) const;
    /// points x size value matrix
    Eigen::MatrixXd eval(const std::vector<Vec2>& pts) const;
    /// coefficient-level d/dx (and d/dy): size x size, exact; the result lives
    /// in the degree-(k-1) prefix of the same basis.
    Eigen::MatrixXd ddx() const;
    Eigen::MatrixXd ddy() const;

private:
    int degree_;
    Vec2 center_;
    double h_;
    std::vector<std::array<int, 2>> exponents_;
};

/// Vector polynomial basis of P_k(E)^2: first all (m_a, 0), then all (0, m_a).
/// Coefficient vectors have length vector_basis_size(k).

/// Rigid body motions (1,0), (0,1), (x-c)^perp as coefficient columns in the
/// degree-k vector basis (k >= 1).
Eigen::MatrixXd rm_coefficients(int k, const CellGeometry& geom);

/// L2-orthogonal complement of RM(E) inside P_k(E)^2, built numerically.
/// Columns are coefficient vectors in the degree-k vector basis, mutually
/// L2(E)-orthogonal, each scaled so that ||psi||^2_{L2(E)} = |E|.
struct RMPerpBasis {
    int k = 0;
    int m_k = 0;
    Eigen::MatrixXd coeffs;  // vector_basis_size(k) x m_k
};

/// Requires a rule exact to degree 2k; any such rule yields the same basis
/// up to roundoff. Throws if the monomial Gram matrix is numerically singular.
RMPerpBasis build_rm_perp(int k, const CellGeometry& geom, const QuadratureRule& rule);

/// Symmetric gradient at coefficient level: maps coefficients of p in
/// P_deg(E)^2 to Voigt strain coefficients (e11, e22, 2 e12) over the
/// degree-(deg-1) scalar basis.
struct StrainOperator {
    int p_degree = 0;
    Eigen::MatrixXd exx, eyy, gxy;  // scalar_basis_size(deg-1) x vector_basis_size(deg)
};

StrainOperator strain_operator(int p_degree, const CellGeometry& geom);

/// Scalar mass matrix int_E m_i m_j by quadrature.
Eigen::MatrixXd scalar_mass(const ScalarBasis& basis, const QuadratureRule& rule);

/// Vector L2 projection onto P_k(E)^2; reproduces polynomials of degree <= k.
Eigen::VectorXd l2_project_Pk(const std::function<Vec2(Vec2)>& f, int k,
                              const CellGeometry& geom, const QuadratureRule& rule);

/// Evaluate a coefficient vector of the degree-k vector basis at a point.
Vec2 eval_vector_poly(const ScalarBasis& basis, const Eigen::VectorXd& coeffs, Vec2 x);

/// Edge monomials {1, s, ..., s^k} with s in [-1,1] measured from the
/// lower-global-id vertex. Values matrix: one row per sample point.
Eigen::MatrixXd edge_monomial_values(int k, const std::vector<double>& s);

/// Closed-form edge mass matrix: int_e s^i s^j ds for an edge of length len.
Eigen::MatrixXd edge_monomial_mass(int k, double len);

} // namespace hrvem
