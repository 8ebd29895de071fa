#pragma once

#include "hrvem/geometry.hpp"

#include <Eigen/Dense>

#include <functional>

namespace hrvem {

/// Plane-strain elasticity in Voigt form. Strain vectors use engineering
/// shear (e11, e22, 2*e12), stress vectors are (s11, s22, s12), so the
/// tensor contraction s:e equals the Voigt dot product.
struct ElasticityField {
    std::function<Eigen::Matrix3d(Vec2)> stiffness;  // Voigt C(x)
    bool spatially_constant = true;

    Eigen::Matrix3d stiffness_at(Vec2 x) const { return stiffness(x); }
    Eigen::Matrix3d compliance_at(Vec2 x) const { return stiffness(x).inverse(); }
};

/// sigma = 2 mu eps + lambda tr(eps) I. Requires mu > 0, lambda >= 0.
ElasticityField plane_strain_isotropic(double lambda, double mu);

/// lambda(x) = mu(x) = 1 - |x - (1/2,1/2)|^2; positive on the closed unit
/// square (value 1/2 at the corners).
ElasticityField variable_field_test_c();

/// Error-norm weight: half the trace of the Voigt compliance matrix at x.
double kappa(const ElasticityField& field, Vec2 x);

/// Traction of a Voigt stress vector against a unit normal.
inline Vec2 traction(const Eigen::Vector3d& stress, const Vec2& n) {
    return {stress[0] * n.x + stress[2] * n.y, stress[2] * n.x + stress[1] * n.y};
}

} // namespace hrvem
