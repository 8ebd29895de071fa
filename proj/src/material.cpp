#include "hrvem/material.hpp"

#include <stdexcept>

namespace hrvem {

ElasticityField plane_strain_isotropic(double lambda, double mu) {
    if (mu <= 0.0 || lambda < 0.0)
        throw std::invalid_argument("plane_strain_isotropic: need mu > 0 and lambda >= 0");
    Eigen::Matrix3d c;
    c << 2.0 * mu + lambda, lambda, 0.0,
         lambda, 2.0 * mu + lambda, 0.0,
         0.0, 0.0, mu;
    ElasticityField field;
    field.stiffness = [c](Vec2) { return c; };
    field.spatially_constant = true;
    return field;
}

ElasticityField variable_field_test_c() {
    ElasticityField field;
    field.stiffness = [](Vec2 x) {
        const double dx = x.x - 0.5, dy = x.y - 0.5;
        const double m = 1.0 - (dx * dx + dy * dy);  // lambda = mu = m
        Eigen::Matrix3d c;
        c << 3.0 * m, m, 0.0,
             m, 3.0 * m, 0.0,
             0.0, 0.0, m;
        return c;
    };
    field.spatially_constant = false;
    return field;
}

double kappa(const ElasticityField& field, Vec2 x) {
    return 0.5 * field.compliance_at(x).trace();
}

} // namespace hrvem
