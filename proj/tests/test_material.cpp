#include "hrvem/material.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace hrvem;

namespace {

double rand_unit(std::mt19937_64& rng) {
    return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
}

} // namespace

TEST_CASE("plane strain stiffness") {
    const ElasticityField field = plane_strain_isotropic(1.0, 1.0);
    const Eigen::Matrix3d c = field.stiffness_at({0.3, 0.4});

    // eps = I (Voigt strain (1,1,0)) -> sigma = 4 I
    const Eigen::Vector3d s1 = c * Eigen::Vector3d{1, 1, 0};
    CHECK(s1[0] == doctest::Approx(4.0));
    CHECK(s1[1] == doctest::Approx(4.0));
    CHECK(s1[2] == doctest::Approx(0.0));

    // eps12 = 1 (engineering shear 2) -> sigma12 = 2
    const Eigen::Vector3d s2 = c * Eigen::Vector3d{0, 0, 2};
    CHECK(s2[2] == doctest::Approx(2.0));

    CHECK_THROWS(plane_strain_isotropic(1.0, 0.0));
    CHECK_THROWS(plane_strain_isotropic(-0.5, 1.0));
}

TEST_CASE("compliance inverts the stiffness") {
    std::mt19937_64 rng(3);
    const ElasticityField field = plane_strain_isotropic(1.3, 0.8);
    for (int t = 0; t < 20; ++t) {
        const Eigen::Vector3d eps{rand_unit(rng), rand_unit(rng), rand_unit(rng)};
        const Vec2 x{0.5 * rand_unit(rng) + 0.5, 0.5 * rand_unit(rng) + 0.5};
        const Eigen::Vector3d back =
            field.compliance_at(x) * (field.stiffness_at(x) * eps);
        CHECK((back - eps).cwiseAbs().maxCoeff() <= 1e-13);
    }
    const Eigen::Matrix3d prod =
        field.stiffness_at({0.1, 0.9}) * field.compliance_at({0.1, 0.9});
    CHECK((prod - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("variable coefficient field") {
    const ElasticityField field = variable_field_test_c();
    // at the center lambda = mu = 1
    const Eigen::Matrix3d cc = field.stiffness_at({0.5, 0.5});
    CHECK(cc(0, 0) == doctest::Approx(3.0));
    CHECK(cc(2, 2) == doctest::Approx(1.0));
    // at a corner the squared distance is 1/2
    const Eigen::Matrix3d ccorner = field.stiffness_at({0.0, 0.0});
    CHECK(ccorner(2, 2) == doctest::Approx(0.5));

    std::mt19937_64 rng(17);
    for (int t = 0; t < 100; ++t) {
        const Vec2 x{0.5 * rand_unit(rng) + 0.5, 0.5 * rand_unit(rng) + 0.5};
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(field.stiffness_at(x));
        CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("kappa weight") {
    // lambda = mu = 1: D has diagonal (3/8, 3/8, 1), kappa = 0.875
    const ElasticityField field = plane_strain_isotropic(1.0, 1.0);
    CHECK(kappa(field, {0.2, 0.7}) == doctest::Approx(0.875).epsilon(1e-13));

    // scaling C by 2 halves kappa
    const ElasticityField doubled = plane_strain_isotropic(2.0, 2.0);
    CHECK(kappa(doubled, {0.2, 0.7}) == doctest::Approx(0.4375).epsilon(1e-13));

    // variable field at the center matches the constant-field value
    CHECK(kappa(variable_field_test_c(), {0.5, 0.5}) ==
          doctest::Approx(kappa(field, {0.5, 0.5})).epsilon(1e-13));
}

TEST_CASE("isotropy is frame consistent") {
    std::mt19937_64 rng(29);
    const ElasticityField field = plane_strain_isotropic(1.7, 0.6);
    const Eigen::Matrix3d c = field.stiffness_at({0, 0});
    for (int t = 0; t < 10; ++t) {
        const double theta = M_PI * rand_unit(rng);
        const double co = std::cos(theta), si = std::sin(theta);
        Eigen::Matrix2d rot;
        rot << co, -si, si, co;
        Eigen::Matrix2d eps;
        const double a = rand_unit(rng), b = rand_unit(rng), d = rand_unit(rng);
        eps << a, d, d, b;

        auto to_voigt_strain = [](const Eigen::Matrix2d& e) {
            return Eigen::Vector3d{e(0, 0), e(1, 1), 2.0 * e(0, 1)};
        };
        auto stress_matrix = [](const Eigen::Vector3d& s) {
            Eigen::Matrix2d m;
            m << s[0], s[2], s[2], s[1];
            return m;
        };
        const Eigen::Matrix2d eps_rot = rot * eps * rot.transpose();
        const Eigen::Matrix2d lhs = stress_matrix(c * to_voigt_strain(eps_rot));
        const Eigen::Matrix2d rhs = rot * stress_matrix(c * to_voigt_strain(eps)) * rot.transpose();
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
    }
}
