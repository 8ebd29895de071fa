#include "hrvem/element.hpp"

#include "hrvem/verification.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <random>

using namespace hrvem;

namespace {

PolygonMesh unit_square_mesh() {
    return PolygonMesh::from_cells({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2, 3}});
}

double rand_unit(std::mt19937_64& rng) {
    return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
}

// DOFs realizing a prescribed constant outward traction field phi on every
// edge of the element (component values w.r.t. the global normal).
Eigen::VectorXd dofs_for_constant_outward_traction(const Element& el, Vec2 phi) {
    Eigen::VectorXd dofs = Eigen::VectorXd::Zero(el.num_stress_dofs());
    for (int le = 0; le < el.num_edges(); ++le) {
        dofs[el.edge_dof(le, 0, 0)] = el.edges()[le].sign * phi.x;
        dofs[el.edge_dof(le, 1, 0)] = el.edges()[le].sign * phi.y;
    }
    return dofs;
}

// stress function and divergence of tau = C eps(p) for a polynomial p and
// constant C, built from the exact coefficient-level operators
struct PolyStress {
    std::function<Eigen::Vector3d(Vec2)> sigma;
    std::function<Vec2(Vec2)> divergence;
};

PolyStress poly_stress(const Element& el, const ElasticityField& field,
                       const Eigen::VectorXd& p) {
    const auto& geom = el.geom();
    const int k = el.k();
    const StrainOperator op = strain_operator(k + 1, geom);
    const Eigen::Matrix3d c = field.stiffness_at(geom.centroid);
    const Eigen::VectorXd exx = op.exx * p, eyy = op.eyy * p, gxy = op.gxy * p;
    const Eigen::VectorXd s11 = c(0, 0) * exx + c(0, 1) * eyy + c(0, 2) * gxy;
    const Eigen::VectorXd s22 = c(1, 0) * exx + c(1, 1) * eyy + c(1, 2) * gxy;
    const Eigen::VectorXd s12 = c(2, 0) * exx + c(2, 1) * eyy + c(2, 2) * gxy;
    const ScalarBasis sbk(k, geom);
    const Eigen::MatrixXd dx = sbk.ddx(), dy = sbk.ddy();
    const Eigen::VectorXd d1 = dx * s11 + dy * s12;
    const Eigen::VectorXd d2 = dx * s12 + dy * s22;
    PolyStress out;
    out.sigma = [sbk, s11, s22, s12](Vec2 x) {
        Eigen::Vector3d s = Eigen::Vector3d::Zero();
        for (int i = 0; i < sbk.size(); ++i) {
            const double m = sbk.eval_one(i, x);
            s[0] += s11[i] * m;
            s[1] += s22[i] * m;
            s[2] += s12[i] * m;
        }
        return s;
    };
    out.divergence = [sbk, d1, d2](Vec2 x) {
        Vec2 d{0, 0};
        for (int i = 0; i < sbk.size(); ++i) {
            const double m = sbk.eval_one(i, x);
            d.x += d1[i] * m;
            d.y += d2[i] * m;
        }
        return d;
    };
    return out;
}

} // namespace

TEST_CASE("dof layout counts") {
    const PolygonMesh mesh = generate_mesh(MeshFamily::PolyU, 4, 9);
    for (int k : {1, 2}) {
        for (int c = 0; c < mesh.num_cells(); ++c) {
            const Element el(mesh, c, k);
            const int ne = el.num_edges();
            CHECK(el.num_stress_dofs() == 2 * (k + 1) * ne + (k + 1) * (k + 2) - 3);
            CHECK(el.num_displacement_dofs() == (k + 1) * (k + 2));
        }
    }
    const Element sq(unit_square_mesh(), 0, 1);
    CHECK(sq.num_stress_dofs() == 19);
    CHECK(sq.num_displacement_dofs() == 6);
}

TEST_CASE("divergence reconstruction") {
    const PolygonMesh mesh = unit_square_mesh();
    const Element el(mesh, 0, 1);

    SUBCASE("identity tensor has zero divergence") {
        // traction phi = n: on each edge the outward traction equals the
        // outward normal, i.e. tau = I
        Eigen::VectorXd dofs = Eigen::VectorXd::Zero(el.num_stress_dofs());
        for (int le = 0; le < el.num_edges(); ++le) {
            const Vec2 n = el.edges()[le].normal;  // global; dof values are global too
            dofs[el.edge_dof(le, 0, 0)] = n.x;
            dofs[el.edge_dof(le, 1, 0)] = n.y;
        }
        CHECK(el.divergence_from_dofs(dofs).cwiseAbs().maxCoeff() <= 1e-14);
    }

    SUBCASE("constant outward traction (1,0) on the unit square") {
        const Eigen::VectorXd dofs = dofs_for_constant_outward_traction(el, {1.0, 0.0});
        const Eigen::VectorXd div = el.divergence_from_dofs(dofs);
        // alpha = perimeter/area * (1,0) = (4,0), beta = 0, gamma = 0
        const int nb = scalar_basis_size(1);
        CHECK(div[0] == doctest::Approx(4.0).epsilon(1e-13));
        for (int i = 1; i < nb; ++i) CHECK(std::abs(div[i]) <= 1e-13);
        for (int i = 0; i < nb; ++i) CHECK(std::abs(div[nb + i]) <= 1e-13);
    }

    SUBCASE("divergence-free analytic stress") {
        const ManufacturedSolution test_a = [] {
            ManufacturedSolution s;
            s.stress = [](Vec2 p) {
                return Eigen::Vector3d{6 * (p.x * p.x - p.y * p.y), 6 * (p.y * p.y - p.x * p.x),
                                       -12 * p.x * p.y};
            };
            s.divergence = [](Vec2) { return Vec2{0, 0}; };
            return s;
        }();
        const PolygonMesh poly = generate_mesh(MeshFamily::PolyU, 4, 2);
        for (int c = 0; c < poly.num_cells(); ++c) {
            const Element cell(poly, c, 2);
            const Eigen::VectorXd dofs = cell.interpolate_stress(test_a.stress, test_a.divergence);
            CHECK(cell.divergence_from_dofs(dofs).cwiseAbs().maxCoeff() <= 1e-11);
        }
    }
}

TEST_CASE("projector reproduces its range") {
    std::mt19937_64 rng(31);
    const ElasticityField field = plane_strain_isotropic(1.0, 1.0);
    for (MeshFamily family : {MeshFamily::ConcQuadS, MeshFamily::HexS}) {
        const PolygonMesh mesh = generate_mesh(family, 2, 4);
        for (int k : {1, 2}) {
            const Element el(mesh, 0, k);
            const Eigen::MatrixXd pi = el.projector(field);
            const StrainOperator op = strain_operator(k + 1, el.geom());

            SUBCASE("zero DOFs give zero coefficients") {
                const Eigen::VectorXd z =
                    pi * Eigen::VectorXd::Zero(el.num_stress_dofs());
                CHECK(z.cwiseAbs().maxCoeff() == 0.0);
            }

            Eigen::VectorXd p(vector_basis_size(k + 1));
            for (int i = 0; i < p.size(); ++i) p[i] = rand_unit(rng);
            const PolyStress ps = poly_stress(el, field, p);
            const Eigen::VectorXd dofs = el.interpolate_stress(ps.sigma, ps.divergence);
            const Eigen::VectorXd p_rec = pi * dofs;
            const double scale = (op.exx * p).norm() + (op.eyy * p).norm() + (op.gxy * p).norm();
            CHECK((op.exx * (p_rec - p)).norm() <= 1e-11 * scale);
            CHECK((op.eyy * (p_rec - p)).norm() <= 1e-11 * scale);
            CHECK((op.gxy * (p_rec - p)).norm() <= 1e-11 * scale);
        }
    }
}

TEST_CASE("constant C, k=1: reconstruction range spans all linear symmetric tensors") {
    const Element el(unit_square_mesh(), 0, 1);
    const StrainOperator op = strain_operator(2, el.geom());
    // stack Voigt strain coefficient maps; C constant and invertible does not
    // change the rank
    Eigen::MatrixXd stacked(3 * op.exx.rows(), op.exx.cols());
    stacked << op.exx, op.eyy, op.gxy;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(stacked);
    CHECK(lu.rank() == 9);  // dim of degree-<=1 symmetric tensor fields
}

TEST_CASE("stabilization") {
    std::mt19937_64 rng(37);
    const ElasticityField field = plane_strain_isotropic(1.0, 1.0);

    SUBCASE("vanishes on the projector range") {
        const PolygonMesh mesh = generate_mesh(MeshFamily::HexS, 2);
        for (int k : {1, 2}) {
            const Element el(mesh, 1, k);
            const LocalMatrices mats = el.local_matrices(field);
            Eigen::VectorXd p(vector_basis_size(k + 1));
            for (int i = 0; i < p.size(); ++i) p[i] = rand_unit(rng);
            const PolyStress ps = poly_stress(el, field, p);
            const Eigen::VectorXd dofs = el.interpolate_stress(ps.sigma, ps.divergence);
            const double scale = 1.0 + dofs.cwiseAbs().maxCoeff();
            CHECK((mats.se * dofs).cwiseAbs().maxCoeff() <= 1e-11 * scale);
        }
    }

    SUBCASE("positive semidefinite on random cells") {
        const PolygonMesh mesh = generate_mesh(MeshFamily::PolyU, 3, 13);
        for (int c = 0; c < mesh.num_cells(); ++c) {
            const Element el(mesh, c, 1);
            const LocalMatrices mats = el.local_matrices(field);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mats.se, Eigen::EigenvaluesOnly);
            CHECK(es.eigenvalues().minCoeff() >= -1e-12);
        }
    }

    SUBCASE("patch test is scale invariant") {
        for (double scale : {1.0, 2.0}) {
            std::vector<Vec2> verts{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.0}};
            PolygonMesh mesh = generate_mesh(MeshFamily::ConcQuadS, 2);
            for (auto& v : mesh.vertices) {
                v.x *= scale;
                v.y *= scale;
            }
            const auto [stress_err, u_err] = patch_test(mesh, 1);
            CHECK(stress_err <= 1e-9);
            CHECK(u_err <= 1e-10 * scale * scale);
        }
    }
}

TEST_CASE("local stress matrix") {
    const ElasticityField field = plane_strain_isotropic(1.0, 1.0);
    const Element el(unit_square_mesh(), 0, 1);
    const LocalMatrices mats = el.local_matrices(field);

    SUBCASE("dimensions and SPD") {
        REQUIRE(mats.ah.rows() == 19);
        REQUIRE(mats.ah.cols() == 19);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mats.ah, Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
        CHECK(mats.symmetry_deviation <= 1e-12 * (1.0 + mats.ah.cwiseAbs().maxCoeff()));
    }

    SUBCASE("consistency on the projector range") {
        std::mt19937_64 rng(41);
        for (int trial = 0; trial < 5; ++trial) {
            Eigen::VectorXd p(vector_basis_size(2)), q(vector_basis_size(2));
            for (int i = 0; i < p.size(); ++i) { p[i] = rand_unit(rng); q[i] = rand_unit(rng); }
            const PolyStress pp = poly_stress(el, field, p);
            const PolyStress qq = poly_stress(el, field, q);
            const Eigen::VectorXd dp = el.interpolate_stress(pp.sigma, pp.divergence);
            const Eigen::VectorXd dq = el.interpolate_stress(qq.sigma, qq.divergence);
            // exact energy: int_E C eps(p) : eps(q) by high-order quadrature
            const auto rule = polygon_rule(el.geom(), 8);
            const Eigen::Matrix3d c = field.stiffness_at({0, 0});
            const StrainOperator op = strain_operator(2, el.geom());
            const ScalarBasis sbk(1, el.geom());
            double exact = 0.0;
            for (int iq = 0; iq < rule.size(); ++iq) {
                Eigen::Vector3d ep = Eigen::Vector3d::Zero(), eq = Eigen::Vector3d::Zero();
                for (int i = 0; i < sbk.size(); ++i) {
                    const double m = sbk.eval_one(i, rule.points[iq]);
                    ep += m * Eigen::Vector3d{(op.exx * p)[i], (op.eyy * p)[i], (op.gxy * p)[i]};
                    eq += m * Eigen::Vector3d{(op.exx * q)[i], (op.eyy * q)[i], (op.gxy * q)[i]};
                }
                exact += rule.weights[iq] * (c * ep).dot(eq);
            }
            CHECK(dp.dot(mats.ah * dq) == doctest::Approx(exact).epsilon(1e-10));
        }
    }
}

TEST_CASE("divergence coupling matrix") {
    const ElasticityField field = plane_strain_isotropic(1.0, 1.0);
    const Element el(unit_square_mesh(), 0, 1);
    const LocalMatrices mats = el.local_matrices(field);

    SUBCASE("pure-gamma DOFs are orthogonal to rigid motions") {
        const Eigen::MatrixXd rm = rm_coefficients(1, el.geom());
        for (int g = 0; g < el.m_k(); ++g) {
            Eigen::VectorXd dofs = Eigen::VectorXd::Zero(el.num_stress_dofs());
            dofs[el.gamma_block() + g] = 1.0;
            const Eigen::VectorXd row = mats.b.transpose() * dofs;  // moments against v_j
            for (int r = 0; r < 3; ++r)
                CHECK(std::abs(rm.col(r).dot(row)) <= 1e-13);
        }
    }

    SUBCASE("divergence-free interpolant annihilates B") {
        auto sigma = [](Vec2 p) {
            return Eigen::Vector3d{6 * (p.x * p.x - p.y * p.y), 6 * (p.y * p.y - p.x * p.x),
                                   -12 * p.x * p.y};
        };
        auto div0 = [](Vec2) { return Vec2{0, 0}; };
        const Element el2(unit_square_mesh(), 0, 2);
        const LocalMatrices m2 = el2.local_matrices(field);
        const Eigen::VectorXd dofs = el2.interpolate_stress(sigma, div0);
        CHECK((m2.b.transpose() * dofs).cwiseAbs().maxCoeff() <= 1e-12);
    }

    SUBCASE("full rank onto the displacement space") {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(mats.b);
        const Eigen::VectorXd sv = svd.singularValues();
        CHECK(sv.size() == 6);
        CHECK(sv.minCoeff() > 1e-12);  // rank (k+1)(k+2) = 6
    }
}

TEST_CASE("load and dirichlet vectors") {
    const Element el(unit_square_mesh(), 0, 1);

    SUBCASE("zero data") {
        CHECK(el.load_vector([](Vec2) { return Vec2{0, 0}; }).cwiseAbs().maxCoeff() == 0.0);
        CHECK(el.dirichlet_vector([](Vec2) { return Vec2{0, 0}; }).cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("constant body force against the constant basis field") {
        const Eigen::VectorXd b = el.load_vector([](Vec2) { return Vec2{2.5, -1.0}; });
        CHECK(b[0] == doctest::Approx(2.5 * el.geom().area).epsilon(1e-13));
        CHECK(b[scalar_basis_size(1)] == doctest::Approx(-1.0 * el.geom().area).epsilon(1e-13));
    }

    SUBCASE("constant boundary data hits the constant edge monomial") {
        const Vec2 cval{0.7, -0.2};
        const Eigen::VectorXd rhs = el.dirichlet_vector([cval](Vec2) { return cval; });
        for (int le = 0; le < el.num_edges(); ++le) {
            const LocalEdge& e = el.edges()[le];
            CHECK(rhs[el.edge_dof(le, 0, 0)] ==
                  doctest::Approx(e.sign * cval.x * e.length).epsilon(1e-13));
            CHECK(rhs[el.edge_dof(le, 1, 0)] ==
                  doctest::Approx(e.sign * cval.y * e.length).epsilon(1e-13));
        }
    }

    SUBCASE("cubic boundary data matches a high-order quadrature oracle") {
        // first cell of QuadS n=4 owns the boundary edge y=0, x in [0, 1/4]
        const PolygonMesh mesh = generate_mesh(MeshFamily::QuadS, 4);
        const Element cell(mesh, 0, 1);
        auto g = [](Vec2 p) { return Vec2{p.x * p.x * p.x, 0.0}; };
        const Eigen::VectorXd rhs = cell.dirichlet_vector(g);
        const auto oracle_rule = gauss_1d(12);
        for (int le = 0; le < cell.num_edges(); ++le) {
            const LocalEdge& e = cell.edges()[le];
            if (!e.boundary || std::abs(e.a.y) > 1e-14 || std::abs(e.b.y) > 1e-14) continue;
            for (int m = 0; m <= 1; ++m) {
                double acc = 0.0;
                for (int q = 0; q < oracle_rule.size(); ++q) {
                    const double s = oracle_rule.points[q];
                    const Vec2 x = e.a + (0.5 * (s + 1.0)) * (e.b - e.a);
                    acc += oracle_rule.weights[q] * (e.length / 2.0) * std::pow(s, m) *
                           g(x).x * e.sign;
                }
                CHECK(rhs[cell.edge_dof(le, 0, m)] == doctest::Approx(acc).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("stress interpolation") {
    const ElasticityField field = plane_strain_isotropic(1.0, 1.0);

    SUBCASE("constant tensors are reproduced exactly") {
        const Element el(unit_square_mesh(), 0, 1);
        const Eigen::Vector3d sigma{1.6, -0.8, 0.3};
        const Eigen::VectorXd dofs = el.interpolate_stress(
            [sigma](Vec2) { return sigma; }, [](Vec2) { return Vec2{0, 0}; });
        for (int le = 0; le < el.num_edges(); ++le) {
            const Vec2 tr = traction(sigma, el.edges()[le].normal);
            CHECK(dofs[el.edge_dof(le, 0, 0)] == doctest::Approx(tr.x).epsilon(1e-13));
            CHECK(dofs[el.edge_dof(le, 1, 0)] == doctest::Approx(tr.y).epsilon(1e-13));
            CHECK(std::abs(dofs[el.edge_dof(le, 0, 1)]) <= 1e-13);
        }
        CHECK(el.divergence_from_dofs(dofs).cwiseAbs().maxCoeff() <= 1e-13);
    }

    SUBCASE("quadratic tractions are reproduced pointwise for k=2") {
        auto sigma = [](Vec2 p) {
            return Eigen::Vector3d{6 * (p.x * p.x - p.y * p.y), 6 * (p.y * p.y - p.x * p.x),
                                   -12 * p.x * p.y};
        };
        auto div0 = [](Vec2) { return Vec2{0, 0}; };
        const PolygonMesh mesh = generate_mesh(MeshFamily::HexS, 4);
        const Element el(mesh, 5, 2);
        const Eigen::VectorXd dofs = el.interpolate_stress(sigma, div0);
        for (int le = 0; le < el.num_edges(); ++le) {
            const LocalEdge& e = el.edges()[le];
            for (double s : {-0.77, 0.1, 0.64}) {
                const Vec2 x = e.a + (0.5 * (s + 1.0)) * (e.b - e.a);
                const Vec2 exact = traction(sigma(x), e.normal);
                Vec2 got{0, 0};
                double sm = 1.0;
                for (int m = 0; m <= 2; ++m) {
                    got.x += dofs[el.edge_dof(le, 0, m)] * sm;
                    got.y += dofs[el.edge_dof(le, 1, m)] * sm;
                    sm *= s;
                }
                CHECK(got.x == doctest::Approx(exact.x).epsilon(1e-11));
                CHECK(got.y == doctest::Approx(exact.y).epsilon(1e-11));
            }
        }
    }

    SUBCASE("interpolate after reconstruct is the identity on the range") {
        std::mt19937_64 rng(43);
        const PolygonMesh mesh = generate_mesh(MeshFamily::ConcHexU, 2, 8);
        for (int k : {1, 2}) {
            const Element el(mesh, 1, k);
            const Eigen::MatrixXd pi = el.projector(field);
            Eigen::VectorXd p(vector_basis_size(k + 1));
            for (int i = 0; i < p.size(); ++i) p[i] = rand_unit(rng);
            const PolyStress ps = poly_stress(el, field, p);
            const Eigen::VectorXd dofs = el.interpolate_stress(ps.sigma, ps.divergence);
            // reconstruct, rebuild the stress, interpolate again
            const Eigen::VectorXd p_rec = pi * dofs;
            const PolyStress ps2 = poly_stress(el, field, p_rec);
            const Eigen::VectorXd dofs2 = el.interpolate_stress(ps2.sigma, ps2.divergence);
            CHECK((dofs2 - dofs).cwiseAbs().maxCoeff() <=
                  1e-11 * (1.0 + dofs.cwiseAbs().maxCoeff()));
        }
    }
}

TEST_CASE("Ah SPD across families and orders") {
    const ElasticityField field = plane_strain_isotropic(1.0, 1.0);
    for (MeshFamily family : all_families()) {
        const PolygonMesh mesh = generate_mesh(family, 4, 21);
        for (int k : {1, 2}) {
            CAPTURE(family_name(family));
            CAPTURE(k);
            CHECK(min_ah_eigenvalue(mesh, field, k) > 0.0);
        }
    }
}
