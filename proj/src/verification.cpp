#include "hrvem/verification.hpp"

#include "hrvem/assembly.hpp"
#include "hrvem/element.hpp"
#include "hrvem/polybasis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <random>

namespace hrvem {

namespace {

// fixed linear displacement for patch tests
Vec2 linear_displacement(Vec2 x) {
    return {0.3 + 0.7 * x.x + 0.2 * x.y, -0.4 + 0.1 * x.x - 0.5 * x.y};
}

} // namespace

std::pair<double, double> patch_test(const PolygonMesh& mesh, int k) {
    const ElasticityField field = plane_strain_isotropic(1.0, 1.0);
    // eps = (0.7, -0.5, 0.3), sigma = C eps
    const Eigen::Vector3d eps{0.7, -0.5, 0.3};
    const Eigen::Vector3d sigma = field.stiffness_at({0, 0}) * eps;

    const SaddleSystem system = assemble(mesh, field, k, nullptr, linear_displacement);
    const SolveResult solution = solve(system);

    Eigen::VectorXd exact = Eigen::VectorXd::Zero(system.dofs.n_stress);
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const Vec2 tr = traction(sigma, mesh.edge_normal(e));
        const long base = system.dofs.edge_block(e);
        exact[base] = tr.x;
        exact[base + (k + 1)] = tr.y;
    }
    const double stress_err = (solution.stress - exact).norm() / exact.norm();

    double u_err2 = 0.0;
    const int nu = vector_basis_size(k);
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const CellGeometry geom = compute_cell_geometry(mesh, c);
        const ScalarBasis sb(k, geom);
        const auto rule = polygon_rule(geom, 2 * k + 4);
        const Eigen::VectorXd coeffs =
            solution.displacement.segment(system.dofs.displacement_block(c), nu);
        for (int q = 0; q < rule.size(); ++q) {
            const Vec2 diff =
                eval_vector_poly(sb, coeffs, rule.points[q]) - linear_displacement(rule.points[q]);
            u_err2 += rule.weights[q] * dot(diff, diff);
        }
    }
    return {stress_err, std::sqrt(u_err2)};
}

double projector_consistency(const PolygonMesh& mesh, int k, int samples, std::uint64_t seed) {
    const ElasticityField field = plane_strain_isotropic(1.0, 1.0);
    std::mt19937_64 rng(seed);
    auto draw = [&rng]() { return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0; };
    double worst = 0.0;
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const Element element(mesh, c, k);
        const Eigen::MatrixXd pi = element.projector(field);
        const auto& geom = element.geom();
        const ScalarBasis sb1(k + 1, geom);
        const StrainOperator strain = strain_operator(k + 1, geom);
        const Eigen::Matrix3d cmat = field.stiffness_at(geom.centroid);
        const int nvk1 = vector_basis_size(k + 1);
        for (int s = 0; s < samples; ++s) {
            Eigen::VectorXd p(nvk1);
            for (int i = 0; i < nvk1; ++i) p[i] = draw();
            const Eigen::VectorXd exx = strain.exx * p;
            const Eigen::VectorXd eyy = strain.eyy * p;
            const Eigen::VectorXd gxy = strain.gxy * p;
            auto sigma_fn = [&](Vec2 x) -> Eigen::Vector3d {
                Eigen::Vector3d e;
                const ScalarBasis sbk(k, geom);
                e.setZero();
                for (int i = 0; i < sbk.size(); ++i) {
                    const double m = sbk.eval_one(i, x);
                    e[0] += exx[i] * m;
                    e[1] += eyy[i] * m;
                    e[2] += gxy[i] * m;
                }
                return cmat * e;
            };
            // div(C eps(p)) for constant C: differentiate the stress coefficients
            const ScalarBasis sbk(k, geom);
            const Eigen::VectorXd s11 = cmat(0, 0) * exx + cmat(0, 1) * eyy + cmat(0, 2) * gxy;
            const Eigen::VectorXd s22 = cmat(1, 0) * exx + cmat(1, 1) * eyy + cmat(1, 2) * gxy;
            const Eigen::VectorXd s12 = cmat(2, 0) * exx + cmat(2, 1) * eyy + cmat(2, 2) * gxy;
            const Eigen::MatrixXd dx = sbk.ddx(), dy = sbk.ddy();
            const Eigen::VectorXd div1 = dx * s11 + dy * s12;
            const Eigen::VectorXd div2 = dx * s12 + dy * s22;
            auto div_fn = [&](Vec2 x) -> Vec2 {
                Vec2 d{0, 0};
                for (int i = 0; i < sbk.size(); ++i) {
                    const double m = sbk.eval_one(i, x);
                    d.x += div1[i] * m;
                    d.y += div2[i] * m;
                }
                return d;
            };
            const Eigen::VectorXd dofs = element.interpolate_stress(sigma_fn, div_fn);
            const Eigen::VectorXd p_rec = pi * dofs;
            Eigen::VectorXd strain_err(3 * strain.exx.rows());
            strain_err << strain.exx * (p_rec - p), strain.eyy * (p_rec - p),
                strain.gxy * (p_rec - p);
            Eigen::VectorXd strain_ref(3 * strain.exx.rows());
            strain_ref << exx, eyy, gxy;
            const double rel = strain_err.norm() / (1e-30 + strain_ref.norm());
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

double min_ah_eigenvalue(const PolygonMesh& mesh, const ElasticityField& field, int k) {
    double lo = std::numeric_limits<double>::max();
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const Element element(mesh, c, k);
        const LocalMatrices mats = element.local_matrices(field);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mats.ah, Eigen::EigenvaluesOnly);
        lo = std::min(lo, es.eigenvalues().minCoeff());
    }
    return lo;
}

double min_se_eigenvalue(const PolygonMesh& mesh, const ElasticityField& field, int k) {
    double lo = std::numeric_limits<double>::max();
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const Element element(mesh, c, k);
        const LocalMatrices mats = element.local_matrices(field);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mats.se, Eigen::EigenvaluesOnly);
        lo = std::min(lo, es.eigenvalues().minCoeff());
    }
    return lo;
}

double min_b_singular_value(const PolygonMesh& mesh, int k) {
    const ElasticityField field = plane_strain_isotropic(1.0, 1.0);
    const GlobalDofMap map = number_dofs(mesh, k);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(map.n_displacement, map.n_stress);
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const Element element(mesh, c, k);
        const LocalMatrices mats = element.local_matrices(field);
        const auto sdofs = cell_stress_dofs(mesh, map, c);
        const long ubase = map.displacement_block(c);
        for (std::size_t i = 0; i < sdofs.size(); ++i)
            for (int j = 0; j < element.num_displacement_dofs(); ++j)
                b(ubase + j, sdofs[i]) += mats.b(i, j);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b);
    return svd.singularValues().minCoeff();
}

std::vector<CheckResult> run_property_checks(int k, std::uint64_t seed) {
    std::vector<CheckResult> checks;
    const ElasticityField field = plane_strain_isotropic(1.0, 1.0);

    for (MeshFamily family : all_families()) {
        const std::string fname = family_name(family);
        const PolygonMesh mesh = generate_mesh(family, 4, seed);

        {
            CheckResult r;
            r.name = "dof_counts_" + fname;
            bool ok = true;
            for (int c = 0; c < mesh.num_cells() && ok; ++c) {
                const Element element(mesh, c, k);
                const int ne = static_cast<int>(mesh.cell_edges[c].size());
                ok = element.num_stress_dofs() == 2 * (k + 1) * ne + (k + 1) * (k + 2) - 3 &&
                     element.num_displacement_dofs() == (k + 1) * (k + 2);
            }
            r.pass = ok;
            r.value = ok ? 1.0 : 0.0;
            checks.push_back(r);
        }
        {
            CheckResult r;
            r.name = "ah_spd_" + fname;
            r.value = min_ah_eigenvalue(mesh, field, k);
            r.pass = r.value > 0.0;
            checks.push_back(r);
        }
        {
            CheckResult r;
            r.name = "se_psd_" + fname;
            r.value = min_se_eigenvalue(mesh, field, k);
            r.pass = r.value > -1e-12;
            checks.push_back(r);
        }
        {
            CheckResult r;
            r.name = "patch_test_" + fname;
            const auto [stress_err, u_err] = patch_test(mesh, k);
            r.value = std::max(stress_err, u_err);
            r.pass = stress_err <= 1e-9 && u_err <= 1e-10;
            checks.push_back(r);
        }
        {
            CheckResult r;
            r.name = "projector_consistency_" + fname;
            const PolygonMesh small = generate_mesh(family, 2, seed);
            r.value = projector_consistency(small, k, 20, seed + 1);
            r.pass = r.value <= 1e-10;
            checks.push_back(r);
        }
        {
            CheckResult r;
            r.name = "b_full_rank_" + fname;
            const PolygonMesh small = generate_mesh(family, 2, seed);
            r.value = min_b_singular_value(small, k);
            r.pass = r.value > 1e-12;
            checks.push_back(r);
        }
    }
    {
        CheckResult r;
        r.name = "commuting_diagram_PolyU";
        const PolygonMesh mesh = generate_mesh(MeshFamily::PolyU, 8, seed == 0 ? 42 : seed);
        r.value = check_commuting_diagram(mesh, make_test('b'), k);
        r.pass = r.value <= 1e-10;
        checks.push_back(r);
    }
    return checks;
}

} // namespace hrvem
