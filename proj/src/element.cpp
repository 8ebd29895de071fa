#include "hrvem/element.hpp"

#include <cmath>
#include <stdexcept>

namespace hrvem {

namespace {

std::vector<Vec2> edge_points_for(const LocalEdge& e, const QuadratureRule1D& rule) {
    std::vector<Vec2> pts;
    pts.reserve(rule.size());
    for (int q = 0; q < rule.size(); ++q)
        pts.push_back(e.a + (0.5 * (rule.points[q] + 1.0)) * (e.b - e.a));
    return pts;
}

} // namespace

Element::Element(const PolygonMesh& mesh, int cell, int k)
    : Element(mesh, cell, k, 2 * k + 4, k + 3) {}

Element::Element(const PolygonMesh& mesh, int cell, int k, int volume_degree, int edge_points)
    : cell_(cell), k_(k) {
    if (k < 1) throw std::invalid_argument("Element: k >= 1 required");
    geom_ = compute_cell_geometry(mesh, cell);
    const auto& uses = mesh.cell_edges[cell];
    edges_.reserve(uses.size());
    for (const EdgeUse& use : uses) {
        const Edge& e = mesh.edges[use.edge];
        LocalEdge le;
        le.edge_id = use.edge;
        le.sign = static_cast<double>(use.sign);
        le.a = mesh.vertices[e.v0];
        le.b = mesh.vertices[e.v1];
        le.length = dist(le.a, le.b);
        le.normal = perp(le.b - le.a) / le.length;
        le.boundary = e.boundary;
        edges_.push_back(le);
    }
    vol_rule_ = polygon_rule(geom_, std::max(volume_degree, 2 * k + 4));
    edge_rule_ = gauss_1d(std::max(edge_points, k + 3));
    // fixed-degree rule: the RM-perp basis (and with it the meaning of the
    // gamma DOFs) must not depend on quadrature options
    psi_ = build_rm_perp(k_, geom_, polygon_rule(geom_, 2 * k + 2));
    build_divergence_matrix();
}

void Element::build_divergence_matrix() {
    const int nv = vector_basis_size(k_);
    const int nb = scalar_basis_size(k_);
    const int n_dofs = num_stress_dofs();
    const double h = geom_.diameter;
    div_matrix_ = Eigen::MatrixXd::Zero(nv, n_dofs);

    // indices of the constant and linear monomials in the shared ordering
    constexpr int i00 = 0, i10 = 1, i01 = 2;

    for (int le = 0; le < num_edges(); ++le) {
        const LocalEdge& e = edges_[le];
        // beta integrand needs (x - x_C)^perp along the edge
        std::vector<double> rx(edge_rule_.size()), ry(edge_rule_.size());
        for (int q = 0; q < edge_rule_.size(); ++q) {
            const Vec2 x = e.a + (0.5 * (edge_rule_.points[q] + 1.0)) * (e.b - e.a);
            const Vec2 r = perp(x - geom_.centroid);
            rx[q] = r.x;
            ry[q] = r.y;
        }
        for (int comp = 0; comp < 2; ++comp) {
            for (int m = 0; m <= k_; ++m) {
                const int dof = edge_dof(le, comp, m);
                // alpha = (1/|E|) * closed-form moment of the outward traction
                const double mom0 = (m % 2 == 0) ? e.length / (m + 1) : 0.0;
                const double alpha_c = e.sign * mom0 / geom_.area;
                div_matrix_((comp == 0 ? i00 : nb + i00), dof) += alpha_c;

                // beta = (1/int |x-x_C|^2) * int_e s^m ((x-x_C)^perp)_comp ds
                double acc = 0.0;
                for (int q = 0; q < edge_rule_.size(); ++q) {
                    const double s = edge_rule_.points[q];
                    acc += edge_rule_.weights[q] * std::pow(s, m) *
                           (comp == 0 ? rx[q] : ry[q]);
                }
                const double beta = e.sign * (e.length / 2.0) * acc / geom_.second_moment;
                // beta * (x-x_C)^perp = beta * (h*eta, -h*xi)
                div_matrix_(i01, dof) += beta * h;
                div_matrix_(nb + i10, dof) -= beta * h;
            }
        }
    }
    div_matrix_.rightCols(psi_.m_k) = psi_.coeffs;
}

void Element::projector_system(const ElasticityField& field, Eigen::MatrixXd& gram,
                               Eigen::MatrixXd& rhs) const {
    const int nvk1 = vector_basis_size(k_ + 1);
    const int n_dofs = num_stress_dofs();
    const ScalarBasis sb_k(k_, geom_);
    const ScalarBasis sb_k1(k_ + 1, geom_);
    const StrainOperator strain = strain_operator(k_ + 1, geom_);

    // Gram of C eps(p_i) : eps(p_j) by quadrature (C evaluated pointwise)
    const Eigen::MatrixXd vk = sb_k.eval(vol_rule_.points);   // np x nb(k)
    gram = Eigen::MatrixXd::Zero(nvk1, nvk1);
    for (int q = 0; q < vol_rule_.size(); ++q) {
        Eigen::MatrixXd eq(3, nvk1);
        eq.row(0) = vk.row(q) * strain.exx;
        eq.row(1) = vk.row(q) * strain.eyy;
        eq.row(2) = vk.row(q) * strain.gxy;
        const Eigen::Matrix3d c = field.stiffness_at(vol_rule_.points[q]);
        gram += vol_rule_.weights[q] * eq.transpose() * c * eq;
    }

    // right side from DOFs alone: boundary term minus divergence term
    rhs = Eigen::MatrixXd::Zero(nvk1, n_dofs);
    const int nbk1 = scalar_basis_size(k_ + 1);
    for (int le = 0; le < num_edges(); ++le) {
        const LocalEdge& e = edges_[le];
        const auto pts = edge_points_for(e, edge_rule_);
        const Eigen::MatrixXd v1 = sb_k1.eval(pts);                       // nq x nb(k+1)
        const Eigen::MatrixXd sm = edge_monomial_values(k_, edge_rule_.points);  // nq x k+1
        for (int comp = 0; comp < 2; ++comp) {
            for (int m = 0; m <= k_; ++m) {
                const int dof = edge_dof(le, comp, m);
                for (int q = 0; q < edge_rule_.size(); ++q) {
                    const double w = edge_rule_.weights[q] * (e.length / 2.0) *
                                     e.sign * sm(q, m);
                    // q_j component `comp` at this point, all j at once
                    for (int j = 0; j < nbk1; ++j)
                        rhs(comp * nbk1 + j, dof) += w * v1(q, j);
                }
            }
        }
    }
    // volume term: Mvv^T * Div with Mvv[i][j] = int v_i . p_j
    const Eigen::MatrixXd vk1 = sb_k1.eval(vol_rule_.points);
    const int nbk = scalar_basis_size(k_);
    Eigen::MatrixXd cross_mass = Eigen::MatrixXd::Zero(nbk, nbk1);
    for (int q = 0; q < vol_rule_.size(); ++q)
        cross_mass += vol_rule_.weights[q] * vk.row(q).transpose() * vk1.row(q);
    Eigen::MatrixXd mvv = Eigen::MatrixXd::Zero(2 * nbk, 2 * nbk1);
    mvv.topLeftCorner(nbk, nbk1) = cross_mass;
    mvv.bottomRightCorner(nbk, nbk1) = cross_mass;
    rhs -= mvv.transpose() * div_matrix_;
}

Eigen::MatrixXd Element::solve_projector(const Eigen::MatrixXd& gram,
                                         const Eigen::MatrixXd& rhs) const {
    const int nvk1 = vector_basis_size(k_ + 1);
    const ScalarBasis sb_k1(k_ + 1, geom_);
    const Eigen::MatrixXd vk1 = sb_k1.eval(vol_rule_.points);
    const int nbk1 = scalar_basis_size(k_ + 1);
    Eigen::MatrixXd m11 = Eigen::MatrixXd::Zero(nbk1, nbk1);
    for (int q = 0; q < vol_rule_.size(); ++q)
        m11 += vol_rule_.weights[q] * vk1.row(q).transpose() * vk1.row(q);
    Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(nvk1, nvk1);
    mass.topLeftCorner(nbk1, nbk1) = m11;
    mass.bottomRightCorner(nbk1, nbk1) = m11;
    const Eigen::MatrixXd rm = rm_coefficients(k_ + 1, geom_);
    const Eigen::MatrixXd constraints = rm.transpose() * mass;  // 3 x nvk1

    const int n = nvk1 + 3;
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n, n);
    kkt.topLeftCorner(nvk1, nvk1) = gram;
    kkt.topRightCorner(nvk1, 3) = constraints.transpose();
    kkt.bottomLeftCorner(3, nvk1) = constraints;
    Eigen::MatrixXd full_rhs = Eigen::MatrixXd::Zero(n, rhs.cols());
    full_rhs.topRows(nvk1) = rhs;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible())
        throw std::runtime_error("projector system singular (degenerate cell or indefinite C)");
    return lu.solve(full_rhs).topRows(nvk1);
}

Eigen::MatrixXd Element::projector(const ElasticityField& field) const {
    Eigen::MatrixXd gram, rhs;
    projector_system(field, gram, rhs);
    return solve_projector(gram, rhs);
}

Eigen::MatrixXd Element::stabilization(const ElasticityField& field,
                                       const Eigen::MatrixXd& pi) const {
    const int n_dofs = num_stress_dofs();
    const ScalarBasis sb_k(k_, geom_);
    const StrainOperator strain = strain_operator(k_ + 1, geom_);
    const double kappa_e = kappa(field, geom_.centroid);
    Eigen::MatrixXd se = Eigen::MatrixXd::Zero(n_dofs, n_dofs);

    for (int le = 0; le < num_edges(); ++le) {
        const LocalEdge& e = edges_[le];
        const auto pts = edge_points_for(e, edge_rule_);
        const Eigen::MatrixXd vk = sb_k.eval(pts);
        const Eigen::MatrixXd sm = edge_monomial_values(k_, edge_rule_.points);
        const Vec2 n_out = e.normal * e.sign;

        // traction difference (DOF-side minus projected side) at quad points
        Eigen::MatrixXd diff = Eigen::MatrixXd::Zero(2 * edge_rule_.size(), n_dofs);
        for (int q = 0; q < edge_rule_.size(); ++q) {
            for (int comp = 0; comp < 2; ++comp)
                for (int m = 0; m <= k_; ++m)
                    diff(2 * q + comp, edge_dof(le, comp, m)) = e.sign * sm(q, m);

            Eigen::MatrixXd eq(3, vector_basis_size(k_ + 1));
            eq.row(0) = vk.row(q) * strain.exx;
            eq.row(1) = vk.row(q) * strain.eyy;
            eq.row(2) = vk.row(q) * strain.gxy;
            const Eigen::MatrixXd sigma_v = field.stiffness_at(pts[q]) * eq * pi;  // 3 x n_dofs
            diff.row(2 * q + 0) -= n_out.x * sigma_v.row(0) + n_out.y * sigma_v.row(2);
            diff.row(2 * q + 1) -= n_out.x * sigma_v.row(2) + n_out.y * sigma_v.row(1);
        }
        Eigen::VectorXd w(2 * edge_rule_.size());
        for (int q = 0; q < edge_rule_.size(); ++q) {
            const double wq = edge_rule_.weights[q] * (e.length / 2.0);
            w[2 * q] = wq;
            w[2 * q + 1] = wq;
        }
        se += kappa_e * geom_.diameter * diff.transpose() * w.asDiagonal() * diff;
    }
    return 0.5 * (se + se.transpose());
}

LocalMatrices Element::local_matrices(const ElasticityField& field) const {
    LocalMatrices out;
    Eigen::MatrixXd gram, rhs;
    projector_system(field, gram, rhs);
    out.pi = solve_projector(gram, rhs);
    out.se = stabilization(field, out.pi);
    Eigen::MatrixXd ah = out.pi.transpose() * gram * out.pi + out.se;
    out.symmetry_deviation = (ah - ah.transpose()).cwiseAbs().maxCoeff();
    const double scale = 1.0 + ah.cwiseAbs().maxCoeff();
    if (out.symmetry_deviation > 1e-12 * scale)
        throw std::runtime_error("local stress matrix asymmetry beyond tolerance");
    out.ah = 0.5 * (ah + ah.transpose());

    // B[dof][j] = int div(tau_dof) . v_j, exact for these polynomial integrands
    const ScalarBasis sb_k(k_, geom_);
    const Eigen::MatrixXd ms = scalar_mass(sb_k, vol_rule_);
    const int nbk = sb_k.size();
    Eigen::MatrixXd mvv = Eigen::MatrixXd::Zero(2 * nbk, 2 * nbk);
    mvv.topLeftCorner(nbk, nbk) = ms;
    mvv.bottomRightCorner(nbk, nbk) = ms;
    out.b = div_matrix_.transpose() * mvv;
    return out;
}

Eigen::VectorXd Element::load_vector(const std::function<Vec2(Vec2)>& f) const {
    const ScalarBasis sb_k(k_, geom_);
    const int nbk = sb_k.size();
    const Eigen::MatrixXd vk = sb_k.eval(vol_rule_.points);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * nbk);
    for (int q = 0; q < vol_rule_.size(); ++q) {
        const Vec2 fq = f(vol_rule_.points[q]);
        const double w = vol_rule_.weights[q];
        b.head(nbk) += (w * fq.x) * vk.row(q).transpose();
        b.tail(nbk) += (w * fq.y) * vk.row(q).transpose();
    }
    return b;
}

Eigen::VectorXd Element::dirichlet_vector(const std::function<Vec2(Vec2)>& g) const {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(num_stress_dofs());
    for (int le = 0; le < num_edges(); ++le) {
        const LocalEdge& e = edges_[le];
        if (!e.boundary) continue;
        const auto pts = edge_points_for(e, edge_rule_);
        const Eigen::MatrixXd sm = edge_monomial_values(k_, edge_rule_.points);
        for (int q = 0; q < edge_rule_.size(); ++q) {
            const Vec2 gq = g(pts[q]);
            const double w = edge_rule_.weights[q] * (e.length / 2.0) * e.sign;
            for (int m = 0; m <= k_; ++m) {
                rhs[edge_dof(le, 0, m)] += w * sm(q, m) * gq.x;
                rhs[edge_dof(le, 1, m)] += w * sm(q, m) * gq.y;
            }
        }
    }
    return rhs;
}

Eigen::VectorXd Element::interpolate_stress(
    const std::function<Eigen::Vector3d(Vec2)>& sigma,
    const std::function<Vec2(Vec2)>& div_sigma) const {
    Eigen::VectorXd dofs = Eigen::VectorXd::Zero(num_stress_dofs());
    const auto rule = gauss_1d(std::min(20, std::max(k_ + 6, edge_rule_.size())));
    for (int le = 0; le < num_edges(); ++le) {
        const LocalEdge& e = edges_[le];
        const auto pts = edge_points_for(e, rule);
        const Eigen::MatrixXd sm = edge_monomial_values(k_, rule.points);
        Eigen::VectorXd bx = Eigen::VectorXd::Zero(k_ + 1), by = Eigen::VectorXd::Zero(k_ + 1);
        for (int q = 0; q < rule.size(); ++q) {
            const Vec2 tr = traction(sigma(pts[q]), e.normal);
            const double w = rule.weights[q] * (e.length / 2.0);
            bx += (w * tr.x) * sm.row(q).transpose();
            by += (w * tr.y) * sm.row(q).transpose();
        }
        const Eigen::MatrixXd mass = edge_monomial_mass(k_, e.length);
        const Eigen::VectorXd cx = mass.ldlt().solve(bx);
        const Eigen::VectorXd cy = mass.ldlt().solve(by);
        for (int m = 0; m <= k_; ++m) {
            dofs[edge_dof(le, 0, m)] = cx[m];
            dofs[edge_dof(le, 1, m)] = cy[m];
        }
    }

    // gamma block: Gram solve of RM-perp moments of div sigma
    const ScalarBasis sb_k(k_, geom_);
    const int nbk = sb_k.size();
    const Eigen::MatrixXd vk = sb_k.eval(vol_rule_.points);
    Eigen::VectorXd mom = Eigen::VectorXd::Zero(psi_.m_k);
    Eigen::MatrixXd psi_gram = Eigen::MatrixXd::Zero(psi_.m_k, psi_.m_k);
    Eigen::MatrixXd psi_vals_x(vol_rule_.size(), psi_.m_k), psi_vals_y(vol_rule_.size(), psi_.m_k);
    for (int i = 0; i < psi_.m_k; ++i) {
        psi_vals_x.col(i) = vk * psi_.coeffs.col(i).head(nbk);
        psi_vals_y.col(i) = vk * psi_.coeffs.col(i).tail(nbk);
    }
    for (int q = 0; q < vol_rule_.size(); ++q) {
        const double w = vol_rule_.weights[q];
        const Vec2 d = div_sigma(vol_rule_.points[q]);
        for (int i = 0; i < psi_.m_k; ++i) {
            mom[i] += w * (d.x * psi_vals_x(q, i) + d.y * psi_vals_y(q, i));
            for (int j = 0; j < psi_.m_k; ++j)
                psi_gram(i, j) += w * (psi_vals_x(q, i) * psi_vals_x(q, j) +
                                       psi_vals_y(q, i) * psi_vals_y(q, j));
        }
    }
    dofs.tail(psi_.m_k) = psi_gram.ldlt().solve(mom);
    return dofs;
}

} // namespace hrvem
