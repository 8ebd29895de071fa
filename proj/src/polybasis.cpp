#include "hrvem/polybasis.hpp"

#include <cmath>
#include <stdexcept>

namespace hrvem {

std::vector<std::array<int, 2>> monomial_exponents(int k) {
    std::vector<std::array<int, 2>> exps;
    exps.reserve(scalar_basis_size(k));
    for (int d = 0; d <= k; ++d)
        for (int ay = 0; ay <= d; ++ay)
            exps.push_back({d - ay, ay});
    return exps;
}

double ScalarBasis::eval_one(int i, Vec2 x) const {
    const auto [ax, ay] = exponents_[i];
    const double xi = (x.x - center_.x) / h_;
    const double eta = (x.y - center_.y) / h_;
    double v = 1.0;
    for (int a = 0; a < ax; ++a) v *= xi;
    for (int a = 0; a < ay; ++a) v *= eta;
    return v;
}

Eigen::MatrixXd ScalarBasis::eval(const std::vector<Vec2>& pts) const {
    const int np = static_cast<int>(pts.size());
    Eigen::MatrixXd values(np, size());
    for (int p = 0; p < np; ++p) {
        const double xi = (pts[p].x - center_.x) / h_;
        const double eta = (pts[p].y - center_.y) / h_;
        // powers built incrementally
        std::vector<double> px(degree_ + 1, 1.0), py(degree_ + 1, 1.0);
        for (int a = 1; a <= degree_; ++a) {
            px[a] = px[a - 1] * xi;
            py[a] = py[a - 1] * eta;
        }
        for (int i = 0; i < size(); ++i)
            values(p, i) = px[exponents_[i][0]] * py[exponents_[i][1]];
    }
    return values;
}

namespace {

Eigen::MatrixXd derivative_matrix(const ScalarBasis& basis, bool wrt_x) {
    const int n = basis.size();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    const auto& exps = basis.exponents();
    // index lookup within the shared ordering
    auto index_of = [&exps](int ax, int ay) {
        for (std::size_t i = 0; i < exps.size(); ++i)
            if (exps[i][0] == ax && exps[i][1] == ay) return static_cast<int>(i);
        return -1;
    };
    for (int i = 0; i < n; ++i) {
        const auto [ax, ay] = exps[i];
        if (wrt_x && ax > 0)
            d(index_of(ax - 1, ay), i) = ax / basis.h();
        if (!wrt_x && ay > 0)
            d(index_of(ax, ay - 1), i) = ay / basis.h();
    }
    return d;
}

} // namespace

Eigen::MatrixXd ScalarBasis::ddx() const { return derivative_matrix(*this, true); }
Eigen::MatrixXd ScalarBasis::ddy() const { return derivative_matrix(*this, false); }

Eigen::MatrixXd rm_coefficients(int k, const CellGeometry& geom) {
    if (k < 1) throw std::invalid_argument("rm_coefficients needs k >= 1");
    const int nb = scalar_basis_size(k);
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(2 * nb, 3);
    const double h = geom.diameter;
    // ordering: (0,0) -> 0, (1,0) -> 1, (0,1) -> 2
    r(0, 0) = 1.0;                // (1, 0)
    r(nb, 1) = 1.0;               // (0, 1)
    r(2, 2) = h;                  // (x-c)^perp = (h*eta, -h*xi)
    r(nb + 1, 2) = -h;
    return r;
}

namespace {

// Gram inner product of vector-basis coefficient columns given the scalar mass.
double vgram(const Eigen::MatrixXd& ms, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const int nb = static_cast<int>(ms.rows());
    return a.head(nb).dot(ms * b.head(nb)) + a.tail(nb).dot(ms * b.tail(nb));
}

} // namespace

RMPerpBasis build_rm_perp(int k, const CellGeometry& geom, const QuadratureRule& rule) {
    const int nb = scalar_basis_size(k);
    const int nv = vector_basis_size(k);
    const int mk = nv - 3;
    const ScalarBasis sb(k, geom);
    const Eigen::MatrixXd values = sb.eval(rule.points);
    Eigen::MatrixXd ms = Eigen::MatrixXd::Zero(nb, nb);
    for (int q = 0; q < rule.size(); ++q)
        ms += rule.weights[q] * values.row(q).transpose() * values.row(q);

    // orthonormalize RM itself first
    Eigen::MatrixXd rm = rm_coefficients(k, geom);
    for (int i = 0; i < 3; ++i) {
        Eigen::VectorXd col = rm.col(i);
        for (int j = 0; j < i; ++j)
            col -= vgram(ms, rm.col(j), col) * rm.col(j);
        const double n2 = vgram(ms, col, col);
        if (n2 <= 0.0) throw std::runtime_error("degenerate cell: RM Gram breakdown");
        rm.col(i) = col / std::sqrt(n2);
    }

    // candidates: the vector monomials, projected off RM
    Eigen::MatrixXd cand = Eigen::MatrixXd::Identity(nv, nv);
    for (int i = 0; i < nv; ++i)
        for (int j = 0; j < 3; ++j)
            cand.col(i) -= vgram(ms, rm.col(j), cand.col(i)) * rm.col(j);

    // Gram-Schmidt in fixed index order with rank drops, so the resulting
    // basis is a function of the cell alone: any rule exact to degree 2k
    // produces the same vectors up to roundoff, and gamma coefficients keep
    // their meaning across call sites.
    RMPerpBasis basis;
    basis.k = k;
    basis.m_k = mk;
    basis.coeffs.resize(nv, mk);
    const double area = geom.area;
    int kept = 0;
    for (int i = 0; i < nv && kept < mk; ++i) {
        Eigen::VectorXd col = cand.col(i);
        for (int j = 0; j < kept; ++j)
            col -= (vgram(ms, basis.coeffs.col(j), col) / area) * basis.coeffs.col(j);
        const double n2 = vgram(ms, col, col);
        if (n2 <= 1e-20 * area) continue;  // dependent direction (inside RM + picked span)
        basis.coeffs.col(kept) = col * std::sqrt(area / n2);
        ++kept;
    }
    if (kept != mk)
        throw std::runtime_error("RM-perp Gram matrix numerically singular");
    return basis;
}

StrainOperator strain_operator(int p_degree, const CellGeometry& geom) {
    if (p_degree < 1) throw std::invalid_argument("strain_operator needs degree >= 1");
    const ScalarBasis sb(p_degree, geom);
    const int nin = sb.size();
    const int nout = scalar_basis_size(p_degree - 1);
    const Eigen::MatrixXd dx = sb.ddx().topRows(nout);
    const Eigen::MatrixXd dy = sb.ddy().topRows(nout);
    StrainOperator op;
    op.p_degree = p_degree;
    op.exx = Eigen::MatrixXd::Zero(nout, 2 * nin);
    op.eyy = Eigen::MatrixXd::Zero(nout, 2 * nin);
    op.gxy = Eigen::MatrixXd::Zero(nout, 2 * nin);
    op.exx.leftCols(nin) = dx;
    op.eyy.rightCols(nin) = dy;
    op.gxy.leftCols(nin) = dy;
    op.gxy.rightCols(nin) = dx;
    return op;
}

Eigen::MatrixXd scalar_mass(const ScalarBasis& basis, const QuadratureRule& rule) {
    const Eigen::MatrixXd values = basis.eval(rule.points);
    Eigen::MatrixXd ms = Eigen::MatrixXd::Zero(basis.size(), basis.size());
    for (int q = 0; q < rule.size(); ++q)
        ms += rule.weights[q] * values.row(q).transpose() * values.row(q);
    return ms;
}

Eigen::VectorXd l2_project_Pk(const std::function<Vec2(Vec2)>& f, int k,
                              const CellGeometry& geom, const QuadratureRule& rule) {
    const ScalarBasis sb(k, geom);
    const int nb = sb.size();
    const Eigen::MatrixXd values = sb.eval(rule.points);
    Eigen::MatrixXd ms = Eigen::MatrixXd::Zero(nb, nb);
    Eigen::VectorXd bx = Eigen::VectorXd::Zero(nb), by = Eigen::VectorXd::Zero(nb);
    for (int q = 0; q < rule.size(); ++q) {
        const double w = rule.weights[q];
        ms += w * values.row(q).transpose() * values.row(q);
        const Vec2 fq = f(rule.points[q]);
        bx += (w * fq.x) * values.row(q).transpose();
        by += (w * fq.y) * values.row(q).transpose();
    }
    Eigen::LDLT<Eigen::MatrixXd> chol(ms);
    if (chol.info() != Eigen::Success)
        throw std::runtime_error("l2_project_Pk: singular Gram matrix");
    Eigen::VectorXd coeffs(2 * nb);
    coeffs.head(nb) = chol.solve(bx);
    coeffs.tail(nb) = chol.solve(by);
    return coeffs;
}

Vec2 eval_vector_poly(const ScalarBasis& basis, const Eigen::VectorXd& coeffs, Vec2 x) {
    const int nb = basis.size();
    Vec2 v{0.0, 0.0};
    for (int i = 0; i < nb; ++i) {
        const double m = basis.eval_one(i, x);
        v.x += coeffs[i] * m;
        v.y += coeffs[nb + i] * m;
    }
    return v;
}

Eigen::MatrixXd edge_monomial_values(int k, const std::vector<double>& s) {
    Eigen::MatrixXd values(static_cast<int>(s.size()), k + 1);
    for (std::size_t p = 0; p < s.size(); ++p) {
        double v = 1.0;
        for (int m = 0; m <= k; ++m) {
            values(p, m) = v;
            v *= s[p];
        }
    }
    return values;
}

Eigen::MatrixXd edge_monomial_mass(int k, double len) {
    Eigen::MatrixXd m(k + 1, k + 1);
    for (int i = 0; i <= k; ++i)
        for (int j = 0; j <= k; ++j)
            m(i, j) = ((i + j) % 2 == 0) ? len / (i + j + 1) : 0.0;
    return m;
}

} // namespace hrvem
