#include "sdg/approximation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "sdg/mesh.hpp"

namespace sdg {

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

EMat to_eigen(const Matrix& m) {
    EMat e(m.rows, m.cols);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) e(i, j) = m(i, j);
    return e;
}

Matrix from_eigen(const EMat& e) {
    Matrix m(static_cast<int>(e.rows()), static_cast<int>(e.cols()));
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) m(i, j) = e(i, j);
    return m;
}

double ipow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}

}  // namespace

Matrix Matrix::transposed() const {
    Matrix t(cols, rows);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
    return t;
}

QuadratureRule gauss_legendre(int n) {
    // Legendre P_n and its derivative at x
    auto legendre = [n](double x, double& dp) {
        double p0 = 1.0, p1 = x;
        for (int j = 2; j <= n; ++j) {
            double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        return p1;
    };
    QuadratureRule r;
    r.dim = 1;
    r.degree = 2 * n - 1;
    r.points.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double dx = legendre(x, dp) / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        legendre(x, dp);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.points[n - 1 - i] = {0.5 * (x + 1.0), 0.0};
        r.weights[n - 1 - i] = 0.5 * w;
    }
    // enforce exact symmetry of nodes and weights
    for (int i = 0; i < n / 2; ++i) {
        double a = 0.5 * (r.points[i].x + 1.0 - r.points[n - 1 - i].x);
        r.points[i].x = a;
        r.points[n - 1 - i].x = 1.0 - a;
        double w = 0.5 * (r.weights[i] + r.weights[n - 1 - i]);
        r.weights[i] = r.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.points[n / 2].x = 0.5;
    return r;
}

QuadratureRule interval_rule(int degree) {
    int n = std::max(1, (degree + 2) / 2);
    QuadratureRule r = gauss_legendre(n);
    r.degree = 2 * n - 1;
    return r;
}

QuadratureRule triangle_rule(int degree) {
    int n = std::max(1, (degree + 3) / 2);
    QuadratureRule g = gauss_legendre(n);
    QuadratureRule r;
    r.dim = 2;
    r.degree = degree;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double s = g.points[i].x, t = g.points[j].x;
            r.points.push_back({s * (1.0 - t), t});
            r.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - t));
        }
    }
    return r;
}

QuadratureRule element_rule(int dim, int degree) {
    return dim == 1 ? interval_rule(degree) : triangle_rule(degree);
}

double integrate_triangle(const QuadratureRule& rule, Vec2 a, Vec2 b, Vec2 c,
                          const std::function<double(Vec2)>& f) {
    Vec2 e1 = b - a, e2 = c - a;
    double det = std::abs(cross(e1, e2));
    double s = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        Vec2 p = rule.points[q];
        s += rule.weights[q] * f(a + p.x * e1 + p.y * e2);
    }
    return s * det;
}

PolynomialBasis::PolynomialBasis(int dim, int degree)
    : dim_(dim), k_(degree), n_(dimension(dim, degree)) {
    center_ = dim == 1 ? Vec2{0.5, 0.0} : Vec2{1.0 / 3.0, 1.0 / 3.0};
    for (int d = 0; d <= degree; ++d) {
        if (dim == 1) {
            exps_.push_back({d, 0});
        } else {
            for (int b = 0; b <= d; ++b) exps_.push_back({d - b, b});
        }
    }
    QuadratureRule rule = element_rule(dim, 2 * degree + 2);
    double meas = dim == 1 ? 1.0 : 0.5;
    coef_.assign(static_cast<std::size_t>(n_) * n_, 0.0);
    for (int i = 0; i < n_; ++i) coef_[static_cast<std::size_t>(i) * n_ + i] = 1.0;

    std::vector<double> m(n_);
    // two orthonormalization passes for robustness at high degree
    for (int pass = 0; pass < 2; ++pass) {
        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n_, n_);
        std::vector<double> v(n_);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            eval(rule.points[q], v.data());
            for (int i = 0; i < n_; ++i)
                for (int j = 0; j < n_; ++j) gram(i, j) += rule.weights[q] * v[i] * v[j] / meas;
        }
        Eigen::LLT<Eigen::MatrixXd> llt(gram);
        Eigen::MatrixXd Linv = llt.matrixL().solve(Eigen::MatrixXd::Identity(n_, n_));
        Eigen::MatrixXd C(n_, n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) C(i, j) = coef_[static_cast<std::size_t>(i) * n_ + j];
        Eigen::MatrixXd Cn = Linv * C;
        // fix sign/scale so that sigma_0 == 1 exactly
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) coef_[static_cast<std::size_t>(i) * n_ + j] = Cn(i, j);
    }
    double s0 = coef_[0];
    for (int j = 0; j < n_; ++j) coef_[j] = (j == 0) ? 1.0 : coef_[j] / s0;
}

void PolynomialBasis::monomials(Vec2 xi, double* m, int dx, int dy) const {
    double u = xi.x - center_.x, v = xi.y - center_.y;
    for (int j = 0; j < n_; ++j) {
        int a = exps_[j][0], b = exps_[j][1];
        if (a < dx || b < dy) {
            m[j] = 0.0;
            continue;
        }
        double fa = 1.0, fb = 1.0;
        for (int t = 0; t < dx; ++t) fa *= (a - t);
        for (int t = 0; t < dy; ++t) fb *= (b - t);
        m[j] = fa * fb * ipow(u, a - dx) * ipow(v, b - dy);
    }
}

void PolynomialBasis::eval(Vec2 xi, double* out) const {
    double m[64];
    monomials(xi, m, 0, 0);
    for (int i = 0; i < n_; ++i) {
        double s = 0.0;
        const double* c = &coef_[static_cast<std::size_t>(i) * n_];
        for (int j = 0; j <= i; ++j) s += c[j] * m[j];
        out[i] = s;
    }
}

void PolynomialBasis::grad(Vec2 xi, double* dxi, double* deta) const {
    double mx[64], my[64];
    monomials(xi, mx, 1, 0);
    monomials(xi, my, 0, 1);
    for (int i = 0; i < n_; ++i) {
        double sx = 0.0, sy = 0.0;
        const double* c = &coef_[static_cast<std::size_t>(i) * n_];
        for (int j = 0; j <= i; ++j) {
            sx += c[j] * mx[j];
            sy += c[j] * my[j];
        }
        dxi[i] = sx;
        deta[i] = sy;
    }
}

void PolynomialBasis::hess(Vec2 xi, double* dxx, double* dxy, double* dyy) const {
    double mxx[64], mxy[64], myy[64];
    monomials(xi, mxx, 2, 0);
    monomials(xi, mxy, 1, 1);
    monomials(xi, myy, 0, 2);
    for (int i = 0; i < n_; ++i) {
        double a = 0.0, b = 0.0, c2 = 0.0;
        const double* c = &coef_[static_cast<std::size_t>(i) * n_];
        for (int j = 0; j <= i; ++j) {
            a += c[j] * mxx[j];
            b += c[j] * mxy[j];
            c2 += c[j] * myy[j];
        }
        dxx[i] = a;
        dxy[i] = b;
        dyy[i] = c2;
    }
}

Matrix symmetric_pseudoinverse(const Matrix& L, double rel_cutoff, int* kernel_dim) {
    Eigen::MatrixXd e(L.rows, L.cols);
    for (int i = 0; i < L.rows; ++i)
        for (int j = 0; j < L.cols; ++j) e(i, j) = L(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e);
    const auto& lam = es.eigenvalues();
    const auto& V = es.eigenvectors();
    double lmax = lam.cwiseAbs().maxCoeff();
    double cut = rel_cutoff * lmax;
    Eigen::MatrixXd pinv = Eigen::MatrixXd::Zero(L.rows, L.cols);
    int kdim = 0;
    for (int i = 0; i < lam.size(); ++i) {
        if (std::abs(lam(i)) <= cut) {
            ++kdim;
            continue;
        }
        pinv += (1.0 / lam(i)) * V.col(i) * V.col(i).transpose();
    }
    if (kernel_dim) *kernel_dim = kdim;
    Matrix out(L.rows, L.cols);
    for (int i = 0; i < L.rows; ++i)
        for (int j = 0; j < L.cols; ++j) out(i, j) = 0.5 * (pinv(i, j) + pinv(j, i));
    return out;
}

namespace {

Vec2 edge_point(int dim, int e, double t) {
    if (dim == 1) return {e == 0 ? 0.0 : 1.0, 0.0};
    switch (e) {
        case 0: return {t, 0.0};
        case 1: return {1.0 - t, t};
        default: return {0.0, 1.0 - t};
    }
}

// Integrate callback(point, weight) over one reference subcell with a rule of given degree.
template <class F>
void for_subcell_points(const RefSubdivision& sub, int m, int degree, F&& f) {
    if (sub.dim == 1) {
        QuadratureRule g = interval_rule(degree);
        double a = sub.vertices[sub.polygons[m][0]].x;
        double b = sub.vertices[sub.polygons[m][1]].x;
        for (std::size_t q = 0; q < g.size(); ++q)
            f(Vec2{a + (b - a) * g.points[q].x, 0.0}, g.weights[q] * (b - a));
        return;
    }
    QuadratureRule t = triangle_rule(degree);
    for (const auto& tri : sub.pieces[m]) {
        Vec2 a = sub.vertices[tri[0]], b = sub.vertices[tri[1]], c = sub.vertices[tri[2]];
        Vec2 e1 = b - a, e2 = c - a;
        double det = std::abs(cross(e1, e2));
        for (std::size_t q = 0; q < t.size(); ++q) {
            Vec2 p = t.points[q];
            f(a + p.x * e1 + p.y * e2, t.weights[q] * det);
        }
    }
}

}  // namespace

CellOperators build_cell_operators(const RefSubdivision& sub, int k) {
    CellOperators ops;
    ops.dim = sub.dim;
    ops.k = k;
    ops.basis = PolynomialBasis(sub.dim, k);
    ops.nk = ops.basis.size();
    ops.ns = sub.ns;
    ops.nf = sub.nf();
    ops.volume_rule = element_rule(sub.dim, 2 * k);
    ops.edge_rule = interval_rule(2 * k + 1);
    const int nk = ops.nk, ns = ops.ns, nf = ops.nf;
    const double meas = sub.measure;

    std::vector<double> v(nk), gx(nk), gy(nk), hxx(nk), hxy(nk), hyy(nk);

    ops.P = Matrix(ns, nk);
    ops.Pxi = Matrix(ns, nk);
    ops.Peta = Matrix(ns, nk);
    ops.Pxixi = Matrix(ns, nk);
    ops.Pxieta = Matrix(ns, nk);
    ops.Petaeta = Matrix(ns, nk);
    for (int m = 0; m < ns; ++m) {
        for_subcell_points(sub, m, 2 * k + 2, [&](Vec2 p, double w) {
            ops.basis.eval(p, v.data());
            ops.basis.grad(p, gx.data(), gy.data());
            ops.basis.hess(p, hxx.data(), hxy.data(), hyy.data());
            for (int j = 0; j < nk; ++j) {
                ops.P(m, j) += w * v[j];
                ops.Pxi(m, j) += w * gx[j];
                ops.Peta(m, j) += w * gy[j];
                ops.Pxixi(m, j) += w * hxx[j];
                ops.Pxieta(m, j) += w * hxy[j];
                ops.Petaeta(m, j) += w * hyy[j];
            }
        });
        for (int j = 0; j < nk; ++j) {
            ops.P(m, j) /= sub.area[m];
            ops.Pxi(m, j) /= sub.area[m];
            ops.Peta(m, j) /= sub.area[m];
            ops.Pxixi(m, j) /= sub.area[m];
            ops.Pxieta(m, j) /= sub.area[m];
            ops.Petaeta(m, j) /= sub.area[m];
        }
    }
    ops.Cxi = Matrix(1, nk);
    ops.Ceta = Matrix(1, nk);
    ops.Cxixi = Matrix(1, nk);
    ops.Cxieta = Matrix(1, nk);
    ops.Cetaeta = Matrix(1, nk);
    for (int m = 0; m < ns; ++m) {
        double f = sub.area[m] / meas;
        for (int j = 0; j < nk; ++j) {
            ops.Cxi(0, j) += f * ops.Pxi(m, j);
            ops.Ceta(0, j) += f * ops.Peta(m, j);
            ops.Cxixi(0, j) += f * ops.Pxixi(m, j);
            ops.Cxieta(0, j) += f * ops.Pxieta(m, j);
            ops.Cetaeta(0, j) += f * ops.Petaeta(m, j);
        }
    }

    EMat P = to_eigen(ops.P);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(P);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) < 1e-10 * sv(0))
        throw ConfigError("inadmissible subdivision: P^T P is singular");
    EMat PtP = P.transpose() * P;
    EMat R = PtP.ldlt().solve(EMat(P.transpose()));
    ops.R = from_eigen(R);

    EMat Dhat = EMat::Zero(ns, ns);
    for (int m = 0; m < ns; ++m) Dhat(m, m) = sub.area[m] / meas;
    EMat A = to_eigen(sub.A);
    EMat Lp = to_eigen(sub.Lpinv);
    EMat H = -(A.transpose() * Lp);
    ops.H = from_eigen(H);
    ops.G = from_eigen(H * Dhat * P);

    EMat DP = Dhat * P;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(DP.transpose());
    cod.setThreshold(1e-12);
    ops.S = from_eigen(cod.pseudoInverse());

    const QuadratureRule& vr = ops.volume_rule;
    const int nq = static_cast<int>(vr.size());
    ops.vol_val = Matrix(nq, nk);
    ops.vol_dxi = Matrix(nk, nq);
    ops.vol_deta = Matrix(nk, nq);
    ops.vol_valT = Matrix(nk, nq);
    for (int q = 0; q < nq; ++q) {
        ops.basis.eval(vr.points[q], v.data());
        ops.basis.grad(vr.points[q], gx.data(), gy.data());
        for (int j = 0; j < nk; ++j) {
            ops.vol_val(q, j) = v[j];
            ops.vol_dxi(j, q) = vr.weights[q] * gx[j];
            ops.vol_deta(j, q) = vr.weights[q] * gy[j];
            ops.vol_valT(j, q) = vr.weights[q] * v[j] / meas;
        }
    }

    const int nlf = sub.dim == 1 ? 2 : 3;
    ops.nseg = sub.nseg();
    ops.nq_edge = sub.dim == 1 ? 1 : static_cast<int>(ops.edge_rule.size());
    ops.trace_val.resize(nlf);
    ops.trace_valT.resize(nlf);
    ops.trace_pts.resize(nlf);
    ops.trace_wts.resize(nlf);
    for (int e = 0; e < nlf; ++e) {
        const int npts = ops.nseg * ops.nq_edge;
        ops.trace_val[e] = Matrix(npts, nk);
        for (int s = 0; s < ops.nseg; ++s) {
            const auto& seg = sub.edge_segments[e][s];
            for (int q = 0; q < ops.nq_edge; ++q) {
                double t, w;
                if (sub.dim == 1) {
                    t = 0.0;
                    w = 1.0;
                } else {
                    t = seg.t0 + (seg.t1 - seg.t0) * ops.edge_rule.points[q].x;
                    w = (seg.t1 - seg.t0) * ops.edge_rule.weights[q];
                }
                Vec2 p = edge_point(sub.dim, e, t);
                ops.trace_pts[e].push_back(p);
                ops.trace_wts[e].push_back(w);
                ops.basis.eval(p, v.data());
                for (int j = 0; j < nk; ++j) ops.trace_val[e](s * ops.nq_edge + q, j) = v[j];
            }
        }
        ops.trace_valT[e] = ops.trace_val[e].transposed();
    }
    (void)nf;
    return ops;
}

std::vector<double> project_to_submeans(const CellOperators& ops, const std::vector<double>& U) {
    std::vector<double> out(ops.ns, 0.0);
    for (int m = 0; m < ops.ns; ++m)
        for (int j = 0; j < ops.nk; ++j) out[m] += ops.P(m, j) * U[j];
    return out;
}

std::vector<double> recover_moments(const CellOperators& ops, const std::vector<double>& Ubar) {
    std::vector<double> out(ops.nk, 0.0);
    for (int j = 0; j < ops.nk; ++j)
        for (int m = 0; m < ops.ns; ++m) out[j] += ops.R(j, m) * Ubar[m];
    return out;
}

std::vector<double> subresolution_moments(const CellOperators& ops, const std::vector<double>& V) {
    std::vector<double> out(ops.ns, 0.0);
    for (int m = 0; m < ops.ns; ++m)
        for (int j = 0; j < ops.nk; ++j) out[m] += ops.S(m, j) * V[j];
    return out;
}

std::vector<double> l2_project_values(const CellOperators& ops, const std::vector<double>& values) {
    std::vector<double> out(ops.nk, 0.0);
    for (int j = 0; j < ops.nk; ++j)
        for (std::size_t q = 0; q < values.size(); ++q) out[j] += ops.vol_valT(j, q) * values[q];
    return out;
}

}  // namespace sdg
