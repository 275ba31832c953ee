#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "sdg/approximation.hpp"
#include "sdg/mesh.hpp"

using namespace sdg;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// Polynomial sum c_ab x^a y^b with total degree <= k.
struct MonoPoly {
    int k;
    std::vector<std::array<int, 2>> e;
    std::vector<double> c;
    double operator()(Vec2 p) const {
        double s = 0;
        for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * std::pow(p.x, e[i][0]) * std::pow(p.y, e[i][1]);
        return s;
    }
};

MonoPoly random_poly(int dim, int k, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-1, 1);
    MonoPoly p{k, {}, {}};
    for (int a = 0; a <= k; ++a)
        for (int b = 0; (dim == 2 ? a + b : b) <= (dim == 2 ? k : 0); ++b) {
            p.e.push_back({a, b});
            p.c.push_back(d(rng));
        }
    return p;
}

// Mean of a monomial polynomial over a CCW polygon via the boundary integral
// of x^(a+1) y^b / (a+1) dy.
double polygon_mean(const std::vector<Vec2>& poly, const MonoPoly& u) {
    QuadratureRule g = gauss_legendre(12);
    double area = 0, integral = 0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        Vec2 p0 = poly[i], p1 = poly[(i + 1) % poly.size()];
        area += 0.5 * cross(p0, p1);
        for (std::size_t q = 0; q < g.size(); ++q) {
            Vec2 x = p0 + g.points[q].x * (p1 - p0);
            double f = 0;
            for (std::size_t j = 0; j < u.c.size(); ++j)
                f += u.c[j] * std::pow(x.x, u.e[j][0] + 1) * std::pow(x.y, u.e[j][1]) / (u.e[j][0] + 1);
            integral += g.weights[q] * f * (p1.y - p0.y);
        }
    }
    return integral / area;
}

}  // namespace

TEST_CASE("Gauss-Legendre integrates monomials up to degree 2n-1") {
    for (int n = 1; n <= 12; ++n) {
        QuadratureRule r = gauss_legendre(n);
        double wsum = 0;
        for (double w : r.weights) {
            CHECK(w > 0);
            wsum += w;
        }
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
        for (int d = 0; d <= 2 * n - 1; ++d) {
            double s = 0;
            for (std::size_t q = 0; q < r.size(); ++q) s += r.weights[q] * std::pow(r.points[q].x, d);
            CHECK(s == doctest::Approx(1.0 / (d + 1)).epsilon(1e-13));
        }
    }
}

TEST_CASE("triangle rule is exact to its degree") {
    for (int deg = 0; deg <= 18; ++deg) {
        QuadratureRule r = triangle_rule(deg);
        double wsum = 0;
        for (double w : r.weights) {
            CHECK(w > 0);
            wsum += w;
        }
        CHECK(wsum == doctest::Approx(0.5).epsilon(1e-14));
        for (int a = 0; a <= deg; ++a)
            for (int b = 0; a + b <= deg; ++b) {
                double s = 0;
                for (std::size_t q = 0; q < r.size(); ++q)
                    s += r.weights[q] * std::pow(r.points[q].x, a) * std::pow(r.points[q].y, b);
                double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                CHECK(std::abs(s - exact) <= 1e-13);
            }
    }
}

TEST_CASE("Taylor basis is orthonormal with a constant first function") {
    for (int dim : {1, 2})
        for (int k = 0; k <= 8; ++k) {
            PolynomialBasis B(dim, k);
            QuadratureRule r = element_rule(dim, 2 * k + 4);
            double meas = dim == 1 ? 1.0 : 0.5;
            int n = B.size();
            std::vector<double> v(n);
            Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
            for (std::size_t q = 0; q < r.size(); ++q) {
                B.eval(r.points[q], v.data());
                CHECK(v[0] == 1.0);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) G(i, j) += r.weights[q] * v[i] * v[j] / meas;
            }
            CHECK((G - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
        }
}

TEST_CASE("basis derivatives match finite differences") {
    PolynomialBasis B(2, 4);
    int n = B.size();
    std::vector<double> gx(n), gy(n), hxx(n), hxy(n), hyy(n), vp(n), vm(n), gp(n), gm(n), dummy(n);
    Vec2 p{0.21, 0.37};
    const double h = 1e-6;
    B.grad(p, gx.data(), gy.data());
    B.hess(p, hxx.data(), hxy.data(), hyy.data());
    B.eval({p.x + h, p.y}, vp.data());
    B.eval({p.x - h, p.y}, vm.data());
    for (int i = 0; i < n; ++i) CHECK(gx[i] == doctest::Approx((vp[i] - vm[i]) / (2 * h)).epsilon(1e-7));
    B.eval({p.x, p.y + h}, vp.data());
    B.eval({p.x, p.y - h}, vm.data());
    for (int i = 0; i < n; ++i) CHECK(gy[i] == doctest::Approx((vp[i] - vm[i]) / (2 * h)).epsilon(1e-7));
    B.grad({p.x, p.y + h}, gp.data(), dummy.data());
    B.grad({p.x, p.y - h}, gm.data(), dummy.data());
    for (int i = 0; i < n; ++i) CHECK(hxy[i] == doctest::Approx((gp[i] - gm[i]) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("projection onto submeans matches boundary-integral oracle") {
    std::mt19937_64 rng(3);
    for (auto scheme : {SubdivisionScheme::QuadTri, SubdivisionScheme::VoronoiType,
                        SubdivisionScheme::TriUniform})
        for (int k = 1; k <= 4; ++k) {
            RefSubdivision sub = build_subdivision(scheme, k);
            CellOperators ops = build_cell_operators(sub, k);
            MonoPoly u = random_poly(2, k, rng);
            std::vector<double> vals(ops.volume_rule.size());
            for (std::size_t q = 0; q < vals.size(); ++q) vals[q] = u(ops.volume_rule.points[q]);
            auto U = l2_project_values(ops, vals);
            auto Ubar = project_to_submeans(ops, U);
            for (int m = 0; m < ops.ns; ++m) {
                std::vector<Vec2> poly;
                for (int v : sub.polygons[m]) poly.push_back(sub.vertices[v]);
                CHECK(std::abs(Ubar[m] - polygon_mean(poly, u)) < 1e-12);
            }
        }
}

TEST_CASE("1D projection of u = x on two subcells") {
    RefSubdivision sub = build_subdivision(SubdivisionScheme::Uniform1D, 1);
    CellOperators ops = build_cell_operators(sub, 1);
    std::vector<double> vals;
    for (const auto& p : ops.volume_rule.points) vals.push_back(p.x);
    auto Ubar = project_to_submeans(ops, l2_project_values(ops, vals));
    CHECK(Ubar[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(Ubar[1] == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("least-squares recovery") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-1, 1);
    for (auto scheme : {SubdivisionScheme::QuadTri, SubdivisionScheme::VoronoiType,
                        SubdivisionScheme::TriUniform, SubdivisionScheme::Uniform1D})
        for (int k = 1; k <= 5; ++k) {
            RefSubdivision sub = build_subdivision(scheme, k);
            CellOperators ops = build_cell_operators(sub, k);
            std::vector<double> U(ops.nk);
            for (auto& x : U) x = d(rng);
            auto back = recover_moments(ops, project_to_submeans(ops, U));
            for (int j = 0; j < ops.nk; ++j) CHECK(std::abs(back[j] - U[j]) < 1e-11);

            Eigen::MatrixXd P(ops.ns, ops.nk);
            for (int i = 0; i < ops.ns; ++i)
                for (int j = 0; j < ops.nk; ++j) P(i, j) = ops.P(i, j);
            std::vector<double> ub(ops.ns);
            for (auto& x : ub) x = d(rng);
            auto Ur = recover_moments(ops, ub);
            Eigen::VectorXd res(ops.ns);
            for (int i = 0; i < ops.ns; ++i) {
                res(i) = ub[i];
                for (int j = 0; j < ops.nk; ++j) res(i) -= P(i, j) * Ur[j];
            }
            CHECK((P.transpose() * res).cwiseAbs().maxCoeff() < 1e-11);
            if (ops.ns == ops.nk) {
                Eigen::VectorXd direct = P.partialPivLu().solve(Eigen::Map<Eigen::VectorXd>(ub.data(), ops.ns));
                for (int j = 0; j < ops.nk; ++j) CHECK(std::abs(direct(j) - Ur[j]) < 1e-12);
            }
        }
}

TEST_CASE("sub-resolution moments") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> d(-1, 1);
    for (auto scheme : {SubdivisionScheme::QuadTri, SubdivisionScheme::VoronoiType,
                        SubdivisionScheme::TriUniform, SubdivisionScheme::Uniform1D})
        for (int k = 1; k <= 4; ++k) {
            RefSubdivision sub = build_subdivision(scheme, k);
            CellOperators ops = build_cell_operators(sub, k);
            std::vector<double> V(ops.nk, 0.0);
            V[0] = 2.5;
            auto v = subresolution_moments(ops, V);
            for (double x : v) CHECK(x == doctest::Approx(2.5).epsilon(1e-12));

            for (auto& x : V) x = d(rng);
            v = subresolution_moments(ops, V);
            double lhs = 0;
            for (int m = 0; m < ops.ns; ++m) lhs += sub.area[m] * v[m];
            CHECK(lhs == doctest::Approx(sub.measure * V[0]).epsilon(1e-12));
            // Defining relation: sum_m |S_m| v_m (P)_mp = |w| V_p.
            for (int p = 0; p < ops.nk; ++p) {
                double s = 0;
                for (int m = 0; m < ops.ns; ++m) s += sub.area[m] * v[m] * ops.P(m, p);
                CHECK(std::abs(s - sub.measure * V[p]) < 1e-11);
            }
        }
}

TEST_CASE("1D k=1 sub-resolution moments match a dense solve") {
    RefSubdivision sub = build_subdivision(SubdivisionScheme::Uniform1D, 1);
    CellOperators ops = build_cell_operators(sub, 1);
    std::vector<double> V{0.3, -1.2};
    auto v = subresolution_moments(ops, V);
    Eigen::Matrix2d DP;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) DP(i, j) = 0.5 * ops.P(i, j);
    Eigen::Vector2d rhs(V[0], V[1]);
    Eigen::Vector2d ref = DP.transpose().lu().solve(rhs);
    CHECK(v[0] == doctest::Approx(ref(0)).epsilon(1e-13));
    CHECK(v[1] == doctest::Approx(ref(1)).epsilon(1e-13));
}

TEST_CASE("symmetric pseudoinverse of a 2x2 Laplacian") {
    Matrix L(2, 2);
    L(0, 0) = 1;
    L(0, 1) = -1;
    L(1, 0) = -1;
    L(1, 1) = 1;
    int kd = 0;
    Matrix P = symmetric_pseudoinverse(L, 1e-12, &kd);
    CHECK(kd == 1);
    CHECK(P(0, 0) == doctest::Approx(0.25));
    CHECK(P(0, 1) == doctest::Approx(-0.25));
    CHECK(P(1, 1) == doctest::Approx(0.25));
}
