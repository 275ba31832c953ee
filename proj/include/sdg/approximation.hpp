#pragma once
// Quadrature, orthonormal Taylor bases and the per-subdivision operator
// algebra (projection onto submeans, least-squares recovery, sub-resolution
// moments, reconstruction matrices).

#include <array>
#include <functional>
#include <vector>

#include "sdg/common.hpp"

namespace sdg {

struct RefSubdivision;

/// Points and weights on a reference element. Weights sum to the element measure
/// (1 for [0,1], 1/2 for the unit right triangle).
struct QuadratureRule {
    int dim = 1;
    int degree = 0;
    std::vector<Vec2> points;
    std::vector<double> weights;
    std::size_t size() const { return weights.size(); }
};

/// Gauss-Legendre rule with n points on [0,1].
QuadratureRule gauss_legendre(int n);
/// Smallest Gauss-Legendre rule on [0,1] exact up to `degree`.
QuadratureRule interval_rule(int degree);
/// Collapsed Gauss rule on the unit triangle (0,0),(1,0),(0,1) exact up to `degree`.
QuadratureRule triangle_rule(int degree);
/// Rule on the reference element of the given dimension.
QuadratureRule element_rule(int dim, int degree);

/// Integrate f over the triangle (a,b,c) using a reference rule.
double integrate_triangle(const QuadratureRule& rule, Vec2 a, Vec2 b, Vec2 c,
                          const std::function<double(Vec2)>& f);

/// Orthonormalized Taylor basis on the reference element.
///
/// sigma_0 == 1 and (1/|T|) * int_T sigma_i sigma_j = delta_ij.
class PolynomialBasis {
public:
    PolynomialBasis(int dim, int degree);

    int dim() const { return dim_; }
    int degree() const { return k_; }
    int size() const { return n_; }

    static int dimension(int dim, int degree) {
        return dim == 1 ? degree + 1 : (degree + 1) * (degree + 2) / 2;
    }

    void eval(Vec2 xi, double* out) const;
    void grad(Vec2 xi, double* dxi, double* deta) const;
    /// Second derivatives d2/dxi2, d2/dxideta, d2/deta2.
    void hess(Vec2 xi, double* dxx, double* dxy, double* dyy) const;

private:
    void monomials(Vec2 xi, double* m, int dx, int dy) const;

    int dim_;
    int k_;
    int n_;
    Vec2 center_;
    std::vector<std::array<int, 2>> exps_;
    std::vector<double> coef_;  // n_ x n_ row-major: sigma_i = sum_j coef[i][j] m_j
};

/// Dense row-major matrix with a minimal interface.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;
    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}
    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
    const double* data() const { return a.data(); }
    Matrix transposed() const;
};

/// Reference-element operators shared by every cell using a given
/// (subdivision, degree) pair. Affine maps leave all of them invariant.
struct CellOperators {
    int dim = 1;
    int k = 0;
    int nk = 0;
    int ns = 0;
    int nf = 0;  ///< interior subcell faces

    PolynomialBasis basis{1, 0};
    QuadratureRule volume_rule;          ///< exact to degree 2k
    QuadratureRule edge_rule;            ///< points on [0,1], exact to degree 2k+1

    Matrix P;        ///< ns x nk, subcell means of the basis functions
    Matrix R;        ///< nk x ns, (P^T P)^{-1} P^T
    Matrix S;        ///< ns x nk, sub-resolution moments from L2 moments
    Matrix G;        ///< nf x nk, -A^T L^+ Dhat P
    Matrix H;        ///< nf x ns, -A^T L^+
    Matrix vol_val;  ///< nq x nk basis values at volume points
    Matrix vol_dxi;  ///< nk x nq weighted reference gradients (xi) at volume points
    Matrix vol_deta; ///< nk x nq weighted reference gradients (eta)
    Matrix vol_valT; ///< nk x nq weighted basis values (for L2 projections)

    /// Trace points per local face: nseg * nq points, in the cell's own edge order.
    std::vector<Matrix> trace_val;   ///< per local face: (nseg*nq) x nk
    std::vector<Matrix> trace_valT;  ///< per local face: nk x (nseg*nq)
    std::vector<std::vector<Vec2>> trace_pts;     ///< reference coordinates
    std::vector<std::vector<double>> trace_wts;   ///< fraction of the face measure
    int nseg = 0;
    int nq_edge = 0;

    /// Subcell means of first and second reference derivatives: ns x nk each.
    Matrix Pxi, Peta, Pxixi, Pxieta, Petaeta;
    /// Cell means of the same quantities: 1 x nk each.
    Matrix Cxi, Ceta, Cxixi, Cxieta, Cetaeta;
};

/// Build reference operators for one subdivision at degree k.
CellOperators build_cell_operators(const RefSubdivision& sub, int k);

/// Ubar = P U for one variable.
std::vector<double> project_to_submeans(const CellOperators& ops, const std::vector<double>& U);
/// U = (P^T P)^{-1} P^T Ubar for one variable.
std::vector<double> recover_moments(const CellOperators& ops, const std::vector<double>& Ubar);
/// Sub-resolution moments v such that (Dhat P)^T v = V (minimum norm when ns > nk).
std::vector<double> subresolution_moments(const CellOperators& ops, const std::vector<double>& V);

/// L2 projection of a pointwise function evaluated at volume points.
/// `values` holds nq entries; returns nk normalized moments.
std::vector<double> l2_project_values(const CellOperators& ops, const std::vector<double>& values);

/// Moore-Penrose inverse of a symmetric positive semidefinite matrix
/// via eigendecomposition with relative cutoff.
Matrix symmetric_pseudoinverse(const Matrix& L, double rel_cutoff, int* kernel_dim);

}  // namespace sdg
