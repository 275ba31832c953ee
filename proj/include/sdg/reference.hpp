#pragma once
// Exact and self-similar reference solutions.

#include <functional>
#include <vector>

#include "sdg/common.hpp"

namespace sdg {

struct Primitive1D {
    double rho = 1.0, u = 0.0, p = 1.0;
};

/// Exact solution of the 1D Euler Riemann problem for an ideal gas
/// (two-rarefaction / two-shock Newton solve for the star pressure).
class EulerRiemannExact {
public:
    EulerRiemannExact(double gamma, Primitive1D left, Primitive1D right);
    double p_star() const { return pstar_; }
    double u_star() const { return ustar_; }
    /// State on the ray x/t = s.
    Primitive1D sample(double s) const;

private:
    double f(double p, const Primitive1D& w, double c, double* df) const;
    double g_;
    Primitive1D L_, R_;
    double cL_, cR_;
    double pstar_ = 0, ustar_ = 0;
};

/// Entropy solution of a scalar 1D Riemann problem from the convex hull
/// (uL < uR) or concave hull (uL > uR) of the flux, sampled on n points.
class ScalarRiemannExact {
public:
    ScalarRiemannExact(std::function<double(double)> f, double uL, double uR, int n = 200001);
    double sample(double s) const;

private:
    double uL_, uR_;
    std::vector<double> u_, slope_;  ///< hull vertices and slopes of the following edge
};

/// Smooth isentropic solution for gamma = 3 with p = rho^3 and initial data
/// rho0(x) = 1 + amp sin(pi x), u0 = 0, periodic on [-1, 1].
Primitive1D isentropic_exact(double x, double t, double amp = 0.9999999);

/// Self-similar point blast in 1D (j = 1), cylindrical (j = 2) or spherical
/// (j = 3) symmetry with zero background pressure.
class SedovSolution {
public:
    SedovSolution(int j, double gamma, double rho0 = 1.0);
    /// E = alpha rho0 r_s^(j+2) / t^2, with E the total energy of the full
    /// line, plane or space.
    double alpha() const { return alpha_; }
    double shock_radius(double energy, double t) const;
    /// rho, radial velocity and pressure at radius r.
    Primitive1D sample(double r, double energy, double t) const;

private:
    int j_;
    double g_, rho0_, alpha_ = 0;
    std::vector<double> lam_, R_, U_, P_;  ///< increasing lambda
};

}  // namespace sdg
