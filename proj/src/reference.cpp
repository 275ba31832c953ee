#include "sdg/reference.hpp"

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>

namespace sdg {

EulerRiemannExact::EulerRiemannExact(double gamma, Primitive1D left, Primitive1D right)
    : g_(gamma), L_(left), R_(right) {
    cL_ = std::sqrt(g_ * L_.p / L_.rho);
    cR_ = std::sqrt(g_ * R_.p / R_.rho);
    const double du = R_.u - L_.u;
    if (2.0 / (g_ - 1) * (cL_ + cR_) <= du) throw SolverAbort("Riemann problem generates vacuum");
    // two-rarefaction initial guess
    const double z = (g_ - 1) / (2 * g_);
    double p = std::pow((cL_ + cR_ - 0.5 * (g_ - 1) * du) / (cL_ / std::pow(L_.p, z) + cR_ / std::pow(R_.p, z)), 1 / z);
    p = std::max(p, 1e-14);
    for (int it = 0; it < 100; ++it) {
        double dfl, dfr;
        double F = f(p, L_, cL_, &dfl) + f(p, R_, cR_, &dfr) + du;
        double pn = p - F / (dfl + dfr);
        if (pn <= 0) pn = 0.1 * p;
        if (std::abs(pn - p) < 1e-15 * (pn + p)) {
            p = pn;
            break;
        }
        p = pn;
    }
    pstar_ = p;
    double dfl, dfr;
    ustar_ = 0.5 * (L_.u + R_.u) + 0.5 * (f(p, R_, cR_, &dfr) - f(p, L_, cL_, &dfl));
}

double EulerRiemannExact::f(double p, const Primitive1D& w, double c, double* df) const {
    if (p > w.p) {
        const double A = 2 / ((g_ + 1) * w.rho), B = (g_ - 1) / (g_ + 1) * w.p;
        const double q = std::sqrt(A / (p + B));
        *df = q * (1 - 0.5 * (p - w.p) / (p + B));
        return (p - w.p) * q;
    }
    const double r = std::pow(p / w.p, (g_ - 1) / (2 * g_));
    *df = 1.0 / (w.rho * c) * std::pow(p / w.p, -(g_ + 1) / (2 * g_));
    return 2 * c / (g_ - 1) * (r - 1);
}

Primitive1D EulerRiemannExact::sample(double s) const {
    const double g = g_;
    if (s <= ustar_) {
        const Primitive1D& w = L_;
        const double c = cL_;
        if (pstar_ > w.p) {
            const double pr = pstar_ / w.p;
            const double S = w.u - c * std::sqrt((g + 1) / (2 * g) * pr + (g - 1) / (2 * g));
            if (s <= S) return w;
            return {w.rho * (pr + (g - 1) / (g + 1)) / ((g - 1) / (g + 1) * pr + 1), ustar_, pstar_};
        }
        const double head = w.u - c;
        const double cs = c * std::pow(pstar_ / w.p, (g - 1) / (2 * g));
        const double tail = ustar_ - cs;
        if (s <= head) return w;
        if (s >= tail) return {w.rho * std::pow(pstar_ / w.p, 1 / g), ustar_, pstar_};
        const double k = 2 / (g + 1) + (g - 1) / ((g + 1) * c) * (w.u - s);
        return {w.rho * std::pow(k, 2 / (g - 1)), 2 / (g + 1) * (c + 0.5 * (g - 1) * w.u + s),
                w.p * std::pow(k, 2 * g / (g - 1))};
    }
    const Primitive1D& w = R_;
    const double c = cR_;
    if (pstar_ > w.p) {
        const double pr = pstar_ / w.p;
        const double S = w.u + c * std::sqrt((g + 1) / (2 * g) * pr + (g - 1) / (2 * g));
        if (s >= S) return w;
        return {w.rho * (pr + (g - 1) / (g + 1)) / ((g - 1) / (g + 1) * pr + 1), ustar_, pstar_};
    }
    const double head = w.u + c;
    const double cs = c * std::pow(pstar_ / w.p, (g - 1) / (2 * g));
    const double tail = ustar_ + cs;
    if (s >= head) return w;
    if (s <= tail) return {w.rho * std::pow(pstar_ / w.p, 1 / g), ustar_, pstar_};
    const double k = 2 / (g + 1) - (g - 1) / ((g + 1) * c) * (w.u - s);
    return {w.rho * std::pow(k, 2 / (g - 1)), 2 / (g + 1) * (-c + 0.5 * (g - 1) * w.u + s),
            w.p * std::pow(k, 2 * g / (g - 1))};
}

ScalarRiemannExact::ScalarRiemannExact(std::function<double(double)> f, double uL, double uR, int n)
    : uL_(uL), uR_(uR) {
    if (uL == uR) return;
    // Points ordered from uL to uR; keeping slopes increasing along the chain
    // gives the lower hull for uL < uR and the upper hull for uL > uR.
    std::vector<double> hu, hf;
    for (int i = 0; i < n; ++i) {
        const double u = uL + (uR - uL) * i / (n - 1);
        const double fu = f(u);
        while (hu.size() >= 2) {
            const std::size_t m = hu.size();
            const double s1 = (hf[m - 1] - hf[m - 2]) / (hu[m - 1] - hu[m - 2]);
            const double s2 = (fu - hf[m - 1]) / (u - hu[m - 1]);
            if (s1 >= s2) {
                hu.pop_back();
                hf.pop_back();
            } else {
                break;
            }
        }
        hu.push_back(u);
        hf.push_back(fu);
    }
    u_ = hu;
    for (std::size_t i = 0; i + 1 < hu.size(); ++i) slope_.push_back((hf[i + 1] - hf[i]) / (hu[i + 1] - hu[i]));
}

double ScalarRiemannExact::sample(double s) const {
    if (u_.empty()) return uL_;
    auto it = std::upper_bound(slope_.begin(), slope_.end(), s);
    return u_[static_cast<std::size_t>(it - slope_.begin())];
}

Primitive1D isentropic_exact(double x, double t, double amp) {
    const double s3 = std::sqrt(3.0);
    auto w0 = [&](double y, double sgn, double* dw) {
        *dw = sgn * s3 * amp * M_PI * std::cos(M_PI * y);
        return sgn * s3 * (1 + amp * std::sin(M_PI * y));
    };
    double w[2];
    const double sg[2] = {1.0, -1.0};
    for (int k = 0; k < 2; ++k) {
        double dw;
        double v = w0(x, sg[k], &dw);
        for (int it = 0; it < 200; ++it) {
            double val = w0(x - v * t, sg[k], &dw);
            double g = v - val, dg = 1 + t * dw;
            double vn = v - g / dg;
            if (std::abs(vn - v) < 1e-15 * (1 + std::abs(v))) {
                v = vn;
                break;
            }
            v = vn;
        }
        w[k] = v;
    }
    const double rho = (w[0] - w[1]) / (2 * s3);
    return {rho, 0.5 * (w[0] + w[1]), rho * rho * rho};
}

SedovSolution::SedovSolution(int j, double gamma, double rho0) : j_(j), g_(gamma), rho0_(rho0) {
    using State = std::array<double, 4>;  // U, R, P, energy integral
    const double delta = 2.0 / (j + 2), a = (1 - delta) / delta, nu1 = j - 1, g = gamma;
    auto rhs = [&](const State& y, State& dy, double lam) {
        const double U = y[0], R = y[1], P = y[2];
        const double W = U - lam;
        const double dU = (a * U * W - (P / R) * (2 * a - g * nu1 * U / lam)) / (W * W - g * P / R);
        const double dR = -R * (dU + nu1 * U / lam) / W;
        const double dP = P * (2 * a / W + g * dR / R);
        dy[0] = dU;
        dy[1] = dR;
        dy[2] = dP;
        dy[3] = (0.5 * R * U * U + P / (g - 1)) * std::pow(lam, j - 1);
    };
    State y = {2 / (g + 1), (g + 1) / (g - 1), 2 / (g + 1), 0.0};
    std::vector<double> lam, Rv, Uv, Pv;
    auto obs = [&](const State& s, double l) {
        lam.push_back(l);
        Uv.push_back(s[0]);
        Rv.push_back(s[1]);
        Pv.push_back(s[2]);
    };
    namespace ode = boost::numeric::odeint;
    auto stepper = ode::make_dense_output(1e-12, 1e-12, ode::runge_kutta_dopri5<State>());
    const double lmin = 1e-6;
    ode::integrate_const(stepper, rhs, y, 1.0, lmin, -1e-4, obs);
    // y[3] integrates from 1 down to lmin: the energy integral is its negative.
    const double I = -y[3];
    const double sigma = j == 1 ? 2.0 : (j == 2 ? 2 * M_PI : 4 * M_PI);
    alpha_ = delta * delta * sigma * I;
    std::reverse(lam.begin(), lam.end());
    std::reverse(Rv.begin(), Rv.end());
    std::reverse(Uv.begin(), Uv.end());
    std::reverse(Pv.begin(), Pv.end());
    lam_ = lam;
    R_ = Rv;
    U_ = Uv;
    P_ = Pv;
}

double SedovSolution::shock_radius(double energy, double t) const {
    return std::pow(energy / (alpha_ * rho0_), 1.0 / (j_ + 2)) * std::pow(t, 2.0 / (j_ + 2));
}

Primitive1D SedovSolution::sample(double r, double energy, double t) const {
    const double rs = shock_radius(energy, t);
    const double lam = r / rs;
    if (lam >= 1.0) return {rho0_, 0.0, 0.0};
    const double rsdot = 2.0 / (j_ + 2) * rs / t;
    double R, U, P;
    if (lam <= lam_.front()) {
        R = R_.front();
        U = U_.front() * lam / lam_.front();
        P = P_.front();
    } else {
        auto it = std::upper_bound(lam_.begin(), lam_.end(), lam);
        const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - lam_.begin()), lam_.size() - 1);
        const double w = (lam - lam_[i - 1]) / (lam_[i] - lam_[i - 1]);
        R = R_[i - 1] + w * (R_[i] - R_[i - 1]);
        U = U_[i - 1] + w * (U_[i] - U_[i - 1]);
        P = P_[i - 1] + w * (P_[i] - P_[i - 1]);
    }
    return {rho0_ * R, rsdot * U, rho0_ * rsdot * rsdot * P};
}

}  // namespace sdg
