#include "sdg/riemann.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sdg {

FluxKind parse_flux_kind(const std::string& s) {
    if (s == "rusanov") return FluxKind::Rusanov;
    if (s == "global-lf" || s == "lf") return FluxKind::GlobalLF;
    if (s == "hll") return FluxKind::HLL;
    if (s == "hllc") return FluxKind::HLLC;
    throw ConfigError("unknown flux kind: " + s);
}

std::string flux_kind_name(FluxKind k) {
    switch (k) {
        case FluxKind::Rusanov: return "rusanov";
        case FluxKind::GlobalLF: return "global-lf";
        case FluxKind::HLL: return "hll";
        case FluxKind::HLLC: return "hllc";
    }
    return "?";
}

void viscosity_flux(const ConservationLaw& law, const double* uL, const double* uR, Vec2 x, Vec2 n,
                    double gamma, double* f) {
    double fl[kMaxVars], fr[kMaxVars];
    law.normal_flux(uL, x, n, fl);
    law.normal_flux(uR, x, n, fr);
    for (int i = 0; i < law.nvar(); ++i) f[i] = 0.5 * (fl[i] + fr[i]) - 0.5 * gamma * (uR[i] - uL[i]);
}

void intermediate_state(const ConservationLaw& law, const double* uL, const double* uR, Vec2 x, Vec2 n,
                        double gamma, double* ustar) {
    double fl[kMaxVars], fr[kMaxVars];
    law.normal_flux(uL, x, n, fl);
    law.normal_flux(uR, x, n, fr);
    for (int i = 0; i < law.nvar(); ++i) ustar[i] = 0.5 * (uL[i] + uR[i]) - (fr[i] - fl[i]) / (2.0 * gamma);
}

void two_state(const ConservationLaw& law, const double* uL, const double* uR, Vec2 x, Vec2 n,
               const double* f, double gamma, double* um, double* up) {
    double fl[kMaxVars], fr[kMaxVars];
    law.normal_flux(uL, x, n, fl);
    law.normal_flux(uR, x, n, fr);
    for (int i = 0; i < law.nvar(); ++i) {
        um[i] = uL[i] - (f[i] - fl[i]) / gamma;
        up[i] = uR[i] + (f[i] - fr[i]) / gamma;
    }
}

void blended_states(int nvar, const double* um, const double* up, const double* dF, double gamma,
                    double theta, double* bm, double* bp) {
    for (int i = 0; i < nvar; ++i) {
        double s = theta * dF[i] / gamma;
        bm[i] = um[i] - s;
        bp[i] = up[i] + s;
    }
}

namespace {

struct Prim {
    double rho, un, ut, p, c, H;
};

Prim primitive(const EulerLaw& law, const double* u, Vec2 n) {
    Prim w;
    const int d = law.dim();
    w.rho = u[0];
    double vx = u[1] / u[0], vy = d == 2 ? u[2] / u[0] : 0.0;
    w.un = vx * n.x + vy * n.y;
    w.ut = -vx * n.y + vy * n.x;
    w.p = law.pressure(u);
    w.c = std::sqrt(law.gas_gamma() * w.p / w.rho);
    w.H = (u[d + 1] + w.p) / w.rho;
    return w;
}

}  // namespace

HLLSpeeds hll_speeds(const EulerLaw& law, const double* uL, const double* uR, Vec2 n, SpeedEstimate est) {
    Prim l = primitive(law, uL, n), r = primitive(law, uR, n);
    if (est == SpeedEstimate::Davis)
        return {std::min(l.un - l.c, r.un - r.c), std::max(l.un + l.c, r.un + r.c)};
    double sl = std::sqrt(l.rho), sr = std::sqrt(r.rho), w = 1.0 / (sl + sr);
    double un = (sl * l.un + sr * r.un) * w;
    double ut = (sl * l.ut + sr * r.ut) * w;
    double H = (sl * l.H + sr * r.H) * w;
    double c2 = (law.gas_gamma() - 1.0) * (H - 0.5 * (un * un + ut * ut));
    double c = std::sqrt(std::max(c2, 0.0));
    return {std::min(l.un - l.c, un - c), std::max(r.un + r.c, un + c)};
}

HLLSpeeds hll_flux(const EulerLaw& law, const double* uL, const double* uR, Vec2 n, double* f,
                   SpeedEstimate est) {
    HLLSpeeds s = hll_speeds(law, uL, uR, n, est);
    double fl[kMaxVars], fr[kMaxVars];
    law.normal_flux(uL, {}, n, fl);
    law.normal_flux(uR, {}, n, fr);
    const int nv = law.nvar();
    if (s.sl >= 0) {
        std::copy(fl, fl + nv, f);
    } else if (s.sr <= 0) {
        std::copy(fr, fr + nv, f);
    } else {
        for (int i = 0; i < nv; ++i)
            f[i] = (s.sr * fl[i] - s.sl * fr[i] + s.sl * s.sr * (uR[i] - uL[i])) / (s.sr - s.sl);
    }
    return s;
}

HLLSpeeds hllc_flux(const EulerLaw& law, const double* uL, const double* uR, Vec2 n, double* f,
                    SpeedEstimate est) {
    HLLSpeeds s = hll_speeds(law, uL, uR, n, est);
    const int nv = law.nvar(), d = law.dim();
    double fl[kMaxVars], fr[kMaxVars];
    law.normal_flux(uL, {}, n, fl);
    law.normal_flux(uR, {}, n, fr);
    if (s.sl >= 0) {
        std::copy(fl, fl + nv, f);
        return s;
    }
    if (s.sr <= 0) {
        std::copy(fr, fr + nv, f);
        return s;
    }
    Prim l = primitive(law, uL, n), r = primitive(law, uR, n);
    double ml = l.rho * (s.sl - l.un), mr = r.rho * (s.sr - r.un);
    double sstar = (r.p - l.p + ml * l.un - mr * r.un) / (ml - mr);
    const bool left = sstar >= 0;
    const Prim& k = left ? l : r;
    const double* uk = left ? uL : uR;
    const double* fk = left ? fl : fr;
    const double sk = left ? s.sl : s.sr;
    double fac = k.rho * (sk - k.un) / (sk - sstar);
    double us[kMaxVars];
    us[0] = fac;
    // momentum: normal component replaced by S*, tangential kept
    double vx = k.ut * -n.y + sstar * n.x, vy = k.ut * n.x + sstar * n.y;
    us[1] = fac * vx;
    if (d == 2) us[2] = fac * vy;
    us[d + 1] = fac * (uk[d + 1] / k.rho + (sstar - k.un) * (sstar + k.p / (k.rho * (sk - k.un))));
    for (int i = 0; i < nv; ++i) f[i] = fk[i] + sk * (us[i] - uk[i]);
    return s;
}

NumericalFlux::NumericalFlux(std::shared_ptr<const ConservationLaw> law, FluxKind kind)
    : law_(std::move(law)), kind_(kind) {
    euler_ = dynamic_cast<const EulerLaw*>(law_.get());
    if ((kind == FluxKind::HLL || kind == FluxKind::HLLC) && !euler_)
        throw ConfigError(flux_kind_name(kind) + " flux requires an Euler law");
}

double NumericalFlux::local_speed(const double* uL, const double* uR, Vec2 x, Vec2 n) const {
    return law_->max_speed(uL, uR, x, n);
}

double NumericalFlux::operator()(const double* uL, const double* uR, Vec2 x, Vec2 n, double global_gamma,
                                 double* f) const {
    switch (kind_) {
        case FluxKind::Rusanov: {
            double g = local_speed(uL, uR, x, n);
            viscosity_flux(*law_, uL, uR, x, n, g, f);
            return g;
        }
        case FluxKind::GlobalLF:
            viscosity_flux(*law_, uL, uR, x, n, global_gamma, f);
            return global_gamma;
        case FluxKind::HLL: {
            HLLSpeeds s = hll_flux(*euler_, uL, uR, n, f);
            return std::max(std::abs(s.sl), std::abs(s.sr));
        }
        case FluxKind::HLLC: {
            HLLSpeeds s = hllc_flux(*euler_, uL, uR, n, f);
            return std::max(std::abs(s.sl), std::abs(s.sr));
        }
    }
    return kNaN;
}

double numerical_entropy_flux(const EntropyPair& pair, const double* uL, const double* uR, Vec2 x, Vec2 n,
                              double gamma) {
    return 0.5 * (pair.flux_n(uL, x, n) + pair.flux_n(uR, x, n)) - 0.5 * gamma * (pair.eta(uR) - pair.eta(uL));
}

double tadmor_entropy_flux(const EntropyPair& pair, const double* uL, const double* uR, Vec2 x, Vec2 n,
                           const double* f) {
    double vl[kMaxVars], vr[kMaxVars];
    pair.variable(uL, vl);
    pair.variable(uR, vr);
    double s = 0;
    for (int i = 0; i < pair.nvar(); ++i) s += 0.5 * (vl[i] + vr[i]) * f[i];
    return s - 0.5 * (pair.potential_n(uL, x, n) + pair.potential_n(uR, x, n));
}

double entropy_dissipation_coefficient(const EntropyPair& pair, const double* uL, const double* uR, Vec2 x,
                                       Vec2 n, double f) {
    double vl, vr;
    pair.variable(uL, &vl);
    pair.variable(uR, &vr);
    double dv = vr - vl;
    if (dv == 0.0) throw std::domain_error("entropy dissipation coefficient undefined for equal states");
    double central = (pair.potential_n(uR, x, n) - pair.potential_n(uL, x, n)) / dv;
    return 2.0 * (central - f) / dv;
}

}  // namespace sdg
