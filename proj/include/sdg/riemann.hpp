#pragma once
// Two-point numerical fluxes, Riemann intermediate states and numerical
// entropy fluxes. Normals are unit vectors; fluxes are per unit face length.

#include <memory>
#include <string>

#include "sdg/physics.hpp"

namespace sdg {

enum class FluxKind { Rusanov, GlobalLF, HLL, HLLC };

FluxKind parse_flux_kind(const std::string& s);
std::string flux_kind_name(FluxKind k);

/// Wave-speed estimates for HLL-type fluxes.
enum class SpeedEstimate { Einfeldt, Davis };

/// 1/2 (F(uL) + F(uR)).n - gamma/2 (uR - uL)
void viscosity_flux(const ConservationLaw& law, const double* uL, const double* uR, Vec2 x, Vec2 n,
                    double gamma, double* f);

/// (uL + uR)/2 - (F(uR) - F(uL)).n / (2 gamma)
void intermediate_state(const ConservationLaw& law, const double* uL, const double* uR, Vec2 x, Vec2 n,
                        double gamma, double* ustar);

/// Left and right intermediate states of a general flux value f:
/// um = uL - (f - F(uL).n)/gamma, up = uR + (f - F(uR).n)/gamma.
/// Both equal intermediate_state() for the viscosity flux.
void two_state(const ConservationLaw& law, const double* uL, const double* uR, Vec2 x, Vec2 n,
               const double* f, double gamma, double* um, double* up);

/// um - theta dF/gamma and up + theta dF/gamma.
void blended_states(int nvar, const double* um, const double* up, const double* dF, double gamma,
                    double theta, double* bm, double* bp);

struct HLLSpeeds {
    double sl = 0;
    double sr = 0;
};

HLLSpeeds hll_speeds(const EulerLaw& law, const double* uL, const double* uR, Vec2 n,
                     SpeedEstimate est = SpeedEstimate::Einfeldt);
HLLSpeeds hll_flux(const EulerLaw& law, const double* uL, const double* uR, Vec2 n, double* f,
                   SpeedEstimate est = SpeedEstimate::Einfeldt);
/// HLLC with the contact speed of Batten et al.:
/// S* = (pR - pL + rhoL unL (SL - unL) - rhoR unR (SR - unR)) / (rhoL (SL - unL) - rhoR (SR - unR)).
HLLSpeeds hllc_flux(const EulerLaw& law, const double* uL, const double* uR, Vec2 n, double* f,
                    SpeedEstimate est = SpeedEstimate::Einfeldt);

/// Numerical flux of a given kind bound to a law.
class NumericalFlux {
public:
    NumericalFlux(std::shared_ptr<const ConservationLaw> law, FluxKind kind);

    FluxKind kind() const { return kind_; }
    const ConservationLaw& law() const { return *law_; }

    /// Local speed bound entering Rusanov and the global Lax-Friedrichs maximum.
    double local_speed(const double* uL, const double* uR, Vec2 x, Vec2 n) const;

    /// Evaluate the flux. `global_gamma` is used only by GlobalLF. Returns the
    /// viscosity coefficient gamma_mp associated with the face.
    double operator()(const double* uL, const double* uR, Vec2 x, Vec2 n, double global_gamma,
                      double* f) const;

private:
    std::shared_ptr<const ConservationLaw> law_;
    const EulerLaw* euler_ = nullptr;
    FluxKind kind_;
};

/// 1/2 (phi(uL) + phi(uR)).n - gamma/2 (eta(uR) - eta(uL))
double numerical_entropy_flux(const EntropyPair& pair, const double* uL, const double* uR, Vec2 x, Vec2 n,
                              double gamma);

/// 1/2 (vL + vR).f - 1/2 (psi(uL) + psi(uR)).n
double tadmor_entropy_flux(const EntropyPair& pair, const double* uL, const double* uR, Vec2 x, Vec2 n,
                           const double* f);

/// Scalar laws: D such that f = (Psi(vR) - Psi(vL))/(vR - vL).n - D/2 (vR - vL).
/// Throws std::domain_error when vR == vL.
double entropy_dissipation_coefficient(const EntropyPair& pair, const double* uL, const double* uR, Vec2 x,
                                       Vec2 n, double f);

}  // namespace sdg
