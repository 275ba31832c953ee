#pragma once
// Conservation laws and entropy pairs.

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "sdg/common.hpp"

namespace sdg {

using State = std::array<double, kMaxVars>;

class ConservationLaw {
public:
    virtual ~ConservationLaw() = default;

    const std::string& name() const { return name_; }
    int nvar() const { return nvar_; }
    int dim() const { return dim_; }
    bool is_scalar() const { return nvar_ == 1; }

    /// Physical flux components; `fy` is ignored in 1D.
    virtual void flux(const double* u, Vec2 x, double* fx, double* fy) const = 0;
    /// F(u) . n
    void normal_flux(const double* u, Vec2 x, Vec2 n, double* f) const;
    /// Largest |eigenvalue of F'(u).n| at a single state.
    virtual double wave_speed(const double* u, Vec2 x, Vec2 n) const = 0;
    /// Upper bound of the wave speed over the pair (uL, uR).
    virtual double max_speed(const double* uL, const double* uR, Vec2 x, Vec2 n) const = 0;
    virtual bool admissible(const double* u) const { return all_finite(u, nvar_); }

    virtual bool linear() const { return false; }
    virtual bool convex_flux() const { return true; }
    /// Polytropic index for the Euler laws, 0 otherwise.
    virtual double gas_gamma() const { return 0.0; }

protected:
    ConservationLaw(std::string name, int nvar, int dim)
        : name_(std::move(name)), nvar_(nvar), dim_(dim) {}

private:
    std::string name_;
    int nvar_;
    int dim_;
};

/// Scalar law given by a flux f(u, x) in R^2 and its u-derivative.
class ScalarLaw : public ConservationLaw {
public:
    virtual Vec2 f(double u, Vec2 x) const = 0;
    virtual Vec2 df(double u, Vec2 x) const = 0;
    /// Range of states used to tabulate entropy fluxes.
    virtual std::array<double, 2> state_range() const { return {-4.0, 4.0}; }

    void flux(const double* u, Vec2 x, double* fx, double* fy) const override;
    double wave_speed(const double* u, Vec2 x, Vec2 n) const override;

protected:
    ScalarLaw(std::string name, int dim) : ConservationLaw(std::move(name), 1, dim) {}
};

class EulerLaw : public ConservationLaw {
public:
    EulerLaw(int dim, double gamma);

    double gas_gamma() const override { return gamma_; }
    double pressure(const double* u) const;
    double sound_speed(const double* u) const;
    /// Velocity component along n.
    double normal_velocity(const double* u, Vec2 n) const;

    void flux(const double* u, Vec2 x, double* fx, double* fy) const override;
    double wave_speed(const double* u, Vec2 x, Vec2 n) const override;
    double max_speed(const double* uL, const double* uR, Vec2 x, Vec2 n) const override;
    bool admissible(const double* u) const override;

    /// Conserved state from primitive (rho, vx, [vy,] p).
    State from_primitive(double rho, Vec2 v, double p) const;

private:
    double gamma_;
};

struct LawParams {
    double advection_speed = 1.0;
    double gas_gamma = 1.4;
};

/// Names: advection-1d, rotation-2d, burgers-1d, burgers-2d, buckley-1d, kpp-2d, euler-1d, euler-2d.
std::shared_ptr<const ConservationLaw> make_law(const std::string& name, const LawParams& p = {});
std::vector<std::string> law_names();

/// Strictly convex entropy with its entropy flux and variables.
class EntropyPair {
public:
    virtual ~EntropyPair() = default;
    const std::string& name() const { return name_; }
    int nvar() const { return nvar_; }

    virtual double eta(const double* u) const = 0;
    /// Entropy variable v = eta'(u).
    virtual void variable(const double* u, double* v) const = 0;
    /// Entropy flux phi(u) components.
    virtual void flux(const double* u, Vec2 x, double* phix, double* phiy) const = 0;
    /// Inverse map v -> u.
    virtual void to_conserved(const double* v, double* u) const = 0;
    /// True if v lies in the range of the entropy variable map.
    virtual bool valid_variable(const double* v) const { return all_finite(v, nvar_); }
    virtual bool admissible(const double* u) const { return all_finite(u, nvar_); }

    /// psi(u) . n with psi = v . F - phi.
    double potential_n(const double* u, Vec2 x, Vec2 n) const;
    /// phi(u) . n
    double flux_n(const double* u, Vec2 x, Vec2 n) const;

protected:
    EntropyPair(std::string name, std::shared_ptr<const ConservationLaw> law);
    std::string name_;
    int nvar_;
    std::shared_ptr<const ConservationLaw> law_;
};

struct EntropyParams {
    double ke = 0.0;      ///< Kruzkov center
    double eps = 0.25;    ///< Kruzkov smoothing exponent
    double slope = 20.0;  ///< atan mollification
};

/// Names: square, kruzkov, atan (scalar laws), euler-log (Euler).
std::shared_ptr<const EntropyPair> make_entropy(const std::string& name,
                                                std::shared_ptr<const ConservationLaw> law,
                                                const EntropyParams& p = {});

}  // namespace sdg
