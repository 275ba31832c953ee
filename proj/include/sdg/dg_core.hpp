#pragma once
// DG residuals, reconstructed subcell fluxes and first-order subcell FV
// fluxes for one stage of the monolithic scheme.
//
// Layouts:
//   submeans  ubar[(c*nvar + v)*ns + m]
//   moments   U[(c*nvar + v)*nk + j]
//   per face  arrays[f*nvar + v], per unit face length, oriented L -> R

#include <functional>
#include <memory>
#include <vector>

#include "sdg/approximation.hpp"
#include "sdg/mesh.hpp"
#include "sdg/riemann.hpp"

namespace sdg {

/// Exterior data for inflow boundaries: writes the state at (x, t).
using InflowFunction = std::function<void(Vec2 x, double t, double* u)>;

/// Ghost state across a domain boundary face with outward unit normal n.
void ghost_state(const ConservationLaw& law, BcType bc, const double* uin, Vec2 n, Vec2 x, double t,
                 const InflowFunction& inflow, double* uout);

/// Per-face data of one stage.
struct FaceStage {
    std::vector<double> uL, uR;  ///< FV states on both sides (ghost on the boundary)
    std::vector<double> fv;      ///< first-order flux
    std::vector<double> rec;     ///< reconstructed flux, NaN when poisoned
    std::vector<double> gamma;   ///< viscosity coefficient gamma_mp
    std::vector<double> um, up;  ///< intermediate states of the FV flux
};

struct StageData {
    std::vector<double> U;        ///< moments
    std::vector<double> Phi;      ///< DG residuals, NaN rows for poisoned cells
    std::vector<char> poisoned;   ///< per cell
    /// DG trace states and outward numerical fluxes:
    /// [((c*nlf + e)*nvar + v)*npts + q]
    std::vector<double> trace_u;
    std::vector<double> trace_f;
    double global_gamma = 0.0;
    double solvability = 0.0;     ///< max |1^T (Dhat P Phi + B)| / (|Phi_0| + sum |B|)
    int npoisoned = 0;
    FaceStage faces;
};

class Discretization {
public:
    Discretization(const SubcellTopology& topo, std::shared_ptr<const ConservationLaw> law, FluxKind dg_flux,
                   FluxKind fv_flux, InflowFunction inflow = {});

    const SubcellTopology& topology() const { return topo_; }
    const CellOperators& ops() const { return ops_; }
    const ConservationLaw& law() const { return *law_; }
    std::shared_ptr<const ConservationLaw> law_ptr() const { return law_; }
    int nvar() const { return nvar_; }
    int nk() const { return ops_.nk; }
    int ns() const { return ops_.ns; }
    int ncells() const { return topo_.ncells; }
    int nfaces() const { return static_cast<int>(topo_.faces.size()); }
    int npts() const { return npts_; }
    std::size_t submean_size() const { return static_cast<std::size_t>(topo_.nsub) * nvar_; }
    std::size_t moment_size() const { return static_cast<std::size_t>(topo_.ncells) * nvar_ * ops_.nk; }
    std::size_t sub_index(int g, int v) const {
        return (static_cast<std::size_t>(g / ops_.ns) * nvar_ + v) * ops_.ns + g % ops_.ns;
    }

    /// Moments from submeans, cell by cell.
    void recover(const std::vector<double>& ubar, std::vector<double>& U) const;
    /// Submeans from moments.
    void project(const std::vector<double>& U, std::vector<double>& ubar) const;
    /// State of subcell g gathered into u[nvar].
    void gather(const std::vector<double>& ubar, int g, double* u) const;

    /// Point values of the polynomial of cell c at a reference point.
    void evaluate(const std::vector<double>& U, int c, Vec2 xi, double* u) const;

    /// Full stage evaluation: moments, DG residual, reconstructed fluxes and
    /// FV fluxes. `fv_states`, when given, holds one state per subcell
    /// (g*nvar + v) replacing the submeans inside the FV flux.
    void evaluate_stage(const std::vector<double>& ubar, double t, StageData& s,
                        const std::vector<double>* fv_states = nullptr) const;

    /// Split form of evaluate_stage for callers that need the moments before
    /// choosing FV states.
    void prepare(const std::vector<double>& ubar, StageData& s) const;
    void compute_fluxes(const std::vector<double>& ubar, double t, StageData& s,
                        const std::vector<double>* fv_states = nullptr) const;

    /// FV fluxes only (standalone first-order scheme).
    void fv_stage(const std::vector<double>& ubar, double t, StageData& s) const;

    /// dubar/dt from blended fluxes F = fv + theta (rec - fv). `theta` holds one
    /// value per face; nullptr means theta = 0.
    void assemble(const StageData& s, const double* theta, std::vector<double>& rate) const;
    /// Pure DG: dU/dt = Phi/|omega|.
    void moment_rate(const StageData& s, std::vector<double>& dU) const;
    /// Pure DG submean rate P dU/dt.
    void dg_submean_rate(const StageData& s, std::vector<double>& rate) const;

    /// min over subcells of |S_m| / sum_f l_f gamma_f. Throws SolverAbort on
    /// non-finite gamma.
    double cfl_limit(const StageData& s) const;

private:
    void traces(StageData& s) const;
    void face_states(const std::vector<double>& ubar, double t, StageData& s,
                     const std::vector<double>* fv_states, std::vector<double>& sL, std::vector<double>& sR) const;
    void dg_fluxes(double t, StageData& s) const;
    void residuals(StageData& s) const;
    void reconstruct(StageData& s) const;
    void fv_fluxes(const std::vector<double>& sL, const std::vector<double>& sR, bool modified,
                   StageData& s) const;
    double max_fv_speed(const std::vector<double>& sL, const std::vector<double>& sR) const;

    const SubcellTopology& topo_;
    CellOperators ops_;
    std::shared_ptr<const ConservationLaw> law_;
    NumericalFlux dg_flux_;
    NumericalFlux fv_flux_;
    InflowFunction inflow_;
    int nvar_;
    int nlf_;
    int npts_;
    std::vector<Vec2> vol_ref_;  ///< reference volume points
    std::vector<double> dhat_;   ///< subcell area fractions
};

}  // namespace sdg
