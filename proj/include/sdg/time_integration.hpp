#pragma once
// SSP Runge-Kutta integration of the blended subcell scheme.

#include <functional>
#include <vector>

#include "sdg/blending.hpp"

namespace sdg {

/// How the face fluxes of each stage are formed.
enum class UpdateMode {
    Blended,  ///< full pipeline with blending coefficients from the Blender
    PureDG,   ///< submeans of the DG update, P M^-1 Phi
    FVOnly,   ///< standalone first-order subcell FV scheme
};

struct StepperConfig {
    int rk = 3;              ///< 1, 2 or 3 stages (SSP)
    double cfl = 0.5;        ///< safety factor on the subcell CFL bound
    double t_end = 0.0;
    long max_steps = 100000000;
    UpdateMode mode = UpdateMode::Blended;
    double dt_fixed = 0.0;   ///< > 0 replaces the CFL time step (still clipped to t_end)
};

/// Default safety factor and stage count for degree k.
double default_cfl(int k);
int default_rk(int k);

struct StepInfo {
    double dt = 0.0;
    int redos = 0;          ///< restarts because a later stage bound was smaller
    BlendStats blend;       ///< merged over the stages of the accepted step
    double min_D = std::numeric_limits<double>::infinity();
    double solvability = 0.0;
};

/// Called after every accepted stage with the stage submeans; the last stage
/// of a step gives the new solution.
using StageMonitor = std::function<void(const std::vector<double>& ubar, double t, int stage)>;

class Stepper {
public:
    Stepper(const Discretization& disc, Blender* blender, StepperConfig cfg);

    const StepperConfig& config() const { return cfg_; }

    /// Right-hand side dubar/dt at (ubar, t). Returns the subcell CFL bound
    /// (without safety factor) of this stage.
    double rate(const std::vector<double>& ubar, double t, std::vector<double>& r, BlendStats& stats,
                double& solvability);

    /// One step of at most dt_max from time t. ubar is updated in place.
    StepInfo step(std::vector<double>& ubar, double t, double dt_max = std::numeric_limits<double>::infinity());

    void set_monitor(StageMonitor m) { monitor_ = std::move(m); }

    /// Throws SolverAbort naming the first non-finite or inadmissible subcell.
    void check_state(const std::vector<double>& ubar, double t) const;

    /// Theta of the last evaluated stage (empty outside blended mode).
    const std::vector<double>& last_theta() const { return theta_; }
    const StageData& last_stage() const { return stage_; }

private:
    const Discretization& disc_;
    Blender* blender_;
    StepperConfig cfg_;
    StageMonitor monitor_;
    StageData stage_;
    std::vector<double> theta_, states_;
    std::vector<double> u0_, u1_, r_;
};

/// Total of |S_m| ubar_m for each variable.
std::vector<double> total_mass(const Discretization& disc, const std::vector<double>& ubar);

}  // namespace sdg
