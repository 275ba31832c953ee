#pragma once
// Blending coefficients theta per subcell face: entropy conditions, global
// and local maximum principles, Euler positivity, smoothers and composition.

#include <array>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "sdg/dg_core.hpp"

namespace sdg {

enum class Strategy { Positivity, GMP, LMP, EntropyAny, EntropyTadmor, EntropyCell, Smoother, Poison, Count };
constexpr int kNumStrategies = static_cast<int>(Strategy::Count);
std::string strategy_name(Strategy s);

enum class Smoother { None, Average, Min };
Smoother parse_smoother(const std::string& s);
std::string smoother_name(Smoother s);

/// Fixed theta instead of computed coefficients.
enum class ThetaMode { Blend, DG, FV };

struct BlendingConfig {
    ThetaMode mode = ThetaMode::Blend;
    bool positivity = false;
    bool gmp = false;
    bool lmp = false;
    bool relax = true;  ///< smooth-extrema relaxation of LMP (k >= 2)
    bool entropy_any = false;
    bool entropy_tadmor = false;
    bool entropy_cell = false;
    int lmp_var = 0;    ///< conserved variable for the Euler LMP
    bool gmp_bounds_given = false;
    double alpha = 0.0, beta = 1.0;
    Smoother smoother = Smoother::None;
    double eps_div = 1e-14;
    std::shared_ptr<const EntropyPair> entropy;

    bool any_strategy() const {
        return positivity || gmp || lmp || entropy_any || entropy_tadmor || entropy_cell;
    }
};

/// Parse a comma-separated strategy list: positivity, gmp, lmp, lmp-strict,
/// entropy-any, entropy-tadmor, entropy-cell, dg, fv, none.
void parse_strategies(const std::string& list, BlendingConfig& cfg);
std::string strategies_string(const BlendingConfig& cfg);

// Per-face bounds. All return values in [0, 1]; the guard returns 1 when the
// activating quantity is below eps_div (1 + |ref|).

double theta_entropy_any(double du, double dF, double gamma, double gamma_max, double eps_div = 1e-14);
/// dpsi = (psi_p - psi_m).n, dv = v_p - v_m.
double theta_entropy_tadmor(double dv, double dpsi, double f_fv, double dF, double eps_div = 1e-14);
/// Two-state form: um - theta dF/gamma and up + theta dF/gamma in [alpha, beta].
double theta_gmp(double um, double up, double dF, double gamma, double alpha, double beta,
                 double eps_div = 1e-14);
/// um - theta dF/gamma in [am, bm] and up + theta dF/gamma in [ap, bp].
double theta_lmp(double um, double up, double dF, double gamma, double am, double bm, double ap, double bp,
                 double eps_div = 1e-14);

struct PositivityResult {
    double theta = 1.0;
    bool bad_state = false;  ///< M <= 0 or rho* <= 0
    bool fallback = false;   ///< exact quadratic bound replaced the closed form
};
/// Density then internal-energy bound for both blended Euler states.
PositivityResult theta_positivity(int dim, const double* um, const double* up, const double* dF, double gamma,
                                  double eps_div = 1e-14);
/// rho > 0 and rho E - |q|^2/2 > 0.
bool euler_state_positive(int dim, const double* u);

/// Continuous knapsack: maximize sum theta subject to C.theta <= D and
/// 0 <= theta_i <= cap_i. Items with C_i <= 0 take their cap; the rest are
/// filled by ascending C_i, ties by ascending key.
std::vector<double> knapsack_greedy(const std::vector<double>& C, double D, const std::vector<double>& cap,
                                    const std::vector<int>& key);

/// Averaged (n°1) or minimum (n°2) smoothing over V_mp.
void smoothen(const SubcellTopology& topo, Smoother mode, std::vector<double>& theta);

/// Average of the face coefficients of each subcell.
std::vector<double> subcell_theta(const SubcellTopology& topo, const std::vector<double>& theta);

/// Smooth-extrema flags per subcell for one variable of the moments U.
std::vector<char> smooth_flags(const Discretization& D, const std::vector<double>& U, int var);

struct BlendStats {
    double min_theta = 1.0;
    double sum_theta = 0.0;
    long faces = 0;
    std::array<long, kNumStrategies> binding{};
    double min_D = std::numeric_limits<double>::infinity();
    long assembled_cells = 0;
    long invalid_entropy_cells = 0;
    long knapsack_fallback = 0;  ///< stages solved without crediting shared faces
    long positivity_bad = 0;
    long positivity_fallback = 0;

    double mean_theta() const { return faces ? sum_theta / faces : 1.0; }
    void merge(const BlendStats& o);
};

class Blender {
public:
    Blender(const Discretization& disc, BlendingConfig cfg);

    const BlendingConfig& config() const { return cfg_; }

    /// GMP bounds from the initial submeans unless given in the config.
    void set_initial(const std::vector<double>& ubar0);

    /// Entropy-cell only: FV states u(v_m) from sub-resolution moments of the
    /// projected entropy variable. Requires s.U. Returns false when the
    /// standard FV states are used.
    bool fv_states(const std::vector<double>& ubar, const StageData& s, std::vector<double>& states);

    /// theta per global face from the stage-begin submeans and stage data.
    void compute(const std::vector<double>& ubar, const StageData& s, std::vector<double>& theta,
                 BlendStats& stats);

private:
    void entropy_cell(const StageData& s, std::vector<double>& theta, std::vector<signed char>& who,
                      BlendStats& stats);

    const Discretization& disc_;
    BlendingConfig cfg_;
    bool euler_ = false;
    std::vector<double> vsub_;      ///< sub-resolution moments of v, [g*nvar + v]
    std::vector<double> usub_;      ///< u(vsub), [g*nvar + v]
    std::vector<char> vsub_valid_;  ///< per cell
};

}  // namespace sdg
