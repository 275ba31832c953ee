#pragma once
// Test-case registry, run driver, error norms, convergence studies and file
// outputs.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sdg/time_integration.hpp"

namespace sdg {

/// Pointwise field u(x, t) in conserved variables.
using PointField = std::function<void(Vec2 x, double t, double* u)>;

/// Complete run description. Every field is explicit after make_config, so
/// the serialized form reproduces the run.
struct RunConfig {
    std::string case_name;
    std::string law;
    double advection_speed = 1.0;
    double gamma = 1.4;
    std::string entropy = "none";
    double ke = 0.0, eps = 0.25, slope = 20.0;
    std::string mesh;  ///< mesh file; empty means generated
    int ncells = 0;    ///< target cell count of the generated mesh
    int k = 1;
    std::string subdivision;
    std::string flux_dg = "rusanov";
    std::string flux_fv = "rusanov";
    std::string blend = "none";
    std::string smoother = "none";
    int lmp_var = 0;
    std::string update = "blended";  ///< blended, pure-dg, fv-only
    double cfl = 0.5;
    int rk = 3;
    double t_end = 0.0;
    double dt = 0.0;  ///< fixed time step when > 0
    long max_steps = 100000000;
    std::string out;      ///< output directory, empty for none
    std::string outputs;  ///< comma list: profile, vtk, diagnostics

    /// Set one key from its text value. Throws ConfigError on unknown keys or
    /// malformed values.
    void set(const std::string& key, const std::string& value);
    /// key = value lines in a fixed order.
    std::string serialize() const;
    std::map<std::string, std::string> to_map() const;
    /// Apply `key = value` lines; '#' starts a comment.
    void load(const std::string& text);
    void load_file(const std::string& path);
    /// Check names and ranges against the catalogs.
    void validate() const;
};

struct CaseDefinition {
    std::string name;
    std::string description;
    std::string law;
    int dim = 1;
    double gamma = 1.4;
    PointField initial;
    PointField exact;  ///< empty when no exact solution exists
    PointField inflow;
    std::function<Mesh(int ncells)> make_mesh;
    /// Scalar compared in error norms, from a conserved state.
    std::function<double(const double* u)> error_quantity;
    std::string error_quantity_name = "u";
    /// Sedov energy deposit into the subcell at the origin; 0 for none.
    double source_energy = 0.0;
    RunConfig defaults;
};

/// All registered cases in a fixed order.
const std::vector<CaseDefinition>& case_catalog();
/// Throws ConfigError for unknown names.
const CaseDefinition& find_case(const std::string& name);
/// Case defaults with derived cfl and rk.
RunConfig make_config(const std::string& case_name);

/// Sedov sector energy: the quarter-plane value scaled to the opening.
double sedov_sector_energy(double opening);

/// Built objects of one run. Not copyable: the topology refers to the mesh.
class Problem {
public:
    explicit Problem(const RunConfig& cfg);
    Problem(const Problem&) = delete;
    Problem& operator=(const Problem&) = delete;

    const RunConfig& config() const { return cfg_; }
    const CaseDefinition& case_def() const { return *case_; }
    const Mesh& mesh() const { return mesh_; }
    const SubcellTopology& topology() const { return *topo_; }
    const Discretization& disc() const { return *disc_; }
    Blender* blender() { return blender_.get(); }
    std::uint64_t mesh_hash() const { return hash_; }
    StepperConfig stepper_config() const;

    /// Submeans of a field by quadrature over the subcell pieces with the
    /// given polynomial exactness.
    std::vector<double> submeans_of(const PointField& f, double t, int degree) const;
    /// Initial submeans including the point source when the case has one.
    std::vector<double> initial_submeans() const;
    /// Global subcell receiving the point source.
    int source_subcell() const;

    /// Provenance block: config lines and mesh hash, each prefixed by `prefix`.
    std::string header(const std::string& prefix = "# ") const;
    /// Characteristic length: domain length over ncells in 1D, sqrt of the
    /// mean cell area in 2D.
    double h() const;

private:
    RunConfig cfg_;
    const CaseDefinition* case_;
    Mesh mesh_;
    std::unique_ptr<SubcellTopology> topo_;
    std::shared_ptr<const ConservationLaw> law_;
    std::unique_ptr<Discretization> disc_;
    std::unique_ptr<Blender> blender_;
    std::uint64_t hash_ = 0;
};

struct StepRecord {
    long step = 0;
    double t = 0.0, dt = 0.0;
    double min_theta = 1.0, mean_theta = 1.0;
    std::array<long, kNumStrategies> binding{};
    double min_D = 0.0;
    double mass_drift = 0.0;
    int redos = 0;
};

struct RunResult {
    std::vector<double> ubar;
    std::vector<double> theta_sub;  ///< last-stage subcell coefficients
    double t = 0.0;
    long steps = 0;
    std::vector<StepRecord> history;
    double min_theta = 1.0;   ///< over all stages and faces
    double mean_theta = 1.0;  ///< over all stages and faces
    double min_D = std::numeric_limits<double>::infinity();
    double max_mass_drift = 0.0;  ///< relative change of the total mass (and energy for Euler)
    long invalid_entropy_cells = 0;
    long knapsack_fallback = 0;
    std::vector<std::string> files;
};

struct RunHooks {
    StageMonitor stage;  ///< extra per-stage check
    bool record_history = true;
    std::vector<double> initial;  ///< submeans replacing the case initial state when non-empty
};

/// Advance the initial state to t_end. Writes selected outputs. Solver aborts
/// are rethrown after writing an abort report into the output directory.
RunResult run(Problem& p, const RunHooks& hooks = {});
RunResult run(const RunConfig& cfg, const RunHooks& hooks = {});

struct ErrorNorms {
    double L1 = 0.0, L2 = 0.0;
};
/// Submean norms of q(ubar) - q(ubar_exact), exact submeans by oversampled
/// quadrature at time t.
ErrorNorms error_norms(const Problem& p, const std::vector<double>& ubar, const PointField& exact, double t,
                       const std::function<double(const double*)>& quantity);

struct ConvergenceRow {
    int ncells = 0;
    double h = 0.0;
    ErrorNorms err;
    double q1 = 0.0, q2 = 0.0;  ///< order towards the next finer level, 0 for the last
    double min_theta = 1.0, mean_theta = 1.0;
};
/// One run per level with cfg.ncells replaced. Requires at least 3 levels and
/// an exact solution. The time step follows dt ~ h^dt_exponent: the CFL factor
/// of level i is cfl (h_i/h_0)^(dt_exponent - 1).
std::vector<ConvergenceRow> convergence_study(const RunConfig& cfg, const std::vector<int>& levels,
                                              double dt_exponent = 1.0);
void write_convergence_csv(const std::string& path, const RunConfig& cfg, const std::vector<ConvergenceRow>& rows);

/// Same run with theta = 1 under several subdivisions at a common fixed time
/// step; returns the largest pairwise relative difference of the recovered
/// moments after `steps` steps.
double subdivision_equivalence(const RunConfig& cfg, const std::vector<std::string>& schemes, int steps);

/// File writers. Each file starts with the provenance header.
void write_profile_csv(const std::string& path, const Problem& p, const std::vector<double>& ubar,
                       const std::vector<double>& theta_sub);
void write_vtk(const std::string& path, const Problem& p, const std::vector<double>& ubar,
               const std::vector<double>& theta_sub);
void write_diagnostics_csv(const std::string& path, const Problem& p, const std::vector<StepRecord>& history);

}  // namespace sdg
