#include "sdg/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace sdg {

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto b = item.find_first_not_of(' ');
        auto e = item.find_last_not_of(' ');
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

bool selected(const RunConfig& cfg, const std::string& what) {
    auto l = split_list(cfg.outputs);
    return std::find(l.begin(), l.end(), what) != l.end();
}

std::ofstream open_output(const std::string& path) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
        if (ec) throw std::runtime_error("cannot create directory " + p.parent_path().string() + ": " + ec.message());
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open output file " + path);
    f.precision(16);
    return f;
}

std::vector<std::string> variable_names(const ConservationLaw& law) {
    if (law.gas_gamma() > 0) {
        if (law.dim() == 1) return {"rho", "mx", "E"};
        return {"rho", "mx", "my", "E"};
    }
    return {"u"};
}

int quad_degree(int k) { return std::min(2 * k + 6, 24); }

}  // namespace

// ---------------------------------------------------------------------------
// Problem

Problem::Problem(const RunConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    case_ = &find_case(cfg_.case_name);
    if (cfg_.gamma != case_->gamma) throw ConfigError("case " + case_->name + " fixes gamma");
    mesh_ = cfg_.mesh.empty() ? case_->make_mesh(cfg_.ncells) : read_mesh(cfg_.mesh, case_->dim);
    topo_ = std::make_unique<SubcellTopology>(build_topology(mesh_, parse_scheme(cfg_.subdivision), cfg_.k));
    LawParams lp;
    lp.advection_speed = cfg_.advection_speed;
    lp.gas_gamma = cfg_.gamma;
    law_ = make_law(cfg_.law, lp);
    InflowFunction inflow;
    if (case_->inflow) inflow = case_->inflow;
    disc_ = std::make_unique<Discretization>(*topo_, law_, parse_flux_kind(cfg_.flux_dg),
                                             parse_flux_kind(cfg_.flux_fv), inflow);
    BlendingConfig b;
    parse_strategies(cfg_.blend, b);
    b.smoother = parse_smoother(cfg_.smoother);
    b.lmp_var = cfg_.lmp_var;
    if (b.lmp_var < 0 || b.lmp_var >= law_->nvar()) throw ConfigError("lmp_var out of range");
    if (cfg_.entropy != "none" && !cfg_.entropy.empty())
        b.entropy = make_entropy(cfg_.entropy, law_, EntropyParams{cfg_.ke, cfg_.eps, cfg_.slope});
    blender_ = std::make_unique<Blender>(*disc_, b);
    hash_ = mesh_.hash();
}

StepperConfig Problem::stepper_config() const {
    StepperConfig s;
    s.rk = cfg_.rk;
    s.cfl = cfg_.cfl;
    s.t_end = cfg_.t_end;
    s.max_steps = cfg_.max_steps;
    s.dt_fixed = cfg_.dt;
    if (cfg_.update == "pure-dg") s.mode = UpdateMode::PureDG;
    else if (cfg_.update == "fv-only") s.mode = UpdateMode::FVOnly;
    else s.mode = UpdateMode::Blended;
    return s;
}

std::vector<double> Problem::submeans_of(const PointField& f, double t, int degree) const {
    const SubcellTopology& T = *topo_;
    const RefSubdivision& R = T.ref;
    const int nv = disc_->nvar(), ns = T.ns;
    std::vector<double> ubar(disc_->submean_size(), 0.0);
    const QuadratureRule rule = T.dim == 1 ? interval_rule(degree) : triangle_rule(degree);
    double u[kMaxVars], acc[kMaxVars];
    for (int c = 0; c < T.ncells; ++c) {
        const CellGeom& G = T.geom[c];
        for (int m = 0; m < ns; ++m) {
            std::fill(acc, acc + nv, 0.0);
            double wsum = 0.0;
            auto add = [&](Vec2 x, double w) {
                f(x, t, u);
                for (int v = 0; v < nv; ++v) acc[v] += w * u[v];
                wsum += w;
            };
            if (T.dim == 1) {
                const Vec2 a = G.map(R.vertices[R.polygons[m][0]]);
                const Vec2 b = G.map(R.vertices[R.polygons[m][1]]);
                const double len = std::abs(b.x - a.x);
                for (std::size_t q = 0; q < rule.size(); ++q)
                    add(a + rule.points[q].x * (b - a), rule.weights[q] * len);
            } else {
                for (const auto& tri : R.pieces[m]) {
                    const Vec2 A = G.map(R.vertices[tri[0]]);
                    const Vec2 B = G.map(R.vertices[tri[1]]);
                    const Vec2 C = G.map(R.vertices[tri[2]]);
                    const double det = std::abs(cross(B - A, C - A));
                    for (std::size_t q = 0; q < rule.size(); ++q) {
                        const Vec2 xi = rule.points[q];
                        add(A + xi.x * (B - A) + xi.y * (C - A), rule.weights[q] * det);
                    }
                }
            }
            for (int v = 0; v < nv; ++v) ubar[(static_cast<std::size_t>(c) * nv + v) * ns + m] = acc[v] / wsum;
        }
    }
    return ubar;
}

int Problem::source_subcell() const {
    const SubcellTopology& T = *topo_;
    const double tol = 1e-12 * mesh_.scale();
    int best = -1;
    double bestr = 0.0;
    for (int g = 0; g < T.nsub; ++g) {
        bool touches = false;
        for (int i = T.sub_vert_ptr[g]; i < T.sub_vert_ptr[g + 1]; ++i)
            if (norm(T.sub_vert_pos[i]) < tol) touches = true;
        const double r = norm(T.sub_centroid[g]);
        if (touches && (best < 0 || r < bestr)) {
            best = g;
            bestr = r;
        }
    }
    if (best < 0) throw ConfigError("no subcell touches the origin");
    return best;
}

std::vector<double> Problem::initial_submeans() const {
    std::vector<double> ubar = submeans_of(case_->initial, 0.0, quad_degree(cfg_.k));
    if (case_->source_energy > 0) {
        const int g = source_subcell();
        ubar[disc_->sub_index(g, case_->dim + 1)] = case_->source_energy / topo_->sub_area[g];
    }
    return ubar;
}

std::string Problem::header(const std::string& prefix) const {
    std::ostringstream s;
    std::istringstream in(cfg_.serialize());
    std::string line;
    while (std::getline(in, line)) s << prefix << line << "\n";
    s << prefix << "mesh_hash = " << std::hex << hash_ << std::dec << "\n";
    s << prefix << "mesh_cells = " << mesh_.num_cells() << "\n";
    return s.str();
}

double Problem::h() const {
    double total = 0.0;
    for (int c = 0; c < mesh_.num_cells(); ++c) total += std::abs(mesh_.cell_measure(c));
    const double mean = total / mesh_.num_cells();
    return mesh_.dim == 1 ? mean : std::sqrt(mean);
}

// ---------------------------------------------------------------------------
// Run driver

RunResult run(Problem& p, const RunHooks& hooks) {
    const RunConfig& cfg = p.config();
    const Discretization& D = p.disc();
    RunResult res;
    res.ubar = hooks.initial.empty() ? p.initial_submeans() : hooks.initial;
    if (res.ubar.size() != p.disc().submean_size()) throw ConfigError("initial state has the wrong size");
    p.blender()->set_initial(res.ubar);
    Stepper st(D, cfg.update == "blended" ? p.blender() : nullptr, p.stepper_config());
    if (hooks.stage) st.set_monitor(hooks.stage);
    st.check_state(res.ubar, 0.0);

    const std::vector<double> mass0 = total_mass(D, res.ubar);
    std::vector<double> scale(mass0.size(), 0.0);
    {
        const SubcellTopology& T = p.topology();
        for (int g = 0; g < T.nsub; ++g)
            for (int v = 0; v < D.nvar(); ++v) scale[v] += T.sub_area[g] * std::abs(res.ubar[D.sub_index(g, v)]);
    }
    // Momentum totals change through wall forces; drift covers mass and energy.
    std::vector<int> conserved = {0};
    if (D.nvar() > 1) conserved.push_back(D.nvar() - 1);
    double sum_theta = 0.0;
    long nfaces = 0;
    try {
        while (res.t < cfg.t_end * (1 - 1e-14) && res.steps < cfg.max_steps) {
            StepInfo info = st.step(res.ubar, res.t);
            res.t += info.dt;
            ++res.steps;
            const BlendStats& b = info.blend;
            sum_theta += b.sum_theta;
            nfaces += b.faces;
            if (b.faces > 0) res.min_theta = std::min(res.min_theta, b.min_theta);
            res.min_D = std::min(res.min_D, info.min_D);
            res.invalid_entropy_cells += b.invalid_entropy_cells;
            res.knapsack_fallback += b.knapsack_fallback;
            const std::vector<double> mass = total_mass(D, res.ubar);
            double drift = 0.0;
            for (int v : conserved)
                drift = std::max(drift, std::abs(mass[v] - mass0[v]) / std::max(scale[v], 1e-300));
            res.max_mass_drift = std::max(res.max_mass_drift, drift);
            if (hooks.record_history) {
                StepRecord r;
                r.step = res.steps;
                r.t = res.t;
                r.dt = info.dt;
                r.min_theta = b.faces ? b.min_theta : 1.0;
                r.mean_theta = b.mean_theta();
                r.binding = b.binding;
                r.min_D = info.min_D;
                r.mass_drift = drift;
                r.redos = info.redos;
                res.history.push_back(r);
            }
        }
    } catch (const SolverAbort& e) {
        if (!cfg.out.empty()) {
            const std::string path = cfg.out + "/" + cfg.case_name + "_abort.txt";
            std::ofstream f = open_output(path);
            f << p.header();
            f << "# t = " << res.t << "\n# step = " << res.steps << "\n# error = " << e.what() << "\n";
        }
        throw;
    }
    res.mean_theta = nfaces ? sum_theta / nfaces : 1.0;
    if (!st.last_theta().empty()) {
        res.theta_sub = subcell_theta(p.topology(), st.last_theta());
    } else {
        res.theta_sub.assign(p.topology().nsub, cfg.update == "fv-only" ? 0.0 : 1.0);
    }
    if (!cfg.out.empty()) {
        const std::string base = cfg.out + "/" + cfg.case_name;
        if (selected(cfg, "profile")) {
            write_profile_csv(base + "_profile.csv", p, res.ubar, res.theta_sub);
            res.files.push_back(base + "_profile.csv");
        }
        if (selected(cfg, "vtk")) {
            write_vtk(base + ".vtk", p, res.ubar, res.theta_sub);
            res.files.push_back(base + ".vtk");
        }
        if (selected(cfg, "diagnostics")) {
            write_diagnostics_csv(base + "_diagnostics.csv", p, res.history);
            res.files.push_back(base + "_diagnostics.csv");
        }
    } else if (!split_list(cfg.outputs).empty() && cfg.outputs != "none") {
        throw ConfigError("outputs selected without an output directory");
    }
    return res;
}

RunResult run(const RunConfig& cfg, const RunHooks& hooks) {
    Problem p(cfg);
    return run(p, hooks);
}

// ---------------------------------------------------------------------------
// Errors and studies

ErrorNorms error_norms(const Problem& p, const std::vector<double>& ubar, const PointField& exact, double t,
                       const std::function<double(const double*)>& quantity) {
    const Discretization& D = p.disc();
    const SubcellTopology& T = p.topology();
    const std::vector<double> ex = p.submeans_of(exact, t, quad_degree(p.config().k) + 4);
    ErrorNorms e;
    double a[kMaxVars], b[kMaxVars];
    for (int g = 0; g < T.nsub; ++g) {
        D.gather(ubar, g, a);
        D.gather(ex, g, b);
        const double d = std::abs(quantity(a) - quantity(b));
        e.L1 += T.sub_area[g] * d;
        e.L2 += T.sub_area[g] * d * d;
    }
    e.L2 = std::sqrt(e.L2);
    return e;
}

std::vector<ConvergenceRow> convergence_study(const RunConfig& cfg, const std::vector<int>& levels,
                                              double dt_exponent) {
    if (levels.size() < 3) throw ConfigError("a convergence study needs at least 3 levels");
    const CaseDefinition& c = find_case(cfg.case_name);
    if (!c.exact) throw ConfigError("case " + c.name + " has no exact solution");
    std::vector<ConvergenceRow> rows;
    double h0 = 0.0;
    for (int n : levels) {
        RunConfig lc = cfg;
        lc.ncells = n;
        lc.mesh.clear();
        lc.out.clear();
        lc.outputs.clear();
        if (dt_exponent != 1.0) {
            RunConfig probe = lc;
            probe.blend = "none";
            const double h = Problem(probe).h();
            if (h0 == 0.0) h0 = h;
            lc.cfl = cfg.cfl * std::pow(h / h0, dt_exponent - 1.0);
        }
        Problem p(lc);
        RunHooks hooks;
        hooks.record_history = false;
        RunResult r = run(p, hooks);
        ConvergenceRow row;
        row.ncells = n;
        row.h = p.h();
        row.err = error_norms(p, r.ubar, c.exact, r.t, c.error_quantity);
        row.min_theta = r.min_theta;
        row.mean_theta = r.mean_theta;
        rows.push_back(row);
    }
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        const double lh = std::log(rows[i].h / rows[i + 1].h);
        rows[i].q1 = std::log(rows[i].err.L1 / rows[i + 1].err.L1) / lh;
        rows[i].q2 = std::log(rows[i].err.L2 / rows[i + 1].err.L2) / lh;
    }
    return rows;
}

void write_convergence_csv(const std::string& path, const RunConfig& cfg, const std::vector<ConvergenceRow>& rows) {
    std::ofstream f = open_output(path);
    std::istringstream in(cfg.serialize());
    std::string line;
    while (std::getline(in, line)) f << "# " << line << "\n";
    f << "ncells,h,E_L1,q_L1,E_L2,q_L2,min_theta,mean_theta\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        f << r.ncells << "," << r.h << "," << r.err.L1 << ",";
        if (i + 1 < rows.size()) f << r.q1;
        f << "," << r.err.L2 << ",";
        if (i + 1 < rows.size()) f << r.q2;
        f << "," << r.min_theta << "," << r.mean_theta << "\n";
    }
}

double subdivision_equivalence(const RunConfig& cfg, const std::vector<std::string>& schemes, int steps) {
    if (schemes.size() < 2) throw ConfigError("equivalence needs at least two subdivisions");
    double dt = cfg.dt;
    if (dt <= 0) {
        dt = std::numeric_limits<double>::infinity();
        for (const auto& s : schemes) {
            RunConfig c = cfg;
            c.subdivision = s;
            c.blend = "dg";
            Problem p(c);
            std::vector<double> u = p.initial_submeans(), r;
            Stepper st(p.disc(), p.blender(), p.stepper_config());
            BlendStats bs;
            double solv = 0;
            dt = std::min(dt, c.cfl * st.rate(u, 0.0, r, bs, solv));
        }
    }
    // Common initial moments: recovered on the first subdivision, projected on
    // every other one. Submean-first initialization differs between schemes.
    std::vector<double> U0;
    {
        RunConfig c = cfg;
        c.subdivision = schemes.front();
        Problem p(c);
        p.disc().recover(p.initial_submeans(), U0);
    }
    std::vector<std::vector<double>> moments;
    for (const auto& s : schemes) {
        RunConfig c = cfg;
        c.subdivision = s;
        c.blend = "dg";
        c.update = "blended";
        c.dt = dt;
        c.t_end = dt * steps;
        c.max_steps = steps;
        c.out.clear();
        c.outputs.clear();
        Problem p(c);
        RunHooks hooks;
        hooks.record_history = false;
        p.disc().project(U0, hooks.initial);
        RunResult r = run(p, hooks);
        std::vector<double> U;
        p.disc().recover(r.ubar, U);
        moments.push_back(std::move(U));
    }
    double worst = 0.0;
    for (std::size_t a = 0; a < moments.size(); ++a)
        for (std::size_t b = a + 1; b < moments.size(); ++b) {
            double diff = 0.0, ref = 0.0;
            for (std::size_t i = 0; i < moments[a].size(); ++i) {
                diff = std::max(diff, std::abs(moments[a][i] - moments[b][i]));
                ref = std::max(ref, std::abs(moments[a][i]));
            }
            worst = std::max(worst, diff / std::max(ref, 1e-300));
        }
    return worst;
}

// ---------------------------------------------------------------------------
// Writers

void write_profile_csv(const std::string& path, const Problem& p, const std::vector<double>& ubar,
                       const std::vector<double>& theta_sub) {
    const Discretization& D = p.disc();
    const SubcellTopology& T = p.topology();
    const ConservationLaw& law = D.law();
    const bool euler = law.gas_gamma() > 0;
    std::ofstream f = open_output(path);
    f << p.header();
    f << "cell,subcell,x,y,r,area";
    for (const auto& n : variable_names(law)) f << "," << n;
    if (euler) f << (law.dim() == 1 ? ",vx,p" : ",vx,vy,p");
    f << ",theta\n";
    double u[kMaxVars];
    for (int g = 0; g < T.nsub; ++g) {
        const Vec2 x = T.sub_centroid[g];
        f << g / T.ns << "," << g % T.ns << "," << x.x << "," << x.y << "," << norm(x) << "," << T.sub_area[g];
        D.gather(ubar, g, u);
        for (int v = 0; v < D.nvar(); ++v) f << "," << u[v];
        if (euler) {
            const auto& e = static_cast<const EulerLaw&>(law);
            f << "," << u[1] / u[0];
            if (law.dim() == 2) f << "," << u[2] / u[0];
            f << "," << e.pressure(u);
        }
        f << "," << (theta_sub.empty() ? 1.0 : theta_sub[g]) << "\n";
    }
}

void write_vtk(const std::string& path, const Problem& p, const std::vector<double>& ubar,
               const std::vector<double>& theta_sub) {
    const Discretization& D = p.disc();
    const SubcellTopology& T = p.topology();
    const ConservationLaw& law = D.law();
    std::ofstream f = open_output(path);
    std::ostringstream title;
    title << "subcell solution case=" << p.config().case_name << " mesh_hash=" << std::hex << p.mesh_hash();
    f << "# vtk DataFile Version 3.0\n" << title.str() << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    // Provenance as a byte array in the dataset field data.
    const std::string cfg = p.header("");
    f << "FIELD provenance 1\nconfig 1 " << cfg.size() << " unsigned_char\n";
    for (std::size_t i = 0; i < cfg.size(); ++i)
        f << static_cast<int>(static_cast<unsigned char>(cfg[i])) << ((i + 1) % 32 == 0 ? "\n" : " ");
    f << "\n";
    const int npts = T.sub_vert_ptr[T.nsub];
    f << "POINTS " << npts << " double\n";
    for (int i = 0; i < npts; ++i) f << T.sub_vert_pos[i].x << " " << T.sub_vert_pos[i].y << " 0\n";
    f << "CELLS " << T.nsub << " " << npts + T.nsub << "\n";
    for (int g = 0; g < T.nsub; ++g) {
        f << T.sub_vert_ptr[g + 1] - T.sub_vert_ptr[g];
        for (int i = T.sub_vert_ptr[g]; i < T.sub_vert_ptr[g + 1]; ++i) f << " " << i;
        f << "\n";
    }
    f << "CELL_TYPES " << T.nsub << "\n";
    for (int g = 0; g < T.nsub; ++g) f << (T.dim == 1 ? 3 : 7) << "\n";
    f << "CELL_DATA " << T.nsub << "\n";
    auto names = variable_names(law);
    for (int v = 0; v < D.nvar(); ++v) {
        f << "SCALARS " << names[v] << " double 1\nLOOKUP_TABLE default\n";
        for (int g = 0; g < T.nsub; ++g) f << ubar[D.sub_index(g, v)] << "\n";
    }
    if (law.gas_gamma() > 0) {
        const auto& e = static_cast<const EulerLaw&>(law);
        double u[kMaxVars];
        f << "SCALARS p double 1\nLOOKUP_TABLE default\n";
        for (int g = 0; g < T.nsub; ++g) {
            D.gather(ubar, g, u);
            f << e.pressure(u) << "\n";
        }
    }
    f << "SCALARS theta double 1\nLOOKUP_TABLE default\n";
    for (int g = 0; g < T.nsub; ++g) f << (theta_sub.empty() ? 1.0 : theta_sub[g]) << "\n";
}

void write_diagnostics_csv(const std::string& path, const Problem& p, const std::vector<StepRecord>& history) {
    std::ofstream f = open_output(path);
    f << p.header();
    f << "step,t,dt,min_theta,mean_theta";
    for (int s = 0; s < kNumStrategies; ++s) f << ",bind_" << strategy_name(static_cast<Strategy>(s));
    f << ",min_D,mass_drift,redos\n";
    for (const auto& r : history) {
        f << r.step << "," << r.t << "," << r.dt << "," << r.min_theta << "," << r.mean_theta;
        for (long b : r.binding) f << "," << b;
        f << "," << r.min_D << "," << r.mass_drift << "," << r.redos << "\n";
    }
}

}  // namespace sdg
