// Command-line front end: run, convergence and equivalence studies.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "sdg/harness.hpp"

namespace {

struct Flag {
    const char* name;
    const char* key;
    const char* help;
};

const Flag kFlags[] = {
    {"--k", "k", "polynomial degree"},
    {"--subdivision", "subdivision", "quad-tri, voronoi-type, tri-uniform or 1d-uniform"},
    {"--blend", "blend", "comma list: positivity, gmp, lmp, lmp-strict, entropy-any, entropy-tadmor, "
                         "entropy-cell, dg, fv, none"},
    {"--flux-dg", "flux_dg", "DG-side flux: rusanov, global-lf, hll, hllc"},
    {"--flux-fv", "flux_fv", "FV-side flux: rusanov, global-lf, hll, hllc"},
    {"--cfl", "cfl", "safety factor on the subcell CFL bound"},
    {"--rk", "rk", "SSP Runge-Kutta stages (1, 2, 3)"},
    {"--t-end", "t_end", "final time"},
    {"--dt", "dt", "fixed time step"},
    {"--max-steps", "max_steps", "step limit"},
    {"--mesh", "mesh", "mesh file"},
    {"--ncells", "ncells", "target cell count of the generated mesh"},
    {"--out", "out", "output directory"},
    {"--outputs", "outputs", "comma list: profile, vtk, diagnostics"},
    {"--entropy", "entropy", "square, kruzkov, atan, euler-log"},
    {"--ke", "ke", "Kruzkov center"},
    {"--eps", "eps", "Kruzkov smoothing exponent"},
    {"--slope", "slope", "atan mollification slope"},
    {"--smoother", "smoother", "none, avg, min"},
    {"--lmp-var", "lmp_var", "conserved variable of the Euler LMP"},
    {"--update", "update", "blended, pure-dg, fv-only"},
};

struct Common {
    std::string case_name, config_file;
    std::map<std::string, std::string> values;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--case", c.case_name, "case name");
    app->add_option("--config", c.config_file, "key = value config file");
    for (const Flag& f : kFlags) app->add_option(f.name, c.values[f.key], f.help);
}

sdg::RunConfig build_config(CLI::App* app, const Common& c) {
    std::string name = c.case_name;
    if (!c.config_file.empty()) {
        // The case named in the file selects the defaults.
        sdg::RunConfig probe;
        probe.load_file(c.config_file);
        if (name.empty()) name = probe.case_name;
    }
    if (name.empty()) throw sdg::ConfigError("no case given (--case or a config file)");
    sdg::RunConfig cfg = sdg::make_config(name);
    const int k0 = cfg.k;
    bool cfl_set = false, rk_set = false;
    if (!c.config_file.empty()) {
        sdg::RunConfig before = cfg;
        cfg.load_file(c.config_file);
        cfg.case_name = name;
        cfl_set = cfg.cfl != before.cfl;
        rk_set = cfg.rk != before.rk;
    }
    for (const Flag& f : kFlags) {
        if (app->count(f.name) == 0) continue;
        cfg.set(f.key, c.values.at(f.key));
        if (std::string(f.key) == "cfl") cfl_set = true;
        if (std::string(f.key) == "rk") rk_set = true;
    }
    if (cfg.k != k0) {
        if (!cfl_set) cfg.cfl = sdg::default_cfl(cfg.k);
        if (!rk_set) cfg.rk = sdg::default_rk(cfg.k);
    }
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Subcell DG/FV blended solver"};
    app.require_subcommand(1);

    Common run_c, conv_c, eq_c;
    auto* run = app.add_subcommand("run", "run one case");
    add_common(run, run_c);

    auto* conv = app.add_subcommand("convergence", "mesh refinement study");
    add_common(conv, conv_c);
    int levels = 4;
    std::string conv_csv;
    double dt_exponent = 1.0;
    conv->add_option("--dt-exponent", dt_exponent, "time step refinement dt ~ h^p");
    conv->add_option("--levels", levels, "number of levels, cells doubling from --ncells");
    conv->add_option("--csv", conv_csv, "convergence table path (default <out>/<case>_convergence.csv)");

    auto* eq = app.add_subcommand("equivalence", "theta = 1 runs on all 2D subdivisions");
    add_common(eq, eq_c);
    int steps = 20;
    eq->add_option("--steps", steps, "number of time steps");

    auto* list = app.add_subcommand("cases", "list registered cases");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    }

    try {
        if (*list) {
            for (const auto& c : sdg::case_catalog()) std::cout << c.name << "  " << c.description << "\n";
            return 0;
        }
        if (*run) {
            sdg::RunConfig cfg = build_config(run, run_c);
            sdg::RunResult r = sdg::run(cfg);
            std::printf("case %s: t = %.6g in %ld steps, min theta %.4g, mean theta %.4g, mass drift %.3g\n",
                        cfg.case_name.c_str(), r.t, r.steps, r.min_theta, r.mean_theta, r.max_mass_drift);
            for (const auto& f : r.files) std::printf("wrote %s\n", f.c_str());
            return 0;
        }
        if (*conv) {
            sdg::RunConfig cfg = build_config(conv, conv_c);
            std::vector<int> lv;
            for (int i = 0; i < levels; ++i) lv.push_back(cfg.ncells << i);
            auto rows = sdg::convergence_study(cfg, lv, dt_exponent);
            std::printf("%8s %12s %12s %8s %12s %8s %10s %10s\n", "ncells", "h", "E_L1", "q_L1", "E_L2", "q_L2",
                        "min_theta", "mean_theta");
            for (const auto& r : rows)
                std::printf("%8d %12.5g %12.4e %8.3f %12.4e %8.3f %10.4g %10.4g\n", r.ncells, r.h, r.err.L1, r.q1,
                            r.err.L2, r.q2, r.min_theta, r.mean_theta);
            if (conv_csv.empty() && !cfg.out.empty()) conv_csv = cfg.out + "/" + cfg.case_name + "_convergence.csv";
            if (!conv_csv.empty()) {
                sdg::write_convergence_csv(conv_csv, cfg, rows);
                std::printf("wrote %s\n", conv_csv.c_str());
            }
            return 0;
        }
        if (*eq) {
            sdg::RunConfig cfg = build_config(eq, eq_c);
            double d = sdg::subdivision_equivalence(cfg, {"quad-tri", "voronoi-type", "tri-uniform"}, steps);
            std::printf("max pairwise relative moment difference after %d steps: %.3e\n", steps, d);
            return 0;
        }
    } catch (const sdg::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 3;
    } catch (const sdg::SolverAbort& e) {
        std::fprintf(stderr, "solver abort: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
