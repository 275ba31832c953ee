#include "sdg/time_integration.hpp"

#include <cmath>
#include <sstream>

namespace sdg {

double default_cfl(int k) { return k <= 3 ? 0.5 : 0.25; }
int default_rk(int k) { return std::min(k + 1, 3); }

Stepper::Stepper(const Discretization& disc, Blender* blender, StepperConfig cfg)
    : disc_(disc), blender_(blender), cfg_(cfg) {
    if (cfg_.rk < 1 || cfg_.rk > 3) throw ConfigError("rk must be 1, 2 or 3");
    if (!(cfg_.cfl > 0) || cfg_.cfl > 1) throw ConfigError("cfl must lie in (0, 1]");
}

double Stepper::rate(const std::vector<double>& ubar, double t, std::vector<double>& r, BlendStats& stats,
                     double& solvability) {
    switch (cfg_.mode) {
        case UpdateMode::FVOnly:
            disc_.fv_stage(ubar, t, stage_);
            disc_.assemble(stage_, nullptr, r);
            theta_.clear();
            break;
        case UpdateMode::PureDG:
            disc_.evaluate_stage(ubar, t, stage_);
            disc_.dg_submean_rate(stage_, r);
            theta_.clear();
            break;
        case UpdateMode::Blended: {
            disc_.prepare(ubar, stage_);
            const bool modified = blender_ && blender_->fv_states(ubar, stage_, states_);
            disc_.compute_fluxes(ubar, t, stage_, modified ? &states_ : nullptr);
            if (blender_) {
                blender_->compute(ubar, stage_, theta_, stats);
            } else {
                theta_.assign(disc_.nfaces(), 1.0);
            }
            disc_.assemble(stage_, theta_.data(), r);
            break;
        }
    }
    solvability = std::max(solvability, stage_.solvability);
    return disc_.cfl_limit(stage_);
}

void Stepper::check_state(const std::vector<double>& ubar, double t) const {
    const ConservationLaw& law = disc_.law();
    double u[kMaxVars];
    for (int g = 0; g < disc_.topology().nsub; ++g) {
        disc_.gather(ubar, g, u);
        if (!all_finite(u, disc_.nvar()) || !law.admissible(u)) {
            std::ostringstream os;
            os << "inadmissible submean in subcell " << g << " (cell " << g / disc_.ns() << ") at t = " << t
               << ":";
            for (int v = 0; v < disc_.nvar(); ++v) os << ' ' << u[v];
            throw SolverAbort(os.str());
        }
    }
}

StepInfo Stepper::step(std::vector<double>& ubar, double t, double dt_max) {
    StepInfo info;
    const std::size_t n = ubar.size();
    u0_ = ubar;
    std::vector<double> r1;
    BlendStats s1;
    double solv = 0.0;
    const double lim1 = rate(u0_, t, r1, s1, solv);

    double dt = cfg_.dt_fixed > 0 ? cfg_.dt_fixed : cfg_.cfl * lim1;
    dt = std::min(dt, dt_max);
    if (cfg_.t_end > t) dt = std::min(dt, cfg_.t_end - t);
    if (!(dt > 0) || !std::isfinite(dt)) {
        std::ostringstream os;
        os << "invalid time step " << dt << " at t = " << t;
        throw SolverAbort(os.str());
    }

    const bool adapt = cfg_.dt_fixed <= 0;
    auto too_large = [&](double lim) { return adapt && cfg_.cfl * lim < dt * (1 - 1e-12); };

    // Intermediate stage values kept for the monitor.
    std::vector<std::vector<double>> stages;
    for (int attempt = 0;; ++attempt) {
        stages.clear();
        if (attempt > 20) throw SolverAbort("time step kept shrinking at t = " + std::to_string(t));
        BlendStats bs = s1;
        double sv = solv;
        u1_.resize(n);
        for (std::size_t i = 0; i < n; ++i) u1_[i] = u0_[i] + dt * r1[i];
        check_state(u1_, t + dt);
        if (monitor_ && cfg_.rk >= 2) stages.push_back(u1_);
        if (cfg_.rk >= 2) {
            const double lim2 = rate(u1_, t + dt, r_, bs, sv);
            if (too_large(lim2)) {
                dt = cfg_.cfl * lim2;
                ++info.redos;
                continue;
            }
            if (cfg_.rk == 2) {
                for (std::size_t i = 0; i < n; ++i) u1_[i] = 0.5 * u0_[i] + 0.5 * (u1_[i] + dt * r_[i]);
            } else {
                for (std::size_t i = 0; i < n; ++i) u1_[i] = 0.75 * u0_[i] + 0.25 * (u1_[i] + dt * r_[i]);
                check_state(u1_, t + 0.5 * dt);
                if (monitor_) stages.push_back(u1_);
                const double lim3 = rate(u1_, t + 0.5 * dt, r_, bs, sv);
                if (too_large(lim3)) {
                    dt = cfg_.cfl * lim3;
                    ++info.redos;
                    continue;
                }
                for (std::size_t i = 0; i < n; ++i)
                    u1_[i] = u0_[i] / 3.0 + 2.0 / 3.0 * (u1_[i] + dt * r_[i]);
            }
            check_state(u1_, t + dt);
        }
        info.blend = bs;
        info.solvability = sv;
        break;
    }
    if (monitor_) {
        for (std::size_t i = 0; i < stages.size(); ++i)
            monitor_(stages[i], i == 1 ? t + 0.5 * dt : t + dt, static_cast<int>(i));
        monitor_(u1_, t + dt, cfg_.rk - 1);
    }
    info.dt = dt;
    info.min_D = info.blend.min_D;
    ubar.swap(u1_);
    return info;
}

std::vector<double> total_mass(const Discretization& disc, const std::vector<double>& ubar) {
    std::vector<double> m(disc.nvar(), 0.0);
    const SubcellTopology& T = disc.topology();
    for (int g = 0; g < T.nsub; ++g)
        for (int v = 0; v < disc.nvar(); ++v) m[v] += T.sub_area[g] * ubar[disc.sub_index(g, v)];
    return m;
}

}  // namespace sdg
