#include "sdg/dg_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sdg/kernels.hpp"

namespace sdg {

void ghost_state(const ConservationLaw& law, BcType bc, const double* uin, Vec2 n, Vec2 x, double t,
                 const InflowFunction& inflow, double* uout) {
    const int nv = law.nvar();
    switch (bc) {
        case BcType::Inflow:
            if (!inflow) throw ConfigError("inflow boundary without exterior data");
            inflow(x, t, uout);
            return;
        case BcType::Wall:
            std::copy(uin, uin + nv, uout);
            if (law.gas_gamma() > 0) {
                if (law.dim() == 1) {
                    uout[1] = -uin[1];
                } else {
                    double qn = uin[1] * n.x + uin[2] * n.y;
                    uout[1] = uin[1] - 2 * qn * n.x;
                    uout[2] = uin[2] - 2 * qn * n.y;
                }
            }
            return;
        case BcType::Outflow:
        case BcType::Periodic:
            std::copy(uin, uin + nv, uout);
            return;
    }
}

Discretization::Discretization(const SubcellTopology& topo, std::shared_ptr<const ConservationLaw> law,
                               FluxKind dg_flux, FluxKind fv_flux, InflowFunction inflow)
    : topo_(topo),
      ops_(build_cell_operators(topo.ref, topo.ref.k)),
      law_(law),
      dg_flux_(law, dg_flux),
      fv_flux_(law, fv_flux),
      inflow_(std::move(inflow)),
      nvar_(law->nvar()),
      nlf_(topo.nlf) {
    if (law->dim() != topo.dim) throw ConfigError("law " + law->name() + " does not match the mesh dimension");
    npts_ = ops_.nseg * ops_.nq_edge;
    vol_ref_ = ops_.volume_rule.points;
    dhat_.resize(ops_.ns);
    for (int m = 0; m < ops_.ns; ++m) dhat_[m] = topo.ref.area[m] / topo.ref.measure;
}

void Discretization::recover(const std::vector<double>& ubar, std::vector<double>& U) const {
    const int nc = ncells(), ns = ops_.ns, nk = ops_.nk;
    U.resize(moment_size());
    for (int c = 0; c < nc; ++c)
        kernels::matmul(ops_.R.data(), nk, ns, &ubar[static_cast<std::size_t>(c) * nvar_ * ns], nvar_,
                        &U[static_cast<std::size_t>(c) * nvar_ * nk]);
}

void Discretization::project(const std::vector<double>& U, std::vector<double>& ubar) const {
    const int nc = ncells(), ns = ops_.ns, nk = ops_.nk;
    ubar.resize(submean_size());
    for (int c = 0; c < nc; ++c)
        kernels::matmul(ops_.P.data(), ns, nk, &U[static_cast<std::size_t>(c) * nvar_ * nk], nvar_,
                        &ubar[static_cast<std::size_t>(c) * nvar_ * ns]);
}

void Discretization::gather(const std::vector<double>& ubar, int g, double* u) const {
    for (int v = 0; v < nvar_; ++v) u[v] = ubar[sub_index(g, v)];
}

void Discretization::evaluate(const std::vector<double>& U, int c, Vec2 xi, double* u) const {
    std::vector<double> phi(ops_.nk);
    ops_.basis.eval(xi, phi.data());
    for (int v = 0; v < nvar_; ++v) {
        const double* Uc = &U[(static_cast<std::size_t>(c) * nvar_ + v) * ops_.nk];
        double s = 0;
        for (int j = 0; j < ops_.nk; ++j) s += Uc[j] * phi[j];
        u[v] = s;
    }
}

void Discretization::evaluate_stage(const std::vector<double>& ubar, double t, StageData& s,
                                    const std::vector<double>* fv_states) const {
    prepare(ubar, s);
    compute_fluxes(ubar, t, s, fv_states);
}

void Discretization::prepare(const std::vector<double>& ubar, StageData& s) const {
    recover(ubar, s.U);
    traces(s);
}

void Discretization::traces(StageData& s) const {
    const int nc = ncells(), nk = ops_.nk;
    const std::size_t per_cell = static_cast<std::size_t>(nlf_) * nvar_ * npts_;
    s.trace_u.resize(nc * per_cell);
    s.trace_f.resize(nc * per_cell);
    for (int c = 0; c < nc; ++c)
        for (int e = 0; e < nlf_; ++e)
            kernels::matmul(ops_.trace_val[e].data(), npts_, nk, &s.U[static_cast<std::size_t>(c) * nvar_ * nk],
                            nvar_, &s.trace_u[(static_cast<std::size_t>(c) * nlf_ + e) * nvar_ * npts_]);
}

void Discretization::face_states(const std::vector<double>& ubar, double t, StageData& s,
                                 const std::vector<double>* fv_states, std::vector<double>& sL,
                                 std::vector<double>& sR) const {
    const int nf = nfaces();
    auto& F = s.faces;
    F.uL.resize(static_cast<std::size_t>(nf) * nvar_);
    F.uR.resize(F.uL.size());
    sL.resize(F.uL.size());
    sR.resize(F.uL.size());
    for (int f = 0; f < nf; ++f) {
        const GlobalFace& gf = topo_.faces[f];
        double* uL = &F.uL[static_cast<std::size_t>(f) * nvar_];
        double* uR = &F.uR[static_cast<std::size_t>(f) * nvar_];
        gather(ubar, gf.L, uL);
        if (gf.R >= 0)
            gather(ubar, gf.R, uR);
        else
            ghost_state(*law_, gf.bc, uL, gf.n, gf.mid, t, inflow_, uR);
        double* a = &sL[static_cast<std::size_t>(f) * nvar_];
        double* b = &sR[static_cast<std::size_t>(f) * nvar_];
        if (!fv_states) {
            std::copy(uL, uL + nvar_, a);
            std::copy(uR, uR + nvar_, b);
            continue;
        }
        const double* ml = &(*fv_states)[static_cast<std::size_t>(gf.L) * nvar_];
        std::copy(ml, ml + nvar_, a);
        if (gf.R >= 0) {
            const double* mr = &(*fv_states)[static_cast<std::size_t>(gf.R) * nvar_];
            std::copy(mr, mr + nvar_, b);
        } else {
            ghost_state(*law_, gf.bc, a, gf.n, gf.mid, t, inflow_, b);
        }
    }
}

double Discretization::max_fv_speed(const std::vector<double>& sL, const std::vector<double>& sR) const {
    double g = 0;
    const int nf = nfaces();
    for (int f = 0; f < nf; ++f) {
        const GlobalFace& gf = topo_.faces[f];
        double a = fv_flux_.local_speed(&sL[static_cast<std::size_t>(f) * nvar_],
                                        &sR[static_cast<std::size_t>(f) * nvar_], gf.mid, gf.n);
        if (std::isfinite(a)) g = std::max(g, a);
    }
    return g;
}

namespace {

struct TracePair {
    int c, e, cn, en;  // cn < 0 on the domain boundary
};

}  // namespace

void Discretization::dg_fluxes(double t, StageData& s) const {
    const Mesh& mesh = *topo_.mesh;
    const int nc = ncells();
    std::vector<TracePair> pairs;
    pairs.reserve(static_cast<std::size_t>(nc) * nlf_);
    for (int c = 0; c < nc; ++c)
        for (int e = 0; e < nlf_; ++e) {
            int cn = mesh.nbr[c][e], en = mesh.nbr_face[c][e];
            if (cn >= 0 && std::make_pair(cn, en) < std::make_pair(c, e)) continue;
            pairs.push_back({c, e, cn, en});
        }

    auto normal = [&](int c, int e) -> Vec2 {
        if (mesh.dim == 1) return {e == 0 ? -1.0 : 1.0, 0.0};
        Vec2 d = mesh.face_point(c, e, 1) - mesh.face_point(c, e, 0);
        double l = norm(d);
        return {d.y / l, -d.x / l};
    };
    auto base = [&](int c, int e) { return (static_cast<std::size_t>(c) * nlf_ + e) * nvar_ * npts_; };

    double uin[kMaxVars], uout[kMaxVars], f[kMaxVars];
    auto states = [&](const TracePair& p, int q, Vec2 x, Vec2 n) {
        std::size_t b = base(p.c, p.e);
        for (int v = 0; v < nvar_; ++v) uin[v] = s.trace_u[b + static_cast<std::size_t>(v) * npts_ + q];
        if (p.cn >= 0) {
            std::size_t bn = base(p.cn, p.en);
            int qn = npts_ - 1 - q;
            for (int v = 0; v < nvar_; ++v) uout[v] = s.trace_u[bn + static_cast<std::size_t>(v) * npts_ + qn];
        } else {
            int bi = mesh.bc_of[p.c][p.e];
            ghost_state(*law_, mesh.boundary[bi].type, uin, n, x, t, inflow_, uout);
        }
    };

    if (dg_flux_.kind() == FluxKind::GlobalLF) {
        for (const auto& p : pairs) {
            Vec2 n = normal(p.c, p.e);
            for (int q = 0; q < npts_; ++q) {
                Vec2 x = topo_.geom[p.c].map(ops_.trace_pts[p.e][q]);
                states(p, q, x, n);
                double a = dg_flux_.local_speed(uin, uout, x, n);
                if (std::isfinite(a)) s.global_gamma = std::max(s.global_gamma, a);
            }
        }
    }

    for (const auto& p : pairs) {
        Vec2 n = normal(p.c, p.e);
        std::size_t b = base(p.c, p.e);
        for (int q = 0; q < npts_; ++q) {
            Vec2 x = topo_.geom[p.c].map(ops_.trace_pts[p.e][q]);
            states(p, q, x, n);
            dg_flux_(uin, uout, x, n, s.global_gamma, f);
            for (int v = 0; v < nvar_; ++v) s.trace_f[b + static_cast<std::size_t>(v) * npts_ + q] = f[v];
            if (p.cn >= 0) {
                std::size_t bn = base(p.cn, p.en);
                int qn = npts_ - 1 - q;
                for (int v = 0; v < nvar_; ++v) s.trace_f[bn + static_cast<std::size_t>(v) * npts_ + qn] = -f[v];
            }
        }
    }
}

void Discretization::residuals(StageData& s) const {
    const int nc = ncells(), nk = ops_.nk;
    const int nq = static_cast<int>(ops_.volume_rule.size());
    s.Phi.assign(moment_size(), 0.0);
    s.poisoned.assign(nc, 0);
    s.npoisoned = 0;
    std::vector<double> uq(static_cast<std::size_t>(nvar_) * nq), g0(uq.size()), g1(uq.size());
    std::vector<double> wf(static_cast<std::size_t>(nvar_) * npts_);
    double u[kMaxVars], fx[kMaxVars], fy[kMaxVars];
    for (int c = 0; c < nc; ++c) {
        const CellGeom& G = topo_.geom[c];
        const double* Uc = &s.U[static_cast<std::size_t>(c) * nvar_ * nk];
        double* Pc = &s.Phi[static_cast<std::size_t>(c) * nvar_ * nk];
        bool bad = false;
        kernels::matmul(ops_.vol_val.data(), nq, nk, Uc, nvar_, uq.data());
        for (int q = 0; q < nq; ++q) {
            for (int v = 0; v < nvar_; ++v) u[v] = uq[static_cast<std::size_t>(v) * nq + q];
            Vec2 x = G.map(vol_ref_[q]);
            law_->flux(u, x, fx, fy);
            for (int v = 0; v < nvar_; ++v) {
                double ffy = topo_.dim == 2 ? fy[v] : 0.0;
                g0[static_cast<std::size_t>(v) * nq + q] = G.det * (G.Jinv[0][0] * fx[v] + G.Jinv[0][1] * ffy);
                g1[static_cast<std::size_t>(v) * nq + q] = G.det * (G.Jinv[1][0] * fx[v] + G.Jinv[1][1] * ffy);
            }
        }
        kernels::matmul(ops_.vol_dxi.data(), nk, nq, g0.data(), nvar_, Pc, true);
        if (topo_.dim == 2) kernels::matmul(ops_.vol_deta.data(), nk, nq, g1.data(), nvar_, Pc, true);
        for (int e = 0; e < nlf_; ++e) {
            const double len = topo_.edge_len[static_cast<std::size_t>(c) * nlf_ + e];
            std::size_t b = (static_cast<std::size_t>(c) * nlf_ + e) * nvar_ * npts_;
            for (int q = 0; q < npts_; ++q) {
                for (int v = 0; v < nvar_; ++v) u[v] = s.trace_u[b + static_cast<std::size_t>(v) * npts_ + q];
                if (!law_->admissible(u)) bad = true;
                double w = -ops_.trace_wts[e][q] * len;
                for (int v = 0; v < nvar_; ++v)
                    wf[static_cast<std::size_t>(v) * npts_ + q] = w * s.trace_f[b + static_cast<std::size_t>(v) * npts_ + q];
            }
            kernels::matmul(ops_.trace_valT[e].data(), nk, npts_, wf.data(), nvar_, Pc, true);
        }
        if (!bad && !all_finite(Pc, nvar_ * nk)) bad = true;
        if (bad) {
            s.poisoned[c] = 1;
            ++s.npoisoned;
            std::fill(Pc, Pc + nvar_ * nk, kNaN);
        }
    }
}

void Discretization::reconstruct(StageData& s) const {
    const int nc = ncells(), nk = ops_.nk, ns = ops_.ns;
    const int nfi = topo_.ref.nf(), nseg = ops_.nseg, nqe = ops_.nq_edge;
    auto& rec = s.faces.rec;
    rec.assign(static_cast<std::size_t>(nfaces()) * nvar_, 0.0);
    s.solvability = 0.0;
    std::vector<double> B(static_cast<std::size_t>(nvar_) * ns), X(B.size());
    std::vector<double> Fi(static_cast<std::size_t>(nvar_) * std::max(nfi, 1));
    for (int c = 0; c < nc; ++c) {
        std::fill(B.begin(), B.end(), 0.0);
        for (int e = 0; e < nlf_; ++e) {
            const double len = topo_.edge_len[static_cast<std::size_t>(c) * nlf_ + e];
            std::size_t b = (static_cast<std::size_t>(c) * nlf_ + e) * nvar_ * npts_;
            for (int sg = 0; sg < nseg; ++sg) {
                const int m = topo_.ref.edge_segments[e][sg].m;
                double seg[kMaxVars] = {0, 0, 0, 0};
                for (int i = 0; i < nqe; ++i) {
                    int q = sg * nqe + i;
                    double w = ops_.trace_wts[e][q] * len;
                    for (int v = 0; v < nvar_; ++v) seg[v] += w * s.trace_f[b + static_cast<std::size_t>(v) * npts_ + q];
                }
                for (int v = 0; v < nvar_; ++v) B[static_cast<std::size_t>(v) * ns + m] += seg[v];
                std::size_t k = (static_cast<std::size_t>(c) * nlf_ + e) * nseg + sg;
                if (topo_.cell_seg_sign[k] > 0) {
                    int fid = topo_.cell_seg_face[k];
                    const double flen = topo_.faces[fid].len;
                    for (int v = 0; v < nvar_; ++v) rec[static_cast<std::size_t>(fid) * nvar_ + v] = seg[v] / flen;
                }
            }
        }
        if (s.poisoned[c]) {
            for (int f = 0; f < nfi; ++f) {
                int fid = topo_.cell_intra_face[static_cast<std::size_t>(c) * nfi + f];
                for (int v = 0; v < nvar_; ++v) rec[static_cast<std::size_t>(fid) * nvar_ + v] = kNaN;
            }
            continue;
        }
        const double* Pc = &s.Phi[static_cast<std::size_t>(c) * nvar_ * nk];
        kernels::matmul(ops_.P.data(), ns, nk, Pc, nvar_, X.data());
        for (int v = 0; v < nvar_; ++v) {
            double sum = 0, scale = 0;
            for (int m = 0; m < ns; ++m) {
                std::size_t i = static_cast<std::size_t>(v) * ns + m;
                X[i] = X[i] * dhat_[m] + B[i];
                sum += X[i];
                scale += std::abs(B[i]);
            }
            scale += std::abs(Pc[static_cast<std::size_t>(v) * nk]);
            if (scale > 0) s.solvability = std::max(s.solvability, std::abs(sum) / scale);
        }
        if (nfi == 0) continue;
        kernels::matmul(ops_.H.data(), nfi, ns, X.data(), nvar_, Fi.data());
        for (int f = 0; f < nfi; ++f) {
            int fid = topo_.cell_intra_face[static_cast<std::size_t>(c) * nfi + f];
            const double flen = topo_.faces[fid].len;
            for (int v = 0; v < nvar_; ++v)
                rec[static_cast<std::size_t>(fid) * nvar_ + v] = Fi[static_cast<std::size_t>(v) * nfi + f] / flen;
        }
    }
    // Segment faces touching a poisoned cell.
    const int nf = nfaces();
    for (int f = 0; f < nf; ++f) {
        const GlobalFace& gf = topo_.faces[f];
        if (gf.kind == FaceKind::Intra) continue;
        if (s.poisoned[gf.cellL] || (gf.cellR >= 0 && s.poisoned[gf.cellR]))
            for (int v = 0; v < nvar_; ++v) rec[static_cast<std::size_t>(f) * nvar_ + v] = kNaN;
    }
}

void Discretization::fv_fluxes(const std::vector<double>& sL, const std::vector<double>& sR, bool modified,
                               StageData& s) const {
    const int nf = nfaces();
    auto& F = s.faces;
    F.fv.resize(static_cast<std::size_t>(nf) * nvar_);
    F.gamma.resize(nf);
    F.um.resize(F.fv.size());
    F.up.resize(F.fv.size());
    for (int f = 0; f < nf; ++f) {
        const GlobalFace& gf = topo_.faces[f];
        std::size_t o = static_cast<std::size_t>(f) * nvar_;
        double g = fv_flux_(&sL[o], &sR[o], gf.mid, gf.n, s.global_gamma, &F.fv[o]);
        if (modified) g = std::max(g, law_->max_speed(&F.uL[o], &F.uR[o], gf.mid, gf.n));
        F.gamma[f] = g;
        if (g > 0) {
            two_state(*law_, &F.uL[o], &F.uR[o], gf.mid, gf.n, &F.fv[o], g, &F.um[o], &F.up[o]);
        } else {
            std::copy(&F.uL[o], &F.uL[o] + nvar_, &F.um[o]);
            std::copy(&F.uR[o], &F.uR[o] + nvar_, &F.up[o]);
        }
    }
}

void Discretization::compute_fluxes(const std::vector<double>& ubar, double t, StageData& s,
                                    const std::vector<double>* fv_states) const {
    std::vector<double> sL, sR;
    face_states(ubar, t, s, fv_states, sL, sR);
    s.global_gamma = 0.0;
    if (fv_flux_.kind() == FluxKind::GlobalLF || dg_flux_.kind() == FluxKind::GlobalLF) {
        s.global_gamma = max_fv_speed(s.faces.uL, s.faces.uR);
        if (fv_states) s.global_gamma = std::max(s.global_gamma, max_fv_speed(sL, sR));
    }
    dg_fluxes(t, s);
    residuals(s);
    reconstruct(s);
    fv_fluxes(sL, sR, fv_states != nullptr, s);
}

void Discretization::fv_stage(const std::vector<double>& ubar, double t, StageData& s) const {
    std::vector<double> sL, sR;
    face_states(ubar, t, s, nullptr, sL, sR);
    s.global_gamma = fv_flux_.kind() == FluxKind::GlobalLF ? max_fv_speed(sL, sR) : 0.0;
    s.faces.rec.clear();
    fv_fluxes(sL, sR, false, s);
}

void Discretization::assemble(const StageData& s, const double* theta, std::vector<double>& rate) const {
    rate.assign(submean_size(), 0.0);
    const int nf = nfaces();
    const auto& F = s.faces;
    double fl[kMaxVars];
    for (int f = 0; f < nf; ++f) {
        const GlobalFace& gf = topo_.faces[f];
        std::size_t o = static_cast<std::size_t>(f) * nvar_;
        const double th = theta ? theta[f] : 0.0;
        if (th == 0.0) {
            for (int v = 0; v < nvar_; ++v) fl[v] = F.fv[o + v];
        } else if (th == 1.0) {
            for (int v = 0; v < nvar_; ++v) fl[v] = F.rec[o + v];
        } else {
            for (int v = 0; v < nvar_; ++v) fl[v] = F.fv[o + v] + th * (F.rec[o + v] - F.fv[o + v]);
        }
        for (int v = 0; v < nvar_; ++v) {
            double q = gf.len * fl[v];
            rate[sub_index(gf.L, v)] -= q;
            if (gf.R >= 0) rate[sub_index(gf.R, v)] += q;
        }
    }
    for (int g = 0; g < topo_.nsub; ++g) {
        const double a = topo_.sub_area[g];
        for (int v = 0; v < nvar_; ++v) rate[sub_index(g, v)] /= a;
    }
}

void Discretization::moment_rate(const StageData& s, std::vector<double>& dU) const {
    const int nc = ncells(), nk = ops_.nk;
    dU.resize(moment_size());
    for (int c = 0; c < nc; ++c) {
        const double inv = 1.0 / topo_.geom[c].measure;
        for (int i = 0; i < nvar_ * nk; ++i) {
            std::size_t k = static_cast<std::size_t>(c) * nvar_ * nk + i;
            dU[k] = s.Phi[k] * inv;
        }
    }
}

void Discretization::dg_submean_rate(const StageData& s, std::vector<double>& rate) const {
    std::vector<double> dU;
    moment_rate(s, dU);
    project(dU, rate);
}

double Discretization::cfl_limit(const StageData& s) const {
    std::vector<double> sum(topo_.nsub, 0.0);
    const int nf = nfaces();
    for (int f = 0; f < nf; ++f) {
        const GlobalFace& gf = topo_.faces[f];
        double g = s.faces.gamma[f];
        if (!std::isfinite(g)) throw SolverAbort("non-finite wave speed on face " + std::to_string(f));
        sum[gf.L] += gf.len * g;
        if (gf.R >= 0) sum[gf.R] += gf.len * g;
    }
    double dt = std::numeric_limits<double>::infinity();
    for (int g = 0; g < topo_.nsub; ++g)
        if (sum[g] > 0) dt = std::min(dt, topo_.sub_area[g] / sum[g]);
    return dt;
}

}  // namespace sdg
