#include "sdg/blending.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sdg/kernels.hpp"

namespace sdg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp01(double x) {
    if (!(x > 0.0)) return 0.0;  // also maps NaN to 0
    return x < 1.0 ? x : 1.0;
}

}  // namespace

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::Positivity: return "positivity";
        case Strategy::GMP: return "gmp";
        case Strategy::LMP: return "lmp";
        case Strategy::EntropyAny: return "entropy-any";
        case Strategy::EntropyTadmor: return "entropy-tadmor";
        case Strategy::EntropyCell: return "entropy-cell";
        case Strategy::Smoother: return "smoother";
        case Strategy::Poison: return "poison";
        case Strategy::Count: break;
    }
    return "?";
}

Smoother parse_smoother(const std::string& s) {
    if (s == "none") return Smoother::None;
    if (s == "avg" || s == "average" || s == "1") return Smoother::Average;
    if (s == "min" || s == "2") return Smoother::Min;
    throw ConfigError("unknown smoother: " + s);
}

std::string smoother_name(Smoother s) {
    switch (s) {
        case Smoother::None: return "none";
        case Smoother::Average: return "avg";
        case Smoother::Min: return "min";
    }
    return "?";
}

void parse_strategies(const std::string& list, BlendingConfig& cfg) {
    cfg.mode = ThetaMode::Blend;
    cfg.positivity = cfg.gmp = cfg.lmp = cfg.entropy_any = cfg.entropy_tadmor = cfg.entropy_cell = false;
    cfg.relax = true;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty() || item == "none") continue;
        if (item == "positivity") cfg.positivity = true;
        else if (item == "gmp") cfg.gmp = true;
        else if (item == "lmp") cfg.lmp = true;
        else if (item == "lmp-strict") {
            cfg.lmp = true;
            cfg.relax = false;
        } else if (item == "entropy-any") cfg.entropy_any = true;
        else if (item == "entropy-tadmor") cfg.entropy_tadmor = true;
        else if (item == "entropy-cell") cfg.entropy_cell = true;
        else if (item == "dg") cfg.mode = ThetaMode::DG;
        else if (item == "fv") cfg.mode = ThetaMode::FV;
        else throw ConfigError("unknown blending strategy: " + item);
    }
    if (cfg.mode != ThetaMode::Blend && cfg.any_strategy())
        throw ConfigError("dg/fv modes cannot be combined with blending strategies");
}

std::string strategies_string(const BlendingConfig& cfg) {
    if (cfg.mode == ThetaMode::DG) return "dg";
    if (cfg.mode == ThetaMode::FV) return "fv";
    std::vector<std::string> v;
    if (cfg.positivity) v.push_back("positivity");
    if (cfg.gmp) v.push_back("gmp");
    if (cfg.lmp) v.push_back(cfg.relax ? "lmp" : "lmp-strict");
    if (cfg.entropy_any) v.push_back("entropy-any");
    if (cfg.entropy_tadmor) v.push_back("entropy-tadmor");
    if (cfg.entropy_cell) v.push_back("entropy-cell");
    if (v.empty()) return "none";
    std::string s = v[0];
    for (std::size_t i = 1; i < v.size(); ++i) s += "," + v[i];
    return s;
}

double theta_entropy_any(double du, double dF, double gamma, double gamma_max, double eps_div) {
    if (std::abs(du) < eps_div) return 1.0;
    if (!(dF * du > 0)) return 1.0;
    return clamp01((gamma - gamma_max) * du / (2.0 * dF));
}

double theta_entropy_tadmor(double dv, double dpsi, double f_fv, double dF, double eps_div) {
    if (std::abs(dv) < eps_div) return 1.0;
    if (!(dF * dv > 0)) return 1.0;
    return clamp01((dpsi / dv - f_fv) / dF);
}

double theta_gmp(double um, double up, double dF, double gamma, double alpha, double beta, double eps_div) {
    if (std::abs(dF) <= eps_div * (1.0 + gamma * (std::abs(um) + std::abs(up)))) return 1.0;
    double r = dF > 0 ? std::min(um - alpha, beta - up) : std::min(beta - um, up - alpha);
    return clamp01(gamma * r / std::abs(dF));
}

double theta_lmp(double um, double up, double dF, double gamma, double am, double bm, double ap, double bp,
                 double eps_div) {
    if (std::abs(dF) <= eps_div * (1.0 + gamma * (std::abs(um) + std::abs(up)))) return 1.0;
    double r = dF > 0 ? std::min(um - am, bp - up) : std::min(bm - um, up - ap);
    return clamp01(gamma * r / std::abs(dF));
}

bool euler_state_positive(int dim, const double* u) {
    if (!(u[0] > 0)) return false;
    double q2 = u[1] * u[1] + (dim == 2 ? u[2] * u[2] : 0.0);
    double M = u[0] * u[dim + 1] - 0.5 * q2;
    return M > 0 && std::isfinite(M);
}

PositivityResult theta_positivity(int dim, const double* um, const double* up, const double* dF, double gamma,
                                  double eps_div) {
    PositivityResult r;
    const int nv = dim + 2, iE = dim + 1;
    double scale = 0;
    for (int i = 0; i < nv; ++i) scale = std::max(scale, std::abs(dF[i]));
    double ref = 0;
    for (int i = 0; i < nv; ++i) ref = std::max({ref, std::abs(um[i]), std::abs(up[i])});
    if (scale <= eps_div * (1.0 + gamma * ref)) return r;
    if (!(gamma > 0)) {
        r.theta = 0.0;
        r.bad_state = true;
        return r;
    }
    const double* w[2] = {um, up};
    const double sgn[2] = {-1.0, 1.0};
    double t1 = 1.0;
    for (const double* s : w) {
        if (!(s[0] > 0)) {
            r.theta = 0.0;
            r.bad_state = true;
            return r;
        }
        if (dF[0] != 0.0) t1 = std::min(t1, std::abs(gamma / dF[0]) * s[0]);
    }
    double t2 = 1.0;
    double dq2 = dF[1] * dF[1] + (dim == 2 ? dF[2] * dF[2] : 0.0);
    for (const double* s : w) {
        double q2 = s[1] * s[1] + (dim == 2 ? s[2] * s[2] : 0.0);
        double M = s[0] * s[iE] - 0.5 * q2;
        if (!(M > 0)) {
            r.theta = 0.0;
            r.bad_state = true;
            return r;
        }
        double qdq = s[1] * dF[1] + (dim == 2 ? s[2] * dF[2] : 0.0);
        double A = (0.5 * dq2 - t1 * dF[0] * dF[iE]) / (gamma * gamma);
        double B = (qdq - s[0] * dF[iE] - t1 * s[iE] * dF[0]) / gamma;
        double den = std::abs(B) + std::max(0.0, A);
        if (den > 0) t2 = std::min(t2, M / den);
    }
    double theta = clamp01(t1 * clamp01(t2));

    auto replay = [&](double th) {
        double b[kMaxVars] = {};
        for (int k = 0; k < 2; ++k) {
            for (int i = 0; i < nv; ++i) b[i] = w[k][i] + sgn[k] * th * dF[i] / gamma;
            if (!euler_state_positive(dim, b)) return false;
        }
        return true;
    };
    if (!replay(theta)) {
        // Largest admissible theta from the exact linear/quadratic constraints.
        r.fallback = true;
        for (int k = 0; k < 2; ++k) {
            const double* s = w[k];
            double a[kMaxVars];
            for (int i = 0; i < nv; ++i) a[i] = sgn[k] * dF[i] / gamma;
            double lim = theta;
            if (a[0] < 0) lim = std::min(lim, 0.99 * (-s[0] / a[0]));
            double q2 = s[1] * s[1] + (dim == 2 ? s[2] * s[2] : 0.0);
            double M = s[0] * s[iE] - 0.5 * q2;
            double L = s[0] * a[iE] + s[iE] * a[0] - (s[1] * a[1] + (dim == 2 ? s[2] * a[2] : 0.0));
            double Q = a[0] * a[iE] - 0.5 * (a[1] * a[1] + (dim == 2 ? a[2] * a[2] : 0.0));
            // smallest positive root of M + L t + Q t^2
            double root = kInf;
            if (std::abs(Q) < 1e-300) {
                if (L < 0) root = -M / L;
            } else {
                double disc = L * L - 4 * Q * M;
                if (disc >= 0) {
                    double sq = std::sqrt(disc);
                    double qq = -0.5 * (L + (L >= 0 ? sq : -sq));
                    for (double t : {qq / Q, qq != 0 ? M / qq : kInf})
                        if (t > 0) root = std::min(root, t);
                }
            }
            if (root < kInf) lim = std::min(lim, 0.99 * root);
            theta = std::min(theta, lim);
        }
        theta = clamp01(theta);
        if (!replay(theta)) theta = 0.0;
    }
    r.theta = theta;
    return r;
}

std::vector<double> knapsack_greedy(const std::vector<double>& C, double D, const std::vector<double>& cap,
                                    const std::vector<int>& key) {
    const std::size_t n = C.size();
    std::vector<double> theta(n, 0.0);
    double budget = D;
    std::vector<std::size_t> pos;
    for (std::size_t i = 0; i < n; ++i) {
        if (C[i] <= 0) {
            theta[i] = cap[i];
            budget -= C[i] * cap[i];
        } else {
            pos.push_back(i);
        }
    }
    std::sort(pos.begin(), pos.end(), [&](std::size_t a, std::size_t b) {
        if (C[a] != C[b]) return C[a] < C[b];
        return key[a] < key[b];
    });
    for (std::size_t i : pos) {
        if (budget <= 0) break;
        double t = std::min(cap[i], budget / C[i]);
        theta[i] = t;
        budget -= C[i] * t;
    }
    return theta;
}

std::vector<double> subcell_theta(const SubcellTopology& topo, const std::vector<double>& theta) {
    std::vector<double> out(topo.nsub, 1.0);
    for (int g = 0; g < topo.nsub; ++g) {
        double s = 0;
        int n = topo.sub_face_ptr[g + 1] - topo.sub_face_ptr[g];
        for (int i = topo.sub_face_ptr[g]; i < topo.sub_face_ptr[g + 1]; ++i) s += theta[topo.sub_face_idx[i]];
        if (n > 0) out[g] = s / n;
    }
    return out;
}

void smoothen(const SubcellTopology& topo, Smoother mode, std::vector<double>& theta) {
    if (mode == Smoother::None) return;
    std::vector<double> agg(topo.nsub, 1.0);
    for (int g = 0; g < topo.nsub; ++g) {
        int b = topo.sub_face_ptr[g], e = topo.sub_face_ptr[g + 1];
        if (b == e) continue;
        if (mode == Smoother::Average) {
            double s = 0;
            for (int i = b; i < e; ++i) s += theta[topo.sub_face_idx[i]];
            agg[g] = s / (e - b);
        } else {
            double s = 1.0;
            for (int i = b; i < e; ++i) s = std::min(s, theta[topo.sub_face_idx[i]]);
            agg[g] = s;
        }
    }
    std::vector<double> out(theta.size());
    std::vector<int> around;
    for (std::size_t f = 0; f < theta.size(); ++f) {
        const GlobalFace& F = topo.faces[f];
        around.clear();
        for (int v : F.verts) {
            if (v < 0) continue;
            for (int i = topo.vert_sub_ptr[v]; i < topo.vert_sub_ptr[v + 1]; ++i) around.push_back(topo.vert_sub_idx[i]);
        }
        std::sort(around.begin(), around.end());
        around.erase(std::unique(around.begin(), around.end()), around.end());
        double r;
        if (mode == Smoother::Average) {
            double s = 0;
            for (int g : around) s += agg[g];
            r = around.empty() ? 1.0 : s / around.size();
        } else {
            r = 1.0;
            for (int g : around) r = std::min(r, agg[g]);
        }
        out[f] = std::min(theta[f], r);
    }
    theta.swap(out);
}

std::vector<char> smooth_flags(const Discretization& D, const std::vector<double>& U, int var) {
    const SubcellTopology& T = D.topology();
    const CellOperators& ops = D.ops();
    const int nk = ops.nk, ns = ops.ns, nc = T.ncells, dim = T.dim, nv = D.nvar();
    std::vector<char> flags(T.nsub, 0);
    if (ops.k < 2) return flags;
    const bool cell_level = ops.k == 2;
    const int nent = cell_level ? nc : T.nsub;

    // Mean first and second physical derivatives per entity:
    // d[0] = u_x, d[1] = u_y, d[2] = u_xx, d[3] = u_xy, d[4] = u_yy
    std::vector<std::array<double, 5>> d(nent);
    std::vector<Vec2> centroid(nent);
    auto row_dot = [&](const Matrix& M, int r, const double* Uc) {
        double s = 0;
        for (int j = 0; j < nk; ++j) s += M(r, j) * Uc[j];
        return s;
    };
    for (int c = 0; c < nc; ++c) {
        const CellGeom& G = T.geom[c];
        const double* Uc = &U[(static_cast<std::size_t>(c) * nv + var) * nk];
        const int rows = cell_level ? 1 : ns;
        for (int r = 0; r < rows; ++r) {
            const Matrix& Mx = cell_level ? ops.Cxi : ops.Pxi;
            const Matrix& Mxx = cell_level ? ops.Cxixi : ops.Pxixi;
            double a = row_dot(Mx, r, Uc), aa = row_dot(Mxx, r, Uc);
            double b = 0, ab = 0, bb = 0;
            if (dim == 2) {
                b = row_dot(cell_level ? ops.Ceta : ops.Peta, r, Uc);
                ab = row_dot(cell_level ? ops.Cxieta : ops.Pxieta, r, Uc);
                bb = row_dot(cell_level ? ops.Cetaeta : ops.Petaeta, r, Uc);
            }
            const double ref[2] = {a, b};
            const double hes[2][2] = {{aa, ab}, {ab, bb}};
            std::array<double, 5> out{};
            for (int i = 0; i < 2; ++i)
                for (int l = 0; l < dim; ++l) out[i] += G.Jinv[l][i] * ref[l];
            for (int i = 0; i < 2; ++i)
                for (int j = i; j < 2; ++j) {
                    double s = 0;
                    for (int l = 0; l < dim; ++l)
                        for (int q = 0; q < dim; ++q) s += G.Jinv[l][i] * G.Jinv[q][j] * hes[l][q];
                    out[2 + i + j] = s;
                }
            int e = cell_level ? c : c * ns + r;
            d[e] = out;
            if (cell_level) {
                Vec2 cc = dim == 1 ? Vec2{0.5, 0} : Vec2{1.0 / 3, 1.0 / 3};
                centroid[e] = G.map(cc);
            } else {
                centroid[e] = T.sub_centroid[e];
            }
        }
    }

    const auto& vptr = cell_level ? T.cell_vert_ptr : T.sub_vert_ptr;
    const auto& vidx = cell_level ? T.cell_vert_idx : T.sub_vert_idx;
    const auto& vpos = cell_level ? T.cell_vert_pos : T.sub_vert_pos;
    const auto& aptr = cell_level ? T.node_cell_ptr : T.vert_sub_ptr;
    const auto& aidx = cell_level ? T.node_cell_idx : T.vert_sub_idx;

    double gscale = 0;
    for (const auto& x : d) gscale = std::max({gscale, std::abs(x[0]), std::abs(x[1])});
    std::vector<char> ent(nent, 0);
    for (int e = 0; e < nent; ++e) {
        bool smooth = true;
        for (int i = vptr[e]; i < vptr[e + 1] && smooth; ++i) {
            int q = vidx[i];
            Vec2 dx = vpos[i] - centroid[e];
            for (int comp = 0; comp < dim && smooth; ++comp) {
                double lo = kInf, hi = -kInf;
                for (int j = aptr[q]; j < aptr[q + 1]; ++j) {
                    double v = d[aidx[j]][comp];
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                double val = comp == 0 ? d[e][0] + d[e][2] * dx.x + d[e][3] * dx.y
                                       : d[e][1] + d[e][3] * dx.x + d[e][4] * dx.y;
                double tol = 1e-10 * (std::abs(lo) + std::abs(hi)) + 1e-14 * gscale;
                if (!(val >= lo - tol && val <= hi + tol)) smooth = false;
            }
        }
        ent[e] = smooth;
    }
    if (cell_level) {
        for (int g = 0; g < T.nsub; ++g) flags[g] = ent[g / ns];
    } else {
        flags = ent;
    }
    return flags;
}

void BlendStats::merge(const BlendStats& o) {
    min_theta = std::min(min_theta, o.min_theta);
    sum_theta += o.sum_theta;
    faces += o.faces;
    for (int i = 0; i < kNumStrategies; ++i) binding[i] += o.binding[i];
    min_D = std::min(min_D, o.min_D);
    assembled_cells += o.assembled_cells;
    invalid_entropy_cells += o.invalid_entropy_cells;
    knapsack_fallback += o.knapsack_fallback;
    positivity_bad += o.positivity_bad;
    positivity_fallback += o.positivity_fallback;
}

Blender::Blender(const Discretization& disc, BlendingConfig cfg) : disc_(disc), cfg_(std::move(cfg)) {
    const ConservationLaw& law = disc.law();
    euler_ = law.gas_gamma() > 0;
    if (cfg_.mode != ThetaMode::Blend) return;
    if (cfg_.positivity && !euler_) throw ConfigError("positivity blending requires an Euler law");
    if (cfg_.gmp && euler_) throw ConfigError("GMP blending applies to scalar laws");
    if ((cfg_.entropy_any || cfg_.entropy_tadmor) && euler_)
        throw ConfigError("entropy-any and entropy-tadmor apply to scalar laws");
    if ((cfg_.entropy_tadmor || cfg_.entropy_cell) && !cfg_.entropy)
        throw ConfigError("entropy blending needs an entropy pair");
    if (cfg_.lmp_var < 0 || cfg_.lmp_var >= law.nvar()) throw ConfigError("LMP variable out of range");
}

void Blender::set_initial(const std::vector<double>& ubar0) {
    if (!cfg_.gmp || cfg_.gmp_bounds_given) return;
    cfg_.alpha = kInf;
    cfg_.beta = -kInf;
    for (int g = 0; g < disc_.topology().nsub; ++g) {
        double u = ubar0[disc_.sub_index(g, 0)];
        cfg_.alpha = std::min(cfg_.alpha, u);
        cfg_.beta = std::max(cfg_.beta, u);
    }
}

bool Blender::fv_states(const std::vector<double>& ubar, const StageData& s, std::vector<double>& states) {
    if (cfg_.mode != ThetaMode::Blend || !cfg_.entropy_cell) return false;
    const CellOperators& ops = disc_.ops();
    const EntropyPair& pair = *cfg_.entropy;
    const int nv = disc_.nvar(), nk = ops.nk, ns = ops.ns, nc = disc_.ncells();
    const int nq = static_cast<int>(ops.volume_rule.weights.size());
    vsub_.assign(static_cast<std::size_t>(nc) * ns * nv, 0.0);
    usub_.assign(vsub_.size(), 0.0);
    vsub_valid_.assign(nc, 1);
    std::vector<double> uq(static_cast<std::size_t>(nv) * nq), vq(uq.size()), V(static_cast<std::size_t>(nv) * nk),
        vs(static_cast<std::size_t>(nv) * ns);
    double u[kMaxVars], v[kMaxVars];
    for (int c = 0; c < nc; ++c) {
        kernels::matmul(ops.vol_val.data(), nq, nk, &s.U[static_cast<std::size_t>(c) * nv * nk], nv, uq.data());
        bool ok = true;
        for (int q = 0; q < nq; ++q) {
            for (int i = 0; i < nv; ++i) u[i] = uq[static_cast<std::size_t>(i) * nq + q];
            if (!pair.admissible(u)) ok = false;
            pair.variable(u, v);
            for (int i = 0; i < nv; ++i) vq[static_cast<std::size_t>(i) * nq + q] = v[i];
        }
        kernels::matmul(ops.vol_valT.data(), nk, nq, vq.data(), nv, V.data());
        kernels::matmul(ops.S.data(), ns, nk, V.data(), nv, vs.data());
        for (int m = 0; m < ns; ++m) {
            const int g = c * ns + m;
            for (int i = 0; i < nv; ++i) v[i] = vs[static_cast<std::size_t>(i) * ns + m];
            if (!pair.valid_variable(v)) ok = false;
            pair.to_conserved(v, u);
            if (!all_finite(u, nv) || !disc_.law().admissible(u)) ok = false;
            for (int i = 0; i < nv; ++i) {
                vsub_[static_cast<std::size_t>(g) * nv + i] = v[i];
                usub_[static_cast<std::size_t>(g) * nv + i] = u[i];
            }
        }
        vsub_valid_[c] = ok;
    }
    states.resize(usub_.size());
    for (int c = 0; c < nc; ++c)
        for (int m = 0; m < ns; ++m) {
            const int g = c * ns + m;
            for (int i = 0; i < nv; ++i)
                states[static_cast<std::size_t>(g) * nv + i] =
                    vsub_valid_[c] ? usub_[static_cast<std::size_t>(g) * nv + i] : ubar[disc_.sub_index(g, i)];
        }
    return true;
}

void Blender::compute(const std::vector<double>& ubar, const StageData& s, std::vector<double>& theta,
                      BlendStats& stats) {
    const SubcellTopology& T = disc_.topology();
    const ConservationLaw& law = disc_.law();
    const int nf = disc_.nfaces(), nv = disc_.nvar();
    const auto& F = s.faces;
    theta.assign(nf, 1.0);
    std::vector<signed char> who(nf, -1);

    if (cfg_.mode == ThetaMode::FV) std::fill(theta.begin(), theta.end(), 0.0);
    if (cfg_.mode == ThetaMode::Blend) {
        auto bind = [&](int f, double val, Strategy st) {
            if (val < theta[f]) {
                theta[f] = val;
                who[f] = static_cast<signed char>(st);
            }
        };

        // LMP bounds from the stage-begin submeans.
        std::vector<double> lo, hi;
        std::vector<char> smooth;
        const int lv = cfg_.lmp_var;
        if (cfg_.lmp) {
            lo.assign(T.nsub, kInf);
            hi.assign(T.nsub, -kInf);
            for (int g = 0; g < T.nsub; ++g) {
                for (int i = T.stencil_ptr[g]; i < T.stencil_ptr[g + 1]; ++i) {
                    double u = ubar[disc_.sub_index(T.stencil_idx[i], lv)];
                    lo[g] = std::min(lo[g], u);
                    hi[g] = std::max(hi[g], u);
                }
                if (euler_) {
                    for (int i = T.sub_face_ptr[g]; i < T.sub_face_ptr[g + 1]; ++i) {
                        int f = T.sub_face_idx[i];
                        for (double u : {F.um[static_cast<std::size_t>(f) * nv + lv], F.up[static_cast<std::size_t>(f) * nv + lv]}) {
                            lo[g] = std::min(lo[g], u);
                            hi[g] = std::max(hi[g], u);
                        }
                    }
                }
            }
            if (cfg_.relax) smooth = smooth_flags(disc_, s.U, lv);
        }

        double dF[kMaxVars];
        for (int f = 0; f < nf; ++f) {
            const GlobalFace& gf = T.faces[f];
            const std::size_t o = static_cast<std::size_t>(f) * nv;
            bool finite = true;
            for (int i = 0; i < nv; ++i) {
                dF[i] = F.rec[o + i] - F.fv[o + i];
                finite = finite && std::isfinite(dF[i]);
            }
            if (!finite) {
                theta[f] = 0.0;
                who[f] = static_cast<signed char>(Strategy::Poison);
                continue;
            }
            const double g = F.gamma[f];
            const double* um = &F.um[o];
            const double* up = &F.up[o];
            if (cfg_.positivity) {
                PositivityResult r = theta_positivity(law.dim(), um, up, dF, g, cfg_.eps_div);
                stats.positivity_bad += r.bad_state;
                stats.positivity_fallback += r.fallback;
                bind(f, r.theta, Strategy::Positivity);
            }
            if (cfg_.gmp) bind(f, theta_gmp(um[0], up[0], dF[0], g, cfg_.alpha, cfg_.beta, cfg_.eps_div), Strategy::GMP);
            if (cfg_.lmp) {
                bool relaxed = !smooth.empty() && gf.R >= 0 && smooth[gf.L] && smooth[gf.R];
                if (!relaxed) {
                    double ap = gf.R >= 0 ? lo[gf.R] : -kInf, bp = gf.R >= 0 ? hi[gf.R] : kInf;
                    bind(f, theta_lmp(um[lv], up[lv], dF[lv], g, lo[gf.L], hi[gf.L], ap, bp, cfg_.eps_div),
                         Strategy::LMP);
                }
            }
            if (cfg_.entropy_any) {
                const double* uL = &F.uL[o];
                const double* uR = &F.uR[o];
                double gmax = law.max_speed(uL, uR, gf.mid, gf.n);
                bind(f, theta_entropy_any(uR[0] - uL[0], dF[0], g, gmax, cfg_.eps_div), Strategy::EntropyAny);
            }
            if (cfg_.entropy_tadmor) {
                const double* uL = &F.uL[o];
                const double* uR = &F.uR[o];
                double vl, vr;
                cfg_.entropy->variable(uL, &vl);
                cfg_.entropy->variable(uR, &vr);
                double dpsi = cfg_.entropy->potential_n(uR, gf.mid, gf.n) - cfg_.entropy->potential_n(uL, gf.mid, gf.n);
                bind(f, theta_entropy_tadmor(vr - vl, dpsi, F.fv[o], dF[0], cfg_.eps_div), Strategy::EntropyTadmor);
            }
        }

        if (cfg_.smoother != Smoother::None) {
            std::vector<double> before = theta;
            smoothen(T, cfg_.smoother, theta);
            for (int f = 0; f < nf; ++f)
                if (theta[f] < before[f]) who[f] = static_cast<signed char>(Strategy::Smoother);
        }
        if (cfg_.entropy_cell) entropy_cell(s, theta, who, stats);
    }

    for (int f = 0; f < nf; ++f) {
        theta[f] = clamp01(theta[f]);
        stats.min_theta = std::min(stats.min_theta, theta[f]);
        stats.sum_theta += theta[f];
        if (theta[f] < 1.0 && who[f] >= 0) ++stats.binding[who[f]];
    }
    stats.faces += nf;
}

void Blender::entropy_cell(const StageData& s, std::vector<double>& theta, std::vector<signed char>& who,
                           BlendStats& stats) {
    const SubcellTopology& T = disc_.topology();
    const CellOperators& ops = disc_.ops();
    const EntropyPair& pair = *cfg_.entropy;
    const int nv = disc_.nvar(), ns = ops.ns, nc = disc_.ncells(), nfi = T.ref.nf();
    const int nlf = T.nlf, nseg = ops.nseg, nqe = ops.nq_edge, npts = disc_.npts();
    const int per_cell = nfi + nlf * nseg;
    const auto& F = s.faces;
    // Items per cell: intra faces first, then segment faces.
    std::vector<double> C(static_cast<std::size_t>(nc) * per_cell, 0.0), D(nc, 0.0);
    std::vector<int> key(C.size());
    std::vector<double> res(theta);
    double vq[kMaxVars], uq[kMaxVars];

    for (int c = 0; c < nc; ++c) {
        double* Cc = &C[static_cast<std::size_t>(c) * per_cell];
        int* kc = &key[static_cast<std::size_t>(c) * per_cell];
        for (int f = 0; f < nfi; ++f) kc[f] = T.cell_intra_face[static_cast<std::size_t>(c) * nfi + f];
        for (int k = 0; k < nlf * nseg; ++k) kc[nfi + k] = T.cell_seg_face[static_cast<std::size_t>(c) * nlf * nseg + k];
        if (!vsub_valid_[c]) {
            ++stats.invalid_entropy_cells;
            for (int i = 0; i < per_cell; ++i) res[kc[i]] = 0.0;
            continue;
        }
        double Dc = 0;
        for (int f = 0; f < nfi; ++f) {
            const GlobalFace& gf = T.faces[kc[f]];
            const std::size_t o = static_cast<std::size_t>(kc[f]) * nv;
            double dvf = 0, dvd = 0;
            for (int i = 0; i < nv; ++i) {
                double dv = vsub_[static_cast<std::size_t>(gf.R) * nv + i] - vsub_[static_cast<std::size_t>(gf.L) * nv + i];
                dvf += dv * F.fv[o + i];
                dvd += dv * (F.rec[o + i] - F.fv[o + i]);
            }
            Dc -= gf.len * dvf;
            Cc[f] = gf.len * dvd;
        }
        for (int e = 0; e < nlf; ++e) {
            const double elen = T.edge_len[static_cast<std::size_t>(c) * nlf + e];
            const std::size_t b = (static_cast<std::size_t>(c) * nlf + e) * nv * npts;
            for (int sg = 0; sg < nseg; ++sg) {
                const std::size_t k = (static_cast<std::size_t>(c) * nlf + e) * nseg + sg;
                const GlobalFace& gf = T.faces[T.cell_seg_face[k]];
                const double sign = T.cell_seg_sign[k];
                const Vec2 n{sign * gf.n.x, sign * gf.n.y};
                const int g = c * ns + T.ref.edge_segments[e][sg].m;
                const double* vm = &vsub_[static_cast<std::size_t>(g) * nv];
                const double Psi = pair.potential_n(&usub_[static_cast<std::size_t>(g) * nv], gf.mid, n);
                Dc += gf.len * Psi;
                double cf = 0;
                for (int i = 0; i < nqe; ++i) {
                    const int q = sg * nqe + i;
                    for (int j = 0; j < nv; ++j) uq[j] = s.trace_u[b + static_cast<std::size_t>(j) * npts + q];
                    pair.variable(uq, vq);
                    Vec2 x = T.geom[c].map(ops.trace_pts[e][q]);
                    double term = 0;
                    for (int j = 0; j < nv; ++j) term += (vq[j] - vm[j]) * s.trace_f[b + static_cast<std::size_t>(j) * npts + q];
                    term -= pair.potential_n(uq, x, n) - Psi;
                    cf += ops.trace_wts[e][q] * elen * term;
                }
                Cc[nfi + e * nseg + sg] = cf;
            }
        }
        for (int i = 0; i < per_cell; ++i)
            if (!(res[kc[i]] > 0)) Cc[i] = 0.0;  // inactive face, possibly NaN coefficient
        D[c] = Dc;
        ++stats.assembled_cells;
        stats.min_D = std::min(stats.min_D, Dc);
    }

    // Shared segment faces take the smaller of the two cells' values. A value
    // lowered by the neighbor can break a cell's constraint when that cell
    // credited a negative coefficient on the face, so the solves are repeated
    // with the current values as caps until nothing changes.
    auto solve = [&](bool credit, std::vector<double>& th) {
        std::vector<double> Cl(per_cell), cap(per_cell), out(th);
        std::vector<int> kl(per_cell);
        for (int c = 0; c < nc; ++c) {
            if (!vsub_valid_[c]) continue;
            for (int i = 0; i < per_cell; ++i) {
                const std::size_t j = static_cast<std::size_t>(c) * per_cell + i;
                Cl[i] = C[j];
                if (!credit && i >= nfi) Cl[i] = std::max(Cl[i], 0.0);
                kl[i] = key[j];
                cap[i] = th[key[j]];
            }
            auto r = knapsack_greedy(Cl, D[c], cap, kl);
            for (int i = 0; i < per_cell; ++i) out[kl[i]] = std::min(out[kl[i]], r[i]);
        }
        bool changed = out != th;
        th.swap(out);
        return changed;
    };
    auto feasible = [&](const std::vector<double>& th) {
        for (int c = 0; c < nc; ++c) {
            if (!vsub_valid_[c]) continue;
            double lhs = 0, scale = std::abs(D[c]);
            for (int i = 0; i < per_cell; ++i) {
                const std::size_t j = static_cast<std::size_t>(c) * per_cell + i;
                lhs += C[j] * th[key[j]];
                scale += std::abs(C[j] * th[key[j]]);
            }
            if (lhs > D[c] + 1e-12 * scale) return false;
        }
        return true;
    };
    std::vector<double> th = res;
    bool converged = false;
    for (int pass = 0; pass < 20 && !converged; ++pass) converged = !solve(true, th);
    if (!converged || !feasible(th)) {
        ++stats.knapsack_fallback;
        th = res;
        solve(false, th);
    }
    for (std::size_t f = 0; f < theta.size(); ++f)
        if (th[f] < theta[f]) {
            theta[f] = th[f];
            who[f] = static_cast<signed char>(Strategy::EntropyCell);
        }
}

}  // namespace sdg
