#include "sdg/physics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>

namespace sdg {

void ConservationLaw::normal_flux(const double* u, Vec2 x, Vec2 n, double* f) const {
    double fx[kMaxVars], fy[kMaxVars] = {0, 0, 0, 0};
    flux(u, x, fx, fy);
    for (int i = 0; i < nvar_; ++i) f[i] = fx[i] * n.x + (dim_ == 2 ? fy[i] * n.y : 0.0);
}

void ScalarLaw::flux(const double* u, Vec2 x, double* fx, double* fy) const {
    Vec2 v = f(u[0], x);
    fx[0] = v.x;
    if (fy) fy[0] = v.y;
}

double ScalarLaw::wave_speed(const double* u, Vec2 x, Vec2 n) const {
    Vec2 d = df(u[0], x);
    return std::abs(d.x * n.x + (dim() == 2 ? d.y * n.y : 0.0));
}

namespace {

class Advection1D final : public ScalarLaw {
public:
    explicit Advection1D(double a) : ScalarLaw("advection-1d", 1), a_(a) {}
    Vec2 f(double u, Vec2) const override { return {a_ * u, 0.0}; }
    Vec2 df(double, Vec2) const override { return {a_, 0.0}; }
    double max_speed(const double*, const double*, Vec2, Vec2 n) const override {
        return std::abs(a_ * n.x);
    }
    bool linear() const override { return true; }

private:
    double a_;
};

class Rotation2D final : public ScalarLaw {
public:
    Rotation2D() : ScalarLaw("rotation-2d", 2) {}
    static Vec2 velocity(Vec2 x) { return {0.5 - x.y, x.x - 0.5}; }
    Vec2 f(double u, Vec2 x) const override { return u * velocity(x); }
    Vec2 df(double, Vec2 x) const override { return velocity(x); }
    double max_speed(const double*, const double*, Vec2 x, Vec2 n) const override {
        return std::abs(dot(velocity(x), n));
    }
    bool linear() const override { return true; }
};

class Burgers final : public ScalarLaw {
public:
    explicit Burgers(int dim) : ScalarLaw(dim == 1 ? "burgers-1d" : "burgers-2d", dim) {}
    Vec2 f(double u, Vec2) const override {
        double h = 0.5 * u * u;
        return {h, dim() == 2 ? h : 0.0};
    }
    Vec2 df(double u, Vec2) const override { return {u, dim() == 2 ? u : 0.0}; }
    double max_speed(const double* uL, const double* uR, Vec2, Vec2 n) const override {
        double s = dim() == 2 ? n.x + n.y : n.x;
        return std::max(std::abs(uL[0]), std::abs(uR[0])) * std::abs(s);
    }
};

class Buckley final : public ScalarLaw {
public:
    Buckley() : ScalarLaw("buckley-1d", 1) {
        // Critical points of F' are the roots of 10u^3 - 15u^2 + 1.
        auto p = [](double u) { return (10.0 * u - 15.0) * u * u + 1.0; };
        const double brackets[3][2] = {{-1.0, 0.0}, {0.0, 0.5}, {1.0, 2.0}};
        for (const auto& b : brackets) {
            double lo = b[0], hi = b[1];
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (lo + hi);
                if ((p(lo) < 0) == (p(mid) < 0)) lo = mid;
                else hi = mid;
            }
            crit_.push_back(0.5 * (lo + hi));
        }
    }
    static double den(double u) { return 4.0 * u * u + (1.0 - u) * (1.0 - u); }
    Vec2 f(double u, Vec2) const override { return {4.0 * u * u / den(u), 0.0}; }
    Vec2 df(double u, Vec2) const override {
        double d = den(u);
        return {8.0 * u * (1.0 - u) / (d * d), 0.0};
    }
    double max_speed(const double* uL, const double* uR, Vec2 x, Vec2 n) const override {
        double a = std::min(uL[0], uR[0]), b = std::max(uL[0], uR[0]);
        double m = std::max(std::abs(df(a, x).x), std::abs(df(b, x).x));
        for (double c : crit_)
            if (c > a && c < b) m = std::max(m, std::abs(df(c, x).x));
        return m * std::abs(n.x);
    }
    bool convex_flux() const override { return false; }
    std::array<double, 2> state_range() const override { return {-3.5, 3.5}; }

private:
    std::vector<double> crit_;
};

class KPP final : public ScalarLaw {
public:
    KPP() : ScalarLaw("kpp-2d", 2) {}
    Vec2 f(double u, Vec2) const override { return {std::sin(u), std::cos(u)}; }
    Vec2 df(double u, Vec2) const override { return {std::cos(u), -std::sin(u)}; }
    double max_speed(const double*, const double*, Vec2, Vec2 n) const override { return norm(n); }
    bool convex_flux() const override { return false; }
    std::array<double, 2> state_range() const override { return {-1.0, 12.0}; }
};

}  // namespace

EulerLaw::EulerLaw(int dim, double gamma)
    : ConservationLaw(dim == 1 ? "euler-1d" : "euler-2d", dim + 2, dim), gamma_(gamma) {
    if (!(gamma > 1.0)) throw ConfigError("gas gamma must exceed 1");
}

double EulerLaw::pressure(const double* u) const {
    double rho = u[0];
    double ke = 0.5 * u[1] * u[1];
    if (dim() == 2) ke += 0.5 * u[2] * u[2];
    return (gamma_ - 1.0) * (u[nvar() - 1] - ke / rho);
}

double EulerLaw::sound_speed(const double* u) const {
    return std::sqrt(gamma_ * pressure(u) / u[0]);
}

double EulerLaw::normal_velocity(const double* u, Vec2 n) const {
    double vn = u[1] * n.x;
    if (dim() == 2) vn += u[2] * n.y;
    return vn / u[0];
}

void EulerLaw::flux(const double* u, Vec2, double* fx, double* fy) const {
    const double rho = u[0], p = pressure(u), E = u[nvar() - 1];
    const double vx = u[1] / rho;
    if (dim() == 1) {
        fx[0] = u[1];
        fx[1] = u[1] * vx + p;
        fx[2] = (E + p) * vx;
        return;
    }
    const double vy = u[2] / rho;
    fx[0] = u[1];
    fx[1] = u[1] * vx + p;
    fx[2] = u[2] * vx;
    fx[3] = (E + p) * vx;
    fy[0] = u[2];
    fy[1] = u[1] * vy;
    fy[2] = u[2] * vy + p;
    fy[3] = (E + p) * vy;
}

double EulerLaw::wave_speed(const double* u, Vec2, Vec2 n) const {
    return std::abs(normal_velocity(u, n)) + sound_speed(u) * norm(n);
}

double EulerLaw::max_speed(const double* uL, const double* uR, Vec2 x, Vec2 n) const {
    return std::max(wave_speed(uL, x, n), wave_speed(uR, x, n));
}

bool EulerLaw::admissible(const double* u) const {
    if (!all_finite(u, nvar())) return false;
    return u[0] > 0.0 && pressure(u) > 0.0;
}

State EulerLaw::from_primitive(double rho, Vec2 v, double p) const {
    State u{};
    u[0] = rho;
    u[1] = rho * v.x;
    double ke = 0.5 * rho * v.x * v.x;
    if (dim() == 2) {
        u[2] = rho * v.y;
        ke += 0.5 * rho * v.y * v.y;
    }
    u[nvar() - 1] = p / (gamma_ - 1.0) + ke;
    return u;
}

std::shared_ptr<const ConservationLaw> make_law(const std::string& name, const LawParams& p) {
    if (name == "advection-1d") return std::make_shared<Advection1D>(p.advection_speed);
    if (name == "rotation-2d") return std::make_shared<Rotation2D>();
    if (name == "burgers-1d") return std::make_shared<Burgers>(1);
    if (name == "burgers-2d") return std::make_shared<Burgers>(2);
    if (name == "buckley-1d") return std::make_shared<Buckley>();
    if (name == "kpp-2d") return std::make_shared<KPP>();
    if (name == "euler-1d") return std::make_shared<EulerLaw>(1, p.gas_gamma);
    if (name == "euler-2d") return std::make_shared<EulerLaw>(2, p.gas_gamma);
    throw ConfigError("unknown conservation law: " + name);
}

std::vector<std::string> law_names() {
    return {"advection-1d", "rotation-2d", "burgers-1d", "burgers-2d",
            "buckley-1d",   "kpp-2d",      "euler-1d",   "euler-2d"};
}

// ---------------------------------------------------------------------------
// Entropy pairs

EntropyPair::EntropyPair(std::string name, std::shared_ptr<const ConservationLaw> law)
    : name_(std::move(name)), nvar_(law->nvar()), law_(std::move(law)) {}

double EntropyPair::flux_n(const double* u, Vec2 x, Vec2 n) const {
    double px = 0, py = 0;
    flux(u, x, &px, &py);
    return px * n.x + (law_->dim() == 2 ? py * n.y : 0.0);
}

double EntropyPair::potential_n(const double* u, Vec2 x, Vec2 n) const {
    double v[kMaxVars], f[kMaxVars];
    variable(u, v);
    law_->normal_flux(u, x, n, f);
    double s = 0;
    for (int i = 0; i < nvar_; ++i) s += v[i] * f[i];
    return s - flux_n(u, x, n);
}

namespace {

enum class ScalarKind { Square, Kruzkov, Atan };

class ScalarEntropy final : public EntropyPair {
public:
    ScalarEntropy(ScalarKind kind, std::shared_ptr<const ConservationLaw> law, const EntropyParams& p)
        : EntropyPair(kind == ScalarKind::Square    ? "square"
                      : kind == ScalarKind::Kruzkov ? "kruzkov"
                                                    : "atan",
                      law),
          kind_(kind), p_(p) {
        scalar_ = dynamic_cast<const ScalarLaw*>(law_.get());
        if (!scalar_) throw ConfigError("entropy " + name_ + " needs a scalar law");
        if (kind == ScalarKind::Kruzkov && !(p.eps > 0)) throw ConfigError("kruzkov eps must be positive");
        if (kind == ScalarKind::Atan && !(p.slope > 0)) throw ConfigError("atan slope must be positive");
        if (!law_->linear()) build_table();
    }

    double e(double u) const {
        switch (kind_) {
            case ScalarKind::Square: return 0.5 * u * u;
            case ScalarKind::Kruzkov:
                return std::pow(std::abs(u - p_.ke), 1.0 + p_.eps) / (1.0 + p_.eps);
            case ScalarKind::Atan: {
                double s = p_.slope;
                return u * std::atan(s * u) - std::log1p(s * s * u * u) / (2.0 * s);
            }
        }
        return 0;
    }
    double v(double u) const {
        switch (kind_) {
            case ScalarKind::Square: return u;
            case ScalarKind::Kruzkov: {
                double d = u - p_.ke;
                return (d > 0 ? 1.0 : d < 0 ? -1.0 : 0.0) * std::pow(std::abs(d), p_.eps);
            }
            case ScalarKind::Atan: return std::atan(p_.slope * u);
        }
        return 0;
    }

    double eta(const double* u) const override { return e(u[0]); }
    void variable(const double* u, double* out) const override { out[0] = v(u[0]); }
    void to_conserved(const double* vv, double* u) const override {
        double w = vv[0];
        switch (kind_) {
            case ScalarKind::Square: u[0] = w; break;
            case ScalarKind::Kruzkov:
                u[0] = p_.ke + (w > 0 ? 1.0 : w < 0 ? -1.0 : 0.0) * std::pow(std::abs(w), 1.0 / p_.eps);
                break;
            case ScalarKind::Atan: u[0] = std::tan(w) / p_.slope; break;
        }
    }
    bool valid_variable(const double* vv) const override {
        if (!std::isfinite(vv[0])) return false;
        if (kind_ == ScalarKind::Atan) return std::abs(vv[0]) < M_PI / 2;
        return true;
    }

    void flux(const double* u, Vec2 x, double* phix, double* phiy) const override {
        const double w = u[0];
        if (law_->linear()) {
            // F = a(x) u: phi = a (eta(u) - eta(0))
            Vec2 a = scalar_->f(1.0, x);
            double s = e(w) - e(0.0);
            *phix = a.x * s;
            *phiy = a.y * s;
            return;
        }
        *phix = table_eval(0, w);
        *phiy = law_->dim() == 2 ? table_eval(1, w) : 0.0;
    }

private:
    double integrand(int comp, double s) const {
        Vec2 d = scalar_->df(s, {});
        return v(s) * (comp == 0 ? d.x : d.y);
    }

    // int_a^b v F'_comp. Near the Kruzkov center v has an infinite slope, so
    // such integrals are taken from k with the substitution s = k + d w^(1/eps).
    double integrate(int comp, double a, double b) const {
        auto f = [this, comp](double s) { return integrand(comp, s); };
        if (kind_ != ScalarKind::Kruzkov) return integrate_plain(f, a, b);
        const double k = p_.ke;
        bool near = (a - k) * (b - k) <= 0 || std::min(std::abs(a - k), std::abs(b - k)) < 2.0 * h_;
        if (near) return from_center(comp, b) - from_center(comp, a);
        return integrate_plain(f, a, b);
    }
    double from_center(int comp, double x) const {
        const double k = p_.ke, q = 1.0 / p_.eps, d = x > k ? 1.0 : -1.0;
        if (x == k) return 0.0;
        auto g = [&](double w) { return integrand(comp, k + d * std::pow(w, q)) * d * q * std::pow(w, q - 1.0); };
        double wmax = std::pow(std::abs(x - k), p_.eps);
        if (std::abs(x - k) <= 8.0 * h_) return boost::math::quadrature::gauss<double, 30>::integrate(g, 0.0, wmax);
        return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, 0.0, wmax, 15, 1e-12);
    }

    // Panels no longer than two table steps are smooth enough for a fixed rule.
    template <class F>
    double integrate_plain(F& f, double a, double b) const {
        if (a == b) return 0.0;
        if (std::abs(b - a) <= 2.0 * h_) return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
        return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-12);
    }

    void build_table() {
        auto r = scalar_->state_range();
        lo_ = r[0];
        hi_ = r[1];
        const int n = kTableIntervals;
        h_ = (hi_ - lo_) / n;
        const int ncomp = law_->dim();
        for (int c = 0; c < ncomp; ++c) {
            auto& val = val_[c];
            val.assign(n + 1, 0.0);
            for (int i = 0; i < n; ++i) val[i + 1] = val[i] + integrate(c, node(i), node(i + 1));
            offset_[c] = integrate(c, lo_, 0.0);
        }
    }
    double node(int i) const { return lo_ + h_ * i; }

    double table_eval(int c, double u) const {
        if (!std::isfinite(u)) return kNaN;
        if (u <= lo_) return val_[c][0] - integrate(c, u, lo_) - offset_[c];
        if (u >= hi_) return val_[c][kTableIntervals] + integrate(c, hi_, u) - offset_[c];
        int i = std::min(kTableIntervals - 1, static_cast<int>((u - lo_) / h_));
        double a = node(i), b = node(i + 1);
        // Short panel from the nearest node below u.
        return val_[c][i] + integrate(c, a, u) - offset_[c];
    }

    static constexpr int kTableIntervals = 2048;
    ScalarKind kind_;
    EntropyParams p_;
    const ScalarLaw* scalar_ = nullptr;
    double lo_ = 0, hi_ = 0, h_ = 1;
    std::array<std::vector<double>, 2> val_;  ///< int_lo^node v F'
    std::array<double, 2> offset_{{0, 0}};
};

class EulerEntropy final : public EntropyPair {
public:
    explicit EulerEntropy(std::shared_ptr<const ConservationLaw> law) : EntropyPair("euler-log", law) {
        euler_ = dynamic_cast<const EulerLaw*>(law_.get());
        if (!euler_) throw ConfigError("entropy euler-log needs an Euler law");
        g_ = euler_->gas_gamma();
        dim_ = euler_->dim();
    }
    double s_of(const double* u) const {
        return std::log(euler_->pressure(u)) - g_ * std::log(u[0]);
    }
    double eta(const double* u) const override { return -u[0] * s_of(u); }
    void variable(const double* u, double* v) const override {
        const double rho = u[0], p = euler_->pressure(u);
        double q2 = u[1] * u[1] + (dim_ == 2 ? u[2] * u[2] : 0.0);
        double s = s_of(u);
        v[0] = g_ - s - (g_ - 1.0) * q2 / (2.0 * rho * p);
        v[1] = (g_ - 1.0) * u[1] / p;
        if (dim_ == 2) v[2] = (g_ - 1.0) * u[2] / p;
        v[dim_ + 1] = -(g_ - 1.0) * rho / p;
    }
    void to_conserved(const double* v, double* u) const override {
        const double v4 = v[dim_ + 1];
        double r = -v4 / (g_ - 1.0);  // rho / p
        double vx = v[1] / (-v4), vy = dim_ == 2 ? v[2] / (-v4) : 0.0;
        double u2 = vx * vx + vy * vy;
        double s = g_ - v[0] + v4 * u2 / 2.0;
        // s = ln p - g ln rho, p = rho / r  =>  (1-g) ln rho = s + ln r
        double rho = std::exp((s + std::log(r)) / (1.0 - g_));
        double p = rho / r;
        u[0] = rho;
        u[1] = rho * vx;
        if (dim_ == 2) u[2] = rho * vy;
        u[dim_ + 1] = p / (g_ - 1.0) + 0.5 * rho * u2;
    }
    bool valid_variable(const double* v) const override {
        return all_finite(v, nvar_) && v[dim_ + 1] < 0.0;
    }
    bool admissible(const double* u) const override { return euler_->admissible(u); }
    void flux(const double* u, Vec2, double* phix, double* phiy) const override {
        double e = eta(u);
        *phix = e * u[1] / u[0];
        *phiy = dim_ == 2 ? e * u[2] / u[0] : 0.0;
    }

private:
    const EulerLaw* euler_ = nullptr;
    double g_ = 1.4;
    int dim_ = 1;
};

}  // namespace

std::shared_ptr<const EntropyPair> make_entropy(const std::string& name,
                                                std::shared_ptr<const ConservationLaw> law,
                                                const EntropyParams& p) {
    if (name == "square") return std::make_shared<ScalarEntropy>(ScalarKind::Square, law, p);
    if (name == "kruzkov") return std::make_shared<ScalarEntropy>(ScalarKind::Kruzkov, law, p);
    if (name == "atan") return std::make_shared<ScalarEntropy>(ScalarKind::Atan, law, p);
    if (name == "euler-log") return std::make_shared<EulerEntropy>(law);
    throw ConfigError("unknown entropy: " + name);
}

}  // namespace sdg
