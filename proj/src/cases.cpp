#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sdg/harness.hpp"
#include "sdg/reference.hpp"

namespace sdg {

// ---------------------------------------------------------------------------
// RunConfig

namespace {

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("invalid number for " + key + ": '" + v + "'");
    }
}

long to_long(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long d = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("invalid integer for " + key + ": '" + v + "'");
    }
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    const std::string& v = value;
    if (key == "case") case_name = v;
    else if (key == "law") law = v;
    else if (key == "advection_speed") advection_speed = to_double(key, v);
    else if (key == "gamma") gamma = to_double(key, v);
    else if (key == "entropy") entropy = v;
    else if (key == "ke") ke = to_double(key, v);
    else if (key == "eps") eps = to_double(key, v);
    else if (key == "slope") slope = to_double(key, v);
    else if (key == "mesh") mesh = v;
    else if (key == "ncells") ncells = static_cast<int>(to_long(key, v));
    else if (key == "k") k = static_cast<int>(to_long(key, v));
    else if (key == "subdivision") subdivision = v;
    else if (key == "flux_dg") flux_dg = v;
    else if (key == "flux_fv") flux_fv = v;
    else if (key == "blend") blend = v;
    else if (key == "smoother") smoother = v;
    else if (key == "lmp_var") lmp_var = static_cast<int>(to_long(key, v));
    else if (key == "update") update = v;
    else if (key == "cfl") cfl = to_double(key, v);
    else if (key == "rk") rk = static_cast<int>(to_long(key, v));
    else if (key == "t_end") t_end = to_double(key, v);
    else if (key == "dt") dt = to_double(key, v);
    else if (key == "max_steps") max_steps = to_long(key, v);
    else if (key == "out") out = v;
    else if (key == "outputs") outputs = v;
    else throw ConfigError("unknown config key: " + key);
}

std::map<std::string, std::string> RunConfig::to_map() const {
    return {{"case", case_name},
            {"law", law},
            {"advection_speed", fmt(advection_speed)},
            {"gamma", fmt(gamma)},
            {"entropy", entropy},
            {"ke", fmt(ke)},
            {"eps", fmt(eps)},
            {"slope", fmt(slope)},
            {"mesh", mesh},
            {"ncells", std::to_string(ncells)},
            {"k", std::to_string(k)},
            {"subdivision", subdivision},
            {"flux_dg", flux_dg},
            {"flux_fv", flux_fv},
            {"blend", blend},
            {"smoother", smoother},
            {"lmp_var", std::to_string(lmp_var)},
            {"update", update},
            {"cfl", fmt(cfl)},
            {"rk", std::to_string(rk)},
            {"t_end", fmt(t_end)},
            {"dt", fmt(dt)},
            {"max_steps", std::to_string(max_steps)},
            {"out", out},
            {"outputs", outputs}};
}

std::string RunConfig::serialize() const {
    static const char* order[] = {"case", "law", "advection_speed", "gamma", "entropy", "ke", "eps", "slope",
                                  "mesh", "ncells", "k", "subdivision", "flux_dg", "flux_fv", "blend",
                                  "smoother", "lmp_var", "update", "cfl", "rk", "t_end", "dt", "max_steps",
                                  "out", "outputs"};
    auto m = to_map();
    std::string s;
    for (const char* key : order) s += std::string(key) + " = " + m.at(key) + "\n";
    return s;
}

void RunConfig::load(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

void RunConfig::load_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    load(ss.str());
}

void RunConfig::validate() const {
    const CaseDefinition& c = find_case(case_name);
    auto laws = law_names();
    if (std::find(laws.begin(), laws.end(), law) == laws.end()) throw ConfigError("unknown law: " + law);
    if (law != c.law) throw ConfigError("case " + case_name + " requires law " + c.law);
    if (k < 0 || k > 10) throw ConfigError("degree k must lie in [0, 10]");
    SubdivisionScheme sch = parse_scheme(subdivision);
    if ((c.dim == 1) != (sch == SubdivisionScheme::Uniform1D))
        throw ConfigError("subdivision " + subdivision + " does not match the case dimension");
    parse_flux_kind(flux_dg);
    parse_flux_kind(flux_fv);
    BlendingConfig b;
    parse_strategies(blend, b);
    parse_smoother(smoother);
    if (b.entropy_any || b.entropy_tadmor || b.entropy_cell) {
        if (entropy == "none" || entropy.empty()) throw ConfigError("entropy strategies need --entropy");
    }
    if (update != "blended" && update != "pure-dg" && update != "fv-only")
        throw ConfigError("update must be blended, pure-dg or fv-only");
    if (!(cfl > 0)) throw ConfigError("cfl must be positive");
    if (rk < 1 || rk > 3) throw ConfigError("rk must be 1, 2 or 3");
    if (!(t_end >= 0)) throw ConfigError("t_end must be nonnegative");
    if (dt < 0) throw ConfigError("dt must be nonnegative");
    if (mesh.empty() && ncells <= 0) throw ConfigError("ncells must be positive for generated meshes");
    if (gamma <= 1) throw ConfigError("gamma must exceed 1");
    if (!outputs.empty()) {
        std::stringstream ss(outputs);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item != "profile" && item != "vtk" && item != "diagnostics" && item != "none")
                throw ConfigError("unknown output: " + item);
        }
    }
}

// ---------------------------------------------------------------------------
// Case catalog

namespace {

double wrap(double x, double a, double b) {
    const double L = b - a;
    double y = std::fmod(x - a, L);
    if (y < 0) y += L;
    return a + y;
}

double composite_signal(double x) {
    const double a = 0.5, z = -0.7, delta = 0.005, alpha = 10.0;
    const double beta = std::log(2.0) / (36 * delta * delta);
    auto G = [&](double zz) { return std::exp(-beta * (x - zz) * (x - zz)); };
    auto F = [&](double aa) { return std::sqrt(std::max(1 - alpha * alpha * (x - aa) * (x - aa), 0.0)); };
    if (x >= -0.8 && x <= -0.6) return (G(z - delta) + G(z + delta) + 4 * G(z)) / 6;
    if (x >= -0.4 && x <= -0.2) return 1.0;
    if (x >= 0.0 && x <= 0.2) return 1 - std::abs(10 * (x - 0.1));
    if (x >= 0.4 && x <= 0.6) return (F(a - delta) + F(a + delta) + 4 * F(a)) / 6;
    return 0.0;
}

double rotation_shapes(Vec2 p) {
    const double r0 = 0.15;
    auto dist = [&](double cx, double cy) { return std::hypot(p.x - cx, p.y - cy) / r0; };
    double r = dist(0.5, 0.75);
    if (r <= 1 && (std::abs(p.x - 0.5) >= 0.025 || p.y >= 0.85)) return 1.0;
    r = dist(0.5, 0.25);
    if (r <= 1) return 1 - r;
    r = dist(0.25, 0.5);
    if (r <= 1) return 0.25 * (1 + std::cos(M_PI * r));
    return 0.0;
}

void euler_state(int dim, double gamma, double rho, Vec2 v, double p, double* u) {
    u[0] = rho;
    u[1] = rho * v.x;
    if (dim == 1) {
        u[2] = p / (gamma - 1) + 0.5 * rho * v.x * v.x;
    } else {
        u[2] = rho * v.y;
        u[3] = p / (gamma - 1) + 0.5 * rho * (v.x * v.x + v.y * v.y);
    }
}

double euler_pressure(int dim, double gamma, const double* u) {
    double ke = 0.5 * u[1] * u[1];
    if (dim == 2) ke += 0.5 * u[2] * u[2];
    return (gamma - 1) * (u[dim + 1] - ke / u[0]);
}

int square_side(int ncells) { return std::max(1, static_cast<int>(std::lround(std::sqrt(ncells / 2.0)))); }

RunConfig base(const std::string& name, const std::string& law, int k, int ncells, double t_end,
               const std::string& blend) {
    RunConfig c;
    c.case_name = name;
    c.law = law;
    c.k = k;
    c.ncells = ncells;
    c.t_end = t_end;
    c.blend = blend;
    c.subdivision = (law.find("-1d") != std::string::npos) ? "1d-uniform" : "quad-tri";
    return c;
}

std::vector<CaseDefinition> build_catalog() {
    std::vector<CaseDefinition> cat;
    auto scalar_q = [](const double* u) { return u[0]; };

    {
        CaseDefinition c;
        c.name = "advect-sine";
        c.description = "linear advection of sin(2 pi x) on [0,1], one period";
        c.law = "advection-1d";
        c.dim = 1;
        c.exact = [](Vec2 x, double t, double* u) { u[0] = std::sin(2 * M_PI * (x.x - t)); };
        c.initial = c.exact;
        c.make_mesh = [](int n) { return make_interval_mesh(0, 1, n, BcType::Periodic, BcType::Periodic); };
        c.error_quantity = scalar_q;
        c.defaults = base(c.name, c.law, 5, 4, 1.0, "entropy-cell");
        c.defaults.entropy = "square";
        cat.push_back(c);
    }
    {
        CaseDefinition c;
        c.name = "advect-composite";
        c.description = "Gaussian, square, triangle and ellipse signals on [-1,1], one period";
        c.law = "advection-1d";
        c.dim = 1;
        c.exact = [](Vec2 x, double t, double* u) { u[0] = composite_signal(wrap(x.x - t, -1, 1)); };
        c.initial = c.exact;
        c.make_mesh = [](int n) { return make_interval_mesh(-1, 1, n, BcType::Periodic, BcType::Periodic); };
        c.error_quantity = scalar_q;
        c.defaults = base(c.name, c.law, 6, 40, 2.0, "gmp,lmp");
        cat.push_back(c);
    }
    auto buckley = [&](const std::string& name, double t_end, bool second) {
        CaseDefinition c;
        c.name = name;
        c.law = "buckley-1d";
        c.dim = 1;
        auto f = [](double u) { return 4 * u * u / (4 * u * u + (1 - u) * (1 - u)); };
        double uL = second ? 1.0 : -3.0, uR = second ? 0.0 : 3.0;
        auto rs = std::make_shared<ScalarRiemannExact>(f, uL, uR);
        c.description = second ? "Buckley-Leverett, u = 1 on [-1/2,0] and 0 elsewhere"
                               : "Buckley-Leverett Riemann problem -3 | 3";
        c.initial = [=](Vec2 x, double, double* u) {
            u[0] = second ? ((x.x >= -0.5 && x.x <= 0) ? 1.0 : 0.0) : (x.x < 0 ? uL : uR);
        };
        // Outflow at x = -1/2 keeps the left state, so only the wave from x = 0 develops.
        c.exact = [=](Vec2 x, double t, double* u) {
            u[0] = t > 0 ? rs->sample(x.x / t) : (x.x < 0 ? uL : uR);
        };
        c.make_mesh = [](int n) { return make_interval_mesh(-0.5, 0.5, n, BcType::Outflow, BcType::Outflow); };
        c.error_quantity = scalar_q;
        c.defaults = base(c.name, c.law, 3, 80, t_end, "entropy-cell");
        c.defaults.entropy = "square";
        return c;
    };
    cat.push_back(buckley("buckley-1", 1.0, false));
    cat.push_back(buckley("buckley-2", 0.2, true));
    {
        CaseDefinition c;
        c.name = "kpp";
        c.description = "KPP rotating wave on [-2,2]x[-2.5,1.5]";
        c.law = "kpp-2d";
        c.dim = 2;
        c.initial = [](Vec2 x, double, double* u) {
            u[0] = (x.x * x.x + x.y * x.y < 1.0) ? 3.5 * M_PI : 0.25 * M_PI;
        };
        c.make_mesh = [](int n) {
            int s = square_side(n);
            BcType o = BcType::Outflow;
            return make_rectangle_mesh(-2, 2, -2.5, 1.5, s, s, TrianglePattern::Diagonal, {o, o, o, o});
        };
        c.error_quantity = scalar_q;
        c.defaults = base(c.name, c.law, 3, 1054, 1.0, "gmp,lmp");
        c.defaults.subdivision = "voronoi-type";
        c.defaults.smoother = "avg";
        cat.push_back(c);
    }
    {
        CaseDefinition c;
        c.name = "burgers-2d";
        c.description = "Burgers sin(2 pi (x+y)) on the periodic unit square";
        c.law = "burgers-2d";
        c.dim = 2;
        c.initial = [](Vec2 x, double, double* u) { u[0] = std::sin(2 * M_PI * (x.x + x.y)); };
        c.make_mesh = [](int n) {
            int s = square_side(n);
            BcType p = BcType::Periodic;
            return make_rectangle_mesh(0, 1, 0, 1, s, s, TrianglePattern::Diagonal, {p, p, p, p});
        };
        c.error_quantity = scalar_q;
        c.defaults = base(c.name, c.law, 5, 242, 0.5, "gmp,lmp");
        cat.push_back(c);
    }
    {
        CaseDefinition c;
        c.name = "rotation";
        c.description = "solid-body rotation of a slotted disk, cone and hump";
        c.law = "rotation-2d";
        c.dim = 2;
        c.exact = [](Vec2 x, double t, double* u) {
            const double cs = std::cos(t), sn = std::sin(t);
            const double dx = x.x - 0.5, dy = x.y - 0.5;
            u[0] = rotation_shapes({0.5 + cs * dx + sn * dy, 0.5 - sn * dx + cs * dy});
        };
        c.initial = c.exact;
        c.make_mesh = [](int n) {
            int s = square_side(n);
            BcType o = BcType::Outflow;
            return make_rectangle_mesh(0, 1, 0, 1, s, s, TrianglePattern::Diagonal, {o, o, o, o});
        };
        c.error_quantity = scalar_q;
        c.defaults = base(c.name, c.law, 3, 576, 2 * M_PI, "dg");
        cat.push_back(c);
    }
    {
        CaseDefinition c;
        c.name = "modified-sod";
        c.description = "Sod tube with a sonic rarefaction: (1,0.75,1) | (0.125,0,0.1) at x = 0.3";
        c.law = "euler-1d";
        c.dim = 1;
        auto rs = std::make_shared<EulerRiemannExact>(1.4, Primitive1D{1.0, 0.75, 1.0}, Primitive1D{0.125, 0.0, 0.1});
        c.exact = [rs](Vec2 x, double t, double* u) {
            Primitive1D w = t > 0 ? rs->sample((x.x - 0.3) / t)
                                  : (x.x < 0.3 ? Primitive1D{1.0, 0.75, 1.0} : Primitive1D{0.125, 0.0, 0.1});
            euler_state(1, 1.4, w.rho, {w.u, 0}, w.p, u);
        };
        c.initial = c.exact;
        c.make_mesh = [](int n) { return make_interval_mesh(0, 1, n, BcType::Outflow, BcType::Outflow); };
        c.error_quantity = scalar_q;
        c.error_quantity_name = "rho";
        c.defaults = base(c.name, c.law, 5, 20, 0.2, "positivity,lmp");
        cat.push_back(c);
    }
    {
        CaseDefinition c;
        c.name = "isentropic";
        c.description = "smooth isentropic flow, gamma = 3, rho0 = 1 + 0.9999999 sin(pi x)";
        c.law = "euler-1d";
        c.dim = 1;
        c.gamma = 3.0;
        c.exact = [](Vec2 x, double t, double* u) {
            Primitive1D w = isentropic_exact(x.x, t);
            euler_state(1, 3.0, w.rho, {w.u, 0}, w.p, u);
        };
        c.initial = c.exact;
        c.make_mesh = [](int n) { return make_interval_mesh(-1, 1, n, BcType::Periodic, BcType::Periodic); };
        c.error_quantity = [](const double* u) { return euler_pressure(1, 3.0, u); };
        c.error_quantity_name = "p";
        c.defaults = base(c.name, c.law, 4, 20, 0.1, "positivity,lmp");
        c.defaults.gamma = 3.0;
        cat.push_back(c);
    }
    {
        CaseDefinition c;
        c.name = "sod-cyl";
        c.description = "cylindrical Sod tube on the sector r <= 1, opening pi/4";
        c.law = "euler-2d";
        c.dim = 2;
        c.initial = [](Vec2 x, double, double* u) {
            if (norm(x) < 0.5) euler_state(2, 1.4, 1.0, {0, 0}, 1.0, u);
            else euler_state(2, 1.4, 0.125, {0, 0}, 0.1, u);
        };
        c.make_mesh = [](int n) {
            int rings = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(n)))));
            return make_sector_mesh(1.0, M_PI / 4, rings, BcType::Wall, BcType::Outflow);
        };
        c.error_quantity = scalar_q;
        c.error_quantity_name = "rho";
        c.defaults = base(c.name, c.law, 5, 110, 0.2, "positivity,lmp");
        cat.push_back(c);
    }
    {
        CaseDefinition c;
        c.name = "sedov";
        c.description = "Sedov point blast on the sector r <= 1.2, opening pi/4";
        c.law = "euler-2d";
        c.dim = 2;
        c.initial = [](Vec2, double, double* u) { euler_state(2, 1.4, 1.0, {0, 0}, 1e-14, u); };
        auto sol = std::make_shared<SedovSolution>(2, 1.4);
        const double E_full = sedov_sector_energy(M_PI / 4) * 8.0;
        c.exact = [sol, E_full](Vec2 x, double t, double* u) {
            const double r = norm(x);
            Primitive1D w = t > 0 ? sol->sample(r, E_full, t) : Primitive1D{1.0, 0.0, 0.0};
            Vec2 v = r > 0 ? (w.u / r) * x : Vec2{0, 0};
            euler_state(2, 1.4, w.rho, v, std::max(w.p, 1e-14), u);
        };
        c.make_mesh = [](int n) {
            int rings = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(n)))));
            return make_sector_mesh(1.2, M_PI / 4, rings, BcType::Wall, BcType::Outflow);
        };
        c.source_energy = sedov_sector_energy(M_PI / 4);
        c.error_quantity = scalar_q;
        c.error_quantity_name = "rho";
        c.defaults = base(c.name, c.law, 5, 289, 1.0, "positivity,lmp");
        cat.push_back(c);
    }
    {
        CaseDefinition c;
        c.name = "forward-step";
        c.description = "Mach 3 wind tunnel with a forward-facing step";
        c.law = "euler-2d";
        c.dim = 2;
        c.initial = [](Vec2, double, double* u) { euler_state(2, 1.4, 1.4, {3.0, 0}, 1.0, u); };
        c.inflow = c.initial;
        c.make_mesh = [](int n) {
            // 126 per^2 cells for step height 0.2 / per
            int per = std::max(1, static_cast<int>(std::lround(std::sqrt(n / 126.0))));
            return make_step_mesh(0.2 / per);
        };
        c.error_quantity = scalar_q;
        c.error_quantity_name = "rho";
        c.defaults = base(c.name, c.law, 1, 4536, 4.0, "positivity,lmp");
        cat.push_back(c);
    }
    {
        CaseDefinition c;
        c.name = "half-cylinder";
        c.description = "Mach 20 flow around a half cylinder";
        c.law = "euler-2d";
        c.dim = 2;
        c.initial = [](Vec2, double, double* u) {
            euler_state(2, 1.4, 1.0, {20 * std::sqrt(1.4), 0}, 1.0, u);
        };
        c.inflow = c.initial;
        c.make_mesh = [](int n) {
            // 2 nr nt cells with nt = 2 nr
            int nr = std::max(1, static_cast<int>(std::lround(std::sqrt(n / 4.0))));
            return make_half_cylinder_mesh(nr, 2 * nr);
        };
        c.error_quantity = scalar_q;
        c.error_quantity_name = "rho";
        c.defaults = base(c.name, c.law, 2, 1024, 2.5, "positivity,lmp");
        c.defaults.flux_dg = "hllc";
        c.defaults.flux_fv = "hll";
        cat.push_back(c);
    }
    for (auto& c : cat) {
        c.defaults.gamma = c.gamma;
        c.defaults.cfl = default_cfl(c.defaults.k);
        c.defaults.rk = default_rk(c.defaults.k);
    }
    return cat;
}

}  // namespace

double sedov_sector_energy(double opening) {
    // 0.244816 is the quarter-plane energy giving r_s = 1 at t = 1.
    return 0.244816 * opening / (M_PI / 2);
}

const std::vector<CaseDefinition>& case_catalog() {
    static const std::vector<CaseDefinition> cat = build_catalog();
    return cat;
}

const CaseDefinition& find_case(const std::string& name) {
    for (const auto& c : case_catalog())
        if (c.name == name) return c;
    std::string names;
    for (const auto& c : case_catalog()) names += (names.empty() ? "" : ", ") + c.name;
    throw ConfigError("unknown case: " + name + " (known: " + names + ")");
}

RunConfig make_config(const std::string& case_name) { return find_case(case_name).defaults; }

}  // namespace sdg
