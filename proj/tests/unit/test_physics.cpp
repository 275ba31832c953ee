#include <cmath>
#include <random>

#include "doctest.h"
#include "sdg/physics.hpp"

using namespace sdg;

namespace {

// Composite Simpson on [a,b] with n (even) intervals.
template <class F>
double simpson(F f, double a, double b, int n) {
    double h = (b - a) / n, s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

double scalar_v(const EntropyPair& e, double u) {
    double v;
    e.variable(&u, &v);
    return v;
}

double phi(const EntropyPair& e, double u, int comp) {
    double px = 0, py = 0;
    e.flux(&u, {0.3, 0.7}, &px, &py);
    return comp == 0 ? px : py;
}

const char* kScalarLaws[] = {"advection-1d", "rotation-2d", "burgers-1d", "burgers-2d", "buckley-1d", "kpp-2d"};

}  // namespace

TEST_CASE("law catalog values") {
    auto b = make_law("buckley-1d");
    const auto* bs = dynamic_cast<const ScalarLaw*>(b.get());
    REQUIRE(bs);
    CHECK(bs->f(0.0, {}).x == 0.0);
    CHECK(bs->f(1.0, {}).x == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(bs->f(0.5, {}).x == doctest::Approx(0.8).epsilon(1e-15));

    auto e = make_law("euler-1d", {1.0, 1.4});
    auto* el = dynamic_cast<const EulerLaw*>(e.get());
    double u[3] = {1, 0, 2.5};
    CHECK(el->pressure(u) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(make_law("nope"), ConfigError);
    CHECK(law_names().size() == 8);
    for (const auto& n : law_names()) CHECK(make_law(n)->name() == n);
}

TEST_CASE("wave-speed bounds") {
    auto kpp = make_law("kpp-2d");
    double a = 0.3, b = 9.0;
    CHECK(kpp->max_speed(&a, &b, {}, {0.6, 0.8}) == doctest::Approx(1.0));

    auto adv = make_law("advection-1d");
    CHECK(adv->max_speed(&a, &b, {}, {1, 0}) == 1.0);

    auto burg = make_law("burgers-1d");
    double l = -3, r = 3;
    CHECK(burg->max_speed(&l, &r, {}, {1, 0}) == 3.0);

    auto buck = make_law("buckley-1d");
    const auto* bs = dynamic_cast<const ScalarLaw*>(buck.get());
    double z = 0, one = 1;
    double dense = 0;
    for (int i = 0; i <= 10000; ++i) dense = std::max(dense, std::abs(bs->df(i / 1e4, {}).x));
    double g = buck->max_speed(&z, &one, {}, {1, 0});
    CHECK(g >= dense);
    CHECK(g == doctest::Approx(dense).epsilon(1e-7));

    // Property: bound dominates sampled |F'(w).n| and is exact for equal states.
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-3, 3), A(0, 2 * M_PI);
    for (const char* name : kScalarLaws) {
        auto law = make_law(name);
        const auto* sl = dynamic_cast<const ScalarLaw*>(law.get());
        for (int t = 0; t < 100; ++t) {
            double uL = U(rng), uR = U(rng), th = A(rng);
            Vec2 n{std::cos(th), std::sin(th)};
            if (law->dim() == 1) n = {1.0, 0.0};
            Vec2 x{0.5 + 0.4 * std::cos(th), 0.5 + 0.3 * std::sin(2 * th)};
            double gm = law->max_speed(&uL, &uR, x, n);
            for (int s = 0; s < 1000; ++s) {
                double w = uL + (uR - uL) * s / 999.0;
                double c = law->wave_speed(&w, x, n);
                REQUIRE(gm >= c - 1e-13);
            }
            double gs = law->max_speed(&uL, &uL, x, n);
            if (std::string(name) != "kpp-2d") CHECK(gs == doctest::Approx(law->wave_speed(&uL, x, n)));
            Vec2 d = sl->df(uL, x);
            CHECK(law->wave_speed(&uL, x, n) == doctest::Approx(std::abs(d.x * n.x + (law->dim() == 2 ? d.y * n.y : 0))));
        }
    }
}

TEST_CASE("scalar entropy inverse maps") {
    auto law = make_law("burgers-1d");
    auto kz = make_entropy("kruzkov", law, {0.0, 0.25, 20});
    for (double u : {-2.0, -0.3, 0.0, 1e-3, 0.7, 2.5}) {
        double v = scalar_v(*kz, u);
        CHECK(v == doctest::Approx((u > 0 ? 1 : u < 0 ? -1 : 0) * std::pow(std::abs(u), 0.25)));
        double back;
        kz->to_conserved(&v, &back);
        CHECK(back == doctest::Approx(u).epsilon(1e-10));
    }
    for (const char* en : {"square", "kruzkov", "atan"}) {
        auto e = make_entropy(en, law, {0.3, 0.25, 20});
        for (double u = -3; u <= 3; u += 0.01) {
            double v = scalar_v(*e, u), back;
            REQUIRE(e->valid_variable(&v));
            e->to_conserved(&v, &back);
            REQUIRE(std::abs(back - u) <= 1e-10 * (1 + std::abs(u)));
            // eta' = v and eta'' > 0 by finite differences
            if (std::abs(u - 0.3) < 1e-3) continue;
            double h = 1e-5, up = u + h, um = u - h;
            double d1 = (e->eta(&up) - e->eta(&um)) / (2 * h);
            REQUIRE(d1 == doctest::Approx(v).epsilon(1e-6));
            REQUIRE(e->eta(&up) + e->eta(&um) - 2 * e->eta(&u) > 0);
        }
    }
    auto at = make_entropy("atan", law);
    double bad = 2.0;
    CHECK_FALSE(at->valid_variable(&bad));
    CHECK_THROWS_AS(make_entropy("euler-log", law), ConfigError);
    CHECK_THROWS_AS(make_entropy("kruzkov", make_law("euler-1d")), ConfigError);
    CHECK_THROWS_AS(make_entropy("nope", law), ConfigError);
}

TEST_CASE("scalar entropy flux closed forms") {
    auto burg = make_law("burgers-1d");
    auto sq = make_entropy("square", burg);
    auto kz = make_entropy("kruzkov", burg, {0.0, 0.25, 20});
    for (double u = -3.9; u <= 3.9; u += 0.037) {
        REQUIRE(phi(*sq, u, 0) == doctest::Approx(u * u * u / 3).epsilon(1e-12));
        REQUIRE(phi(*kz, u, 0) == doctest::Approx((u < 0 ? -1 : 1) * std::pow(std::abs(u), 2.25) / 2.25).epsilon(1e-10));
    }
    // outside the tabulated range
    CHECK(phi(*sq, 6.0, 0) == doctest::Approx(72.0).epsilon(1e-12));

    // linear laws: phi = a(x) eta(u) when eta(0) = 0
    auto rot = make_law("rotation-2d");
    auto at = make_entropy("atan", rot);
    double u = 0.7, px, py;
    at->flux(&u, {0.2, 0.9}, &px, &py);
    CHECK(px == doctest::Approx((0.5 - 0.9) * at->eta(&u)));
    CHECK(py == doctest::Approx((0.2 - 0.5) * at->eta(&u)));
}

TEST_CASE("scalar entropy flux against Simpson oracle") {
    for (const char* ln : {"buckley-1d", "kpp-2d", "burgers-2d"}) {
        auto law = make_law(ln);
        const auto* sl = dynamic_cast<const ScalarLaw*>(law.get());
        for (const char* en : {"square", "atan"}) {
            auto e = make_entropy(en, law);
            for (double u : {-3.3, -1.0, -0.01, 0.0, 0.02, 0.5, 1.7, 3.4}) {
                for (int c = 0; c < law->dim(); ++c) {
                    auto g = [&](double s) {
                        Vec2 d = sl->df(s, {});
                        return scalar_v(*e, s) * (c == 0 ? d.x : d.y);
                    };
                    double ref = simpson(g, 0.0, u, 200000);
                    INFO(std::string(ln), " ", std::string(en), " u=", u, " c=", c);
                    REQUIRE(phi(*e, u, c) == doctest::Approx(ref).epsilon(1e-10).scale(1.0));
                }
            }
        }
    }
}

TEST_CASE("entropy compatibility phi' = v F'") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(-3, 3);
    for (const char* ln : kScalarLaws) {
        auto law = make_law(ln);
        const auto* sl = dynamic_cast<const ScalarLaw*>(law.get());
        for (const char* en : {"square", "kruzkov", "atan"}) {
            auto e = make_entropy(en, law, {0.3, 0.25, 20});
            for (int t = 0; t < 200; ++t) {
                double u = U(rng);
                if (std::abs(u - 0.3) < 1e-3) continue;
                Vec2 x{0.3, 0.7};
                double h = 1e-5, up = u + h, um = u - h;
                double pxp, pyp, pxm, pym;
                e->flux(&up, x, &pxp, &pyp);
                e->flux(&um, x, &pxm, &pym);
                Vec2 d = sl->f(1.0, x);
                d = sl->df(u, x);
                double v = scalar_v(*e, u);
                INFO(std::string(ln), " ", std::string(en), " u=", u);
                REQUIRE((pxp - pxm) / (2 * h) == doctest::Approx(v * d.x).epsilon(1e-7).scale(1.0));
                if (law->dim() == 2)
                    REQUIRE((pyp - pym) / (2 * h) == doctest::Approx(v * d.y).epsilon(1e-7).scale(1.0));
                // dPsi/dv = F: psi(u(v)) differentiated along v
                double vp = v + 1e-6, vm = v - 1e-6, ua, ub;
                if (!e->valid_variable(&vp) || !e->valid_variable(&vm)) continue;
                e->to_conserved(&vp, &ua);
                e->to_conserved(&vm, &ub);
                Vec2 n{1, 0};
                double dpsi = (e->potential_n(&ua, x, n) - e->potential_n(&ub, x, n)) / 2e-6;
                double fn;
                law->normal_flux(&u, x, n, &fn);
                REQUIRE(dpsi == doctest::Approx(fn).epsilon(1e-5).scale(1.0));
            }
        }
    }
}

TEST_CASE("Euler entropy") {
    for (int dim : {1, 2}) {
        auto law = make_law(dim == 1 ? "euler-1d" : "euler-2d", {1.0, 1.4});
        auto* el = dynamic_cast<const EulerLaw*>(law.get());
        auto e = make_entropy("euler-log", law);
        const int nv = law->nvar();
        State unit = el->from_primitive(1.0, {0.0, 0.0}, 1.0);
        CHECK(e->eta(unit.data()) == doctest::Approx(0.0).scale(1.0));

        std::mt19937 rng(5 + dim);
        std::uniform_real_distribution<double> R(0.1, 3), V(-2, 2), P(0.1, 4);
        for (int t = 0; t < 300; ++t) {
            State u = el->from_primitive(R(rng), {V(rng), V(rng)}, P(rng));
            double v[kMaxVars], back[kMaxVars];
            e->variable(u.data(), v);
            REQUIRE(e->valid_variable(v));
            e->to_conserved(v, back);
            for (int i = 0; i < nv; ++i) REQUIRE(back[i] == doctest::Approx(u[i]).epsilon(1e-10));
            // v = grad eta
            for (int i = 0; i < nv; ++i) {
                State up = u, um = u;
                double h = 1e-6 * std::max(1.0, std::abs(u[i]));
                up[i] += h;
                um[i] -= h;
                REQUIRE((e->eta(up.data()) - e->eta(um.data())) / (2 * h) == doctest::Approx(v[i]).epsilon(1e-6));
            }
            // psi . n = (gamma - 1) q . n
            Vec2 n{0.6, 0.8};
            if (dim == 1) n = {1, 0};
            double qn = u[1] * n.x + (dim == 2 ? u[2] * n.y : 0.0);
            REQUIRE(e->potential_n(u.data(), {}, n) == doctest::Approx(0.4 * qn).scale(1.0));
            // admissibility matches direct pressure evaluation
            State w = u;
            w[nv - 1] = V(rng);
            double q2 = w[1] * w[1] + (dim == 2 ? w[2] * w[2] : 0.0);
            bool direct = w[0] > 0 && 0.4 * (w[nv - 1] - 0.5 * q2 / w[0]) > 0;
            REQUIRE(law->admissible(w.data()) == direct);
        }
        // convexity of G by midpoint sampling
        for (int t = 0; t < 1000; ++t) {
            State a = el->from_primitive(R(rng), {V(rng), V(rng)}, P(rng));
            State b = el->from_primitive(R(rng), {V(rng), V(rng)}, P(rng));
            State m;
            for (int i = 0; i < kMaxVars; ++i) m[i] = 0.5 * (a[i] + b[i]);
            REQUIRE(law->admissible(m.data()));
        }
        State bad = unit;
        bad[0] = -1;
        CHECK_FALSE(law->admissible(bad.data()));
    }
}
