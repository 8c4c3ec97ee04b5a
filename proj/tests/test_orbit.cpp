#include "doctest.h"

#include <cmath>
#include <random>

#include "skewlab/orbit.hpp"
#include "test_util.hpp"

using namespace skewlab;
using namespace skewlab::testutil;

TEST_CASE("iterate examples") {
    SkewSystem sys = cat_system();
    NumericsContext d = NumericsContext::double_mode();

    TorusPoint fp = iterate(sys, 0, {0.0, 0.0}, 1000000, d);
    CHECK(fp.x1 == 0.0);
    CHECK(fp.x2 == 0.0);

    TorusPoint p3 = iterate(sys, 0, {0.5, 0.5}, 3, d);
    CHECK(p3.x1 == 0.5);
    CHECK(p3.x2 == 0.5);

    TorusPoint id = iterate(sys, 0, {0.37, 0.81}, 0, d);
    CHECK(id.x1 == 0.37);
    CHECK(id.x2 == 0.81);
}

TEST_CASE("backward iteration inverts forward for the affine family") {
    SkewSystem sys = cat_system_omega_offset("0.3");
    NumericsContext ctx = NumericsContext::bigfloat(512);
    BigTorusPoint x(TorusPoint{0.2, 0.7}, 512);
    BigTorusPoint y = iterate_big(sys, 0, x, 40, ctx);
    BigTorusPoint back = iterate_big(sys, 40, y, -40, ctx);
    CHECK(torus_distance(back, x) < 1e-40);
}

TEST_CASE("certified depth gate in BIGFLOAT mode") {
    SkewSystem sys = cat_system();
    NumericsContext ctx = NumericsContext::bigfloat(128);
    long nmax = ctx.certified_depth(sys.expansion());
    CHECK(nmax == long(std::floor((128.0 - 64.0) / std::log2(cat_lambda()))));
    BigTorusPoint x(TorusPoint{0.1, 0.2}, 128);
    CHECK_NOTHROW(iterate_big(sys, 0, x, nmax, ctx));
    CHECK_THROWS_AS(iterate_big(sys, 0, x, nmax + 1, ctx), PrecisionExhausted);
}

TEST_CASE("bowen distance examples") {
    SkewSystem sys = cat_system();
    NumericsContext d = NumericsContext::double_mode();
    TorusPoint x{0.3, 0.4}, y{0.35, 0.425};
    CHECK(bowen_distance(sys, 0, 1, x, y, d) == doctest::Approx(torus_distance(x, y)));
    CHECK(bowen_distance(sys, 0, 12, x, x, d) == 0.0);

    // unstable-line expansion oracle: y = 1e-4 * (1, lambda_u - 2), exact
    // while the segment stays below the wrap scale
    double lu = cat_lambda();
    TorusPoint z{1e-4, 1e-4 * (lu - 2.0)};
    double expect = 1e-4 * std::pow(lu, 7.0);
    CHECK(bowen_distance(sys, 0, 8, {0.0, 0.0}, z, d) ==
          doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("bowen metric monotone in n and consistent with ball membership") {
    SkewSystem sys = cat_system();
    NumericsContext d = NumericsContext::double_mode();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 25; ++k) {
        TorusPoint x{u(rng), u(rng)}, y{u(rng), u(rng)};
        double prev = 0.0;
        for (long n = 1; n <= 10; ++n) {
            double dn = bowen_distance(sys, 0, n, x, y, d);
            CHECK(dn >= prev);
            prev = dn;
            CHECK(bowen_ball_contains(sys, 0, n, x, y, dn + 1e-12, d));
            CHECK(!bowen_ball_contains(sys, 0, n, x, y, dn, d));
        }
    }
}

TEST_CASE("cocycle law: iterate over m+n composes") {
    SkewSystem sys = cat_system_omega_offset();
    NumericsContext d = NumericsContext::double_mode();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        TorusPoint x{u(rng), u(rng)};
        long m = 7, n = 13; // depth 20 <= 30: double roundoff below 1e-10
        TorusPoint lhs = iterate(sys, 0, x, m + n, d);
        TorusPoint rhs = iterate(sys, m, iterate(sys, 0, x, m, d), n, d);
        CHECK(torus_distance(lhs, rhs) < 1e-10);
    }
    // exact composition in BIGFLOAT
    NumericsContext b = NumericsContext::bigfloat(1024);
    BigTorusPoint x(TorusPoint{0.123, 0.456}, 1024);
    BigTorusPoint lhs = iterate_big(sys, 0, x, 200, b);
    BigTorusPoint rhs = iterate_big(sys, 80, iterate_big(sys, 0, x, 80, b), 120, b);
    CHECK(torus_distance(lhs, rhs) < 1e-100);
}

TEST_CASE("observables") {
    Observable phi = Observable::cos_x1();
    CHECK(phi.eval(0.0, {0.0, 0.0}) == 1.0);
    CHECK(phi.sup_norm() == 1.0);
    CHECK(phi.var_bound(0.01) == doctest::Approx(2 * M_PI * 0.01));
    Observable mix = Observable::parse("0.5*cos_x1 + 0.25*cos_omega_sin_x2");
    CHECK(mix.sup_norm() == doctest::Approx(0.75));
    CHECK(mix.depends_on_omega());
    CHECK(mix.eval(0.0, {0.0, 0.25}) == doctest::Approx(0.5 + 0.25));
    CHECK_THROWS_AS(Observable::parse("sin_x9"), ConfigInvalid);
}

TEST_CASE("birkhoff trace examples and invariants") {
    SkewSystem sys = cat_system();
    NumericsContext d = NumericsContext::double_mode();
    Observable phi = Observable::cos_x1();

    BirkhoffTrace fp = birkhoff_trace(sys, 0, {0.0, 0.0}, phi, {1, 10, 100}, d);
    for (double a : fp.averages) CHECK(a == doctest::Approx(1.0));

    BirkhoffTrace zero = birkhoff_trace(sys, 0, {0.3, 0.8}, Observable::zero(), {5, 50}, d);
    for (double a : zero.averages) CHECK(a == 0.0);

    // Lebesgue is ergodic for the cat map: Monte Carlo oracle over seeds
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int ok = 0;
    const int trials = 20;
    for (int k = 0; k < trials; ++k) {
        TorusPoint x{u(rng), u(rng)};
        BirkhoffTrace tr = birkhoff_trace(sys, 0, x, phi, {100000}, d);
        CHECK(std::fabs(tr.averages[0]) <= phi.sup_norm());
        if (std::fabs(tr.averages[0]) <= 0.02) ++ok;
    }
    CHECK(ok >= trials - 1);
}

TEST_CASE("BIGFLOAT robustness: doubling the mantissa reproduces the trace") {
    SkewSystem sys = cat_system_omega_offset("0.41");
    Observable phi = Observable::parse("cos_x1 + 0.5*cos_omega_sin_x2");
    std::vector<long> cps{8, 64, 256};
    NumericsContext c1 = NumericsContext::bigfloat(512);
    NumericsContext c2 = NumericsContext::bigfloat(1024);
    TorusPoint x{0.377, 0.911};
    BirkhoffTrace t1 = birkhoff_trace(sys, 0, x, phi, cps, c1);
    BirkhoffTrace t2 = birkhoff_trace(sys, 0, x, phi, cps, c2);
    for (size_t i = 0; i < cps.size(); ++i)
        CHECK(std::fabs(t1.averages[i] - t2.averages[i]) < 1e-6);
}

TEST_CASE("checkpoint validation") {
    SkewSystem sys = cat_system();
    NumericsContext d = NumericsContext::double_mode();
    CHECK_THROWS_AS(birkhoff_trace(sys, 0, {0, 0}, Observable::cos_x1(), {}, d), ConfigInvalid);
    CHECK_THROWS_AS(birkhoff_trace(sys, 0, {0, 0}, Observable::cos_x1(), {5, 5}, d),
                    ConfigInvalid);
}
