#include "doctest.h"

#include <cmath>
#include <random>

#include "skewlab/fiber.hpp"
#include "test_util.hpp"

using namespace skewlab;

TEST_CASE("eigen_split of the cat map") {
    HyperbolicMatrix h = eigen_split(Mat2i::cat());
    double lu = (3.0 + std::sqrt(5.0)) / 2.0;
    double ls = (3.0 - std::sqrt(5.0)) / 2.0;
    CHECK(h.lambda_u == doctest::Approx(lu).epsilon(1e-14));
    CHECK(h.lambda_s == doctest::Approx(ls).epsilon(1e-14));
    CHECK(h.lambda_u * std::fabs(h.lambda_s) == doctest::Approx(1.0).epsilon(1e-12));
    // eigen identity within 1e-12, unit euclidean norm
    for (bool unstable : {true, false}) {
        auto e = unstable ? h.e_u : h.e_s;
        double lambda = unstable ? h.lambda_u : h.lambda_s;
        auto img = h.m.apply(e[0], e[1]);
        CHECK(std::fabs(img[0] - lambda * e[0]) < 1e-12);
        CHECK(std::fabs(img[1] - lambda * e[1]) < 1e-12);
        CHECK(std::hypot(e[0], e[1]) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("eigen_split gates") {
    CHECK_THROWS_AS(eigen_split(Mat2i{1, 1, 1, 0}), NonHyperbolicMatrix); // |trace| <= 2
    CHECK_THROWS_AS(eigen_split(Mat2i{2, 0, 0, 2}), NonHyperbolicMatrix); // |det| != 1
    CHECK(eigen_split(Mat2i{1, 1, 1, 2}).lambda_u ==
          doctest::Approx((3.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-14));
}

TEST_CASE("high precision split matches the double split") {
    EigenSplitBig e(Mat2i::cat(), 256);
    HyperbolicMatrix h = eigen_split(Mat2i::cat());
    CHECK(std::fabs(e.lambda_u.to_double() - h.lambda_u) < 1e-14);
    CHECK(std::fabs(e.eu1.to_double() - h.e_u[0]) < 1e-14);
    CHECK(std::fabs(e.es2.to_double() - h.e_s[1]) < 1e-14);
}

TEST_CASE("apply_fiber examples") {
    AffineFamily cat{eigen_split(Mat2i::cat()), OffsetKind::Zero, {}};
    TorusPoint fp = apply_fiber(cat, 0.0, {0.0, 0.0});
    CHECK(fp.x1 == 0.0);
    CHECK(fp.x2 == 0.0);

    // exact half-integer arithmetic: period-3 orbit of (1/2, 1/2)
    TorusPoint p{0.5, 0.5};
    TorusPoint q = apply_fiber(cat, 0.0, p);
    CHECK(q.x1 == 0.5);
    CHECK(q.x2 == 0.0);
    q = apply_fiber(cat, 0.0, apply_fiber(cat, 0.0, q));
    CHECK(q.x1 == 0.5);
    CHECK(q.x2 == 0.5);

    AffineFamily drift{eigen_split(Mat2i::cat()), OffsetKind::OmegaX, {}};
    TorusPoint r = apply_fiber(drift, 0.25, {0.0, 0.0});
    CHECK(r.x1 == doctest::Approx(0.25));
    CHECK(r.x2 == 0.0);
}

TEST_CASE("affine linearity: apply(p+v) - apply(p) = Tv mod 1") {
    AffineFamily fam{eigen_split(Mat2i::cat()), OffsetKind::OmegaX, {}};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 50; ++k) {
        TorusPoint p{u(rng), u(rng)};
        TorusPoint v{u(rng), u(rng)};
        double omega = u(rng);
        TorusPoint a = apply_fiber(fam, omega, {p.x1 + v.x1, p.x2 + v.x2});
        TorusPoint b = apply_fiber(fam, omega, p);
        auto tv = Mat2i::cat().apply(v.x1, v.x2);
        TorusPoint expect = TorusPoint{b.x1 + tv[0], b.x2 + tv[1]}.reduced();
        CHECK(circle_dist(a.x1, expect.x1) < 1e-12);
        CHECK(circle_dist(a.x2, expect.x2) < 1e-12);
    }
}

TEST_CASE("expansion and contraction rates match the splitting") {
    HyperbolicMatrix h = eigen_split(Mat2i::cat());
    auto iu = h.m.apply(h.e_u[0], h.e_u[1]);
    auto is = h.m.apply(h.e_s[0], h.e_s[1]);
    double lambda0 = h.expansion_log();
    CHECK(std::hypot(iu[0], iu[1]) >= std::exp(lambda0) - 1e-12);
    CHECK(std::hypot(is[0], is[1]) <= std::exp(-lambda0) + 1e-12);
}

TEST_CASE("torus metric properties") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        TorusPoint a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
        CHECK(torus_distance(a, b) == torus_distance(b, a));
        CHECK(torus_distance(a, c) <= torus_distance(a, b) + torus_distance(b, c) + 1e-15);
        CHECK(torus_distance(a, b) <= 0.5 + 1e-15);
    }
}

TEST_CASE("positivity closure of cocycle products") {
    CocycleFamily fam{{Mat2i{2, 1, 1, 1}, Mat2i{1, 1, 1, 2}}};
    fam.validate();
    Mat2i prod{1, 0, 0, 1};
    long prev_min = 0;
    for (int i = 0; i < 12; ++i) {
        prod = prod * fam.matrices[size_t(i % 2)];
        long mn = std::min(std::min(prod.a, prod.b), std::min(prod.c, prod.d));
        CHECK(mn >= 1);
        CHECK(mn >= prev_min);
        prev_min = mn;
    }
    CocycleFamily bad{{Mat2i{2, 1, 0, 1}}};
    CHECK_THROWS_AS(bad.validate(), ConfigInvalid);
}

TEST_CASE("finite-time splitting converges to the eigenvectors on constant words") {
    CocycleFamily fam{{Mat2i{2, 1, 1, 1}}};
    std::vector<uint8_t> word(200, 0);
    auto sp = finite_time_splitting(fam, word, 100, 30);
    HyperbolicMatrix h = eigen_split(Mat2i{2, 1, 1, 1});
    auto close = [](std::array<double, 2> a, std::array<double, 2> b) {
        double d1 = std::hypot(a[0] - b[0], a[1] - b[1]);
        double d2 = std::hypot(a[0] + b[0], a[1] + b[1]);
        return std::min(d1, d2);
    };
    CHECK(close(sp.unstable, h.e_u) < 1e-8);
    CHECK(close(sp.stable, h.e_s) < 1e-8);
}

TEST_CASE("finite-time splitting gates and convergence in depth") {
    CocycleFamily fam{{Mat2i{2, 1, 1, 1}, Mat2i{1, 1, 1, 2}}};
    std::vector<uint8_t> word(200);
    for (size_t i = 0; i < word.size(); ++i) word[i] = uint8_t(i % 2);
    CHECK_THROWS_AS(finite_time_splitting(fam, word, 50, 0), InsufficientWord);
    CHECK_THROWS_AS(finite_time_splitting(fam, word, 5, 10), InsufficientWord);
    auto a = finite_time_splitting(fam, word, 50, 20);
    auto b = finite_time_splitting(fam, word, 50, 25);
    CHECK(std::hypot(a.unstable[0] - b.unstable[0], a.unstable[1] - b.unstable[1]) < 1e-4);
}
