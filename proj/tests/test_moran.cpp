#include "doctest.h"

#include <cmath>

#include "skewlab/moran.hpp"
#include "test_util.hpp"

using namespace skewlab;
using namespace skewlab::testutil;

TEST_CASE("geometric schedule: monotone times and dominance ratios") {
    HyperbolicMatrix H = eigen_split(Mat2i::cat());
    MoranSchedule s = build_schedule(0.2, 4, H, 4.0);
    CHECK(s.levels == 4);
    // gaps pinned by the gap function at eta/2^{4+k}
    for (int k = 1; k <= 4; ++k)
        CHECK(s.gap[size_t(k - 1)] == gap_function(0.2 / std::pow(2.0, 4 + k), H));
    long prev = 0;
    for (int k = 0; k < 4; ++k) {
        CHECK(s.level_start[size_t(k)] >= prev);
        CHECK(s.level_end[size_t(k)] > s.level_start[size_t(k)]);
        prev = s.level_end[size_t(k)];
    }
    for (double r : s.dominance_ratios()) CHECK(r <= 0.25 + 1e-12);
    // deltas strictly decreasing
    for (size_t k = 1; k < s.delta.size(); ++k) CHECK(s.delta[k] < s.delta[k - 1]);
}

TEST_CASE("schedule gates") {
    HyperbolicMatrix H = eigen_split(Mat2i::cat());
    CHECK_THROWS_AS(build_schedule(0.2, 1, H, 4.0), ConfigInvalid); // no oscillation
    CHECK_THROWS_AS(build_schedule(0.2, 6, H, 10.0), ScheduleInfeasible); // mantissa cap
}

TEST_CASE("strict block-length floor carries the fractal bound") {
    HyperbolicMatrix H = eigen_split(Mat2i::cat());
    MoranOptions opts;
    opts.strict_paper_lengths = true;
    // the 2^{m_k} floor blows past the default mantissa cap already at K=2
    CHECK_THROWS_AS(build_schedule(0.2, 2, H, 4.0, opts), ScheduleInfeasible);
    opts.mantissa_cap = 1 << 16;
    MoranSchedule s = build_schedule(0.2, 2, H, 4.0, opts);
    for (int k = 0; k < 2; ++k)
        CHECK(s.block_len[size_t(k)] >= (1L << s.gap[size_t(k)]));
}

TEST_CASE("ledger-driven schedule meets the tolerance target") {
    HyperbolicMatrix H = eigen_split(Mat2i::cat());
    Observable phi = Observable::cos_x1();
    MoranOptions opts;
    opts.mantissa_cap = 1 << 20;
    MoranSchedule s = schedule_for_tolerance(H, phi, 0.0, 1.0, 0.1, 4, 0.09, opts);
    CHECK(s.total_depth() < 200000);
    CHECK(s.mantissa_required(H.lambda_u) <= (1 << 20));
}

TEST_CASE("anchor search examples") {
    SkewSystem sys = cat_system();
    NumericsContext d = NumericsContext::double_mode();
    Observable phi = Observable::cos_x1();

    // the fixed point realizes alpha = 1 exactly for every n and delta
    TorusPoint p = find_block_anchor(sys, 0, 1.0, 0.01, 50, phi, 48, d);
    CHECK(p.x1 == 0.0);
    CHECK(p.x2 == 0.0);

    TorusPoint q = find_block_anchor(sys, 0, 0.0, 0.05, 64, phi, 48, d);
    BirkhoffTrace tr = birkhoff_trace(sys, 0, q, phi, {64}, d);
    CHECK(std::fabs(tr.averages[0]) < 0.2);

    CHECK_THROWS_AS(find_block_anchor(sys, 0, 2.0, 0.05, 64, phi, 48, d), ConfigInvalid);
}

TEST_CASE("degenerate identity run: equal targets at the fixed point") {
    SkewSystem sys = cat_system();
    HyperbolicMatrix H = eigen_split(Mat2i::cat());
    MoranOptions opts;
    opts.mantissa_cap = 1 << 16;
    MoranSchedule s = build_schedule(0.2, 2, H, 4.0, opts);
    NumericsContext ctx = NumericsContext::bigfloat(s.mantissa_required(H.lambda_u));
    IrregularCertificate c = construct_irregular(sys, Observable::cos_x1(), 1.0, 1.0, s, ctx, 32);
    CHECK(c.certified);
    CHECK(c.point.x1 == 0.0);
    CHECK(c.point.x2 == 0.0);
    for (double d : c.deviations) CHECK(d < 1e-12);
}

TEST_CASE("three-level oscillation certificate") {
    SkewSystem sys = cat_system();
    HyperbolicMatrix H = eigen_split(Mat2i::cat());
    Observable phi = Observable::cos_x1();
    MoranOptions opts;
    opts.mantissa_cap = 1 << 18;
    MoranSchedule s = schedule_for_tolerance(H, phi, 0.0, 1.0, 0.2, 3, 0.15, opts);
    NumericsContext ctx = NumericsContext::bigfloat(s.mantissa_required(H.lambda_u));
    IrregularCertificate c = construct_irregular(sys, phi, 0.0, 1.0, s, ctx, 48);
    REQUIRE(c.certified);

    // rho(k) = k mod 2: odd levels target alpha1, even levels alpha0
    CHECK(c.targets[0] == 1.0);
    CHECK(c.targets[1] == 0.0);
    CHECK(c.targets[2] == 1.0);
    for (int k = 0; k < 3; ++k) {
        CHECK(c.deviations[size_t(k)] <= c.ledger[size_t(k)].tol);
        CHECK(c.deviations[size_t(k)] ==
              doctest::Approx(std::fabs(c.averages[size_t(k)] - c.targets[size_t(k)])));
    }

    // nesting: level-(k+1) representative stays inside the closed Bowen ball
    // of radius eta/2^{4+k} around the level-k representative at depth T_k
    for (int k = 1; k < 3; ++k)
        CHECK(c.nesting[size_t(k - 1)] <= 0.2 / std::pow(2.0, 4 + k));

    // the recorded trace reproduces from the returned point
    NumericsContext rectx = NumericsContext::bigfloat(c.mantissa_bits);
    BigTorusPoint x(rectx.mantissa_bits);
    x.x1 = BigFloat(c.x1_decimal, rectx.mantissa_bits);
    x.x2 = BigFloat(c.x2_decimal, rectx.mantissa_bits);
    BirkhoffTrace tr = birkhoff_trace_big(sys, 0, x, phi, c.times, rectx);
    for (size_t i = 0; i < tr.averages.size(); ++i)
        CHECK(std::fabs(tr.averages[i] - c.averages[i]) < 1e-9);

    // irregularity gap over the computed horizon
    double maxtol = 0;
    for (auto& l : c.ledger) maxtol = std::max(maxtol, l.tol);
    if (std::fabs(c.alpha1 - c.alpha0) > 2 * maxtol) {
        for (size_t k = 0; k + 1 < c.averages.size(); ++k)
            CHECK(std::fabs(c.averages[k + 1] - c.averages[k]) >
                  std::fabs(c.alpha1 - c.alpha0) - 2 * maxtol);
    }
}

TEST_CASE("gap below the gluing threshold propagates GapTooSmall") {
    SkewSystem sys = cat_system();
    HyperbolicMatrix H = eigen_split(Mat2i::cat());
    MoranOptions opts;
    opts.mantissa_cap = 1 << 16;
    MoranSchedule s = build_schedule(0.2, 2, H, 4.0, opts);
    s.gap[1] -= 3; // sabotage the level-2 gap below m(eta/2^6)
    long t = 0;
    s.level_start[0] = 0;
    s.level_end[0] = s.block_len[0];
    s.level_start[1] = s.level_end[0] + s.gap[1];
    s.level_end[1] = s.level_start[1] + s.block_len[1];
    NumericsContext ctx = NumericsContext::bigfloat(1 << 14);
    (void)t;
    CHECK_THROWS_AS(
        construct_irregular(sys, Observable::cos_x1(), 0.0, 1.0, s, ctx, 32),
        GapTooSmall);
}

TEST_CASE("precision stability: doubling the mantissa reproduces the point") {
    SkewSystem sys = cat_system();
    HyperbolicMatrix H = eigen_split(Mat2i::cat());
    Observable phi = Observable::cos_x1();
    MoranOptions opts;
    opts.mantissa_cap = 1 << 18;
    MoranSchedule s = schedule_for_tolerance(H, phi, 0.0, 1.0, 0.2, 2, 0.15, opts);
    NumericsContext c1 = NumericsContext::bigfloat(s.mantissa_required(H.lambda_u));
    NumericsContext c2 = NumericsContext::bigfloat(2 * s.mantissa_required(H.lambda_u));
    IrregularCertificate a = construct_irregular(sys, phi, 0.0, 1.0, s, c1, 48);
    IrregularCertificate b = construct_irregular(sys, phi, 0.0, 1.0, s, c2, 48);
    CHECK(std::fabs(a.point.x1 - b.point.x1) < 1e-6);
    CHECK(std::fabs(a.point.x2 - b.point.x2) < 1e-6);
    for (size_t k = 0; k < a.averages.size(); ++k)
        CHECK(std::fabs(a.averages[k] - b.averages[k]) < 1e-6);
}

TEST_CASE("dense variant gates") {
    SkewSystem sys = cat_system();
    Observable phi = Observable::cos_x1();
    CHECK_THROWS_AS(construct_dense_variant(sys, 0, {0.2, 0.7}, {0.9, 0.1}, 0.6, 3, phi, nullptr),
                    ConfigInvalid);
    CHECK_THROWS_AS(construct_dense_variant(sys, 0, {0.2, 0.7}, {0.9, 0.1}, 0.05, 1, phi, nullptr),
                    ConfigInvalid);
}

TEST_CASE("dense variant tracks the reference averages near the target") {
    SkewSystem sys = cat_system();
    Observable phi = Observable::cos_x1();
    DenseVariantResult r =
        construct_dense_variant(sys, 0, {0.2, 0.7}, {0.9, 0.1}, 0.05, 3, phi, nullptr);
    CHECK(r.target_distance < 0.05);
    CHECK(r.average_difference < 0.05);
    CHECK(r.average_difference <= r.ledger_bound);
    CHECK(r.certified);
    // schedule follows s_k = m(eps/2^k) with n_k = 2^{max(s_k, s_{k+1})}
    HyperbolicMatrix H = eigen_split(Mat2i::cat());
    for (int k = 1; k <= 3; ++k) {
        CHECK(r.gaps[size_t(k - 1)] == gap_function(0.05 / std::pow(2.0, k), H));
        CHECK(r.blocks[size_t(k - 1)] >=
              (1L << std::max(r.gaps[size_t(k - 1)], r.gaps[size_t(k)])));
    }
}

TEST_CASE("dense variant with the reference as its own target") {
    SkewSystem sys = cat_system();
    Observable phi = Observable::cos_x1();
    TorusPoint x{0.3, 0.4};
    DenseVariantResult r = construct_dense_variant(sys, 0, x, x, 0.05, 2, phi, nullptr);
    CHECK(torus_distance(r.z, x) < 0.05);
    CHECK(r.average_difference < 0.05);
}
