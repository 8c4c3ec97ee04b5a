#pragma once

#include <array>
#include <string>
#include <vector>

#include "skewlab/orbit.hpp"

namespace skewlab {

/// An m-spaced omega-specification: disjoint integer intervals [a_i, b_i]
/// along the driving orbit of theta^{t0} omega0, each carrying the orbit
/// anchor P(a_i). The remaining P(t) are regenerated on demand through the
/// orbit relation F^{t2-t1}(P(t1)) = P(t2), never stored.
struct Specification {
    long omega_t0 = 0;
    std::vector<std::array<long, 2>> intervals; // inclusive [a,b], sorted, disjoint
    std::vector<TorusPoint> anchors;            // P(a_i) per interval

    void validate() const;
    /// Def 3.1 spacing flag: a_{i+1} > b_i + m for all i.
    bool m_spaced(long m) const;
    /// Smallest gap value a_{i+1} - b_i (iteration count across the gap).
    long min_gap() const;
    long first_time() const { return intervals.front()[0]; }
    long last_time() const { return intervals.back()[1]; }

    std::string to_json() const;
    static Specification from_json(const std::string& text);
};

/// Gap budget for the constructive gluing search.
struct GapBudget {
    double epsilon = 0.05;
    long m = 1;
    double lattice_constant = 4.0;
};

/// m(eps) = ceil((2 ln(1/eps) + ln C_lat) / ln lambda_u): the gap at which an
/// eps * lambda_u^m long unstable segment is dense enough for the lattice
/// gluing search to succeed. Monotone nonincreasing in eps.
long gap_function(double eps, const HyperbolicMatrix& T, double lattice_constant = 4.0);

/// One gluing step: returns w near u (unstable segment of radius eps/2) whose
/// g-step image lands on the local stable segment of v (radius eps/2), where
/// g = t_a - t_b. Searches integer lattice lifts in eigencoordinates.
struct GlueResult {
    BigTorusPoint w;
    double sigma = 0.0;  // unstable offset of w from u
    double r = 0.0;      // stable offset of F^g(w) from v
    std::array<long, 2> lattice{0, 0};
    int retries = 0;
};

GlueResult glue_pair(const SkewSystem& sys, long t_b, const BigTorusPoint& u, long t_a,
                     const TorusPoint& v, double eps, const NumericsContext& ctx,
                     double lattice_constant = 4.0);

/// Same step against a full-precision anchor (the lattice lift is still
/// chosen in doubles; the applied correction targets v exactly).
GlueResult glue_pair_big(const SkewSystem& sys, long t_b, const BigTorusPoint& u, long t_a,
                         const BigTorusPoint& v, double eps, const NumericsContext& ctx,
                         double lattice_constant = 4.0);

/// Shadowing solve: the point x with d_M(P(t), F^t(x)) < eps on every block,
/// built by left-to-right folding of glue_pair, verified before return.
struct SolveResult {
    BigTorusPoint x;          // at time 0
    TorusPoint x_double;
    double max_deviation = 0.0;            // over all block times
    std::vector<double> block_deviation;   // per block
    std::vector<double> glue_sigma;        // per gap
    std::vector<double> glue_r;            // per gap
    std::vector<double> gap_budget;        // eps/2^{i+1} ledger entries
    int heal_retries = 0;
};

SolveResult solve_specification(const SkewSystem& sys, const Specification& spec, double eps,
                                const NumericsContext& ctx, double lattice_constant = 4.0);

/// Post-hoc check over every block time: max deviation and pass/fail vs eps.
struct VerifyResult {
    bool ok = false;
    double max_deviation = 0.0;
    std::vector<double> block_deviation;
};

VerifyResult verify_shadowing(const SkewSystem& sys, const Specification& spec,
                              const TorusPoint& x, double eps, const NumericsContext& ctx);
VerifyResult verify_shadowing_big(const SkewSystem& sys, const Specification& spec,
                                  const BigTorusPoint& x, double eps, const NumericsContext& ctx);

} // namespace skewlab
