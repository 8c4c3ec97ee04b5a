#pragma once

#include <string>
#include <vector>

#include "skewlab/shadow.hpp"

namespace skewlab {

/// Block lengths, counts, gaps, precisions and cumulative times governing the
/// level-by-level orbit gluing. Levels are 1-based in the math; vectors here
/// are 0-based (index k-1 holds level k).
struct MoranSchedule {
    int levels = 0;
    double eta = 0.2; // expansivity constant
    std::vector<long> block_len;   // n_hat_k
    std::vector<long> block_count; // N_k
    std::vector<long> gap;         // m_k = m(eta / 2^{4+k})
    std::vector<double> delta;     // delta_k, strictly decreasing
    std::vector<long> level_start; // T_0^k
    std::vector<long> level_end;   // T_{N_k}^k
    double growth = 4.0;
    bool strict_lengths = false;

    long total_depth() const { return level_end.back(); }
    double level_radius(int k) const; // eta / 2^{4+k}
    /// T_{N_{k-1}}^{k-1} / T_{N_k}^k for k = 2..K.
    std::vector<double> dominance_ratios() const;
    long mantissa_required(double lambda_u) const;
    std::string to_json() const;
};

struct MoranOptions {
    long block_count = 1;
    double delta1 = 0.01;
    double delta_decay = 0.5;
    /// When set, enforce the fractal-construction bound n_hat_k >= 2^{m_k}
    /// (needed for the infinite-depth entropy argument, far beyond desk
    /// scale); the default floor is 2*m_k, sized for finite-level oscillation
    /// certificates.
    bool strict_paper_lengths = false;
    long mantissa_cap = 16384;
    double lattice_constant = 4.0;
};

/// Geometric schedule: blocks grow so that T_{k-1}/T_k <= 1/growth.
MoranSchedule build_schedule(double eps_base, int K, const HyperbolicMatrix& T, double growth,
                             const MoranOptions& opts = {});

/// Ledger-driven schedule: block lengths are sized so that every level's
/// oscillation tolerance (history + gaps + block terms) lands below
/// tol_target for the given observable and pair of targets.
MoranSchedule schedule_for_tolerance(const HyperbolicMatrix& T, const Observable& phi,
                                     double alpha0, double alpha1, double eta, int K,
                                     double tol_target, const MoranOptions& opts = {});

/// Grid point whose n-step Birkhoff average from driving time t lies within
/// 4*delta of alpha. Candidates are ranked by a double-precision scan and the
/// winners re-verified at context precision before acceptance.
TorusPoint find_block_anchor(const SkewSystem& sys, long t, double alpha, double delta, long n,
                             const Observable& phi, long grid, const NumericsContext& ctx);

struct LevelLedger {
    double tol = 0.0;       // tol_k: history + gaps + 4 delta_k + var(phi, width)
    double history = 0.0;   // earlier-level block terms / T_k
    double gaps = 0.0;      // gap terms / T_k
    double block = 0.0;     // 4 delta_k + var(phi, width_k)
    double width = 0.0;     // tracked distance bound for level-k blocks
};

struct IrregularCertificate {
    bool certified = false;
    std::string failure; // diagnostics when !certified
    TorusPoint point;
    std::string x1_decimal, x2_decimal; // full-precision coordinates
    double alpha0 = 0.0, alpha1 = 1.0;
    std::vector<long> times;      // T_{N_k}^k
    std::vector<double> averages; // A_{T_k} phi(x*)
    std::vector<double> targets;  // alpha_{rho(k)}, rho(k) = k mod 2
    std::vector<double> deviations;
    std::vector<LevelLedger> ledger;
    std::vector<double> nesting;        // bowen(z_k, z_{k+1}) at depth T_k, k = 1..K-1
    std::vector<double> anchor_avg_err; // |A_{n_k}(anchor_k) - alpha| at full precision
    std::vector<double> block_dev;      // max shadowing deviation per level block
    MoranSchedule schedule;
    long mantissa_bits = 0;

    std::string to_json() const;
};

/// Level-by-level realization of the orbit-gluing construction: each level
/// appends a deviation-set anchor block and re-glues the whole history at
/// radius eta/2^{4+k}, producing a point whose Birkhoff averages oscillate
/// between alpha0 and alpha1 at the level times.
IrregularCertificate construct_irregular(const SkewSystem& sys, const Observable& phi,
                                         double alpha0, double alpha1,
                                         const MoranSchedule& schedule,
                                         const NumericsContext& ctx, long anchor_grid = 96);

/// Throwing wrapper: surfaces OscillationNotCertified with diagnostics.
IrregularCertificate construct_irregular_checked(const SkewSystem& sys, const Observable& phi,
                                                 double alpha0, double alpha1,
                                                 const MoranSchedule& schedule,
                                                 const NumericsContext& ctx,
                                                 long anchor_grid = 96);

struct DenseVariantResult {
    TorusPoint z;
    std::string z1_decimal, z2_decimal;
    double target_distance = 0.0;    // d_M(z, x_j), must be < eps
    double average_difference = 0.0; // |A_{l_K} phi(z) - A_{l_K} phi(x)|
    double ledger_bound = 0.0;       // var + L_K/l_K + 2 s_{K+1} ||phi|| / n_K
    std::vector<long> gaps;          // s_1..s_{K+1}
    std::vector<long> blocks;        // n_1..n_K
    std::vector<long> l;             // cumulative l_1..l_K
    bool certified = false;          // average_difference <= ledger_bound
};

/// Chain of two-piece shadows: z stays eps-close to the target x_j while its
/// Birkhoff sums track those of x on ever longer blocks.
DenseVariantResult construct_dense_variant(const SkewSystem& sys, long t0, const TorusPoint& x,
                                           const TorusPoint& target, double eps, int K,
                                           const Observable& phi, const NumericsContext* ctx);

/// Batch form sharing the reference orbit of x across many targets.
std::vector<DenseVariantResult> construct_dense_variants(const SkewSystem& sys, long t0,
                                                         const TorusPoint& x,
                                                         const std::vector<TorusPoint>& targets,
                                                         double eps, int K, const Observable& phi,
                                                         const NumericsContext* ctx);

} // namespace skewlab
