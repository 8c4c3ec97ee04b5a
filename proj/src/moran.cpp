#include "skewlab/moran.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "json.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace skewlab {

namespace {

int rho(int k) { return k % 2; } // level k targets alpha_{rho(k)}

double target_of(int k, double a0, double a1) { return rho(k) == 1 ? a1 : a0; }

void check_eta(double eta, int K) {
    // gap_function needs eta/2^{4+k} in (0, 1/4); eta <= 4 covers every level
    if (!(eta > 0.0 && eta / 32.0 < 0.25))
        throw ConfigInvalid("eta out of range");
    if (K < 2) throw ConfigInvalid("need at least 2 levels for oscillation");
}

} // namespace

double MoranSchedule::level_radius(int k) const { return eta / std::pow(2.0, 4 + k); }

std::vector<double> MoranSchedule::dominance_ratios() const {
    std::vector<double> r;
    for (size_t k = 1; k < level_end.size(); ++k)
        r.push_back(double(level_end[k - 1]) / double(level_end[k]));
    return r;
}

long MoranSchedule::mantissa_required(double lambda_u) const {
    return 64 + static_cast<long>(std::ceil(double(total_depth()) * std::log2(std::fabs(lambda_u)))) + 64;
}

std::string MoranSchedule::to_json() const {
    nlohmann::json j;
    j["levels"] = levels;
    j["eta"] = eta;
    j["block_len"] = block_len;
    j["block_count"] = block_count;
    j["gap"] = gap;
    j["delta"] = delta;
    j["level_start"] = level_start;
    j["level_end"] = level_end;
    j["growth"] = growth;
    j["strict_lengths"] = strict_lengths;
    j["dominance_ratios"] = dominance_ratios();
    return j.dump(2);
}

namespace {

MoranSchedule schedule_common(double eta, int K, const HyperbolicMatrix& T,
                              const MoranOptions& opts) {
    check_eta(eta, K);
    MoranSchedule s;
    s.levels = K;
    s.eta = eta;
    s.strict_lengths = opts.strict_paper_lengths;
    for (int k = 1; k <= K; ++k) {
        s.gap.push_back(gap_function(eta / std::pow(2.0, 4 + k), T, opts.lattice_constant));
        double dk = opts.delta1 * std::pow(opts.delta_decay, k - 1);
        s.delta.push_back(dk);
        s.block_count.push_back(opts.block_count);
    }
    return s;
}

long length_floor(long m_k, bool strict) {
    if (!strict) return 2 * m_k;
    if (m_k > 40) throw ScheduleInfeasible("2^" + std::to_string(m_k) + " block length overflows");
    return 1L << m_k;
}

void finalize_times(MoranSchedule& s, const HyperbolicMatrix& T, long mantissa_cap) {
    s.level_start.clear();
    s.level_end.clear();
    long t = 0;
    for (int k = 1; k <= s.levels; ++k) {
        if (k > 1) t += s.gap[size_t(k - 1)];
        s.level_start.push_back(t);
        long Nk = s.block_count[size_t(k - 1)];
        t += Nk * s.block_len[size_t(k - 1)] + (Nk - 1) * s.gap[size_t(k - 1)];
        s.level_end.push_back(t);
    }
    long need = s.mantissa_required(T.lambda_u);
    if (need > mantissa_cap)
        throw ScheduleInfeasible("schedule needs " + std::to_string(need) +
                                 " mantissa bits > cap " + std::to_string(mantissa_cap));
}

} // namespace

MoranSchedule build_schedule(double eps_base, int K, const HyperbolicMatrix& T, double growth,
                             const MoranOptions& opts) {
    if (growth < 2.0) throw ConfigInvalid("growth must be >= 2");
    MoranSchedule s = schedule_common(eps_base, K, T, opts);
    s.growth = growth;
    long Tprev = 0;
    for (int k = 1; k <= K; ++k) {
        long floor_k = length_floor(s.gap[size_t(k - 1)], s.strict_lengths);
        long Nk = s.block_count[size_t(k - 1)];
        long need = 0;
        if (k > 1) {
            // T_k >= growth * T_{k-1}
            long target = static_cast<long>(std::ceil(growth * double(Tprev)));
            long fixed = Tprev + s.gap[size_t(k - 1)] * Nk;
            need = (target - fixed + Nk - 1) / Nk;
        }
        s.block_len.push_back(std::max(floor_k, need));
        long Tk = Tprev + (k > 1 ? s.gap[size_t(k - 1)] : 0) + Nk * s.block_len[size_t(k - 1)] +
                  (Nk - 1) * s.gap[size_t(k - 1)];
        Tprev = Tk;
    }
    finalize_times(s, T, opts.mantissa_cap);
    return s;
}

MoranSchedule schedule_for_tolerance(const HyperbolicMatrix& T, const Observable& phi,
                                     double alpha0, double alpha1, double eta, int K,
                                     double tol_target, const MoranOptions& opts) {
    if (tol_target <= 0) throw ConfigInvalid("tol_target must be positive");
    MoranOptions o = opts;
    o.delta1 = std::min(opts.delta1, tol_target / 18.0);
    MoranSchedule s = schedule_common(eta, K, T, o);
    s.growth = 0.0; // driven by the ledger, reported via dominance_ratios

    const double phinorm = phi.sup_norm();
    const double safety = 0.95; // headroom between the ledger and the target
    std::vector<double> width(static_cast<size_t>(K)), var_k(static_cast<size_t>(K));
    for (int k = 1; k <= K; ++k) {
        double w = (k > 1) ? s.level_radius(k) : 0.0;
        for (int i = k + 1; i <= K; ++i) w += s.level_radius(i);
        width[size_t(k - 1)] = w;
        var_k[size_t(k - 1)] = phi.var_bound(w);
    }

    long Tprev = 0;
    double hist_num = 0.0; // sum over earlier blocks of n_j (4 delta_j + var_j)
    long gap_cells = 0;    // total gap steps so far
    for (int k = 1; k <= K; ++k) {
        long Nk = s.block_count[size_t(k - 1)];
        long mk = s.gap[size_t(k - 1)];
        double dk = s.delta[size_t(k - 1)];
        double margin = safety * tol_target - 4.0 * dk - var_k[size_t(k - 1)];
        if (margin <= 0)
            throw ScheduleInfeasible("tolerance target leaves no room at level " +
                                     std::to_string(k));
        // numerator: history blocks against this level's target + all gaps
        double num = hist_num;
        long gaps_here = gap_cells + (k > 1 ? mk : 0) + (Nk - 1) * mk;
        num += double(gaps_here) * (phinorm + std::fabs(target_of(k, alpha0, alpha1)));
        long floor_k = length_floor(mk, s.strict_lengths);
        long n_need = 0;
        if (num > 0) {
            // T_k = Tprev + gaps_at_level + Nk n_k; require num_k / T_k <= margin
            double Tk_min = num / margin;
            long fixed = Tprev + (k > 1 ? mk : 0) + (Nk - 1) * mk;
            n_need = static_cast<long>(std::ceil((Tk_min - double(fixed)) / double(Nk)));
        }
        long nk = std::max(floor_k, n_need);
        s.block_len.push_back(nk);

        long Tk = Tprev + (k > 1 ? mk : 0) + Nk * nk + (Nk - 1) * mk;
        // account this level's blocks for the levels after it
        double opp = std::fabs(alpha1 - alpha0); // consecutive levels alternate
        hist_num = 0.0;
        for (int j = 1; j <= k; ++j) {
            double dj = s.delta[size_t(j - 1)];
            double contr = 4.0 * dj + var_k[size_t(j - 1)];
            // parity relative to the NEXT level (k+1): opposite iff same parity as k
            if (rho(j) == rho(k)) contr += opp;
            hist_num += double(s.block_count[size_t(j - 1)] * s.block_len[size_t(j - 1)]) * contr;
        }
        gap_cells = gaps_here;
        Tprev = Tk;
    }
    finalize_times(s, T, opts.mantissa_cap);
    return s;
}

TorusPoint find_block_anchor(const SkewSystem& sys, long t, double alpha, double delta, long n,
                             const Observable& phi, long grid, const NumericsContext& ctx) {
    if (std::fabs(alpha) > phi.sup_norm() + 1e-12)
        throw ConfigInvalid("target alpha " + std::to_string(alpha) + " exceeds sup|phi| " +
                            std::to_string(phi.sup_norm()));
    if (n < 1 || grid < 2) throw ConfigInvalid("anchor search needs n >= 1, grid >= 2");
    const double window = 4.0 * delta;

    struct Cand {
        double err;
        long i, j;
    };
    std::vector<Cand> cands;
    NumericsContext dctx = NumericsContext::double_mode();

#pragma omp parallel
    {
        std::vector<Cand> local;
#pragma omp for schedule(dynamic, 4)
        for (long i = 0; i < grid; ++i) {
            for (long j = 0; j < grid; ++j) {
                TorusPoint p{double(i) / double(grid), double(j) / double(grid)};
                double sum = 0.0;
                TorusPoint q = p;
                for (long s = 0; s < n; ++s) {
                    double omega = phi.depends_on_omega() ? sys.driver->omega_coord(t + s) : 0.0;
                    sum += phi.eval(omega, q);
                    if (s + 1 < n) {
                        if (sys.affine())
                            q = apply_fiber(sys.affine_family(),
                                            sys.affine_family().offset == OffsetKind::Zero
                                                ? 0.0
                                                : sys.driver->omega_coord(t + s),
                                            q);
                        else
                            q = apply_fiber(sys.cocycle_family(), sys.driver->symbol(t + s), q);
                    }
                }
                double err = std::fabs(sum / double(n) - alpha);
                if (err < window) local.push_back({err, i, j});
            }
        }
#pragma omp critical
        cands.insert(cands.end(), local.begin(), local.end());
    }
    if (cands.empty())
        throw EmptyDeviationSet("no grid point with |A_n - alpha| < 4 delta = " +
                                std::to_string(window));
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        return std::tie(a.err, a.i, a.j) < std::tie(b.err, b.i, b.j);
    });

    if (!ctx.is_big()) {
        return TorusPoint{double(cands[0].i) / double(grid), double(cands[0].j) / double(grid)};
    }
    // Deep double orbits are pseudo-orbits: their averages are statistics, not
    // certificates. Re-measure the front-runners exactly before accepting.
    size_t tries = std::min<size_t>(cands.size(), 16);
    for (size_t c = 0; c < tries; ++c) {
        TorusPoint p{double(cands[c].i) / double(grid), double(cands[c].j) / double(grid)};
        auto tr = birkhoff_trace_big(sys, t, BigTorusPoint(p, ctx.mantissa_bits), phi, {n}, ctx);
        if (std::fabs(tr.averages[0] - alpha) < window) return p;
    }
    throw EmptyDeviationSet("no candidate survived full-precision re-measurement at 4 delta = " +
                            std::to_string(window));
}

std::string IrregularCertificate::to_json() const {
    nlohmann::json j;
    j["certified"] = certified;
    if (!failure.empty()) j["failure"] = failure;
    j["point"] = {point.x1, point.x2};
    j["x1"] = x1_decimal;
    j["x2"] = x2_decimal;
    j["alpha0"] = alpha0;
    j["alpha1"] = alpha1;
    j["times"] = times;
    j["averages"] = averages;
    j["targets"] = targets;
    j["deviations"] = deviations;
    nlohmann::json led = nlohmann::json::array();
    for (const auto& l : ledger)
        led.push_back({{"tol", l.tol},
                       {"history", l.history},
                       {"gaps", l.gaps},
                       {"block", l.block},
                       {"width", l.width}});
    j["ledger"] = led;
    j["nesting"] = nesting;
    j["anchor_avg_err"] = anchor_avg_err;
    j["block_dev"] = block_dev;
    j["schedule"] = nlohmann::json::parse(schedule.to_json());
    j["mantissa_bits"] = mantissa_bits;
    return j.dump(2);
}

IrregularCertificate construct_irregular(const SkewSystem& sys, const Observable& phi,
                                         double alpha0, double alpha1,
                                         const MoranSchedule& schedule,
                                         const NumericsContext& ctx, long anchor_grid) {
    if (!sys.affine()) throw InvalidSpecification("the construction glues affine fibers");
    if (!ctx.is_big()) throw PrecisionExhausted("construct_irregular runs in BIGFLOAT mode");
    const int K = schedule.levels;
    ctx.require_depth(schedule.total_depth(), sys.expansion());
    const long prec = ctx.mantissa_bits;
    const HyperbolicMatrix& H = sys.affine_family().matrix;

    IrregularCertificate cert;
    cert.alpha0 = alpha0;
    cert.alpha1 = alpha1;
    cert.schedule = schedule;
    cert.mantissa_bits = prec;

    // Level blocks (N_k = 1 per level is the default desk-scale shape; with
    // N_k > 1 each level contributes several anchored blocks).
    struct Block {
        long start, len;
        int level;
        TorusPoint anchor;
    };
    std::vector<Block> blocks;
    for (int k = 1; k <= K; ++k) {
        long Nk = schedule.block_count[size_t(k - 1)];
        long t = schedule.level_start[size_t(k - 1)];
        for (long b = 0; b < Nk; ++b) {
            blocks.push_back({t, schedule.block_len[size_t(k - 1)], k, {}});
            t += schedule.block_len[size_t(k - 1)] + schedule.gap[size_t(k - 1)];
        }
    }

    // Anchor every block in its deviation set.
    for (auto& blk : blocks) {
        double a = target_of(blk.level, alpha0, alpha1);
        blk.anchor = find_block_anchor(sys, blk.start, a, schedule.delta[size_t(blk.level - 1)],
                                       blk.len, phi, anchor_grid, ctx);
    }

    // Fold level by level: z_1 realizes the level-1 block exactly; z_{k+1}
    // re-glues the history [0, T_k) to the level-(k+1) blocks at radius
    // eta/2^{4+k+1}.
    std::vector<BigTorusPoint> reps; // representative of each level, at time 0
    {
        BigTorusPoint z1(blocks[0].anchor, prec);
        if (blocks[0].start != 0) throw InvalidSpecification("level 1 must start at t = 0");
        // With N_1 > 1 the level-1 blocks themselves need gluing.
        size_t nb1 = 0;
        while (nb1 < blocks.size() && blocks[nb1].level == 1) ++nb1;
        BigOrbit z(sys, 0, z1, ctx);
        for (size_t b = 1; b < nb1; ++b) {
            z.advance(blocks[b - 1].start + blocks[b - 1].len - 1 - z.time());
            GlueResult g = glue_pair(sys, z.time(), z.point(), blocks[b].start, blocks[b].anchor,
                                     schedule.level_radius(1), ctx);
            z.reset(z.time(), g.w);
        }
        z.advance(blocks[nb1 - 1].start + blocks[nb1 - 1].len - 1 - z.time());
        while (z.time() > 0) z.step_backward();
        reps.push_back(z.point());
    }

    size_t blk_idx = 0;
    while (blk_idx < blocks.size() && blocks[blk_idx].level == 1) ++blk_idx;
    for (int k = 2; k <= K; ++k) {
        double radius = schedule.level_radius(k);
        BigOrbit z(sys, 0, reps.back(), ctx);
        z.advance(schedule.level_end[size_t(k - 2)] - 1); // end of history
        while (blk_idx < blocks.size() && blocks[blk_idx].level == k) {
            const Block& blk = blocks[blk_idx];
            GlueResult g = glue_pair(sys, z.time(), z.point(), blk.start, blk.anchor, radius, ctx);
            z.reset(z.time(), g.w);
            z.advance(blk.start + blk.len - 1 - z.time());
            ++blk_idx;
        }
        while (z.time() > 0) z.step_backward();
        reps.push_back(z.point());
    }

    // Nesting of consecutive representatives in the Bowen metric.
    for (int k = 1; k < K; ++k) {
        long Tk = schedule.level_end[size_t(k - 1)];
        double d = 0.0;
        BigOrbit oa(sys, 0, reps[size_t(k - 1)], ctx), ob(sys, 0, reps[size_t(k)], ctx);
        for (long t = 0;; ++t) {
            d = std::max(d, torus_distance(oa.point(), ob.point()));
            if (t + 1 >= Tk) break;
            oa.step_forward();
            ob.step_forward();
        }
        cert.nesting.push_back(d);
    }

    // Final pass: trace of x* with per-block shadowing deviations and exact
    // anchor averages measured along the way.
    const BigTorusPoint& xstar = reps.back();
    cert.point = xstar.to_double();
    cert.x1_decimal = xstar.x1.to_decimal();
    cert.x2_decimal = xstar.x2.to_decimal();

    cert.block_dev.assign(blocks.size(), 0.0);
    cert.anchor_avg_err.assign(blocks.size(), 0.0);
    {
        BigOrbit z(sys, 0, xstar, ctx);
        double sum = 0.0;
        size_t bi = 0;
        int level_at = 0;
        std::vector<double> level_avg(static_cast<size_t>(K), 0.0);
        std::unique_ptr<BigOrbit> anchor_orbit;
        double anchor_sum = 0.0;
        for (long t = 0; t < schedule.total_depth(); ++t) {
            if (bi < blocks.size() && t == blocks[bi].start) {
                anchor_orbit = std::make_unique<BigOrbit>(
                    sys, t, BigTorusPoint(blocks[bi].anchor, prec), ctx);
                anchor_sum = 0.0;
            }
            double omega = phi.depends_on_omega() ? sys.driver->omega_coord(t) : 0.0;
            sum += phi.eval(omega, z.point_double());
            if (bi < blocks.size() && anchor_orbit && t >= blocks[bi].start) {
                cert.block_dev[bi] =
                    std::max(cert.block_dev[bi], torus_distance(z.point(), anchor_orbit->point()));
                anchor_sum += phi.eval(omega, anchor_orbit->point_double());
                if (t + 1 == blocks[bi].start + blocks[bi].len) {
                    double a = target_of(blocks[bi].level, alpha0, alpha1);
                    cert.anchor_avg_err[bi] =
                        std::fabs(anchor_sum / double(blocks[bi].len) - a);
                    anchor_orbit.reset();
                    ++bi;
                } else {
                    anchor_orbit->step_forward();
                }
            }
            for (int k = 1; k <= K; ++k)
                if (t + 1 == schedule.level_end[size_t(k - 1)])
                    level_avg[size_t(k - 1)] = sum / double(t + 1);
            if (t + 1 < schedule.total_depth()) z.step_forward();
        }
        for (int k = 1; k <= K; ++k) {
            cert.times.push_back(schedule.level_end[size_t(k - 1)]);
            cert.averages.push_back(level_avg[size_t(k - 1)]);
            double a = target_of(k, alpha0, alpha1);
            cert.targets.push_back(a);
            cert.deviations.push_back(std::fabs(level_avg[size_t(k - 1)] - a));
        }
    }

    // Tolerance ledger, mirroring the triangle-inequality bookkeeping of the
    // oscillation estimate with every constant explicit.
    const double phinorm = phi.sup_norm();
    for (int k = 1; k <= K; ++k) {
        LevelLedger led;
        double w = (k > 1) ? schedule.level_radius(k) : 0.0;
        for (int i = k + 1; i <= K; ++i) w += schedule.level_radius(i);
        led.width = w;
        led.block = 4.0 * schedule.delta[size_t(k - 1)] + phi.var_bound(w);
        long Tk = schedule.level_end[size_t(k - 1)];
        double ak = target_of(k, alpha0, alpha1);
        double hist = 0.0, gaps = 0.0;
        for (const auto& blk : blocks) {
            if (blk.level >= k) continue;
            double wj = (blk.level > 1) ? schedule.level_radius(blk.level) : 0.0;
            for (int i = blk.level + 1; i <= K; ++i) wj += schedule.level_radius(i);
            double contr = 4.0 * schedule.delta[size_t(blk.level - 1)] + phi.var_bound(wj);
            if (rho(blk.level) != rho(k)) contr += std::fabs(alpha1 - alpha0);
            hist += double(blk.len) * contr;
        }
        for (int j = 2; j <= k; ++j)
            gaps += double(schedule.block_count[size_t(j - 1)] * schedule.gap[size_t(j - 1)]);
        for (int j = 1; j <= k; ++j)
            gaps += double((schedule.block_count[size_t(j - 1)] - 1) * schedule.gap[size_t(j - 1)]);
        led.history = hist / double(Tk);
        led.gaps = gaps * (phinorm + std::fabs(ak)) / double(Tk);
        led.tol = led.history + led.gaps + led.block;
        cert.ledger.push_back(led);
    }

    cert.certified = true;
    for (int k = 0; k < K; ++k) {
        if (cert.deviations[size_t(k)] > cert.ledger[size_t(k)].tol) {
            cert.certified = false;
            cert.failure += "level " + std::to_string(k + 1) + " deviation " +
                            std::to_string(cert.deviations[size_t(k)]) + " > tol " +
                            std::to_string(cert.ledger[size_t(k)].tol) + "; ";
        }
    }
    return cert;
}

IrregularCertificate construct_irregular_checked(const SkewSystem& sys, const Observable& phi,
                                                 double alpha0, double alpha1,
                                                 const MoranSchedule& schedule,
                                                 const NumericsContext& ctx, long anchor_grid) {
    IrregularCertificate cert =
        construct_irregular(sys, phi, alpha0, alpha1, schedule, ctx, anchor_grid);
    if (!cert.certified) throw OscillationNotCertified(cert.failure);
    return cert;
}

DenseVariantResult construct_dense_variant(const SkewSystem& sys, long t0, const TorusPoint& x,
                                           const TorusPoint& target, double eps, int K,
                                           const Observable& phi, const NumericsContext* ctx) {
    auto v = construct_dense_variants(sys, t0, x, {target}, eps, K, phi, ctx);
    return v[0];
}

std::vector<DenseVariantResult> construct_dense_variants(const SkewSystem& sys, long t0,
                                                         const TorusPoint& x,
                                                         const std::vector<TorusPoint>& targets,
                                                         double eps, int K, const Observable& phi,
                                                         const NumericsContext* ctx_in) {
    if (!sys.affine()) throw InvalidSpecification("the construction glues affine fibers");
    if (!(eps > 0 && eps < 0.25)) throw ConfigInvalid("dense variant needs 0 < eps < 1/4");
    if (K < 2) throw ConfigInvalid("need K >= 2 levels");
    const HyperbolicMatrix& H = sys.affine_family().matrix;

    std::vector<long> s(static_cast<size_t>(K + 1));
    for (int k = 1; k <= K + 1; ++k)
        s[size_t(k - 1)] = gap_function(eps / std::pow(2.0, k), H);
    std::vector<long> nblk(static_cast<size_t>(K)), l(static_cast<size_t>(K));
    long acc = 0;
    for (int k = 1; k <= K; ++k) {
        long sm = std::max(s[size_t(k - 1)], s[size_t(k)]);
        if (sm > 40) throw ScheduleInfeasible("2^" + std::to_string(sm) + " block length overflows");
        nblk[size_t(k - 1)] = 1L << sm;
        acc += s[size_t(k - 1)] + nblk[size_t(k - 1)];
        l[size_t(k - 1)] = acc;
    }
    long lK = l.back();

    NumericsContext ctx = ctx_in ? *ctx_in
                                 : NumericsContext::for_depth(lK, H.expansion());
    if (!ctx.is_big()) throw PrecisionExhausted("dense variant runs in BIGFLOAT mode");
    ctx.require_depth(lK, sys.expansion());
    const long prec = ctx.mantissa_bits;

    // Reference orbit of x: capture the block anchors F^{l_{k-1}+s_k}(x) and
    // the Birkhoff sum at l_K once, shared across targets.
    std::vector<BigTorusPoint> x_anchor;
    double x_sum = 0.0;
    {
        BigOrbit ox(sys, t0, BigTorusPoint(x, prec), ctx);
        std::vector<long> starts(static_cast<size_t>(K));
        for (int k = 1; k <= K; ++k)
            starts[size_t(k - 1)] = (k == 1 ? 0 : l[size_t(k - 2)]) + s[size_t(k - 1)];
        size_t next = 0;
        for (long t = 0; t < lK; ++t) {
            if (next < starts.size() && t == starts[next]) {
                BigTorusPoint cap(prec);
                cap.x1.set(ox.point().x1);
                cap.x2.set(ox.point().x2);
                x_anchor.push_back(std::move(cap));
                ++next;
            }
            double omega = phi.depends_on_omega() ? sys.driver->omega_coord(t0 + t) : 0.0;
            x_sum += phi.eval(omega, ox.point_double());
            if (t + 1 < lK) ox.step_forward();
        }
    }

    // Ledger terms from the two-piece shadow estimates.
    const double phinorm = phi.sup_norm();
    double Lk = 2.0 * double(s[0]) * phinorm + double(nblk[0]) * phi.var_bound(eps / 2.0);
    for (int k = 2; k <= K; ++k) {
        double vr = phi.var_bound(eps / std::pow(2.0, k));
        Lk += double(l[size_t(k - 2)]) * vr + 2.0 * double(s[size_t(k - 1)]) * phinorm +
              double(nblk[size_t(k - 1)]) * vr;
    }
    double ledger = phi.var_bound(eps / std::pow(2.0, K)) + Lk / double(lK) +
                    2.0 * double(s[size_t(K)]) * phinorm / double(nblk[size_t(K - 1)]);

    std::vector<DenseVariantResult> out;
    for (const TorusPoint& target : targets) {
        BigTorusPoint y(target.reduced(), prec); // y^0 = x_j, interval [0,0]
        long hist_end = 0;                       // inclusive end of the shadowed history
        for (int k = 1; k <= K; ++k) {
            double radius = eps / std::pow(2.0, k);
            long a = (k == 1 ? 0 : l[size_t(k - 2)]) + s[size_t(k - 1)];
            BigOrbit z(sys, t0, y, ctx);
            z.advance(hist_end);
            GlueResult g = glue_pair_big(sys, t0 + hist_end, z.point(), t0 + a,
                                         x_anchor[size_t(k - 1)], radius, ctx);
            z.reset(t0 + hist_end, g.w);
            z.advance(l[size_t(k - 1)] - 1 - hist_end);
            while (z.time() > t0) z.step_backward();
            y = z.point();
            hist_end = l[size_t(k - 1)] - 1;
        }

        DenseVariantResult r;
        r.gaps = s;
        r.blocks = nblk;
        r.l = l;
        r.ledger_bound = ledger;
        r.z = y.to_double();
        r.z1_decimal = y.x1.to_decimal();
        r.z2_decimal = y.x2.to_decimal();
        r.target_distance = torus_distance(y.to_double(), target.reduced());

        double z_sum = 0.0;
        {
            BigOrbit oz(sys, t0, y, ctx);
            for (long t = 0; t < lK; ++t) {
                double omega = phi.depends_on_omega() ? sys.driver->omega_coord(t0 + t) : 0.0;
                z_sum += phi.eval(omega, oz.point_double());
                if (t + 1 < lK) oz.step_forward();
            }
        }
        r.average_difference = std::fabs(z_sum - x_sum) / double(lK);
        r.certified = r.average_difference <= r.ledger_bound && r.target_distance < eps;
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace skewlab
