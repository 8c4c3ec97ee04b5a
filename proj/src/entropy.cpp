#include "skewlab/entropy.hpp"

#include <algorithm>
#include <cmath>

namespace skewlab {

std::vector<TorusPoint> SeparatedSet::points() const {
    std::vector<TorusPoint> out;
    out.reserve(cells.size());
    for (const auto& c : cells)
        out.push_back({double(c[0]) / double(grid_cells), double(c[1]) / double(grid_cells)});
    return out;
}

long auto_grid_cells(double eps, int n, double lambda_u) {
    double need = 2.0 * std::pow(std::fabs(lambda_u), double(n - 1)) / eps;
    if (need > 2e5) throw GridTooCoarse("honest grid for depth " + std::to_string(n) +
                                        " needs " + std::to_string(long(need)) +
                                        " cells per axis; infeasible");
    return static_cast<long>(std::ceil(need));
}

void check_grid(long G, double eps, int n, double lambda_u) {
    if (G < 2) throw GridTooCoarse("grid must have at least 2 cells per axis");
    // 1/G <= eps*lambda^{-(n-1)}/2  <=>  G >= 2 lambda^{n-1}/eps
    double need = 2.0 * std::pow(std::fabs(lambda_u), double(n - 1)) / eps;
    if (double(G) < need)
        throw GridTooCoarse("grid " + std::to_string(G) + " < " + std::to_string(long(std::ceil(need))) +
                            " cells required at depth " + std::to_string(n));
}

namespace {

std::vector<Mat2i> step_matrices(const SkewSystem& sys, long t0, int n) {
    std::vector<Mat2i> steps;
    steps.reserve(size_t(std::max(0, n - 1)));
    for (int t = 0; t + 1 < n; ++t)
        steps.push_back(sys.affine() ? sys.affine_family().matrix.m
                                     : sys.cocycle_family().at(sys.driver->symbol(t0 + t)));
    return steps;
}

long eps_to_cells(double eps, long G) {
    // d = k/G <= eps  <=>  k <= floor(eps*G); nudge for exact representability
    return static_cast<long>(std::floor(eps * double(G) * (1.0 + 1e-15)));
}

} // namespace

SeparatedSet max_separated(const SkewSystem& sys, long t0, int n, double eps, long G,
                           const NumericsContext& ctx) {
    (void)ctx; // the grid combinatorics are exact integers in either mode
    if (n < 1) throw ConfigInvalid("depth n must be >= 1");
    if (eps <= 0) throw ConfigInvalid("eps must be positive");
    check_grid(G, eps, n, sys.expansion());
    GridKernel kernel(G, n, eps_to_cells(eps, G), step_matrices(sys, t0, n));
    SeparatedSet set;
    set.omega_t0 = t0;
    set.n = n;
    set.epsilon = eps;
    set.grid_cells = G;
    set.cells = kernel.greedy_pack(nullptr);
    return set;
}

bool verify_separated(const SkewSystem& sys, const SeparatedSet& set, const NumericsContext& ctx) {
    auto pts = set.points();
    for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = i + 1; j < pts.size(); ++j)
            if (bowen_distance(sys, set.omega_t0, set.n, pts[i], pts[j], ctx) <= set.epsilon)
                return false;
    return true;
}

SeparatedSet deviation_count(const SkewSystem& sys, const DeviationQuery& q,
                             const Observable& phi, long G, const NumericsContext& ctx) {
    (void)ctx;
    if (q.n < 1) throw ConfigInvalid("depth n must be >= 1");
    check_grid(G, q.epsilon, q.n, sys.expansion());
    GridKernel kernel(G, q.n, eps_to_cells(q.epsilon, G), step_matrices(sys, q.omega_t0, q.n));
    auto tables = build_observable_tables(sys, q.omega_t0, q.n, G, phi);
    size_t kept = 0;
    auto bitmap = birkhoff_filter_bitmap(sys, q.omega_t0, q.n, G, tables, q.alpha, q.delta, &kept);
    SeparatedSet set;
    set.omega_t0 = q.omega_t0;
    set.n = q.n;
    set.epsilon = q.epsilon;
    set.grid_cells = G;
    set.cells = kernel.greedy_pack(&bitmap);
    return set;
}

RateFit entropy_rate(const std::vector<long>& ns, const std::vector<double>& log_counts) {
    if (ns.size() != log_counts.size() || ns.size() < 3)
        throw ConfigInvalid("entropy_rate needs >= 3 (n, log_count) pairs");
    bool all_equal = true;
    for (double v : log_counts)
        if (std::fabs(v - log_counts[0]) > 1e-12) all_equal = false;
    if (all_equal) throw DegenerateFit("all counts equal; no growth rate");

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double N = double(ns.size());
    for (size_t i = 0; i < ns.size(); ++i) {
        sx += double(ns[i]);
        sy += log_counts[i];
        sxx += double(ns[i]) * double(ns[i]);
        sxy += double(ns[i]) * log_counts[i];
    }
    double denom = N * sxx - sx * sx;
    RateFit fit;
    fit.ns = ns;
    fit.log_counts = log_counts;
    fit.slope = (N * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / N;
    double ss = 0;
    for (size_t i = 0; i < ns.size(); ++i) {
        double r = log_counts[i] - (fit.intercept + fit.slope * double(ns[i]));
        ss += r * r;
    }
    double dof = std::max(1.0, N - 2.0);
    fit.stderr_slope = std::sqrt(ss / dof / (sxx - sx * sx / N));
    return fit;
}

double lyapunov_exponent(const CocycleFamily& fam, const std::vector<uint8_t>& word, long n) {
    if (n < 1) throw ConfigInvalid("n must be >= 1");
    if (static_cast<long>(word.size()) < n) throw InsufficientWord("word shorter than n");
    fam.validate();
    double a = 1, b = 0, c = 0, d = 1;
    double log_scale = 0.0;
    auto norm = [&]() { return std::max(std::fabs(a) + std::fabs(b), std::fabs(c) + std::fabs(d)); };
    for (long i = 0; i < n; ++i) {
        const Mat2i& B = fam.at(word[size_t(i)]);
        double na = double(B.a) * a + double(B.b) * c;
        double nb = double(B.a) * b + double(B.b) * d;
        double nc = double(B.c) * a + double(B.d) * c;
        double nd = double(B.c) * b + double(B.d) * d;
        a = na; b = nb; c = nc; d = nd;
        if ((i + 1) % 32 == 0) {
            double s = norm();
            a /= s; b /= s; c /= s; d /= s;
            log_scale += std::log(s);
        }
    }
    return (log_scale + std::log(norm())) / double(n);
}

double lyapunov_exponent(const SkewSystem& sys, long t0, long n) {
    const auto& fam = sys.cocycle_family();
    std::vector<uint8_t> word(static_cast<size_t>(n));
    for (long i = 0; i < n; ++i) word[size_t(i)] = uint8_t(sys.driver->symbol(t0 + i));
    return lyapunov_exponent(fam, word, n);
}

} // namespace skewlab
