#pragma once

#include <cstdint>
#include <vector>

#include "skewlab/grid_kernel.hpp"
#include "skewlab/orbit.hpp"

namespace skewlab {

/// An (omega, eps, n)-separated set of grid points: pairwise Bowen distance
/// exceeds epsilon, certified exactly in grid-cell arithmetic during the
/// greedy construction (every acceptance is checked against all earlier
/// points through the difference stencil).
struct SeparatedSet {
    long omega_t0 = 0;
    int n = 1;
    double epsilon = 0.0;
    long grid_cells = 0;
    std::vector<std::array<int32_t, 2>> cells;

    size_t cardinality() const { return cells.size(); }
    std::vector<TorusPoint> points() const;
};

/// Minimal grid fineness for an honest lower bound at depth n:
/// 1/G <= eps * lambda_u^{-(n-1)} / 2.
long auto_grid_cells(double eps, int n, double lambda_u);
void check_grid(long G, double eps, int n, double lambda_u);

/// Greedy maximal separated subset of the G x G grid (deterministic
/// row-major scan); its cardinality is a lower bound for Z(omega, eps, n).
SeparatedSet max_separated(const SkewSystem& sys, long t0, int n, double eps, long G,
                           const NumericsContext& ctx);

/// Exhaustive pairwise certificate via the double-precision Bowen metric.
bool verify_separated(const SkewSystem& sys, const SeparatedSet& set, const NumericsContext& ctx);

struct DeviationQuery {
    double alpha = 0.0;
    double delta = 0.0;
    int n = 1;
    double epsilon = 0.0;
    long omega_t0 = 0;
};

/// Greedy maximal separated subset of the grid points whose n-step Birkhoff
/// average lies within delta of alpha. Empty output is legal.
SeparatedSet deviation_count(const SkewSystem& sys, const DeviationQuery& q,
                             const Observable& phi, long G, const NumericsContext& ctx);

/// Least-squares growth-rate fit of log-counts against n.
struct RateFit {
    std::vector<long> ns;
    std::vector<double> log_counts;
    double slope = 0.0;
    double stderr_slope = 0.0;
    double intercept = 0.0;
};

RateFit entropy_rate(const std::vector<long>& ns, const std::vector<double>& log_counts);

/// (1/n) ln ||B_{omega_{n-1}} ... B_{omega_0}|| under the max-row-sum norm,
/// renormalizing every 32 multiplications to dodge overflow.
double lyapunov_exponent(const CocycleFamily& fam, const std::vector<uint8_t>& word, long n);
double lyapunov_exponent(const SkewSystem& sys, long t0, long n);

} // namespace skewlab
