#pragma once

#include <cstdint>
#include <vector>

#include "skewlab/orbit.hpp"

namespace skewlab {

/// Exact integer-arithmetic machinery for separated-set searches on the
/// uniform G x G grid. For both fiber families the maps are linear mod 1, so
/// grid orbits stay on the grid and Bowen separation of two grid points is a
/// function of their difference cell alone. The greedy packing then reduces
/// to a blocked-cell bitmap plus a precomputed difference stencil, with no
/// floating point in the combinatorics at all.
class GridKernel {
public:
    /// steps[i] is the matrix applied at time t0+i (n-1 entries for depth n).
    GridKernel(long grid_cells, int depth, long eps_cells, std::vector<Mat2i> steps);

    long grid_cells() const { return G_; }
    int depth() const { return n_; }
    long eps_cells() const { return eps_cells_; }

    /// Exact Bowen separation test for a difference cell (integer arithmetic).
    bool difference_blocked(long d1, long d2) const;

    /// Blocked-offset stencil as row runs (d1, d2_start, length), built once
    /// per kernel by a full scan with early exit.
    struct Run {
        int32_t d1;
        int32_t d2_start;
        int32_t len;
    };
    const std::vector<Run>& stencil();

    /// Row-major greedy packing. `eligible` (optional, G*G bits) restricts the
    /// candidate set; the result lists accepted cells in scan order.
    std::vector<std::array<int32_t, 2>> greedy_pack(const std::vector<uint64_t>* eligible);

    size_t stencil_cells() const { return stencil_cell_count_; }

private:
    long G_;
    int n_;
    long eps_cells_;
    std::vector<Mat2i> steps_;
    std::vector<Run> stencil_;
    bool stencil_built_ = false;
    size_t stencil_cell_count_ = 0;
    void build_stencil();
};

/// Per-time lookup tables turning grid indices into observable values, with
/// any affine drift (from h along the driving orbit) folded into the tables.
/// Grid orbit of (i1,i2) at time t is base_t + i1*u_t + i2*w_t mod G, all
/// integers, so the Birkhoff filter runs in integer index arithmetic.
struct GridObservableTables {
    long G = 0;
    int depth = 0;
    // value_t(cell) = tabs[t][ coord_t(cell) ] summed over channels
    struct Channel {
        int coordinate;                        // 0 -> x1 index, 1 -> x2 index
        std::vector<std::vector<double>> tabs; // per time t, size G
    };
    std::vector<Channel> channels;
};

GridObservableTables build_observable_tables(const SkewSystem& sys, long t0, int depth, long G,
                                             const Observable& phi);

/// Birkhoff filter: marks cells whose n-step average lies OUTSIDE
/// (alpha - delta, alpha + delta) as blocked in the returned bitmap
/// (so the bitmap doubles as the greedy's initial blocked state).
std::vector<uint64_t> birkhoff_filter_bitmap(const SkewSystem& sys, long t0, int depth, long G,
                                             const GridObservableTables& tables, double alpha,
                                             double delta, size_t* kept);

} // namespace skewlab
