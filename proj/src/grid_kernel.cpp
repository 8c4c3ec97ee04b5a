#include "skewlab/grid_kernel.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace skewlab {

namespace {

inline long wrap(long v, long G) {
    v %= G;
    return v < 0 ? v + G : v;
}

inline long circ(long v, long G) {
    // v in [0,G): distance to 0 on the G-cycle
    return std::min(v, G - v);
}

} // namespace

GridKernel::GridKernel(long grid_cells, int depth, long eps_cells, std::vector<Mat2i> steps)
    : G_(grid_cells), n_(depth), eps_cells_(eps_cells), steps_(std::move(steps)) {
    if (G_ < 2) throw GridTooCoarse("grid must have at least 2 cells per axis");
    if (n_ < 1) throw ConfigInvalid("depth must be >= 1");
    if (static_cast<int>(steps_.size()) + 1 < n_)
        throw ConfigInvalid("need depth-1 step matrices");
}

bool GridKernel::difference_blocked(long d1, long d2) const {
    long m1 = wrap(d1, G_), m2 = wrap(d2, G_);
    if (std::max(circ(m1, G_), circ(m2, G_)) > eps_cells_) return false;
    for (int t = 0; t + 1 < n_; ++t) {
        const Mat2i& M = steps_[size_t(t)];
        long n1 = wrap(M.a * m1 + M.b * m2, G_);
        long n2 = wrap(M.c * m1 + M.d * m2, G_);
        if (std::max(circ(n1, G_), circ(n2, G_)) > eps_cells_) return false;
        m1 = n1;
        m2 = n2;
    }
    return true;
}

void GridKernel::build_stencil() {
    if (stencil_built_) return;
    // Only rows within eps of 0 on the cycle can contain blocked cells (the
    // time-0 test already fails elsewhere), and within such a row only the
    // eps-window of columns. This prunes the scan to ~(2 eps)^2 of the grid.
    std::vector<long> rows;
    for (long d1 = 0; d1 < G_; ++d1)
        if (circ(d1, G_) <= eps_cells_) rows.push_back(d1);

    std::vector<std::vector<Run>> per_row(rows.size());
    size_t cells = 0;

#pragma omp parallel for schedule(dynamic, 16) reduction(+ : cells)
    for (size_t ri = 0; ri < rows.size(); ++ri) {
        long d1 = rows[ri];
        auto& out = per_row[ri];
        bool in_run = false;
        long run_start = 0;
        auto flush = [&](long end) {
            if (in_run) {
                out.push_back({int32_t(d1), int32_t(run_start), int32_t(end - run_start)});
                cells += size_t(end - run_start);
                in_run = false;
            }
        };
        // Column window around 0 (wrapping): [-eps, eps] on the cycle,
        // clamped to one revolution when eps exceeds half the grid.
        long lo = -eps_cells_, hi = eps_cells_;
        if (hi - lo + 1 > G_) {
            lo = 0;
            hi = G_ - 1;
        }
        for (long off = lo; off <= hi; ++off) {
            long d2 = wrap(off, G_);
            if (difference_blocked(d1, d2)) {
                if (!in_run) {
                    in_run = true;
                    run_start = off;
                }
            } else {
                flush(off);
            }
        }
        flush(hi + 1);
    }

    stencil_.clear();
    for (auto& v : per_row) stencil_.insert(stencil_.end(), v.begin(), v.end());
    stencil_cell_count_ = cells;
    stencil_built_ = true;
}

const std::vector<GridKernel::Run>& GridKernel::stencil() {
    build_stencil();
    return stencil_;
}

std::vector<std::array<int32_t, 2>> GridKernel::greedy_pack(const std::vector<uint64_t>* eligible) {
    build_stencil();
    const size_t nbits = size_t(G_) * size_t(G_);
    const size_t nwords = (nbits + 63) / 64;
    std::vector<uint64_t> blocked;
    if (eligible) {
        if (eligible->size() != nwords) throw ConfigInvalid("eligibility bitmap size mismatch");
        blocked = *eligible; // bit set = ineligible
    } else {
        blocked.assign(nwords, 0);
    }
    // Mask out the padding tail so the word scan never reads ghost cells.
    if (nbits % 64) blocked[nwords - 1] |= ~((uint64_t(1) << (nbits % 64)) - 1);

    std::vector<std::array<int32_t, 2>> selected;

    auto stamp = [&](long i1, long i2) {
        for (const Run& run : stencil_) {
            long r = i1 + run.d1;
            if (r >= G_) r -= G_;
            long c = run.d2_start + i2;
            c %= G_;
            if (c < 0) c += G_;
            long len = run.len;
            size_t base = size_t(r) * size_t(G_);
            while (len > 0) {
                long span = std::min(len, G_ - c);
                size_t from = base + size_t(c);
                size_t to = from + size_t(span); // exclusive
                size_t w0 = from / 64, w1 = (to - 1) / 64;
                if (w0 == w1) {
                    uint64_t mask = ((to - from) == 64)
                                        ? ~uint64_t(0)
                                        : (((uint64_t(1) << (to - from)) - 1) << (from % 64));
                    blocked[w0] |= mask;
                } else {
                    blocked[w0] |= ~uint64_t(0) << (from % 64);
                    for (size_t w = w0 + 1; w < w1; ++w) blocked[w] = ~uint64_t(0);
                    uint64_t tail = to % 64;
                    blocked[w1] |= tail ? ((uint64_t(1) << tail) - 1) : ~uint64_t(0);
                }
                c = 0;
                len -= span;
            }
        }
    };

    for (size_t w = 0; w < nwords; ++w) {
        uint64_t free = ~blocked[w];
        while (free) {
            int bit = __builtin_ctzll(free);
            size_t idx = w * 64 + size_t(bit);
            long i1 = long(idx / size_t(G_));
            long i2 = long(idx % size_t(G_));
            selected.push_back({int32_t(i1), int32_t(i2)});
            stamp(i1, i2);
            free = ~blocked[w];
            // Clear bits at or below the accepted one; stamping marked it.
            if (bit == 63) break;
            free &= ~((uint64_t(2) << bit) - 1);
        }
    }
    return selected;
}

GridObservableTables build_observable_tables(const SkewSystem& sys, long t0, int depth, long G,
                                             const Observable& phi) {
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    GridObservableTables T;
    T.G = G;
    T.depth = depth;
    // Drift of the grid origin: c_t = F^t(0,0) as a real orbit; grid orbits
    // are integer-linear images plus this common drift.
    std::vector<TorusPoint> drift(static_cast<size_t>(depth));
    std::vector<double> omega(static_cast<size_t>(depth), 0.0);
    TorusPoint z{0.0, 0.0};
    NumericsContext dctx = NumericsContext::double_mode();
    for (int t = 0; t < depth; ++t) {
        drift[size_t(t)] = z;
        if (phi.depends_on_omega()) omega[size_t(t)] = sys.driver->omega_coord(t0 + t);
        z = iterate(sys, t0 + t, z, 1, dctx);
    }

    for (const auto& term : phi.terms) {
        GridObservableTables::Channel ch;
        ch.coordinate = term.basis == Observable::Basis::CosX1 ? 0 : 1;
        ch.tabs.resize(size_t(depth));
        for (int t = 0; t < depth; ++t) {
            auto& tab = ch.tabs[size_t(t)];
            tab.resize(size_t(G));
            double shift = ch.coordinate == 0 ? drift[size_t(t)].x1 : drift[size_t(t)].x2;
            double scale = term.coef;
            if (term.basis == Observable::Basis::CosOmegaSinX2)
                scale *= std::cos(kTwoPi * omega[size_t(t)]);
            for (long m = 0; m < G; ++m) {
                double x = double(m) / double(G) + shift;
                tab[size_t(m)] = term.basis == Observable::Basis::CosX1
                                     ? scale * std::cos(kTwoPi * x)
                                     : scale * std::sin(kTwoPi * x);
            }
        }
        T.channels.push_back(std::move(ch));
    }
    return T;
}

std::vector<uint64_t> birkhoff_filter_bitmap(const SkewSystem& sys, long t0, int depth, long G,
                                             const GridObservableTables& tables, double alpha,
                                             double delta, size_t* kept) {
    const size_t nbits = size_t(G) * size_t(G);
    const size_t nwords = (nbits + 63) / 64;
    std::vector<uint64_t> blocked(nwords, 0);

    // Step matrices and the unit-vector images u_t = A_t e1, w_t = A_t e2
    // (mod G), where A_t is the t-step cocycle product.
    std::vector<long> u1(static_cast<size_t>(depth)), u2(static_cast<size_t>(depth)), w1(static_cast<size_t>(depth)), w2(static_cast<size_t>(depth));
    {
        Mat2i A{1, 0, 0, 1};
        for (int t = 0; t < depth; ++t) {
            u1[size_t(t)] = wrap(A.a, G);
            u2[size_t(t)] = wrap(A.c, G);
            w1[size_t(t)] = wrap(A.b, G);
            w2[size_t(t)] = wrap(A.d, G);
            const Mat2i step = sys.affine()
                                   ? sys.affine_family().matrix.m
                                   : sys.cocycle_family().at(sys.driver->symbol(t0 + t));
            A = step * A;
        }
    }

    const double lo = double(depth) * (alpha - delta);
    const double hi = double(depth) * (alpha + delta);
    size_t kept_count = 0;

#pragma omp parallel reduction(+ : kept_count)
    {
        std::vector<double> sums(static_cast<size_t>(G));
        // Rows are not word-aligned, so a row's first/last words can be
        // shared with a neighbouring thread's rows; merge those atomically.
        std::vector<uint64_t> row_bits(size_t(G) / 64 + 2);
#pragma omp for schedule(static)
        for (long i1 = 0; i1 < G; ++i1) {
            std::fill(sums.begin(), sums.end(), 0.0);
            for (const auto& ch : tables.channels) {
                for (int t = 0; t < depth; ++t) {
                    long start, inc;
                    if (ch.coordinate == 0) {
                        start = wrap(u1[size_t(t)] * i1, G);
                        inc = w1[size_t(t)];
                    } else {
                        start = wrap(u2[size_t(t)] * i1, G);
                        inc = w2[size_t(t)];
                    }
                    const double* tab = ch.tabs[size_t(t)].data();
                    long m = start;
                    for (long i2 = 0; i2 < G; ++i2) {
                        sums[size_t(i2)] += tab[m];
                        m += inc;
                        if (m >= G) m -= G;
                    }
                }
            }
            size_t base_bit = size_t(i1) * size_t(G);
            size_t w_first = base_bit / 64;
            size_t w_last = (base_bit + size_t(G) - 1) / 64;
            std::fill(row_bits.begin(), row_bits.begin() + long(w_last - w_first + 1), 0);
            for (long i2 = 0; i2 < G; ++i2) {
                bool pass = sums[size_t(i2)] > lo && sums[size_t(i2)] < hi;
                if (pass) {
                    ++kept_count;
                } else {
                    size_t bit = base_bit + size_t(i2);
                    row_bits[bit / 64 - w_first] |= uint64_t(1) << (bit % 64);
                }
            }
            for (size_t w = w_first; w <= w_last; ++w) {
                uint64_t m = row_bits[w - w_first];
                if (!m) continue;
                if (w == w_first || w == w_last)
                    __atomic_fetch_or(&blocked[w], m, __ATOMIC_RELAXED);
                else
                    blocked[w] |= m;
            }
        }
    }
    if (kept) *kept = kept_count;
    return blocked;
}

} // namespace skewlab
