#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "skewlab/driving.hpp"
#include "skewlab/numerics.hpp"

namespace skewlab {

/// Point of the 2-torus, canonical representative in [0,1)^2.
struct TorusPoint {
    double x1 = 0.0;
    double x2 = 0.0;

    TorusPoint reduced() const {
        auto r = [](double v) {
            v -= std::floor(v);
            if (v >= 1.0) v -= 1.0;
            if (v < 0.0) v = 0.0;
            return v;
        };
        return {r(x1), r(x2)};
    }
};

inline double circle_dist(double a, double b) {
    double d = std::fabs(a - b);
    return d <= 0.5 ? d : 1.0 - d;
}

/// d_M(p,q) = max over coordinates of the circle distance.
inline double torus_distance(const TorusPoint& p, const TorusPoint& q) {
    return std::max(circle_dist(p.x1, q.x1), circle_dist(p.x2, q.x2));
}

/// Lift of q - p with both components in (-1/2, 1/2].
inline std::array<double, 2> torus_lift(const TorusPoint& p, const TorusPoint& q) {
    auto lift1 = [](double d) {
        d -= std::round(d);
        return d;
    };
    return {lift1(q.x1 - p.x1), lift1(q.x2 - p.x2)};
}

struct Mat2i {
    long a = 1, b = 0, c = 0, d = 1;

    long det() const { return a * d - b * c; }
    long trace() const { return a + d; }
    Mat2i operator*(const Mat2i& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    /// Inverse, valid when |det| = 1 (stays integral).
    Mat2i inverse() const {
        long s = det();
        return {s * d, -s * b, -s * c, s * a};
    }
    Mat2i transpose() const { return {a, c, b, d}; }
    std::array<double, 2> apply(double x1, double x2) const {
        return {double(a) * x1 + double(b) * x2, double(c) * x1 + double(d) * x2};
    }
    bool operator==(const Mat2i&) const = default;

    static Mat2i cat() { return {2, 1, 1, 1}; }
};

/// Hyperbolic toral automorphism with its eigen-splitting.
/// lambda_u and lambda_s are the signed eigenvalues with |lambda_u| > 1 >
/// |lambda_s| and |lambda_u * lambda_s| = |det| = 1; e_u, e_s are unit
/// eigenvectors (euclidean norm, first nonzero component positive).
struct HyperbolicMatrix {
    Mat2i m;
    double lambda_u = 0.0;
    double lambda_s = 0.0;
    std::array<double, 2> e_u{};
    std::array<double, 2> e_s{};

    double expansion() const { return std::fabs(lambda_u); }
    /// lambda_0 of condition (C2) for the linear case.
    double expansion_log() const { return std::log(std::fabs(lambda_u)); }
};

/// Splits an integer matrix into hyperbolic eigendata.
/// Rejects |trace| <= 2 or |det| != 1 with NonHyperbolicMatrix.
HyperbolicMatrix eigen_split(const Mat2i& m);

/// Same splitting carried out at `prec` bits (used by the shadowing solver,
/// where double eigenvectors would be amplified into garbage by lambda^n).
struct EigenSplitBig {
    BigFloat lambda_u, lambda_s;
    BigFloat eu1, eu2, es1, es2; // unit eigenvectors
    EigenSplitBig(const Mat2i& m, long prec);
};

enum class OffsetKind { Zero, OmegaX, Tabulated };

/// Affine fiber family F_omega x = T x + h(omega).
/// Built-in offsets: h = 0 and h(omega) = (omega, 0); arbitrary h is admitted
/// as tabulated samples with linear interpolation and flagged approximate.
struct AffineFamily {
    HyperbolicMatrix matrix;
    OffsetKind offset = OffsetKind::Zero;
    std::vector<std::array<double, 2>> table; // h(i/N), i = 0..N-1, wraps

    bool approximate() const { return offset == OffsetKind::Tabulated; }
    std::array<double, 2> offset_at(double omega) const;
    std::string describe() const;
};

/// Random composition family F_omega = B_{omega_0} of area-preserving
/// positive integer matrices (all entries >= 1, |det| = 1).
struct CocycleFamily {
    std::vector<Mat2i> matrices;

    void validate() const;
    const Mat2i& at(int symbol) const;
    /// Upper bound on single-step expansion (max row sum over matrices).
    double expansion_bound() const;
    std::string describe() const;
};

using FiberFamily = std::variant<AffineFamily, CocycleFamily>;

/// One application of the fiber map. `omega` is the driving coordinate for
/// the affine family; `symbol` indexes the cocycle family.
TorusPoint apply_fiber(const AffineFamily& f, double omega, const TorusPoint& p);
TorusPoint apply_fiber(const CocycleFamily& f, int symbol, const TorusPoint& p);

/// Finite-time proxy for the hyperbolic splitting of the cocycle example:
/// the unstable direction at time t is the image of a generic vector under
/// the last `depth` matrices before t; the stable direction is the image of
/// a generic vector under the inverses of the next `depth` matrices after t,
/// composed from the far future backwards. Both are unit vectors.
struct SplittingPair {
    std::array<double, 2> unstable;
    std::array<double, 2> stable;
};
SplittingPair finite_time_splitting(const CocycleFamily& f, const std::vector<uint8_t>& word,
                                    long t, long depth);

} // namespace skewlab
