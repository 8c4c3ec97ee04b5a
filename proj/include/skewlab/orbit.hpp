#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "skewlab/driving.hpp"
#include "skewlab/fiber.hpp"
#include "skewlab/numerics.hpp"

namespace skewlab {

/// The skew product Theta(omega, x) = (theta omega, F_omega x), with the
/// base point omega0 fixed by the driver. Driving states are addressed as
/// integer times along the base orbit: omega_t = theta^t omega0.
struct SkewSystem {
    DriverPtr driver;
    FiberFamily family;

    bool affine() const { return std::holds_alternative<AffineFamily>(family); }
    const AffineFamily& affine_family() const { return std::get<AffineFamily>(family); }
    const CocycleFamily& cocycle_family() const { return std::get<CocycleFamily>(family); }
    /// Single-step expansion rate bound used by the certified-depth formula.
    double expansion() const {
        return affine() ? affine_family().matrix.expansion() : cocycle_family().expansion_bound();
    }
    std::string describe() const;
};

SkewSystem make_affine_system(DriverPtr driver, const Mat2i& matrix, OffsetKind offset,
                              std::vector<std::array<double, 2>> table = {});
SkewSystem make_cocycle_system(DriverPtr driver, std::vector<Mat2i> matrices);

/// Torus point in arbitrary precision; coordinates stay in [0,1).
struct BigTorusPoint {
    BigFloat x1, x2;
    BigTorusPoint() = default;
    explicit BigTorusPoint(long prec) : x1(prec), x2(prec) {}
    BigTorusPoint(const TorusPoint& p, long prec) : x1(p.x1, prec), x2(p.x2, prec) {}
    TorusPoint to_double() const { return TorusPoint{x1.to_double(), x2.to_double()}.reduced(); }
};

double torus_distance(const BigTorusPoint& p, const BigTorusPoint& q);

/// Stateful forward/backward stepper along the base orbit. Holds the
/// preallocated temporaries so a long orbit costs no allocations per step.
class BigOrbit {
public:
    BigOrbit(const SkewSystem& sys, long t0, const BigTorusPoint& x, const NumericsContext& ctx);

    void step_forward();  // x <- F_{omega_t} x, t <- t+1
    void step_backward(); // inverse step, affine families only
    void advance(long steps);
    void reset(long t, const BigTorusPoint& x);

    long time() const { return t_; }
    const BigTorusPoint& point() const { return x_; }
    BigTorusPoint& point() { return x_; }
    TorusPoint point_double() const { return x_.to_double(); }
    double omega_coord() const; // circle coordinate at current time

private:
    const SkewSystem& sys_;
    NumericsContext ctx_;
    long t_;
    BigTorusPoint x_;
    BigFloat omega_, alpha_; // incremental rotation coordinate
    BigFloat t1_, t2_, h1_, h2_;
    bool rotation_incremental_ = false;
    void load_offset();
};

/// Theta^n in the fiber: F_omega^n x along theta^i omega_{t0}.
/// n < 0 is supported for affine families (T is invertible over Z^2);
/// BIGFLOAT contexts enforce the certified depth.
TorusPoint iterate(const SkewSystem& sys, long t0, const TorusPoint& x, long n,
                   const NumericsContext& ctx);
BigTorusPoint iterate_big(const SkewSystem& sys, long t0, const BigTorusPoint& x, long n,
                          const NumericsContext& ctx);

/// Fiber Bowen metric d^n(x,y) = max_{0<=i<n} d_M(F^i x, F^i y).
double bowen_distance(const SkewSystem& sys, long t0, long n, const TorusPoint& x,
                      const TorusPoint& y, const NumericsContext& ctx);

/// y in B_n(omega, x, eps) iff bowen_distance < eps.
bool bowen_ball_contains(const SkewSystem& sys, long t0, long n, const TorusPoint& center,
                         const TorusPoint& y, double eps, const NumericsContext& ctx);

/// Continuous observable on Omega x M. Built-ins:
///   COS_X1:            phi(omega, x) = cos(2 pi x1)
///   COS_OMEGA_SIN_X2:  phi(omega, x) = cos(2 pi omega) sin(2 pi x2)
/// plus finite linear combinations of those.
struct Observable {
    enum class Basis { CosX1, CosOmegaSinX2 };
    struct Term {
        double coef;
        Basis basis;
    };
    std::vector<Term> terms;

    static Observable cos_x1() { return {{{1.0, Basis::CosX1}}}; }
    static Observable cos_omega_sin_x2() { return {{{1.0, Basis::CosOmegaSinX2}}}; }
    static Observable zero() { return {{}}; }
    static Observable parse(const std::string& text);

    double eval(double omega, const TorusPoint& x) const;
    double sup_norm() const; // sum of |coefficients|, an upper bound
    /// Upper bound for sup |phi(p) - phi(q)| over d(p,q) <= c.
    double var_bound(double c) const;
    bool depends_on_omega() const;
    std::string describe() const;
};

/// Partial Birkhoff averages A_n = (1/n) sum_{i<n} phi(Theta^i(omega,x))
/// recorded at the given checkpoint times.
struct BirkhoffTrace {
    std::vector<long> times;
    std::vector<double> averages;
};

BirkhoffTrace birkhoff_trace(const SkewSystem& sys, long t0, const TorusPoint& x,
                             const Observable& phi, const std::vector<long>& checkpoints,
                             const NumericsContext& ctx);
BirkhoffTrace birkhoff_trace_big(const SkewSystem& sys, long t0, const BigTorusPoint& x,
                                 const Observable& phi, const std::vector<long>& checkpoints,
                                 const NumericsContext& ctx);

} // namespace skewlab
