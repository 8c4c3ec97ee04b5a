#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "skewlab/numerics.hpp"

namespace skewlab {

/// An irrational parameter given either as an exact decimal string or as the
/// named constant "golden" ((sqrt(5)-1)/2), materializable at any precision.
struct AlphaSpec {
    enum class Kind { Decimal, Golden };
    Kind kind = Kind::Golden;
    std::string decimal; // exact value when kind == Decimal

    static AlphaSpec golden() { return {Kind::Golden, {}}; }
    static AlphaSpec parse(const std::string& text);

    void materialize(BigFloat& out) const; // at out's precision
    double to_double() const;
    std::string describe() const { return kind == Kind::Golden ? "golden" : decimal; }
};

/// Angle on the additive circle, canonical representative in [0,1).
struct CircleAngle {
    double value = 0.0;
};

/// rotate by `steps` whole rotation increments: value + steps*alpha mod 1.
CircleAngle rotate(CircleAngle state, const AlphaSpec& alpha, long steps);

class Driver {
public:
    virtual ~Driver() = default;
    /// Circle coordinate of theta^t omega0 (for the rotation factor).
    virtual double omega_coord(long t) const = 0;
    virtual void omega_coord_big(long t, BigFloat& out) const = 0;
    virtual bool symbolic() const { return false; }
    virtual int symbol(long t) const;
    virtual std::string describe() const = 0;
    virtual const AlphaSpec& alpha() const = 0;
};

/// Irrational rotation omega -> omega + alpha on the circle.
class CircleRotation : public Driver {
public:
    CircleRotation(AlphaSpec alpha, AlphaSpec omega0);
    double omega_coord(long t) const override;
    void omega_coord_big(long t, BigFloat& out) const override;
    std::string describe() const override;
    const AlphaSpec& alpha() const override { return alpha_; }
    const AlphaSpec& omega0() const { return omega0_; }

private:
    AlphaSpec alpha_;
    AlphaSpec omega0_;
    BigFloat alpha_cached_, omega0_cached_; // at the working precision floor
};

/// One-sided Sturmian sequence s(n) = floor((n+1) alpha) - floor(n alpha).
///
/// alpha is held as an exact spec and floors are evaluated at whatever
/// precision removes all ambiguity, so symbols are exact for indices well
/// past 10^9. Obviously rational alpha is rejected at construction.
class SturmianDriver : public Driver {
public:
    SturmianDriver(AlphaSpec alpha, long base_index = 0);

    int symbol(long t) const override;
    bool symbolic() const override { return true; }
    double omega_coord(long t) const override;       // frac((base+t) alpha)
    void omega_coord_big(long t, BigFloat& out) const override;
    std::string describe() const override;
    const AlphaSpec& alpha() const override { return alpha_; }
    long base_index() const { return base_; }

    std::vector<uint8_t> word(long start, long length) const;

private:
    AlphaSpec alpha_;
    long base_ = 0;
    BigFloat alpha_cached_;
    long floor_times_alpha(long n) const;
};

/// Per-spec coding formula, exposed directly for tests and the bindings.
int sturmian_symbol(const AlphaSpec& alpha, long n);

using DriverPtr = std::shared_ptr<const Driver>;

} // namespace skewlab
