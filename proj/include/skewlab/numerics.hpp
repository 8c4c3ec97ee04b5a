#pragma once

#include <mpfr.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "skewlab/errors.hpp"

namespace skewlab {

/// Arbitrary-precision real with an explicit mantissa size in bits.
/// Thin RAII wrapper over mpfr_t; every value owns its precision and all
/// mutating operations round to the destination's precision (MPFR semantics).
class BigFloat {
public:
    BigFloat() { mpfr_init2(v_, 64); mpfr_set_zero(v_, 1); }
    explicit BigFloat(long prec_bits) {
        mpfr_init2(v_, prec_bits);
        mpfr_set_zero(v_, 1);
    }
    BigFloat(double x, long prec_bits) {
        mpfr_init2(v_, prec_bits);
        mpfr_set_d(v_, x, MPFR_RNDN);
    }
    BigFloat(const std::string& decimal, long prec_bits) {
        mpfr_init2(v_, prec_bits);
        if (mpfr_set_str(v_, decimal.c_str(), 10, MPFR_RNDN) != 0)
            throw ConfigInvalid("not a decimal number: " + decimal);
    }
    BigFloat(const BigFloat& o) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    BigFloat(BigFloat&& o) noexcept {
        mpfr_init2(v_, 64);
        mpfr_swap(v_, o.v_);
    }
    BigFloat& operator=(const BigFloat& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    BigFloat& operator=(BigFloat&& o) noexcept {
        if (this != &o) mpfr_swap(v_, o.v_);
        return *this;
    }
    ~BigFloat() { mpfr_clear(v_); }

    long precision() const { return mpfr_get_prec(v_); }
    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
    std::string to_decimal(int digits = 0) const;

    void set(double x) { mpfr_set_d(v_, x, MPFR_RNDN); }
    void set(const BigFloat& o) { mpfr_set(v_, o.v_, MPFR_RNDN); }
    void set_si(long n) { mpfr_set_si(v_, n, MPFR_RNDN); }

    // In-place arithmetic, destination precision.
    void add(const BigFloat& a, const BigFloat& b) { mpfr_add(v_, a.v_, b.v_, MPFR_RNDN); }
    void sub(const BigFloat& a, const BigFloat& b) { mpfr_sub(v_, a.v_, b.v_, MPFR_RNDN); }
    void mul(const BigFloat& a, const BigFloat& b) { mpfr_mul(v_, a.v_, b.v_, MPFR_RNDN); }
    void div(const BigFloat& a, const BigFloat& b) { mpfr_div(v_, a.v_, b.v_, MPFR_RNDN); }
    void mul_si(const BigFloat& a, long n) { mpfr_mul_si(v_, a.v_, n, MPFR_RNDN); }
    void add_si(const BigFloat& a, long n) { mpfr_add_si(v_, a.v_, n, MPFR_RNDN); }
    void neg(const BigFloat& a) { mpfr_neg(v_, a.v_, MPFR_RNDN); }
    void sqrt(const BigFloat& a) { mpfr_sqrt(v_, a.v_, MPFR_RNDN); }
    void pow_si(const BigFloat& a, long n) { mpfr_pow_si(v_, a.v_, n, MPFR_RNDN); }
    void fma(const BigFloat& a, const BigFloat& b, const BigFloat& c) {
        mpfr_fma(v_, a.v_, b.v_, c.v_, MPFR_RNDN);
    }

    /// Reduce into [0,1): x - floor(x).
    void reduce_mod1() {
        if (mpfr_cmp_si(v_, 0) >= 0 && mpfr_cmp_si(v_, 1) < 0) return;
        mpfr_t f;
        mpfr_init2(f, mpfr_get_prec(v_));
        mpfr_floor(f, v_);
        mpfr_sub(v_, v_, f, MPFR_RNDN);
        mpfr_clear(f);
        // Rounding can land exactly on 1.0 when x was a hair below an integer.
        if (mpfr_cmp_si(v_, 1) >= 0) mpfr_sub_si(v_, v_, 1, MPFR_RNDN);
        if (mpfr_cmp_si(v_, 0) < 0) mpfr_set_zero(v_, 1);
    }

    long floor_long() const {
        mpfr_t f;
        mpfr_init2(f, mpfr_get_prec(v_));
        mpfr_floor(f, v_);
        long r = mpfr_get_si(f, MPFR_RNDN);
        mpfr_clear(f);
        return r;
    }

    int cmp(const BigFloat& o) const { return mpfr_cmp(v_, o.v_); }
    int cmp_d(double x) const { return mpfr_cmp_d(v_, x); }
    int sign() const { return mpfr_sgn(v_); }

    mpfr_ptr raw() { return v_; }
    mpfr_srcptr raw() const { return v_; }

private:
    mpfr_t v_;
};

enum class ArithmeticMode { Double, BigFloatMode };

/// Arithmetic mode and precision budget for orbit computations.
///
/// In BigFloat mode the certified iteration depth is
///   n_max = floor((mantissa_bits - 64) / log2(lambda_u)),
/// past which forward error growth can eat through the mantissa and the
/// operations refuse to run.
struct NumericsContext {
    ArithmeticMode mode = ArithmeticMode::Double;
    long mantissa_bits = 53;

    static NumericsContext double_mode() { return {ArithmeticMode::Double, 53}; }
    static NumericsContext bigfloat(long bits) {
        if (bits < 53) throw ConfigInvalid("mantissa_bits must be >= 53");
        return {ArithmeticMode::BigFloatMode, bits};
    }
    /// Smallest context certified for `depth` iterations at expansion rate lambda_u.
    static NumericsContext for_depth(long depth, double lambda_u, long guard_bits = 64);

    bool is_big() const { return mode == ArithmeticMode::BigFloatMode; }
    long certified_depth(double lambda_u) const {
        if (!is_big()) return 0;
        return static_cast<long>(std::floor(double(mantissa_bits - 64) / std::log2(lambda_u)));
    }
    void require_depth(long n, double lambda_u) const {
        if (is_big() && n > certified_depth(lambda_u))
            throw PrecisionExhausted("depth " + std::to_string(n) + " exceeds certified depth " +
                                     std::to_string(certified_depth(lambda_u)) + " at " +
                                     std::to_string(mantissa_bits) + " bits");
    }
};

} // namespace skewlab
