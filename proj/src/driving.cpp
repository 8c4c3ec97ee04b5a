#include "skewlab/driving.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace skewlab {

namespace {

// Precision that makes floor(n*alpha) unambiguous for |n| up to ~2^40 when
// alpha is badly approximable. The computation below still double-checks.
constexpr long kAlphaBits = 256;

bool looks_numeric(const std::string& s) {
    bool digit = false;
    for (char c : s) {
        if (std::isdigit(static_cast<unsigned char>(c))) digit = true;
        else if (c != '.' && c != '-' && c != '+' && c != 'e' && c != 'E') return false;
    }
    return digit;
}

} // namespace

AlphaSpec AlphaSpec::parse(const std::string& text) {
    if (text == "golden" || text.empty()) return golden();
    if (!looks_numeric(text)) throw ConfigInvalid("alpha must be a decimal string or 'golden'");
    AlphaSpec a;
    a.kind = Kind::Decimal;
    a.decimal = text;
    BigFloat probe(text, 64); // validates syntax
    double v = probe.to_double();
    if (!(v > 0.0 && v < 1.0)) throw ConfigInvalid("alpha must lie in (0,1)");
    return a;
}

void AlphaSpec::materialize(BigFloat& out) const {
    if (kind == Kind::Golden) {
        BigFloat five(5.0, out.precision() + 8);
        BigFloat root(out.precision() + 8);
        root.sqrt(five);
        root.add_si(root, -1);
        BigFloat half(0.5, out.precision() + 8);
        out.mul(root, half);
    } else {
        out = BigFloat(decimal, out.precision());
    }
}

double AlphaSpec::to_double() const {
    BigFloat v(64);
    materialize(v);
    return v.to_double();
}

CircleAngle rotate(CircleAngle state, const AlphaSpec& alpha, long steps) {
    BigFloat acc(192);
    BigFloat a(192);
    alpha.materialize(a);
    acc.mul_si(a, steps);
    BigFloat w(state.value, 192);
    acc.add(acc, w);
    acc.reduce_mod1();
    double v = acc.to_double();
    if (v >= 1.0) v -= 1.0; // double rounding at the seam
    return {v};
}

int Driver::symbol(long) const {
    throw DegenerateParameter("driver has no symbolic coding");
}

CircleRotation::CircleRotation(AlphaSpec alpha, AlphaSpec omega0)
    : alpha_(std::move(alpha)),
      omega0_(std::move(omega0)),
      alpha_cached_(kAlphaBits),
      omega0_cached_(kAlphaBits) {
    alpha_.materialize(alpha_cached_);
    omega0_.materialize(omega0_cached_);
}

double CircleRotation::omega_coord(long t) const {
    BigFloat acc(kAlphaBits);
    acc.mul_si(alpha_cached_, t);
    acc.add(acc, omega0_cached_);
    acc.reduce_mod1();
    double v = acc.to_double();
    return v >= 1.0 ? v - 1.0 : v;
}

void CircleRotation::omega_coord_big(long t, BigFloat& out) const {
    long prec = std::max<long>(out.precision() + 64, kAlphaBits);
    BigFloat a(prec), w(prec);
    alpha_.materialize(a);
    omega0_.materialize(w);
    BigFloat acc(prec);
    acc.mul_si(a, t);
    acc.add(acc, w);
    acc.reduce_mod1();
    out.set(acc);
}

std::string CircleRotation::describe() const {
    return "rotation(alpha=" + alpha_.describe() + ", omega0=" + omega0_.describe() + ")";
}

SturmianDriver::SturmianDriver(AlphaSpec alpha, long base_index)
    : alpha_(std::move(alpha)), base_(base_index), alpha_cached_(kAlphaBits) {
    alpha_.materialize(alpha_cached_);
    if (alpha_.kind == AlphaSpec::Kind::Decimal) {
        // Reject small-denominator rationals: the coding degenerates when
        // n*alpha hits integers. Exact decimals with few significant digits
        // are the practical way users write rationals.
        BigFloat v(alpha_.decimal, 128);
        double x = v.to_double();
        for (long q = 1; q <= 1000; ++q) {
            double nearest = std::round(x * double(q)) / double(q);
            if (std::abs(x - nearest) < 1e-18 * q) {
                BigFloat exact(128);
                exact.set_si(std::lround(std::round(x * double(q))));
                BigFloat qq(128);
                qq.set_si(q);
                exact.div(exact, qq);
                if (exact.cmp(v) == 0)
                    throw DegenerateParameter("rational alpha = " + alpha_.decimal);
            }
        }
    }
}

long SturmianDriver::floor_times_alpha(long n) const {
    if (n == 0) return 0;
    long prec = kAlphaBits;
    for (int attempt = 0; attempt < 4; ++attempt) {
        BigFloat a(prec);
        if (prec == kAlphaBits)
            a.set(alpha_cached_);
        else
            alpha_.materialize(a);
        BigFloat na(prec);
        na.mul_si(a, n);
        long fl = na.floor_long();
        // Guard band: frac(n*alpha) must stay clear of 0 and 1 by more than
        // the accumulated rounding, otherwise the floor is untrusted.
        BigFloat frac(prec);
        BigFloat fl_big(prec);
        fl_big.set_si(fl);
        frac.sub(na, fl_big);
        double f = frac.to_double();
        double guard = std::ldexp(64.0 + std::log2(double(std::abs(n)) + 2.0), int(-prec + 64));
        if (f > guard && f < 1.0 - guard) return fl;
        prec *= 2;
        if (prec > 1 << 16)
            throw DegenerateParameter("floor(n*alpha) ambiguous at n=" + std::to_string(n) +
                                      "; alpha looks rational");
    }
    throw DegenerateParameter("floor(n*alpha) ambiguous at n=" + std::to_string(n));
}

int SturmianDriver::symbol(long t) const {
    long n = base_ + t;
    if (n < 0) throw InsufficientWord("sturmian index must be >= 0");
    return static_cast<int>(floor_times_alpha(n + 1) - floor_times_alpha(n));
}

double SturmianDriver::omega_coord(long t) const {
    BigFloat out(128);
    omega_coord_big(t, out);
    double v = out.to_double();
    return v >= 1.0 ? v - 1.0 : v;
}

void SturmianDriver::omega_coord_big(long t, BigFloat& out) const {
    long prec = std::max<long>(out.precision() + 64, kAlphaBits);
    BigFloat a(prec);
    alpha_.materialize(a);
    BigFloat acc(prec);
    acc.mul_si(a, base_ + t);
    acc.reduce_mod1();
    out.set(acc);
}

std::string SturmianDriver::describe() const {
    return "sturmian(alpha=" + alpha_.describe() + ", base=" + std::to_string(base_) + ")";
}

std::vector<uint8_t> SturmianDriver::word(long start, long length) const {
    std::vector<uint8_t> w(length);
    long prev = floor_times_alpha(base_ + start);
    for (long i = 0; i < length; ++i) {
        long next = floor_times_alpha(base_ + start + i + 1);
        w[i] = static_cast<uint8_t>(next - prev);
        prev = next;
    }
    return w;
}

int sturmian_symbol(const AlphaSpec& alpha, long n) {
    if (n < 0) throw InsufficientWord("sturmian index must be >= 0");
    SturmianDriver d(alpha, 0);
    return d.symbol(n);
}

} // namespace skewlab
