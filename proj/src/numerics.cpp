#include "skewlab/numerics.hpp"

#include <cstdio>
#include <vector>

namespace skewlab {

std::string BigFloat::to_decimal(int digits) const {
    if (digits <= 0)
        digits = static_cast<int>(mpfr_get_prec(v_) * 0.30103) + 2;
    char* s = nullptr;
    // %.*Rg prints shortest faithful form at the requested significant digits.
    if (mpfr_asprintf(&s, "%.*Rg", digits, v_) < 0)
        return "nan";
    std::string out(s);
    mpfr_free_str(s);
    return out;
}

NumericsContext NumericsContext::for_depth(long depth, double lambda_u, long guard_bits) {
    long bits = 64 + static_cast<long>(std::ceil(double(depth) * std::log2(lambda_u))) + guard_bits;
    if (bits < 128) bits = 128;
    return bigfloat(bits);
}

} // namespace skewlab
