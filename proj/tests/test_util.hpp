#pragma once

#include <memory>

#include "skewlab/orbit.hpp"

namespace skewlab::testutil {

inline AlphaSpec decimal(const std::string& s) {
    return AlphaSpec{AlphaSpec::Kind::Decimal, s};
}

inline DriverPtr golden_rotation(const std::string& omega0 = "0") {
    return std::make_shared<CircleRotation>(AlphaSpec::golden(), decimal(omega0));
}

/// Cat map with h = 0: the deterministic reduction d_omega^n = d_n^T.
inline SkewSystem cat_system() {
    return make_affine_system(golden_rotation(), Mat2i::cat(), OffsetKind::Zero);
}

inline SkewSystem cat_system_omega_offset(const std::string& omega0 = "0") {
    return make_affine_system(golden_rotation(omega0), Mat2i::cat(), OffsetKind::OmegaX);
}

inline double cat_lambda() { return (3.0 + std::sqrt(5.0)) / 2.0; }

} // namespace skewlab::testutil
