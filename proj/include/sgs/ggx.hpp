#pragma once

#include <stdexcept>

#include "sgs/math.hpp"

namespace sgs {

// Trowbridge-Reitz normal distribution with alpha = rho^2, evaluated at the
// cosine between the lobe axis and the sample direction. One-sided: zero on
// the back hemisphere (the bare formula would mirror the peak).
template <class T>
T ggx_ndf_t(const T& cos_rm, const T& rho) {
    if (val(cos_rm) < 0.0) return T(0.0);
    const T a = rho * rho;
    const T a2 = a * a;
    const T c2 = cos_rm * cos_rm;
    const T d = c2 * (a2 - T(1.0)) + T(1.0);
    return a2 / (T(kPi) * d * d);
}

inline double ggx_ndf(double cos_rm, double rho) {
    if (rho <= 0.0) throw std::invalid_argument("degenerate lobe");
    if (cos_rm < -1.0 || cos_rm > 1.0) throw std::invalid_argument("cosine outside [-1, 1]");
    return ggx_ndf_t(cos_rm, rho);
}

}  // namespace sgs
