#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "error.hpp"

namespace wbis {

template <class Real>
inline Real normal_pdf(Real x)
{
    constexpr Real inv_sqrt_2pi = std::numbers::inv_sqrtpi_v<Real> / std::numbers::sqrt2_v<Real>;
    return inv_sqrt_2pi * std::exp(-x * x / Real(2));
}

template <class Real>
inline Real normal_log_pdf(Real x)
{
    const Real log_sqrt_2pi = Real(0.5) * std::log(Real(2) * std::numbers::pi_v<Real>);
    return -x * x / Real(2) - log_sqrt_2pi;
}

/// Phi(x) through the complementary error function, so the lower tail keeps
/// full relative precision.
template <class Real>
inline Real normal_cdf(Real x)
{
    return Real(0.5) * std::erfc(-x / std::numbers::sqrt2_v<Real>);
}

/// Upper tail 1 - Phi(x) without cancellation.
template <class Real>
inline Real normal_ccdf(Real x)
{
    return Real(0.5) * std::erfc(x / std::numbers::sqrt2_v<Real>);
}

/// Inverse of normal_cdf. Acklam's rational initial guess followed by two
/// Halley steps on the erfc-based cdf.
template <class Real>
Real normal_quantile(Real p)
{
    if (!(p > Real(0) && p < Real(1))) {
        throw domain_error("normal_quantile: p must lie in (0, 1), got " + std::to_string(double(p)));
    }

    static constexpr Real a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr Real b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr Real c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr Real d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
    constexpr Real p_low = 0.02425;

    Real z;
    if (p < p_low) {
        const Real q = std::sqrt(-Real(2) * std::log(p));
        z = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + Real(1));
    } else if (p <= Real(1) - p_low) {
        const Real q = p - Real(0.5);
        const Real r = q * q;
        z = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + Real(1));
    } else {
        const Real q = std::sqrt(-Real(2) * std::log1p(-p));
        z = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + Real(1));
    }

    for (int it = 0; it < 2; ++it) {
        // residual taken on the tail that keeps relative precision
        const Real e = z < Real(0) ? normal_cdf(z) - p : (Real(1) - p) - normal_ccdf(z);
        const Real u = e / normal_pdf(z);
        z = z - u / (Real(1) + z * u / Real(2));
    }
    return z;
}

} // namespace wbis
