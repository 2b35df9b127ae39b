#pragma once

// Special functions shared by the scoring rules: erf, its inverse, and the
// normal cdf in the two forms used throughout the library.

#include <numbers>

namespace arvar {

inline constexpr double kSqrtPi = 1.7724538509055160273;
inline constexpr double kSqrt2 = std::numbers::sqrt2;
/// sqrt(2/pi)
inline constexpr double kSqrt2OverPi = 0.79788456080286535588;
/// 1/sqrt(pi)
inline constexpr double kInvSqrtPi = std::numbers::inv_sqrtpi;

double erf(double x) noexcept;

/// Inverse error function on [-1, 1]. Returns -inf/+inf at the endpoints and
/// NaN outside. A rational initial guess is refined with Halley steps on erf,
/// giving full double precision away from the endpoints.
double erf_inv(double y) noexcept;

/// Standard normal cdf, 0.5 * (1 + erf(z / sqrt 2)).
double normal_cdf(double z) noexcept;

/// 0.5 * (erf(eta) + 1): the cdf against which relative errors
/// eta = eps / (sqrt(2) sigma) are compared.
double eta_cdf(double eta) noexcept;

}  // namespace arvar
