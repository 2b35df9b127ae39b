#include "arvar/special.hpp"

#include <cmath>
#include <limits>

namespace arvar {

double erf(double x) noexcept { return std::erf(x); }

double erf_inv(double y) noexcept {
  if (std::isnan(y) || y < -1.0 || y > 1.0) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (y == 1.0) return std::numeric_limits<double>::infinity();
  if (y == -1.0) return -std::numeric_limits<double>::infinity();
  if (y == 0.0) return 0.0;

  // M. Giles, "Approximating the erfinv function" (single precision branch).
  double w = -std::log((1.0 - y) * (1.0 + y));
  double x;
  if (w < 5.0) {
    w -= 2.5;
    double p = 2.81022636e-08;
    p = 3.43273939e-07 + p * w;
    p = -3.5233877e-06 + p * w;
    p = -4.39150654e-06 + p * w;
    p = 0.00021858087 + p * w;
    p = -0.00125372503 + p * w;
    p = -0.00417768164 + p * w;
    p = 0.246640727 + p * w;
    p = 1.50140941 + p * w;
    x = p * y;
  } else {
    w = std::sqrt(w) - 3.0;
    double p = -0.000200214257;
    p = 0.000100950558 + p * w;
    p = 0.00134934322 + p * w;
    p = -0.00367342844 + p * w;
    p = 0.00573950773 + p * w;
    p = -0.0076224613 + p * w;
    p = 0.00943887047 + p * w;
    p = 1.00167406 + p * w;
    p = 2.83297682 + p * w;
    x = p * y;
  }

  // Halley refinement of erf(x) - y; erfc is used in the tails where 1 - |y| is tiny.
  for (int it = 0; it < 6; ++it) {
    const double deriv = 2.0 * kInvSqrtPi * std::exp(-x * x);
    if (deriv == 0.0) break;
    double residual;
    if (std::abs(y) > 0.5) {
      const double s = y > 0 ? 1.0 : -1.0;
      residual = s * ((1.0 - s * y) - std::erfc(s * x));
    } else {
      residual = std::erf(x) - y;
    }
    // f'' = -2x f'
    const double step = residual / (deriv + x * residual);
    x -= step;
    if (std::abs(step) <= 1e-17 * std::abs(x)) break;
  }
  return x;
}

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / kSqrt2); }

double eta_cdf(double eta) noexcept { return 0.5 * std::erfc(-eta); }

}  // namespace arvar
