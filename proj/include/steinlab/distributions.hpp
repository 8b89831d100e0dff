#pragma once

// Standard normal and Poisson primitives used by the distance oracle.

#include <cmath>
#include <numbers>
#include <string>

#include "steinlab/error.hpp"

namespace steinlab {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

[[nodiscard]] inline double normal_pdf(double x) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

/// Phi(x) through erfc. The lower tail is always evaluated directly and the
/// upper half as its complement, so Phi(-x) = 1 - Phi(x) up to one rounding.
[[nodiscard]] inline double normal_cdf(double x) noexcept {
  if (x < 0.0) return 0.5 * std::erfc(-x * kInvSqrt2);
  return 1.0 - 0.5 * std::erfc(x * kInvSqrt2);
}

/// 1 - Phi(x) without cancellation.
[[nodiscard]] inline double normal_sf(double x) noexcept { return normal_cdf(-x); }

/// Phi^{-1}(c) by bisection on Phi to absolute tolerance `tol` in x.
/// c outside (0, 1) maps to -inf / +inf.
[[nodiscard]] inline double normal_quantile(double c, double tol = 1e-12) {
  if (!(c > 0.0)) return -INFINITY;
  if (!(c < 1.0)) return INFINITY;
  double lo = -40.0;
  double hi = 40.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (normal_cdf(mid) < c) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Antiderivative of Phi: int_{-inf}^x Phi = x Phi(x) + phi(x).
[[nodiscard]] inline double normal_cdf_integral(double x) noexcept { return x * normal_cdf(x) + normal_pdf(x); }

/// int_x^inf (1 - Phi) = phi(x) - x (1 - Phi(x)).
[[nodiscard]] inline double normal_sf_integral(double x) noexcept { return normal_pdf(x) - x * normal_sf(x); }

inline void require_positive_theta(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw Error(ErrorCode::non_positive_theta, "theta = " + std::to_string(theta) + " must be positive and finite");
  }
}

/// log P(Pn(theta) = k).
[[nodiscard]] inline double poisson_log_pmf(double theta, unsigned long long k) {
  require_positive_theta(theta);
  const double kd = static_cast<double>(k);
  return kd * std::log(theta) - theta - std::lgamma(kd + 1.0);
}

/// P(Pn(theta) = k), evaluated in log space.
[[nodiscard]] inline double poisson_pmf(double theta, unsigned long long k) {
  return std::exp(poisson_log_pmf(theta, k));
}

}  // namespace steinlab
