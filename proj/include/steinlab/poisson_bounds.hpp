#pragma once

// Chen-Stein bounds for N-valued functionals against Pn(theta). The
// profile must be built on the raw (uncentered) integer-valued tensor.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "steinlab/diff_profile.hpp"
#include "steinlab/distributions.hpp"
#include "steinlab/error.hpp"
#include "steinlab/report.hpp"

namespace steinlab {

/// Sup-norm bounds on the Stein solutions: f_A for indicator test
/// functions (total variation) and f_h for 1-Lipschitz h (Wasserstein).
struct ChenSteinConstants {
  double theta = 0.0;
  double f_a = 0.0;         // 1 ^ sqrt(2/(e theta))
  double delta_f_a = 0.0;   // (1 - e^-theta)/theta
  double delta2_f_a = 0.0;  // 2 (1 - e^-theta)/theta
  double f_h = 1.0;
  double delta_f_h = 0.0;   // 1 ^ 8/(3 sqrt(2 e theta))
  double delta2_f_h = 0.0;  // 4/3 ^ 2/theta
};

[[nodiscard]] inline ChenSteinConstants chen_stein_constants(double theta) {
  require_positive_theta(theta);
  ChenSteinConstants c;
  c.theta = theta;
  c.f_a = std::min(1.0, std::sqrt(2.0 / (std::numbers::e * theta)));
  c.delta_f_a = -std::expm1(-theta) / theta;
  c.delta2_f_a = 2.0 * c.delta_f_a;
  c.f_h = 1.0;
  c.delta_f_h = std::min(1.0, 8.0 / (3.0 * std::sqrt(2.0 * std::numbers::e * theta)));
  c.delta2_f_h = std::min(4.0 / 3.0, 2.0 / theta);
  return c;
}

/// Rejects functionals that are not N-valued (after the 1e-9 snap).
inline void require_natural_valued(const DiffProfile& p) {
  for (double v : p.tensor().values()) {
    const double r = std::nearbyint(v);
    if (std::abs(v - r) > kIntegerTolerance || r < 0.0) {
      throw Error(ErrorCode::not_integer_valued, "value " + std::to_string(v) + " is not a natural number");
    }
  }
}

enum class PoissonForm { exact, relaxed };

namespace detail {

struct PoissonIngredients {
  double mu = 0.0;
  double sigma2 = 0.0;
  double e_abs_theta_minus_z = 0.0;
  double remainder = 0.0;  // E[sum_i (2 (d_i F)^2 + D_i F) |P_i|]
  double sqrt_var_z = 0.0;
  double l2 = 0.0;
  double l3 = 0.0;
};

[[nodiscard]] inline PoissonIngredients poisson_ingredients(const DiffProfile& p, double theta, PoissonForm form) {
  require_natural_valued(p);
  require_positive_theta(theta);
  PoissonIngredients g;
  g.mu = p.mean();
  g.sigma2 = p.variance();
  if (form == PoissonForm::exact) {
    g.e_abs_theta_minus_z = p.e_abs_theta_minus_z(theta);
    g.remainder = p.sum_axes([](const AxisSummary& a) { return a.integer_remainder; });
  } else {
    g.sqrt_var_z = std::sqrt(p.var_z());
    g.l2 = p.lyapunov(2);
    g.l3 = p.lyapunov(3);
  }
  return g;
}

}  // namespace detail

/// d_TV(F, Pn(theta)) bound. Exact form:
///   f_A |theta - mu| + Df_A (E|theta - Z| + E[sum (2 dsq + D F)|P|]);
/// relaxed form replaces the bracket by |theta - s^2| + sqrt(Var Z) + 2 L_3 + L_2.
[[nodiscard]] inline BoundReport tv_bound(const DiffProfile& p, double theta, PoissonForm form) {
  const auto g = detail::poisson_ingredients(p, theta, form);
  const auto c = chen_stein_constants(theta);
  BoundReport r;
  r.target = "poisson";
  r.metric = "tv";
  r.theta = theta;
  r.add("|theta-mu|", std::abs(theta - g.mu));
  if (form == PoissonForm::exact) {
    r.theorem = "prove01.plo1";
    r.form = "exact";
    r.add("E|theta-Z|", g.e_abs_theta_minus_z);
    r.add("remainder_term", g.remainder);
    r.value = c.f_a * std::abs(theta - g.mu) + c.delta_f_a * (g.e_abs_theta_minus_z + g.remainder);
  } else {
    r.theorem = "prove01.plo2";
    r.form = "relaxed";
    const double bias = std::abs(theta - g.sigma2);
    r.add("|theta-sigma^2|", bias);
    r.add("sqrtVarZ", g.sqrt_var_z);
    r.add("L3", g.l3);
    r.add("L2", g.l2);
    r.value = c.f_a * std::abs(theta - g.mu) + c.delta_f_a * (bias + g.sqrt_var_z + 2.0 * g.l3 + g.l2);
  }
  return r;
}

/// d_W(F, Pn(theta)) bound. Exact form:
///   |theta - mu| + Df_h E|theta - Z| + (D2f_h / 2) E[sum (2 dsq + D F)|P|];
/// relaxed form: |theta - mu| + Df_h (|theta - s^2| + sqrt(Var Z)) + (D2f_h / 2)(2 L_3 + L_2).
[[nodiscard]] inline BoundReport wasserstein_bound(const DiffProfile& p, double theta, PoissonForm form) {
  const auto g = detail::poisson_ingredients(p, theta, form);
  const auto c = chen_stein_constants(theta);
  const double half2 = 0.5 * c.delta2_f_h;  // 2/3 ^ 1/theta
  BoundReport r;
  r.target = "poisson";
  r.metric = "wasserstein";
  r.theta = theta;
  r.add("|theta-mu|", std::abs(theta - g.mu));
  if (form == PoissonForm::exact) {
    r.theorem = "prove02.exact";
    r.form = "exact";
    r.add("E|theta-Z|", g.e_abs_theta_minus_z);
    r.add("remainder_term", g.remainder);
    r.value = std::abs(theta - g.mu) + c.delta_f_h * g.e_abs_theta_minus_z + half2 * g.remainder;
  } else {
    r.theorem = "prove02.relaxed";
    r.form = "relaxed";
    const double bias = std::abs(theta - g.sigma2);
    r.add("|theta-sigma^2|", bias);
    r.add("sqrtVarZ", g.sqrt_var_z);
    r.add("L3", g.l3);
    r.add("L2", g.l2);
    r.value = std::abs(theta - g.mu) + c.delta_f_h * (bias + g.sqrt_var_z) + half2 * (2.0 * g.l3 + g.l2);
  }
  return r;
}

}  // namespace steinlab
