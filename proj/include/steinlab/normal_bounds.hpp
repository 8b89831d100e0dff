#pragma once

// Normal-approximation bounds assembled from a DiffProfile. Every function
// takes the profile of a centered functional (the pipeline subtracts the
// exact mean, and standardizes when a bound is stated for sigma^{-1} F).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "steinlab/diff_profile.hpp"
#include "steinlab/distance.hpp"
#include "steinlab/error.hpp"
#include "steinlab/functional.hpp"
#include "steinlab/report.hpp"

namespace steinlab {

inline constexpr double kSqrt2OverPi = 0.79788456080286535588;   // sqrt(2/pi)
inline constexpr double kSqrt2PiOver4 = 0.62665706865775012560;  // sqrt(2 pi)/4

inline void require_centered(const DiffProfile& p) {
  if (std::abs(p.mean()) > 1e-10 * p.scale()) {
    throw Error(ErrorCode::not_centered, "E[F] = " + std::to_string(p.mean()) + " is not zero");
  }
}

inline void require_nondegenerate(double variance, double scale) {
  if (!(variance > 1e-24 * scale * scale)) {
    throw Error(ErrorCode::degenerate_variance, "Var(F) = " + std::to_string(variance) + " vanishes");
  }
}

inline void require_nondegenerate(const DiffProfile& p) { require_nondegenerate(p.variance(), p.scale()); }

// ============================================================================
// Wasserstein
// ============================================================================

/// sqrt(2/pi) E|1 - Z| + 2 E[sum_i (d_i F)^2 |P_i|].
[[nodiscard]] inline BoundReport wasserstein_exact_form(const DiffProfile& p) {
  require_centered(p);
  BoundReport r = make_report("ko67d3.lode4", "wasserstein", "exact");
  const double e1z = p.e_abs_one_minus_z();
  const double rem = p.sum_axes([](const AxisSummary& a) { return a.dsq_abs_p; });
  r.add("E|1-Z|", e1z);
  r.add("E[sum dsq |P|]", rem);
  r.value = kSqrt2OverPi * e1z + 2.0 * rem;
  return r;
}

/// sqrt(2/pi)|1 - E F^2| + sqrt(2/pi) sqrt(Var Z) + 2 L_3.
[[nodiscard]] inline BoundReport wasserstein_relaxed(const DiffProfile& p) {
  require_centered(p);
  BoundReport r = make_report("ko67d3.de2q1", "wasserstein", "relaxed");
  const double bias = std::abs(1.0 - p.second_moment());
  const double svz = std::sqrt(p.var_z());
  const double l3 = p.lyapunov(3);
  r.add("|1-EF^2|", bias);
  r.add("sqrtVarZ", svz);
  r.add("L3", l3);
  r.value = kSqrt2OverPi * (bias + svz) + 2.0 * l3;
  return r;
}

/// 4 L_3 for a centered weighted sum with unit variance.
[[nodiscard]] inline BoundReport wasserstein_sum_bound(const DiffProfile& p, FunctionalKind kind) {
  if (kind != FunctionalKind::weighted_sum && kind != FunctionalKind::partial_sum) {
    throw Error(ErrorCode::not_a_weighted_sum, std::string("functional kind is ") + std::string(to_string(kind)));
  }
  if (std::abs(p.mean()) > 1e-10 * p.scale() || std::abs(p.variance() - 1.0) > 1e-10) {
    throw Error(ErrorCode::not_normalized, "sum bound needs E[F] = 0 and Var(F) = 1, got mean " +
                                               std::to_string(p.mean()) + ", variance " + std::to_string(p.variance()));
  }
  BoundReport r = make_report("luongmoi.nnsd7f77", "wasserstein", "sum");
  const double l3 = p.lyapunov(3);
  r.add("L3", l3);
  r.value = 4.0 * l3;
  return r;
}

// ============================================================================
// Kolmogorov: B1 and B2
// ============================================================================

enum class B1Route { automatic, direct, indicator_identity };

struct B1Curve {
  std::vector<double> thresholds;  // atom values of F, ascending
  std::vector<double> values;      // B1(x) at each threshold
  std::string route;
};

/// Direct evaluation of
///   B1(x) = E[ sum_i (D_i F D_i 1{F>x} + E_i[D_i F D_i 1{F>x}]) |P_i| ]
/// at every atom x of F; the indicator is rebuilt per threshold.
[[nodiscard]] inline B1Curve b1_curve_direct(const DiffProfile& p) {
  const EvalTensor& t = p.tensor();
  const Grid& g = t.grid();
  const IndexedLaw il = indexed_law_of(t);
  const auto prefix = prefix_conditionals(g, t.values());
  const auto w = g.weights();
  const std::size_t atoms = il.law.size();
  B1Curve out;
  out.route = "direct";
  out.thresholds.resize(atoms);
  out.values.assign(atoms, 0.0);
  for (std::size_t j = 0; j < atoms; ++j) out.thresholds[j] = il.law.atoms()[j].value;

  parallel_for(atoms, [&](std::size_t level) {
    std::vector<double> d;
    std::vector<double> ind;
    std::vector<double> a;
    double total = 0.0;
    for (std::size_t i = 0; i < g.dims(); ++i) {
      const std::size_t s = g.axis(i);
      const std::size_t st = g.stride(i);
      const auto aw = g.axis_weights(i);
      d.resize(s);
      ind.resize(s);
      a.resize(s);
      const std::size_t fibres = g.size() / s;
      double axis_total = 0.0;
      for (std::size_t f = 0; f < fibres; ++f) {
        const std::size_t outer = f / st;
        const std::size_t base = outer * s * st + f % st;
        double ef = 0.0;
        double ei = 0.0;
        for (std::size_t q = 0; q < s; ++q) {
          const std::size_t k = base + q * st;
          ind[q] = il.atom_of[k] > level ? 1.0 : 0.0;
          ef += aw[q] * t[k];
          ei += aw[q] * ind[q];
        }
        double ea = 0.0;
        for (std::size_t q = 0; q < s; ++q) {
          d[q] = t[base + q * st] - ef;
          a[q] = d[q] * (ind[q] - ei);
          ea += aw[q] * a[q];
        }
        for (std::size_t q = 0; q < s; ++q) {
          const std::size_t k = base + q * st;
          const double pq = prefix[i + 1][outer * s + q] - prefix[i][outer];
          axis_total += w[k] * (a[q] + ea) * std::abs(pq);
        }
      }
      total += axis_total;
    }
    out.values[level] = total;
  });
  return out;
}

/// The same curve through the identity B1(x) = E[1{F>x} Zbar], using
/// suffix sums over the atoms of F.
[[nodiscard]] inline B1Curve b1_curve_identity(const DiffProfile& p) {
  const EvalTensor& t = p.tensor();
  const IndexedLaw il = indexed_law_of(t);
  const auto w = t.grid().weights();
  const std::size_t atoms = il.law.size();
  std::vector<double> per_atom(atoms, 0.0);
  for (std::size_t k = 0; k < t.size(); ++k) per_atom[il.atom_of[k]] += w[k] * p.zbar()[k];
  B1Curve out;
  out.route = "indicator_identity";
  out.thresholds.resize(atoms);
  out.values.assign(atoms, 0.0);
  double suffix = 0.0;
  for (std::size_t j = atoms; j > 0; --j) {
    out.thresholds[j - 1] = il.law.atoms()[j - 1].value;
    out.values[j - 1] = suffix;  // mass strictly above atom j-1
    suffix += per_atom[j - 1];
  }
  return out;
}

/// Work budget (threshold count x axes x grid size) for the direct route.
inline constexpr double kB1DirectBudget = 5e8;

struct B1Result {
  double value = 0.0;
  double argmax = 0.0;
  std::string route;
};

/// B1 = sup_x B1(x). Between atoms the expectation is constant; below the
/// smallest atom it equals E[Zbar] = 0 and above the largest it is 0, so
/// the supremum is max(0, max over atoms).
[[nodiscard]] inline B1Result kolmogorov_b1_exact(const DiffProfile& p, B1Route route = B1Route::automatic) {
  if (route == B1Route::automatic) {
    const double atoms = static_cast<double>(indexed_law_of(p.tensor()).law.size());
    const double work = atoms * static_cast<double>(p.dims()) * static_cast<double>(p.grid().size());
    route = work <= kB1DirectBudget ? B1Route::direct : B1Route::indicator_identity;
  }
  const B1Curve c = route == B1Route::direct ? b1_curve_direct(p) : b1_curve_identity(p);
  B1Result r{0.0, c.thresholds.empty() ? 0.0 : c.thresholds.back(), c.route};
  for (std::size_t j = 0; j < c.values.size(); ++j) {
    if (c.values[j] > r.value) {
      r.value = c.values[j];
      r.argmax = c.thresholds[j];
    }
  }
  return r;
}

/// B2 = E[ sum_i (|F| + sqrt(2 pi)/4) (d_i F)^2 |P_i| ].
[[nodiscard]] inline double kolmogorov_b2_exact(const DiffProfile& p) {
  return p.sum_axes([](const AxisSummary& a) { return a.abs_f_dsq_abs_p + kSqrt2PiOver4 * a.dsq_abs_p; });
}

/// (sum_i sqrt(E|D_i F|^4))^{1/2} * sum_i (E|D_i F|^4)^{3/4}.
[[nodiscard]] inline double fourth_moment_product(const DiffProfile& p) {
  const double root = p.sum_axes([](const AxisSummary& a) { return std::sqrt(a.moment(4)); });
  const double three_quarter = p.sum_axes([](const AxisSummary& a) { return std::pow(a.moment(4), 0.75); });
  return std::sqrt(root) * three_quarter;
}

/// Right side of the general B2 estimate: 7/2 * product + sqrt(2 pi)/4 L_3.
[[nodiscard]] inline double b2_general_bound(const DiffProfile& p) {
  return 3.5 * fourth_moment_product(p) + kSqrt2PiOver4 * p.lyapunov(3);
}

/// Right side of the finite-n B2 estimate: 3 sqrt(n) L_4 + sqrt(2 pi)/4 L_3.
[[nodiscard]] inline double b2_finite_bound(const DiffProfile& p) {
  return 3.0 * std::sqrt(static_cast<double>(p.dims())) * p.lyapunov(4) + kSqrt2PiOver4 * p.lyapunov(3);
}

/// E|1 - Z| + B1 + B2.
[[nodiscard]] inline BoundReport kolmogorov_exact_form(const DiffProfile& p, B1Route route = B1Route::automatic) {
  require_centered(p);
  BoundReport r = make_report("mld2sk.ffjw2", "kolmogorov", "exact");
  const double e1z = p.e_abs_one_minus_z();
  const B1Result b1 = kolmogorov_b1_exact(p, route);
  const double b2 = kolmogorov_b2_exact(p);
  r.add("E|1-Z|", e1z);
  r.add("B1_exact", b1.value);
  r.add("B2_exact", b2);
  r.value = e1z + b1.value + b2;
  r.notes.push_back("B1 evaluated by the " + b1.route + " route");
  return r;
}

enum class CorollaryVariant { oold1, oold1b, o7old1q };

[[nodiscard]] constexpr const char* to_string(CorollaryVariant v) noexcept {
  switch (v) {
    case CorollaryVariant::oold1: return "oold1";
    case CorollaryVariant::oold1b: return "oold1b";
    case CorollaryVariant::o7old1q: return "o7old1q";
  }
  return "oold1";
}

/// d_K(sigma^{-1} F, N) corollaries, with sigma^2 = E F^2 of the centered
/// input:
///   sqrtVarZ/s^2 + sqrtVarZbar/s^2 + T3 + sqrt(2 pi)/(4 s^3) L_3
/// where T3 is 7/(2 s^4) * fourth_moment_product (oold1), 3 sqrt(n) L_4 / s^4
/// (oold1b) or sum_i sqrt(E|D_i F|^6) / s^3 (o7old1q).
[[nodiscard]] inline BoundReport kolmogorov_corollary(const DiffProfile& p, CorollaryVariant variant) {
  require_centered(p);
  require_nondegenerate(p);
  const double s2 = p.second_moment();
  const double s = std::sqrt(s2);
  BoundReport r = make_report(to_string(variant), "kolmogorov", to_string(variant));
  r.standardized = true;
  const double svz = std::sqrt(p.var_z());
  const double svzb = std::sqrt(p.var_zbar());
  const double l3 = p.lyapunov(3);
  double t3 = 0.0;
  r.add("sigma", s);
  r.add("sqrtVarZ", svz);
  r.add("sqrtVarZbar", svzb);
  r.add("L3", l3);
  switch (variant) {
    case CorollaryVariant::oold1: {
      const double prod = fourth_moment_product(p);
      r.add("fourth_moment_product", prod);
      t3 = 3.5 * prod / (s2 * s2);
      break;
    }
    case CorollaryVariant::oold1b: {
      const double l4 = p.lyapunov(4);
      r.add("L4", l4);
      t3 = 3.0 * std::sqrt(static_cast<double>(p.dims())) * l4 / (s2 * s2);
      break;
    }
    case CorollaryVariant::o7old1q: {
      const double sum6 = p.sum_axes([](const AxisSummary& a) { return std::sqrt(a.moment(6)); });
      r.add("sum_sqrt_E|D|^6", sum6);
      t3 = sum6 / (s2 * s);
      break;
    }
  }
  r.add("B2_variant", t3);
  r.value = svz / s2 + svzb / s2 + t3 + kSqrt2PiOver4 * l3 / (s2 * s);
  return r;
}

// ============================================================================
// Local dependence
// ============================================================================

/// (sum_k |A_k| sum_{i in A_k} E|D_i F|^4)^{1/2}.
[[nodiscard]] inline double dependency_radical(const DiffProfile& p, const std::vector<std::vector<std::size_t>>& sets) {
  double acc = 0.0;
  for (const auto& a : sets) {
    double inner = 0.0;
    for (std::size_t i : a) inner += p.axis(i).moment(4);
    acc += static_cast<double>(a.size()) * inner;
  }
  return std::sqrt(acc);
}

[[nodiscard]] inline std::string format_sets(const std::vector<std::vector<std::size_t>>& sets) {
  std::string out;
  for (std::size_t k = 0; k < sets.size(); ++k) {
    out += "A_" + std::to_string(k + 1) + "={";
    for (std::size_t q = 0; q < sets[k].size(); ++q) {
      if (q) out += ",";
      out += std::to_string(sets[k][q] + 1);
    }
    out += "}";
    if (k + 1 < sets.size()) out += " ";
  }
  return out;
}

/// Dependency sets stated for m-scans: A_k = {1..k} for k <= m-1 and
/// {k..k+m-1} otherwise (1-based, clipped to n), returned 0-based.
[[nodiscard]] inline std::vector<std::vector<std::size_t>> stated_scan_sets(std::size_t n, std::size_t m) {
  std::vector<std::vector<std::size_t>> sets(n);
  for (std::size_t k = 1; k <= n; ++k) {
    if (k + 1 <= m) {
      for (std::size_t i = 1; i <= k; ++i) sets[k - 1].push_back(i - 1);
    } else {
      for (std::size_t i = k; i <= std::min(n, k + m - 1); ++i) sets[k - 1].push_back(i - 1);
    }
  }
  return sets;
}

struct LocalDependenceReports {
  BoundReport wasserstein;
  BoundReport kolmogorov;
  std::vector<std::vector<std::size_t>> sets;
};

/// Bounds for d_W and d_K of sigma^{-1} F driven by the detected sets A_k.
/// `stated` (optional) is recorded alongside for comparison only.
[[nodiscard]] inline LocalDependenceReports local_dependence_bounds(
    const DiffProfile& p, const std::optional<std::vector<std::vector<std::size_t>>>& stated = std::nullopt) {
  require_centered(p);
  require_nondegenerate(p);
  const double s2 = p.second_moment();
  const double s = std::sqrt(s2);
  LocalDependenceReports out;
  out.sets = dependency_sets(p.tensor());
  const double rad = dependency_radical(p, out.sets);
  std::size_t widest = 0;
  for (const auto& a : out.sets) widest = std::max(widest, a.size());
  const double l3 = p.lyapunov(3);
  const double prod = fourth_moment_product(p);

  auto common = [&](BoundReport& r) {
    r.standardized = true;
    r.add("sigma", s);
    r.add("dependency_radical", rad);
    r.add("max|A_k|", static_cast<double>(widest));
    r.add("L3", l3);
    r.notes.push_back("detected " + format_sets(out.sets));
    if (stated) {
      r.add("dependency_radical_stated", dependency_radical(p, *stated));
      r.notes.push_back("stated " + format_sets(*stated));
      if (*stated != out.sets) r.notes.push_back("detected dependency sets differ from the stated ones");
    }
  };

  out.wasserstein = make_report("kjgmd5.oq1nr", "wasserstein", "local");
  common(out.wasserstein);
  out.wasserstein.value = 2.0 / s2 * kSqrt2OverPi * rad + 2.0 / (s2 * s) * l3;

  out.kolmogorov = make_report("kjgmd5.oq1nr1", "kolmogorov", "local");
  common(out.kolmogorov);
  out.kolmogorov.add("fourth_moment_product", prod);
  out.kolmogorov.value = 10.0 / s2 * rad + 3.5 * prod / (s2 * s2) + kSqrt2PiOver4 * l3 / (s2 * s);
  return out;
}

// ============================================================================
// Weighted sums in closed form (no enumeration)
// ============================================================================

/// Exact ingredients of the standardized weighted sum
/// G = sum_i a_i (X_i - mu_i) / sigma, where D_i G = P_i = a_i (X_i - mu_i)/sigma.
struct WeightedSumClosedForm {
  double variance = 0.0;  // Var(sum a_i X_i)
  double var_z = 0.0;     // Var(Z) of G
  double l3 = 0.0;        // L_3(G)
  double l4 = 0.0;        // L_4(G)
};

[[nodiscard]] inline WeightedSumClosedForm weighted_sum_closed_form(const IndependentSequence& seq,
                                                                   std::span<const double> a) {
  if (a.size() != seq.size()) throw Error(ErrorCode::arity_mismatch, "coefficient count differs from sequence length");
  WeightedSumClosedForm out;
  for (std::size_t i = 0; i < a.size(); ++i) out.variance += a[i] * a[i] * seq[i].variance();
  require_nondegenerate(out.variance, 1.0);
  const double s = std::sqrt(out.variance);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& c = seq[i];
    const double m2 = c.moment(2.0, true);
    const double m4 = c.moment(4.0, true);
    const double ai = std::abs(a[i]) / s;
    out.var_z += std::pow(ai, 4) * (m4 - m2 * m2);
    out.l3 += std::pow(ai, 3) * c.moment(3.0, true);
    out.l4 += std::pow(ai, 4) * m4;
  }
  return out;
}

/// The relaxed Wasserstein bound of the standardized weighted sum, from the
/// closed-form ingredients.
[[nodiscard]] inline BoundReport wasserstein_relaxed_weighted_sum(const IndependentSequence& seq,
                                                                  std::span<const double> a) {
  const WeightedSumClosedForm c = weighted_sum_closed_form(seq, a);
  BoundReport r = make_report("ko67d3.de2q1", "wasserstein", "relaxed");
  r.standardized = true;
  r.add("|1-EF^2|", 0.0);
  r.add("sqrtVarZ", std::sqrt(c.var_z));
  r.add("L3", c.l3);
  r.value = kSqrt2OverPi * std::sqrt(c.var_z) + 2.0 * c.l3;
  r.notes.push_back("closed-form evaluation for weighted sums");
  return r;
}

// ============================================================================
// 2-runs
// ============================================================================

/// Var(F) of F = sum_i a_{i,i+1} X_i X_{i+1} from per-coordinate means and
/// variances; coefficients outside the run are zero.
[[nodiscard]] inline double two_run_variance(const IndependentSequence& seq, std::span<const double> coeffs) {
  if (coeffs.size() + 1 != seq.size()) throw Error(ErrorCode::arity_mismatch, "2-run needs len(coeffs) + 1 coordinates");
  const std::size_t n = seq.size();
  auto coef = [&](std::ptrdiff_t i) {  // a_{i,i+1}, 0-based i
    return (i < 0 || i >= static_cast<std::ptrdiff_t>(coeffs.size())) ? 0.0 : coeffs[static_cast<std::size_t>(i)];
  };
  auto mu = [&](std::ptrdiff_t i) {
    return (i < 0 || i >= static_cast<std::ptrdiff_t>(n)) ? 0.0 : seq[static_cast<std::size_t>(i)].mean();
  };
  auto var = [&](std::ptrdiff_t i) {
    return (i < 0 || i >= static_cast<std::ptrdiff_t>(n)) ? 0.0 : seq[static_cast<std::size_t>(i)].variance();
  };
  double acc = 0.0;
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const double left = coef(i - 1);
    const double right = coef(i);
    const double lin = left * mu(i - 1) + right * mu(i + 1);
    acc += (left * left * var(i - 1) + lin * lin) * var(i);
  }
  return acc;
}

/// n sigma^4 + (4n + 1) sigma^2 mu^2: the normalization printed for the
/// i.i.d. unit-coefficient 2-run with n products.
[[nodiscard]] inline double two_run_iid_printed_variance(const DiscreteDistribution& d, std::size_t products) {
  const double n = static_cast<double>(products);
  const double s2 = d.variance();
  const double mu = d.mean();
  return n * s2 * s2 + (4.0 * n + 1.0) * s2 * mu * mu;
}

struct RunBoundReports {
  BoundReport wasserstein;
  BoundReport kolmogorov;
};

/// Explicit-constant bounds for G = (F - E F)/sqrt(Var F), F a 2-run.
/// `variance` is Var(F) (enumerated when available); x0 must dominate
/// max_i E|X_i|^4 and defaults to it.
[[nodiscard]] inline RunBoundReports run_bound_explicit(const IndependentSequence& seq, const MRunParams& run,
                                                        double variance, std::optional<double> x0 = std::nullopt) {
  if (run.m != 2) throw Error(ErrorCode::not_a_two_run, "m-run with m = " + std::to_string(run.m));
  if (run.coeffs.size() + 1 != seq.size()) throw Error(ErrorCode::not_a_two_run, "2-run needs len(coeffs) + 1 coordinates");
  double max_m4 = 0.0;
  for (const auto& c : seq.coords()) max_m4 = std::max(max_m4, c.moment(4.0, false));
  const double x = x0.value_or(max_m4);
  if (!(x >= max_m4 * (1.0 - 1e-12))) {
    throw Error(ErrorCode::bad_moment_bound, "x0 = " + std::to_string(x) + " is below max E|X_i|^4 = " +
                                                 std::to_string(max_m4));
  }
  double scale = 1.0;
  for (double a : run.coeffs) scale = std::max(scale, a * a);
  require_nondegenerate(variance, scale);

  double s2 = 0.0, s3 = 0.0, s4 = 0.0;
  for (double a : run.coeffs) {
    const double b = std::abs(a);
    s2 += b * b;
    s3 += b * b * b;
    s4 += b * b * b * b;
  }
  const double formula = two_run_variance(seq, run.coeffs);

  auto common = [&](BoundReport& r) {
    r.standardized = true;
    r.add("VarF", variance);
    r.add("VarF_formula", formula);
    r.add("x0", x);
    r.add("sum|a|^2", s2);
    r.add("sum|a|^3", s3);
    r.add("sum|a|^4", s4);
    const bool unit = std::all_of(run.coeffs.begin(), run.coeffs.end(), [](double a) { return a == 1.0; });
    if (seq.identically_distributed() && unit) {
      const double printed = two_run_iid_printed_variance(seq[0], run.coeffs.size());
      r.add("VarF_iid_printed", printed);
      if (std::abs(printed - variance) > 1e-10 * std::max(1.0, variance)) {
        r.notes.push_back("the i.i.d. normalization n*s^4 + (4n+1)*s^2*mu^2 = " + std::to_string(printed) +
                          " differs from Var(F) = " + std::to_string(variance) +
                          "; n*s^4 + (4n-2)*s^2*mu^2 matches, and Var(F) is used");
      }
    }
  };

  RunBoundReports out;
  out.wasserstein = make_report("runs.gfgfe", "wasserstein", "run");
  common(out.wasserstein);
  out.wasserstein.value = 96.0 * kSqrt2OverPi * x * std::sqrt(s4) / variance +
                          128.0 * std::pow(x, 1.5) * s3 / std::pow(variance, 1.5);

  out.kolmogorov = make_report("runs.kkddfnmqo9", "kolmogorov", "run");
  common(out.kolmogorov);
  const double var_z_term = 96.0 * x * std::sqrt(s4) / variance;            // sqrt(36*256 x0^2 s4)/Var
  const double var_zbar_term = 384.0 * x * std::sqrt(s4) / variance;        // sqrt(36*16*256 x0^2 s4)/Var
  const double middle = 7.0 * 128.0 * std::numbers::sqrt2 * x * x * std::sqrt(s2) * s3 / (variance * variance);
  const double lyap = kSqrt2PiOver4 * 64.0 * std::pow(x, 1.5) * s3 / std::pow(variance, 1.5);
  out.kolmogorov.add("VarZ_term", var_z_term);
  out.kolmogorov.add("VarZbar_term", var_zbar_term);
  out.kolmogorov.add("fourth_moment_term", middle);
  out.kolmogorov.add("L3_term", lyap);
  out.kolmogorov.value = var_z_term + var_zbar_term + middle + lyap;
  return out;
}

// ============================================================================
// Structural forms (constant set to 1, never rigorous)
// ============================================================================

/// Reachable sums of a window and their probabilities.
[[nodiscard]] inline std::vector<Atom> window_sum_law(const IndependentSequence& seq, std::size_t start, std::size_t m) {
  std::vector<Atom> law{{0.0, 1.0}};
  for (std::size_t k = 0; k < m; ++k) {
    std::vector<double> v;
    std::vector<double> w;
    for (const Atom& a : law) {
      for (const Atom& b : seq[start + k].atoms()) {
        v.push_back(a.value + b.value);
        w.push_back(a.prob * b.prob);
      }
    }
    const FiniteLaw merged = FiniteLaw::from_weighted(v, w);
    law.assign(merged.atoms().begin(), merged.atoms().end());
  }
  return law;
}

/// Structural quantities for quadratic forms and m-scan type functionals.
/// `variance` is Var(F) of the raw functional.
[[nodiscard]] inline BoundReport structural_closed_forms(const Functional& f, const IndependentSequence& seq,
                                                         double variance) {
  BoundReport r = make_report("structural", "wasserstein", "structural");
  r.structural = true;
  r.notes.push_back("unspecified absolute constants set to 1; not a rigorous bound");
  const double s2 = variance;
  const double s = std::sqrt(std::max(0.0, s2));
  if (const auto* q = std::get_if<QuadraticFormParams>(&f.params())) {
    const std::size_t n = q->n;
    double vz = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        double inner = 0.0;
        for (std::size_t i = k; i < n; ++i) inner += q->at(i, j) * q->at(i, k);
        vz += inner * inner;
      }
    }
    vz *= 2.0;
    double rows32 = 0.0;
    double rows2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += q->at(i, j) * q->at(i, j);
      rows32 += std::pow(row, 1.5);
      rows2 += row * row;
    }
    r.theorem = "dh5slqo.quadratic5";
    r.add("VarZ_structural", vz);
    r.add("sum_rows^(3/2)", rows32);
    r.add("sum_rows^2", rows2);
    if (s2 > 0.0) {
      const double w = std::sqrt(vz / (s2 * s2)) + rows32 / (s2 * s);
      r.add("quadratic5", w);
      r.add("quadratic5b", w + std::sqrt(rows2 / (s2 * s2)));
      r.value = w;
    }
    return r;
  }
  std::size_t m = 0;
  std::size_t windows = 0;
  std::function<double(std::size_t, double)> fi;
  if (const auto* sc = std::get_if<MScanParams>(&f.params())) {
    m = sc->m;
    windows = sc->windows.size();
    fi = [sc](std::size_t i, double r) { return sc->windows[i].lookup(r); };
  } else if (const auto* ex = std::get_if<ExceedanceParams>(&f.params())) {
    m = ex->m;
    windows = f.arity() - m + 1;
    // Centered indicators 1{R_i > a} - P(R_i > a).
    auto probs = std::make_shared<std::vector<double>>();
    for (std::size_t i = 0; i < windows; ++i) {
      double p = 0.0;
      for (const Atom& a : window_sum_law(seq, i, m)) {
        if (a.value > ex->threshold) p += a.prob;
      }
      probs->push_back(p);
    }
    const double thr = ex->threshold;
    fi = [probs, thr](std::size_t i, double r) { return (r > thr ? 1.0 : 0.0) - (*probs)[i]; };
  } else {
    throw Error(ErrorCode::unsupported_kind, std::string("no structural form for kind ") +
                                                 std::string(to_string(f.kind())));
  }
  double sum4 = 0.0;
  double sum3 = 0.0;
  double worst_mean = 0.0;
  for (std::size_t i = 0; i < windows; ++i) {
    double e1 = 0.0;
    for (const Atom& a : window_sum_law(seq, i, m)) {
      const double v = fi(i, a.value);
      e1 += a.prob * v;
      sum3 += a.prob * std::pow(std::abs(v), 3);
      sum4 += a.prob * std::pow(std::abs(v), 4);
    }
    worst_mean = std::max(worst_mean, std::abs(e1));
  }
  r.theorem = "yydljq1.oq1nr9";
  const double m3 = std::pow(static_cast<double>(m), 3);
  r.add("m", static_cast<double>(m));
  r.add("sum_E|f(R)|^4", sum4);
  r.add("sum_E|f(R)|^3", sum3);
  if (worst_mean > 1e-10) r.notes.push_back("window functions are not centered");
  if (s2 > 0.0) {
    r.value = m3 * (std::sqrt(sum4) / s2 + sum3 / (s2 * s));
    r.add("oq1nr9", r.value);
  }
  return r;
}

}  // namespace steinlab
