#pragma once

// Exact distances between the enumerated law of F and N(0,1) or Pn(theta).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "steinlab/distributions.hpp"
#include "steinlab/error.hpp"
#include "steinlab/eval_tensor.hpp"

namespace steinlab {

class FiniteLaw {
 public:
  /// Builds a law from (value, weight) pairs, merging values that agree to
  /// 1e-12 relative (max(1, |v|)). When `atom_of` is given it receives the
  /// atom index of every input value.
  static FiniteLaw from_weighted(std::span<const double> values, std::span<const double> weights,
                                 std::vector<std::size_t>* atom_of = nullptr) {
    if (values.empty() || values.size() != weights.size()) {
      throw Error(ErrorCode::invalid_argument, "a law needs matching non-empty values and weights");
    }
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    FiniteLaw law;
    double anchor = values[order[0]];
    double mass = 0.0;
    double first = anchor;
    if (atom_of) atom_of->assign(values.size(), 0);
    for (std::size_t k : order) {
      const double v = values[k];
      if (std::abs(v - anchor) > 1e-12 * std::max(1.0, std::abs(anchor))) {
        law.atoms_.push_back({first, mass});
        anchor = v;
        first = v;
        mass = 0.0;
      }
      mass += weights[k];
      if (atom_of) (*atom_of)[k] = law.atoms_.size();
    }
    law.atoms_.push_back({first, mass});
    law.finish();
    return law;
  }

  static FiniteLaw from_atoms(std::vector<Atom> atoms) {
    std::vector<double> v;
    std::vector<double> w;
    for (const Atom& a : atoms) {
      v.push_back(a.value);
      w.push_back(a.prob);
    }
    return from_weighted(v, w);
  }

  [[nodiscard]] std::span<const Atom> atoms() const noexcept { return atoms_; }
  [[nodiscard]] std::span<const double> cdf() const noexcept { return cdf_; }
  [[nodiscard]] std::size_t size() const noexcept { return atoms_.size(); }
  [[nodiscard]] double min() const { return atoms_.front().value; }
  [[nodiscard]] double max() const { return atoms_.back().value; }

  [[nodiscard]] double mean() const {
    double m = 0.0;
    for (const Atom& a : atoms_) m += a.prob * a.value;
    return m;
  }

  /// True when every atom lies within 1e-9 of a non-negative integer.
  [[nodiscard]] bool natural_valued() const {
    return std::all_of(atoms_.begin(), atoms_.end(), [](const Atom& a) {
      const double r = std::nearbyint(a.value);
      return std::abs(a.value - r) <= kIntegerTolerance && r >= 0.0;
    });
  }

  /// P(F = k) for k = 0..max, after snapping atoms to integers.
  [[nodiscard]] std::vector<double> integer_masses() const {
    if (!natural_valued()) throw Error(ErrorCode::not_integer_valued, "law has atoms outside the natural numbers");
    const auto top = static_cast<std::size_t>(std::nearbyint(max()));
    std::vector<double> mass(top + 1, 0.0);
    for (const Atom& a : atoms_) mass[static_cast<std::size_t>(std::nearbyint(a.value))] += a.prob;
    return mass;
  }

 private:
  void finish() {
    cdf_.resize(atoms_.size());
    double run = 0.0;
    for (std::size_t j = 0; j < atoms_.size(); ++j) {
      run += atoms_[j].prob;
      cdf_[j] = run;
    }
  }

  std::vector<Atom> atoms_;
  std::vector<double> cdf_;
};

[[nodiscard]] inline FiniteLaw law_of(const EvalTensor& t) {
  return FiniteLaw::from_weighted(t.values(), t.grid().weights());
}

/// Law of F together with the atom index of every grid point.
struct IndexedLaw {
  FiniteLaw law;
  std::vector<std::size_t> atom_of;
};

[[nodiscard]] inline IndexedLaw indexed_law_of(const EvalTensor& t) {
  IndexedLaw out;
  out.law = FiniteLaw::from_weighted(t.values(), t.grid().weights(), &out.atom_of);
  return out;
}

enum class Metric { dk_normal, dw_normal, dtv_poisson, dw_poisson };

[[nodiscard]] constexpr std::string_view to_string(Metric m) noexcept {
  switch (m) {
    case Metric::dk_normal: return "dK_normal";
    case Metric::dw_normal: return "dW_normal";
    case Metric::dtv_poisson: return "dTV_poisson";
    case Metric::dw_poisson: return "dW_poisson";
  }
  return "unknown";
}

struct DistanceResult {
  Metric metric;
  double value = 0.0;
  double numerical_error = 0.0;
};

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

/// sup_x |P(F <= x) - Phi(x)|, attained at an atom or just below one.
[[nodiscard]] inline DistanceResult dk_vs_normal(const FiniteLaw& law) {
  double best = 0.0;
  double below = 0.0;
  for (std::size_t j = 0; j < law.size(); ++j) {
    const double phi = normal_cdf(law.atoms()[j].value);
    best = std::max({best, std::abs(below - phi), std::abs(law.cdf()[j] - phi)});
    below = law.cdf()[j];
  }
  // Phi accurate to ~1e-16; CDF partial sums carry ~n eps.
  const double err = 4.0 * kEps * (1.0 + static_cast<double>(law.size()));
  return {Metric::dk_normal, best, err};
}

/// int |CDF_F - Phi| dx using exact antiderivatives on every constant-CDF
/// segment, split where Phi crosses the segment level.
[[nodiscard]] inline DistanceResult dw_vs_normal(const FiniteLaw& law, double crossing_tol = 1e-12) {
  const auto atoms = law.atoms();
  const auto cdf = law.cdf();
  std::size_t segments = 0;
  std::size_t crossings = 0;
  double max_abs = 0.0;

  // int_a^b (c - Phi(x)) dx, choosing the antiderivative that avoids
  // cancellation on the side of the origin where the segment sits.
  auto signed_area = [&](double c, double a, double b) {
    ++segments;
    max_abs = std::max({max_abs, std::abs(a), std::abs(b)});
    if (0.5 * (a + b) < 0.0) return c * (b - a) - (normal_cdf_integral(b) - normal_cdf_integral(a));
    return (c - 1.0) * (b - a) + (normal_sf_integral(a) - normal_sf_integral(b));
  };

  double total = normal_cdf_integral(atoms.front().value);  // left tail, CDF = 0
  max_abs = std::abs(atoms.front().value);
  for (std::size_t j = 0; j + 1 < atoms.size(); ++j) {
    const double a = atoms[j].value;
    const double b = atoms[j + 1].value;
    const double c = std::min(1.0, cdf[j]);
    const double x = normal_quantile(c, crossing_tol);
    if (x > a && x < b) {
      ++crossings;
      total += std::abs(signed_area(c, a, x)) + std::abs(signed_area(c, x, b));
    } else {
      total += std::abs(signed_area(c, a, b));
    }
  }
  total += normal_sf_integral(atoms.back().value);  // right tail, CDF = 1
  max_abs = std::max(max_abs, std::abs(atoms.back().value));
  const double err = static_cast<double>(segments + 2) * 64.0 * kEps * (1.0 + max_abs) +
                     static_cast<double>(crossings) * crossing_tol * crossing_tol;
  return {Metric::dw_normal, total, err};
}

namespace detail {

/// Poisson masses on 0..K with K large enough that the neglected tail is
/// below 1e-25 and the pmf ratio theta / (k + 1) is at most 1/2 past K.
struct PoissonTable {
  std::vector<double> pmf;
  std::vector<double> upper;  // P(Pn > k)
  double neglected = 0.0;     // bound on P(Pn > K)
};

[[nodiscard]] inline PoissonTable poisson_table(double theta, std::size_t at_least) {
  require_positive_theta(theta);
  PoissonTable t;
  std::size_t k = 0;
  for (;; ++k) {
    const double p = poisson_pmf(theta, k);
    t.pmf.push_back(p);
    if (k >= at_least && static_cast<double>(k) >= 2.0 * theta + 10.0 && p < 1e-25) break;
  }
  // Beyond K the ratio is <= 1/2, so P(Pn > K) <= pmf(K).
  t.neglected = t.pmf.back();
  t.upper.assign(t.pmf.size(), 0.0);
  double run = t.neglected;
  for (std::size_t j = t.pmf.size(); j > 0; --j) {
    t.upper[j - 1] = run;
    run += t.pmf[j - 1];
  }
  return t;
}

}  // namespace detail

/// (1/2) sum_k |P(F = k) - P(Pn(theta) = k)|.
[[nodiscard]] inline DistanceResult dtv_vs_poisson(const FiniteLaw& law, double theta) {
  const std::vector<double> mass = law.integer_masses();
  const auto table = detail::poisson_table(theta, mass.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < table.pmf.size(); ++k) {
    const double f = k < mass.size() ? mass[k] : 0.0;
    acc += std::abs(f - table.pmf[k]);
  }
  acc += table.upper.back();  // P(F = k) = 0 past the table
  const double err = table.neglected + 4.0 * kEps * static_cast<double>(table.pmf.size());
  return {Metric::dtv_poisson, 0.5 * acc, err};
}

/// sum_k |P(F <= k) - P(Pn(theta) <= k)|, written with survival functions
/// so the tail does not cancel.
[[nodiscard]] inline DistanceResult dw_vs_poisson(const FiniteLaw& law, double theta) {
  const std::vector<double> mass = law.integer_masses();
  const auto table = detail::poisson_table(theta, mass.size());
  std::vector<double> survival(mass.size(), 0.0);
  double run = 0.0;
  for (std::size_t j = mass.size(); j > 0; --j) {
    survival[j - 1] = run;
    run += mass[j - 1];
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < table.pmf.size(); ++k) {
    const double sf = k < survival.size() ? survival[k] : 0.0;
    acc += std::abs(sf - table.upper[k]);
  }
  // Past the table, sum_{k > K} P(Pn > k) <= 2 P(Pn > K) by the ratio bound.
  const double err = 4.0 * table.neglected + 4.0 * kEps * static_cast<double>(table.pmf.size());
  return {Metric::dw_poisson, acc, err};
}

}  // namespace steinlab
