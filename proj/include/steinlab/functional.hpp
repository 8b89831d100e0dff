#pragma once

// Functionals F(X_1, ..., X_n) of an independent sequence, plus constructors
// for the standard families: weighted sums, normalized partial sums,
// Rademacher-style quadratic forms, m-runs, m-scan sums, exceedance counts,
// explicit value tables and arbitrary callbacks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "steinlab/error.hpp"
#include "steinlab/prob_model.hpp"

namespace steinlab {

enum class FunctionalKind { weighted_sum, partial_sum, quadratic_form, m_run, m_scan, exceedance_count, custom };

[[nodiscard]] constexpr std::string_view to_string(FunctionalKind kind) noexcept {
  switch (kind) {
    case FunctionalKind::weighted_sum: return "weighted_sum";
    case FunctionalKind::partial_sum: return "partial_sum";
    case FunctionalKind::quadratic_form: return "quadratic_form";
    case FunctionalKind::m_run: return "m_run";
    case FunctionalKind::m_scan: return "m_scan";
    case FunctionalKind::exceedance_count: return "exceedance_count";
    case FunctionalKind::custom: return "custom";
  }
  return "custom";
}

inline constexpr double kIntegerTolerance = 1e-9;

struct WeightedSumParams {
  std::vector<double> coeffs;
  bool centered = false;
};

/// Symmetric matrix with zero diagonal, row-major n x n.
struct QuadraticFormParams {
  std::size_t n = 0;
  std::vector<double> entries;

  [[nodiscard]] double at(std::size_t i, std::size_t j) const { return entries[i * n + j]; }
};

struct MRunParams {
  std::vector<double> coeffs;
  std::size_t m = 2;
};

/// f_i as a lookup table over the reachable window sums.
struct WindowTable {
  std::vector<double> sums;
  std::vector<double> values;

  [[nodiscard]] double lookup(double r) const {
    const auto it = std::lower_bound(sums.begin(), sums.end(), r - tolerance(r));
    if (it != sums.end() && std::abs(*it - r) <= tolerance(r)) {
      return values[static_cast<std::size_t>(it - sums.begin())];
    }
    throw Error(ErrorCode::window_out_of_range, "window sum " + std::to_string(r) + " missing from lookup table");
  }

  static double tolerance(double r) { return 1e-9 * std::max(1.0, std::abs(r)); }
};

struct MScanParams {
  std::size_t m = 1;
  std::vector<WindowTable> windows;
};

struct ExceedanceParams {
  double threshold = 0.0;
  std::size_t m = 1;
};

struct TableParams {
  std::vector<double> values;
};

struct CallbackParams {};

using FunctionalParams = std::variant<WeightedSumParams, QuadraticFormParams, MRunParams, MScanParams,
                                      ExceedanceParams, TableParams, CallbackParams>;

/// Everything an evaluator may look at for one grid point.
struct EvalPoint {
  std::span<const double> values;
  std::span<const std::size_t> indices;
  std::size_t flat_index = 0;
  const IndependentSequence* sequence = nullptr;
};

class Functional {
 public:
  using Evaluator = std::function<double(const EvalPoint&)>;

  Functional(std::size_t arity, FunctionalKind kind, FunctionalParams params, Evaluator eval,
             std::optional<bool> integer_valued = std::nullopt)
      : arity_(arity),
        kind_(kind),
        params_(std::make_shared<const FunctionalParams>(std::move(params))),
        eval_(std::move(eval)),
        integer_valued_(integer_valued) {}

  [[nodiscard]] std::size_t arity() const noexcept { return arity_; }
  [[nodiscard]] FunctionalKind kind() const noexcept { return kind_; }
  [[nodiscard]] const FunctionalParams& params() const noexcept { return *params_; }
  [[nodiscard]] std::optional<bool> declared_integer_valued() const noexcept { return integer_valued_; }

  [[nodiscard]] double operator()(const EvalPoint& point) const { return eval_(point); }

  void check_arity(const IndependentSequence& seq) const {
    if (seq.size() != arity_) {
      throw Error(ErrorCode::arity_mismatch, std::string(to_string(kind_)) + " expects " + std::to_string(arity_) +
                                                 " coordinates, sequence has " + std::to_string(seq.size()));
    }
  }

  /// Convenience single-point evaluation (flat index computed row-major).
  [[nodiscard]] double evaluate(const IndependentSequence& seq, const Outcome& o) const {
    check_arity(seq);
    std::vector<double> values(seq.size());
    outcome_values(seq, o, values);
    std::size_t flat = 0;
    for (std::size_t i = 0; i < seq.size(); ++i) flat = flat * seq[i].size() + o.indices[i];
    return eval_(EvalPoint{values, o.indices, flat, &seq});
  }

 private:
  std::size_t arity_;
  FunctionalKind kind_;
  std::shared_ptr<const FunctionalParams> params_;
  Evaluator eval_;
  std::optional<bool> integer_valued_;
};

/// x -> (x - shift) / scale, used to center and standardize functionals.
struct Affine {
  double shift = 0.0;
  double scale = 1.0;

  [[nodiscard]] double operator()(double v) const noexcept { return (v - shift) / scale; }
};

// ============================================================================
// Constructors
// ============================================================================

/// F(x) = sum_i a_i x_i, minus sum_i a_i mu_i when `center` is set.
[[nodiscard]] inline Functional weighted_sum(std::vector<double> a, bool center = false) {
  if (a.empty()) throw Error(ErrorCode::bad_arity, "weighted_sum needs at least one coefficient");
  const std::size_t n = a.size();
  auto eval = [a, center](const EvalPoint& p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double shift = center ? (*p.sequence)[i].mean() : 0.0;
      acc += a[i] * (p.values[i] - shift);
    }
    return acc;
  };
  return Functional(n, FunctionalKind::weighted_sum, WeightedSumParams{std::move(a), center}, std::move(eval));
}

/// Normalized partial sum S_n = sum_i (X_i - mu_i) / sqrt(sum_i sigma_i^2).
[[nodiscard]] inline Functional partial_sum(const IndependentSequence& seq) {
  double total_var = 0.0;
  for (const auto& c : seq.coords()) total_var += c.variance();
  if (!(total_var > 0.0)) throw Error(ErrorCode::degenerate_variance, "partial_sum of degenerate coordinates");
  std::vector<double> a(seq.size(), 1.0 / std::sqrt(total_var));
  Functional ws = weighted_sum(a, true);
  const std::size_t n = ws.arity();
  return Functional(n, FunctionalKind::partial_sum, WeightedSumParams{std::move(a), true},
                    [ws](const EvalPoint& p) { return ws(p); });
}

/// F(x) = sum_{i<j} a_ij x_i x_j. The matrix must be symmetric with zero diagonal.
[[nodiscard]] inline Functional quadratic_form(const std::vector<std::vector<double>>& matrix) {
  const std::size_t n = matrix.size();
  if (n == 0) throw Error(ErrorCode::bad_arity, "quadratic_form needs a non-empty matrix");
  QuadraticFormParams q{n, std::vector<double>(n * n)};
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (matrix[i].size() != n) throw Error(ErrorCode::bad_arity, "quadratic_form matrix is not square");
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(matrix[i][j])) throw Error(ErrorCode::non_finite_value, "matrix entry is not finite");
      q.entries[i * n + j] = matrix[i][j];
      scale = std::max(scale, std::abs(matrix[i][j]));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (q.at(i, i) != 0.0) {
      throw Error(ErrorCode::nonzero_diagonal, "diagonal entry a_" + std::to_string(i + 1) + std::to_string(i + 1) +
                                                   " = " + std::to_string(q.at(i, i)) + " must be zero");
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(q.at(i, j) - q.at(j, i)) > 1e-12 * std::max(1.0, scale)) {
        throw Error(ErrorCode::non_symmetric, "matrix is not symmetric at (" + std::to_string(i + 1) + ", " +
                                                  std::to_string(j + 1) + ")");
      }
    }
  }
  auto eval = [q](const EvalPoint& p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < q.n; ++i) {
      double row = 0.0;
      for (std::size_t j = i + 1; j < q.n; ++j) row += q.at(i, j) * p.values[j];
      acc += p.values[i] * row;
    }
    return acc;
  };
  return Functional(n, FunctionalKind::quadratic_form, std::move(q), std::move(eval));
}

/// F(x) = sum_i c_i x_i x_{i+1} ... x_{i+m-1}; arity = len(coeffs) + m - 1.
[[nodiscard]] inline Functional m_run(std::vector<double> coeffs, std::size_t m) {
  if (coeffs.empty() || m < 2) throw Error(ErrorCode::bad_arity, "m_run needs m >= 2 and at least one coefficient");
  const std::size_t n = coeffs.size() + m - 1;
  auto eval = [coeffs, m](const EvalPoint& p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      double prod = coeffs[i];
      for (std::size_t k = 0; k < m; ++k) prod *= p.values[i + k];
      acc += prod;
    }
    return acc;
  };
  return Functional(n, FunctionalKind::m_run, MRunParams{std::move(coeffs), m}, std::move(eval));
}

/// F(x) = sum_i f_i(R_i) with window sums R_i = x_i + ... + x_{i+m-1}.
/// Window i covers coordinates i..i+m-1 (0-based).
[[nodiscard]] inline Functional m_scan(std::size_t m, std::vector<WindowTable> windows, std::size_t arity) {
  if (m < 1 || arity < m) throw Error(ErrorCode::bad_arity, "m_scan needs 1 <= m <= arity");
  if (windows.size() > arity - m + 1) {
    throw Error(ErrorCode::window_out_of_range, std::to_string(windows.size()) + " windows of width " +
                                                    std::to_string(m) + " do not fit in arity " +
                                                    std::to_string(arity));
  }
  for (auto& w : windows) {
    if (w.sums.size() != w.values.size()) throw Error(ErrorCode::schema_error, "window table sums/values differ in length");
    std::vector<std::size_t> order(w.sums.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w.sums[a] < w.sums[b]; });
    WindowTable sorted;
    for (std::size_t k : order) {
      sorted.sums.push_back(w.sums[k]);
      sorted.values.push_back(w.values[k]);
    }
    w = std::move(sorted);
  }
  auto eval = [m, windows](const EvalPoint& p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
      double r = 0.0;
      for (std::size_t k = 0; k < m; ++k) r += p.values[i + k];
      acc += windows[i].lookup(r);
    }
    return acc;
  };
  return Functional(arity, FunctionalKind::m_scan, MScanParams{m, std::move(windows)}, std::move(eval));
}

/// Reachable values of x_i + ... + x_{i+m-1}, sorted and merged at the
/// lookup tolerance.
[[nodiscard]] inline std::vector<double> reachable_window_sums(const IndependentSequence& seq, std::size_t start,
                                                               std::size_t m) {
  std::vector<double> sums{0.0};
  for (std::size_t k = 0; k < m; ++k) {
    std::vector<double> next;
    for (double s : sums) {
      for (const Atom& a : seq[start + k].atoms()) next.push_back(s + a.value);
    }
    std::sort(next.begin(), next.end());
    sums.clear();
    for (double v : next) {
      if (sums.empty() || std::abs(v - sums.back()) > WindowTable::tolerance(v)) sums.push_back(v);
    }
  }
  return sums;
}

/// m-scan whose tables are generated from f(window, r) on the reachable sums
/// of `seq`; one window per admissible start position.
[[nodiscard]] inline Functional m_scan_from(const IndependentSequence& seq, std::size_t m,
                                            const std::function<double(std::size_t, double)>& f) {
  if (m < 1 || seq.size() < m) throw Error(ErrorCode::bad_arity, "m_scan needs 1 <= m <= arity");
  std::vector<WindowTable> windows;
  for (std::size_t i = 0; i + m <= seq.size(); ++i) {
    WindowTable t;
    t.sums = reachable_window_sums(seq, i, m);
    for (double r : t.sums) t.values.push_back(f(i, r));
    windows.push_back(std::move(t));
  }
  return m_scan(m, std::move(windows), seq.size());
}

/// W(x) = sum_i 1{R_i(x) > a} over the arity - m + 1 windows of width m.
[[nodiscard]] inline Functional exceedance_count(double a, std::size_t m, std::size_t arity) {
  if (m < 1 || arity < m) throw Error(ErrorCode::bad_arity, "exceedance_count needs 1 <= m <= arity");
  auto eval = [a, m, arity](const EvalPoint& p) {
    double count = 0.0;
    for (std::size_t i = 0; i + m <= arity; ++i) {
      double r = 0.0;
      for (std::size_t k = 0; k < m; ++k) r += p.values[i + k];
      if (r > a) count += 1.0;
    }
    return count;
  };
  return Functional(arity, FunctionalKind::exceedance_count, ExceedanceParams{a, m}, std::move(eval), true);
}

/// Arbitrary callback on the coordinate values (API only).
[[nodiscard]] inline Functional custom(std::size_t n, std::function<double(std::span<const double>)> fn,
                                       std::optional<bool> integer_valued = std::nullopt) {
  if (n == 0) throw Error(ErrorCode::bad_arity, "custom functional needs arity >= 1");
  auto eval = [fn = std::move(fn)](const EvalPoint& p) { return fn(p.values); };
  return Functional(n, FunctionalKind::custom, CallbackParams{}, std::move(eval), integer_valued);
}

/// Explicit value table in row-major enumeration order. The table length
/// must equal the grid size of the sequence it is evaluated on.
[[nodiscard]] inline Functional table(std::vector<double> values, std::size_t arity,
                                      std::optional<bool> integer_valued = std::nullopt) {
  if (arity == 0) throw Error(ErrorCode::bad_arity, "table functional needs arity >= 1");
  auto shared = std::make_shared<const std::vector<double>>(values);
  auto eval = [shared](const EvalPoint& p) {
    if (p.flat_index >= shared->size()) {
      throw Error(ErrorCode::arity_mismatch, "table has " + std::to_string(shared->size()) + " entries, grid point " +
                                                 std::to_string(p.flat_index) + " requested");
    }
    return (*shared)[p.flat_index];
  };
  return Functional(arity, FunctionalKind::custom, TableParams{std::move(values)}, std::move(eval), integer_valued);
}

}  // namespace steinlab
