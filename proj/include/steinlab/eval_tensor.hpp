#pragma once

// A functional evaluated on the full product grid, plus the axis-wise
// operator calculus: E_i, D_i = I - E_i, (d_i F)^2, prefix conditionals
// E[F | F_i], second-order differences and dependency sets.
//
// Layout is row-major with the last coordinate fastest, so flat index
//   k = ((o * s_i) + j) * stride_i + r
// splits into an outer block o (coordinates before i), the atom j of
// coordinate i and an inner offset r (coordinates after i).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "steinlab/error.hpp"
#include "steinlab/functional.hpp"
#include "steinlab/parallel.hpp"
#include "steinlab/prob_model.hpp"

namespace steinlab {

/// Shape and probability weights shared by every tensor on the same grid.
class Grid {
 public:
  explicit Grid(IndependentSequence seq, std::uint64_t cap = default_grid_cap()) : seq_(std::move(seq)) {
    seq_.require_enumerable(cap);
    const std::size_t n = seq_.size();
    axes_ = seq_.axes();
    strides_.assign(n, 1);
    for (std::size_t i = n - 1; i > 0; --i) strides_[i - 1] = strides_[i] * axes_[i];
    size_ = strides_[0] * axes_[0];
    axis_weights_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (const Atom& a : seq_[i].atoms()) axis_weights_[i].push_back(a.prob);
    }
    // Outer product, left to right, matching the enumeration weights.
    weights_.reserve(size_);
    weights_.push_back(1.0);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> next(weights_.size() * axes_[i]);
      for (std::size_t a = 0; a < weights_.size(); ++a) {
        for (std::size_t j = 0; j < axes_[i]; ++j) next[a * axes_[i] + j] = weights_[a] * axis_weights_[i][j];
      }
      weights_ = std::move(next);
    }
  }

  [[nodiscard]] const IndependentSequence& sequence() const noexcept { return seq_; }
  [[nodiscard]] std::size_t dims() const noexcept { return axes_.size(); }
  [[nodiscard]] std::size_t size() const noexcept { return size_; }
  [[nodiscard]] std::span<const std::size_t> axes() const noexcept { return axes_; }
  [[nodiscard]] std::size_t axis(std::size_t i) const { return axes_[i]; }
  [[nodiscard]] std::size_t stride(std::size_t i) const { return strides_[i]; }
  [[nodiscard]] std::span<const double> axis_weights(std::size_t i) const { return axis_weights_[i]; }
  [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }

  void check_axis(std::size_t i) const {
    if (i >= dims()) {
      throw Error(ErrorCode::axis_out_of_range,
                  "axis " + std::to_string(i) + " outside [0, " + std::to_string(dims()) + ")");
    }
  }

  /// Atom index of coordinate i at flat position k.
  [[nodiscard]] std::size_t coordinate(std::size_t k, std::size_t i) const { return (k / strides_[i]) % axes_[i]; }

 private:
  IndependentSequence seq_;
  std::vector<std::size_t> axes_;
  std::vector<std::size_t> strides_;
  std::vector<std::vector<double>> axis_weights_;
  std::vector<double> weights_;
  std::size_t size_ = 1;
};

using GridPtr = std::shared_ptr<const Grid>;

[[nodiscard]] inline GridPtr make_grid(const IndependentSequence& seq, std::uint64_t cap = default_grid_cap()) {
  return std::make_shared<const Grid>(seq, cap);
}

class EvalTensor {
 public:
  EvalTensor(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_->size()) {
      throw Error(ErrorCode::shape_mismatch, "tensor has " + std::to_string(values_.size()) +
                                                 " values, grid has " + std::to_string(grid_->size()));
    }
  }

  [[nodiscard]] const GridPtr& grid_ptr() const noexcept { return grid_; }
  [[nodiscard]] const Grid& grid() const noexcept { return *grid_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] double operator[](std::size_t k) const { return values_[k]; }

  /// max|F| v 1, the reference magnitude for relative tolerances.
  [[nodiscard]] double scale() const {
    double m = 1.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  [[nodiscard]] bool same_grid(const EvalTensor& other) const {
    return grid_ == other.grid_ || (grid_->axes().size() == other.grid_->axes().size() &&
                                    std::equal(grid_->axes().begin(), grid_->axes().end(), other.grid_->axes().begin()) &&
                                    grid_->sequence() == other.grid_->sequence());
  }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

// ============================================================================
// Construction
// ============================================================================

[[nodiscard]] inline EvalTensor build_eval_tensor(const GridPtr& grid, const Functional& f) {
  const IndependentSequence& seq = grid->sequence();
  f.check_arity(seq);
  const std::size_t n = grid->dims();
  std::vector<double> values(grid->size());
  parallel_blocks(grid->size(), [&](std::size_t lo, std::size_t hi) {
    std::vector<std::size_t> idx(n);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      idx[i] = grid->coordinate(lo, i);
      x[i] = seq[i].value(idx[i]);
    }
    for (std::size_t k = lo; k < hi; ++k) {
      const double v = f(EvalPoint{x, idx, k, &seq});
      if (!std::isfinite(v)) throw Error(ErrorCode::non_finite_value, "functional is not finite at grid point " + std::to_string(k));
      values[k] = v;
      for (std::size_t pos = n; pos > 0; --pos) {
        const std::size_t i = pos - 1;
        if (++idx[i] < grid->axis(i)) {
          x[i] = seq[i].value(idx[i]);
          break;
        }
        idx[i] = 0;
        x[i] = seq[i].value(0);
      }
    }
  });
  return EvalTensor(grid, std::move(values));
}

[[nodiscard]] inline EvalTensor build_eval_tensor(const IndependentSequence& seq, const Functional& f,
                                                  std::uint64_t cap = default_grid_cap()) {
  return build_eval_tensor(make_grid(seq, cap), f);
}

/// True when every value is within 1e-9 of an integer.
[[nodiscard]] inline bool values_integer_valued(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::abs(v - std::nearbyint(v)) <= kIntegerTolerance; });
}

// ============================================================================
// Reductions and axis contractions
// ============================================================================

/// E[g] for g given per grid point; deterministic pairwise tree.
template <class Term>
[[nodiscard]] double weighted_mean(const Grid& grid, const Term& term) {
  const auto w = grid.weights();
  return deterministic_sum(grid.size(), [&](std::size_t k) { return w[k] * term(k); });
}

[[nodiscard]] inline double expectation(const EvalTensor& t) {
  return weighted_mean(t.grid(), [&](std::size_t k) { return t[k]; });
}

/// Same expectation summed in reverse order (a different reduction tree).
[[nodiscard]] inline double expectation_reversed(const EvalTensor& t) {
  const std::size_t last = t.size() - 1;
  const auto w = t.grid().weights();
  return deterministic_sum(t.size(), [&](std::size_t k) { return w[last - k] * t[last - k]; });
}

/// Contracts axis i of `values` (shape given by `axes`) with the axis
/// weights; the result has the axis removed.
[[nodiscard]] inline std::vector<double> contract_axis(std::span<const double> values, std::span<const std::size_t> axes,
                                                       std::size_t i, std::span<const double> axis_weights) {
  std::size_t inner = 1;
  for (std::size_t k = i + 1; k < axes.size(); ++k) inner *= axes[k];
  const std::size_t s = axes[i];
  const std::size_t outer = values.size() / (s * inner);
  std::vector<double> out(outer * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t j = 0; j < s; ++j) {
      const double w = axis_weights[j];
      const double* src = values.data() + (o * s + j) * inner;
      double* dst = out.data() + o * inner;
      for (std::size_t r = 0; r < inner; ++r) dst[r] += w * src[r];
    }
  }
  return out;
}

/// E_i applied to raw values on the grid, without broadcasting (axis i
/// removed, remaining layout unchanged).
[[nodiscard]] inline std::vector<double> marginal_reduced(const Grid& grid, std::span<const double> values,
                                                          std::size_t i) {
  grid.check_axis(i);
  return contract_axis(values, grid.axes(), i, grid.axis_weights(i));
}

/// Broadcasts a tensor with axis i removed back to the full grid.
[[nodiscard]] inline std::vector<double> broadcast_axis(const Grid& grid, std::span<const double> reduced,
                                                        std::size_t i) {
  const std::size_t inner = grid.stride(i);
  const std::size_t s = grid.axis(i);
  std::vector<double> out(grid.size());
  const std::size_t outer = grid.size() / (s * inner);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t j = 0; j < s; ++j) {
      std::copy_n(reduced.data() + o * inner, inner, out.data() + (o * s + j) * inner);
    }
  }
  return out;
}

/// E_i F: contraction over axis i, broadcast back; constant along axis i.
[[nodiscard]] inline EvalTensor marginal_expectation(const EvalTensor& t, std::size_t i) {
  const Grid& g = t.grid();
  return EvalTensor(t.grid_ptr(), broadcast_axis(g, marginal_reduced(g, t.values(), i), i));
}

/// D_i F = F - E_i F.
[[nodiscard]] inline EvalTensor difference(const EvalTensor& t, std::size_t i) {
  const EvalTensor e = marginal_expectation(t, i);
  std::vector<double> out(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) out[k] = t[k] - e[k];
  return EvalTensor(t.grid_ptr(), std::move(out));
}

/// (d_i F)^2 = ((D_i F)^2 + E_i (D_i F)^2) / 2.
[[nodiscard]] inline EvalTensor small_d_squared(const EvalTensor& t, std::size_t i) {
  const EvalTensor d = difference(t, i);
  std::vector<double> sq(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) sq[k] = d[k] * d[k];
  const std::vector<double> e = broadcast_axis(t.grid(), marginal_reduced(t.grid(), sq, i), i);
  for (std::size_t k = 0; k < t.size(); ++k) sq[k] = 0.5 * (sq[k] + e[k]);
  return EvalTensor(t.grid_ptr(), std::move(sq));
}

/// Successive prefix conditionals: result[m] = E[F | F_m] as a reduced
/// array over the first m coordinates (row-major), m = 0..n. result[n] is
/// F itself, result[0] holds the single value E[F].
[[nodiscard]] inline std::vector<std::vector<double>> prefix_conditionals(const Grid& grid,
                                                                          std::span<const double> values) {
  const std::size_t n = grid.dims();
  std::vector<std::vector<double>> out(n + 1);
  out[n].assign(values.begin(), values.end());
  for (std::size_t m = n; m > 0; --m) {
    const std::span<const std::size_t> axes = grid.axes().first(m);
    out[m - 1] = contract_axis(out[m], axes, m - 1, grid.axis_weights(m - 1));
  }
  return out;
}

/// Index into the prefix array over the first m coordinates for flat k.
[[nodiscard]] inline std::size_t prefix_index(const Grid& grid, std::size_t k, std::size_t m) {
  return m == 0 ? 0 : k / grid.stride(m - 1);
}

/// E[F | F_m], m = number of leading coordinates conditioned on (0..n);
/// m = 0 gives E[F], m = n gives F.
[[nodiscard]] inline EvalTensor prefix_conditional(const EvalTensor& t, std::size_t m) {
  const Grid& g = t.grid();
  if (m > g.dims()) {
    throw Error(ErrorCode::axis_out_of_range, "prefix length " + std::to_string(m) + " outside [0, " +
                                                  std::to_string(g.dims()) + "]");
  }
  std::vector<double> reduced(t.values().begin(), t.values().end());
  for (std::size_t a = g.dims(); a > m; --a) {
    reduced = contract_axis(reduced, g.axes().first(a), a - 1, g.axis_weights(a - 1));
  }
  std::vector<double> out(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) out[k] = reduced[prefix_index(g, k, m)];
  return EvalTensor(t.grid_ptr(), std::move(out));
}

/// E[D_i F | F_i] (0-based axis i, conditioning on coordinates 0..i),
/// computed as E[F | F_{i+1}] - E[F | F_i] in prefix-length notation.
[[nodiscard]] inline EvalTensor projected_difference(const EvalTensor& t, std::size_t i) {
  t.grid().check_axis(i);
  const EvalTensor hi = prefix_conditional(t, i + 1);
  const EvalTensor lo = prefix_conditional(t, i);
  std::vector<double> out(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) out[k] = hi[k] - lo[k];
  return EvalTensor(t.grid_ptr(), std::move(out));
}

/// D_{k,i} F = F - E_i F - E_k F + E_k E_i F; equals D_i F when k == i.
[[nodiscard]] inline EvalTensor second_order_difference(const EvalTensor& t, std::size_t k, std::size_t i) {
  t.grid().check_axis(k);
  t.grid().check_axis(i);
  const EvalTensor di = difference(t, i);
  if (k == i) return di;
  return difference(di, k);
}

/// A_k = { i : max |D_{k,i} F| > 1e-12 * (max|F| v 1) } for each axis k.
[[nodiscard]] inline std::vector<std::vector<std::size_t>> dependency_sets(const EvalTensor& t) {
  const std::size_t n = t.grid().dims();
  const double tol = 1e-12 * t.scale();
  std::vector<EvalTensor> diffs;
  diffs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) diffs.push_back(difference(t, i));
  std::vector<std::vector<std::size_t>> sets(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const EvalTensor dki = (k == i) ? diffs[i] : difference(diffs[i], k);
      const auto v = dki.values();
      const bool nonzero = std::any_of(v.begin(), v.end(), [&](double x) { return std::abs(x) > tol; });
      if (nonzero) sets[k].push_back(i);
    }
  }
  return sets;
}

/// E[ sum_i D_i F * E[D_i G | F_i] ].
[[nodiscard]] inline double covariance_formula(const EvalTensor& f, const EvalTensor& g) {
  if (!f.same_grid(g)) throw Error(ErrorCode::shape_mismatch, "covariance_formula needs tensors on the same grid");
  const Grid& grid = f.grid();
  const auto pg = prefix_conditionals(grid, g.values());
  std::vector<double> acc(f.size(), 0.0);
  for (std::size_t i = 0; i < grid.dims(); ++i) {
    const EvalTensor d = difference(f, i);
    for (std::size_t k = 0; k < f.size(); ++k) {
      const double p = pg[i + 1][prefix_index(grid, k, i + 1)] - pg[i][prefix_index(grid, k, i)];
      acc[k] += d[k] * p;
    }
  }
  return weighted_mean(grid, [&](std::size_t k) { return acc[k]; });
}

/// Elementwise map into a new tensor on the same grid.
template <class Fn>
[[nodiscard]] EvalTensor map_tensor(const EvalTensor& t, Fn&& fn) {
  std::vector<double> out(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) out[k] = fn(t[k]);
  return EvalTensor(t.grid_ptr(), std::move(out));
}

/// Elementwise combination of two tensors on the same grid.
template <class Fn>
[[nodiscard]] EvalTensor zip_tensors(const EvalTensor& a, const EvalTensor& b, Fn&& fn) {
  if (!a.same_grid(b)) throw Error(ErrorCode::shape_mismatch, "tensors live on different grids");
  std::vector<double> out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = fn(a[k], b[k]);
  return EvalTensor(a.grid_ptr(), std::move(out));
}

}  // namespace steinlab
