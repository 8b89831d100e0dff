#pragma once

// One streaming pass over every axis builds Z = sum_i D_i F * E[D_i F | F_i],
// Zbar = sum_i D_i(D_i F (|P_i| + E_i|P_i|)) with P_i = E[D_i F | F_i], and
// per-axis scalar summaries (absolute moments of D_i F and the mixed
// expectations used by the bounds). Per-axis tensors are not stored; the
// free functions in eval_tensor.hpp recompute them on demand.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "steinlab/error.hpp"
#include "steinlab/eval_tensor.hpp"
#include "steinlab/parallel.hpp"

namespace steinlab {

namespace detail {

/// Visits every fibre along axis i. A fibre is the set of flat indices
/// base + j * stride(i), j < axis(i); `outer` identifies the coordinates
/// before i. fn(block, outer, base) is called with fibres grouped into
/// fixed blocks so callers can keep per-block partial sums.
template <class Fn>
void for_each_fibre(const Grid& grid, std::size_t i, Fn&& fn) {
  const std::size_t st = grid.stride(i);
  const std::size_t s = grid.axis(i);
  const std::size_t fibres = grid.size() / s;
  const std::size_t blocks = (fibres + kBlockSize - 1) / kBlockSize;
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t lo = b * kBlockSize;
    const std::size_t hi = std::min(fibres, lo + kBlockSize);
    for (std::size_t f = lo; f < hi; ++f) {
      const std::size_t outer = f / st;
      const std::size_t r = f % st;
      fn(b, outer, outer * s * st + r);
    }
  });
}

[[nodiscard]] inline std::size_t fibre_blocks(const Grid& grid, std::size_t i) {
  const std::size_t fibres = grid.size() / grid.axis(i);
  return (fibres + kBlockSize - 1) / kBlockSize;
}

[[nodiscard]] inline double combine_partials(const std::vector<double>& partial) {
  return pairwise_sum(0, partial.size(), [&](std::size_t b) { return partial[b]; });
}

}  // namespace detail

inline constexpr std::array<int, 5> kCachedOrders{1, 2, 3, 4, 6};

/// Scalar summaries of one axis i (all expectations exact).
struct AxisSummary {
  std::array<double, 5> abs_moment{};  // E|D_i F|^r for r in kCachedOrders
  double dsq_abs_p = 0.0;              // E[(d_i F)^2 |P_i|]
  double abs_f_dsq_abs_p = 0.0;        // E[|F| (d_i F)^2 |P_i|]
  double integer_remainder = 0.0;      // E[(2 (d_i F)^2 + D_i F) |P_i|]
  double p_squared = 0.0;              // E[P_i^2]

  [[nodiscard]] double moment(int r) const {
    for (std::size_t q = 0; q < kCachedOrders.size(); ++q) {
      if (kCachedOrders[q] == r) return abs_moment[q];
    }
    throw Error(ErrorCode::invalid_argument, "order " + std::to_string(r) + " is not cached");
  }
};

/// E|D_i F|^r for any r > 0 (one pass over axis i).
[[nodiscard]] inline double axis_abs_moment(const EvalTensor& t, std::size_t i, double r) {
  if (!(r > 0.0)) throw Error(ErrorCode::invalid_argument, "moment order must be positive");
  const Grid& g = t.grid();
  g.check_axis(i);
  const std::size_t s = g.axis(i);
  const std::size_t st = g.stride(i);
  const auto aw = g.axis_weights(i);
  const auto w = g.weights();
  std::vector<double> partial(detail::fibre_blocks(g, i), 0.0);
  detail::for_each_fibre(g, i, [&](std::size_t b, std::size_t, std::size_t base) {
    double ef = 0.0;
    for (std::size_t j = 0; j < s; ++j) ef += aw[j] * t[base + j * st];
    double acc = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
      const std::size_t k = base + j * st;
      acc += w[k] * std::pow(std::abs(t[k] - ef), r);
    }
    partial[b] += acc;
  });
  return detail::combine_partials(partial);
}

class DiffProfile {
 public:
  explicit DiffProfile(EvalTensor t) : tensor_(std::move(t)), z_(tensor_), zbar_(tensor_) { build(); }

  [[nodiscard]] const EvalTensor& tensor() const noexcept { return tensor_; }
  [[nodiscard]] const Grid& grid() const noexcept { return tensor_.grid(); }
  [[nodiscard]] std::size_t dims() const noexcept { return tensor_.grid().dims(); }
  [[nodiscard]] const EvalTensor& z() const noexcept { return z_; }
  [[nodiscard]] const EvalTensor& zbar() const noexcept { return zbar_; }
  [[nodiscard]] const std::vector<AxisSummary>& axes() const noexcept { return summaries_; }
  [[nodiscard]] const AxisSummary& axis(std::size_t i) const { return summaries_.at(i); }

  [[nodiscard]] double mean() const noexcept { return mean_; }
  [[nodiscard]] double second_moment() const noexcept { return second_moment_; }
  [[nodiscard]] double variance() const noexcept { return variance_; }
  [[nodiscard]] double scale() const noexcept { return scale_; }
  [[nodiscard]] double mean_z() const noexcept { return mean_z_; }
  [[nodiscard]] double var_z() const noexcept { return var_z_; }
  [[nodiscard]] double mean_zbar() const noexcept { return mean_zbar_; }
  [[nodiscard]] double var_zbar() const noexcept { return var_zbar_; }

  /// E|theta - Z|.
  [[nodiscard]] double e_abs_theta_minus_z(double theta) const {
    return weighted_mean(grid(), [&](std::size_t k) { return std::abs(theta - z_[k]); });
  }
  [[nodiscard]] double e_abs_one_minus_z() const { return e_abs_theta_minus_z(1.0); }

  /// L_r(F) = sum_i E|D_i F|^r.
  [[nodiscard]] double lyapunov(double r) const {
    if (!(r > 0.0)) throw Error(ErrorCode::invalid_argument, "Lyapunov order must be positive");
    for (std::size_t q = 0; q < kCachedOrders.size(); ++q) {
      if (static_cast<double>(kCachedOrders[q]) == r) {
        return pairwise_sum(0, dims(), [&](std::size_t i) { return summaries_[i].abs_moment[q]; });
      }
    }
    return pairwise_sum(0, dims(), [&](std::size_t i) { return axis_abs_moment(tensor_, i, r); });
  }

  /// sum_i of a per-axis quantity, pairwise.
  template <class Fn>
  [[nodiscard]] double sum_axes(Fn&& fn) const {
    return pairwise_sum(0, dims(), [&](std::size_t i) { return fn(summaries_[i]); });
  }

 private:
  void build() {
    const Grid& g = grid();
    const std::size_t n = g.dims();
    const std::size_t size = g.size();
    const auto w = g.weights();
    const auto prefix = prefix_conditionals(g, tensor_.values());
    std::vector<double> z(size, 0.0);
    std::vector<double> zbar(size, 0.0);
    summaries_.assign(n, AxisSummary{});

    constexpr std::size_t kSlots = kCachedOrders.size() + 4;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t s = g.axis(i);
      const std::size_t st = g.stride(i);
      const auto aw = g.axis_weights(i);
      const std::vector<double>& hi = prefix[i + 1];
      const std::vector<double>& lo = prefix[i];
      std::vector<std::array<double, kSlots>> partial(detail::fibre_blocks(g, i));
      for (auto& p : partial) p.fill(0.0);

      detail::for_each_fibre(g, i, [&](std::size_t b, std::size_t outer, std::size_t base) {
        thread_local std::vector<double> d, p, gv;
        d.resize(s);
        p.resize(s);
        gv.resize(s);
        double ef = 0.0;
        for (std::size_t j = 0; j < s; ++j) ef += aw[j] * tensor_[base + j * st];
        double ed2 = 0.0;
        double eabsp = 0.0;
        for (std::size_t j = 0; j < s; ++j) {
          d[j] = tensor_[base + j * st] - ef;
          p[j] = hi[outer * s + j] - lo[outer];
          ed2 += aw[j] * d[j] * d[j];
          eabsp += aw[j] * std::abs(p[j]);
        }
        double eg = 0.0;
        for (std::size_t j = 0; j < s; ++j) {
          gv[j] = d[j] * (std::abs(p[j]) + eabsp);
          eg += aw[j] * gv[j];
        }
        auto& acc = partial[b];
        for (std::size_t j = 0; j < s; ++j) {
          const std::size_t k = base + j * st;
          z[k] += d[j] * p[j];
          zbar[k] += gv[j] - eg;
          const double wk = w[k];
          const double ad = std::abs(d[j]);
          const double ap = std::abs(p[j]);
          const double dsq = 0.5 * (d[j] * d[j] + ed2);
          const double ad2 = ad * ad;
          acc[0] += wk * ad;
          acc[1] += wk * ad2;
          acc[2] += wk * ad2 * ad;
          acc[3] += wk * ad2 * ad2;
          acc[4] += wk * ad2 * ad2 * ad2;
          acc[5] += wk * dsq * ap;
          acc[6] += wk * std::abs(tensor_[k]) * dsq * ap;
          acc[7] += wk * (2.0 * dsq + d[j]) * ap;
          acc[8] += wk * p[j] * p[j];
        }
      });

      std::array<double, kSlots> total{};
      for (std::size_t q = 0; q < kSlots; ++q) {
        total[q] = pairwise_sum(0, partial.size(), [&](std::size_t b) { return partial[b][q]; });
      }
      AxisSummary& out = summaries_[i];
      for (std::size_t q = 0; q < kCachedOrders.size(); ++q) out.abs_moment[q] = total[q];
      out.dsq_abs_p = total[5];
      out.abs_f_dsq_abs_p = total[6];
      out.integer_remainder = total[7];
      out.p_squared = total[8];
    }
    z_ = EvalTensor(tensor_.grid_ptr(), std::move(z));
    zbar_ = EvalTensor(tensor_.grid_ptr(), std::move(zbar));

    mean_ = expectation(tensor_);
    second_moment_ = weighted_mean(g, [&](std::size_t k) { return tensor_[k] * tensor_[k]; });
    variance_ = weighted_mean(g, [&](std::size_t k) {
      const double c = tensor_[k] - mean_;
      return c * c;
    });
    scale_ = tensor_.scale();
    mean_z_ = expectation(z_);
    var_z_ = weighted_mean(g, [&](std::size_t k) {
      const double c = z_[k] - mean_z_;
      return c * c;
    });
    mean_zbar_ = expectation(zbar_);
    var_zbar_ = weighted_mean(g, [&](std::size_t k) {
      const double c = zbar_[k] - mean_zbar_;
      return c * c;
    });
  }

  EvalTensor tensor_;
  EvalTensor z_;
  EvalTensor zbar_;
  std::vector<AxisSummary> summaries_;
  double mean_ = 0.0;
  double second_moment_ = 0.0;
  double variance_ = 0.0;
  double scale_ = 1.0;
  double mean_z_ = 0.0;
  double var_z_ = 0.0;
  double mean_zbar_ = 0.0;
  double var_zbar_ = 0.0;
};

/// Z tensor and its exact moments, bundled.
struct ZStatistics {
  const EvalTensor* z = nullptr;
  double var_z = 0.0;
  const EvalTensor* zbar = nullptr;
  double var_zbar = 0.0;
  double e_abs_one_minus_z = 0.0;
};

[[nodiscard]] inline ZStatistics z_statistics(const DiffProfile& profile) {
  return ZStatistics{&profile.z(), profile.var_z(), &profile.zbar(), profile.var_zbar(),
                     profile.e_abs_one_minus_z()};
}

[[nodiscard]] inline double lyapunov(const DiffProfile& profile, double r) { return profile.lyapunov(r); }

}  // namespace steinlab
