#pragma once

// Nested Monte Carlo estimators of the bound ingredients for grids too
// large to enumerate. Every random draw is a pure function of
// (seed, stream, counter), so estimates do not depend on the worker count.
//
// Outer sample o draws x from the product law. Conditional expectations
// are replaced by inner averages over `inner` fresh copies of the
// coordinates being integrated out:
//   D_i F(x)   ~ F(x) - mean_q F(x with coordinate i replaced by draw q)
//   P_i(x)     ~ mean_q [F(x_{<=i}, X'_{>i}) - F(x_{<i}, X'_{>=i})]
// with the two inner averages using independent draws, so their product
// is unbiased for D_i F * P_i given x. Plug-in nonlinear functionals of
// inner averages (|.|^r, variances) are biased by O(1/inner) and flagged.

#include <algorithm>
#include <initializer_list>
#include <utility>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "steinlab/error.hpp"
#include "steinlab/distributions.hpp"
#include "steinlab/functional.hpp"
#include "steinlab/normal_bounds.hpp"
#include "steinlab/parallel.hpp"
#include "steinlab/prob_model.hpp"
#include "steinlab/report.hpp"
#include "steinlab/rng.hpp"

namespace steinlab {

struct MCConfig {
  std::size_t outer_samples = 2000;
  std::size_t inner_samples = 64;
  std::uint64_t seed = 1;

  void validate() const {
    if (outer_samples < 100) throw Error(ErrorCode::invalid_config, "outer_samples must be at least 100");
    if (inner_samples < 16) throw Error(ErrorCode::invalid_config, "inner_samples must be at least 16");
  }
};

struct MCEstimate {
  double value = 0.0;
  double std_error = 0.0;
  bool biased = false;
  /// Estimated magnitude of the inner-sample bias (Richardson comparison
  /// against the estimate that uses only the first half of the inner draws).
  double bias_allowance = 0.0;
};

namespace detail {

// Stream layout: (component << 8) | role.
enum class McRole : std::uint64_t { outer = 1, replace = 2, tail_hi = 3, tail_lo = 4 };

[[nodiscard]] constexpr std::uint64_t mc_stream(std::uint64_t component, McRole role) noexcept {
  return (component << 8) | static_cast<std::uint64_t>(role);
}

class McSampler {
 public:
  McSampler(const IndependentSequence& seq, const Functional& f, const MCConfig& cfg, std::uint64_t component,
            Affine affine)
      : seq_(seq), f_(f), cfg_(cfg), affine_(affine), n_(seq.size()),
        outer_(cfg.seed, mc_stream(component, McRole::outer)),
        replace_(cfg.seed, mc_stream(component, McRole::replace)),
        tail_hi_(cfg.seed, mc_stream(component, McRole::tail_hi)),
        tail_lo_(cfg.seed, mc_stream(component, McRole::tail_lo)) {
    f.check_arity(seq);
  }

  [[nodiscard]] std::size_t dims() const noexcept { return n_; }

  /// Outer outcome o.
  void draw_outer(std::size_t o, std::vector<std::size_t>& idx) const {
    idx.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) idx[i] = seq_[i].index_for_uniform(outer_.uniform(o * n_ + i));
  }

  [[nodiscard]] std::size_t draw(const CounterRng& rng, std::size_t coord, std::uint64_t counter) const {
    return seq_[coord].index_for_uniform(rng.uniform(counter));
  }

  /// Counter for inner draw q of coordinate c at (outer o, axis i).
  [[nodiscard]] std::uint64_t counter(std::size_t o, std::size_t i, std::size_t q, std::size_t c) const {
    return ((static_cast<std::uint64_t>(o) * n_ + i) * cfg_.inner_samples + q) * n_ + c;
  }

  [[nodiscard]] double eval(const std::vector<std::size_t>& idx, std::vector<double>& x) const {
    x.resize(n_);
    std::uint64_t flat = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      x[i] = seq_[i].value(idx[i]);
      flat = flat * seq_[i].size() + idx[i];
    }
    return affine_(f_(EvalPoint{x, idx, static_cast<std::size_t>(flat), &seq_}));
  }

  /// Per-axis inner differences F(x^{i <- x'_q}) - F(x), q < inner.
  void replacement_diffs(std::size_t o, std::size_t i, std::vector<std::size_t>& idx, std::vector<double>& x,
                         double fx, std::vector<double>& out) const {
    out.resize(cfg_.inner_samples);
    const std::size_t keep = idx[i];
    for (std::size_t q = 0; q < cfg_.inner_samples; ++q) {
      idx[i] = draw(replace_, i, counter(o, i, q, i));
      out[q] = eval(idx, x) - fx;
    }
    idx[i] = keep;
  }

  /// Inner terms F(x_{<=i}, X'_{>i}) - F(x_{<i}, X'_{>=i}) with a shared
  /// tail X'_{>i}.
  void projection_terms(std::size_t o, std::size_t i, const std::vector<std::size_t>& base,
                        std::vector<std::size_t>& idx, std::vector<double>& x, std::vector<double>& out) const {
    out.resize(cfg_.inner_samples);
    for (std::size_t q = 0; q < cfg_.inner_samples; ++q) {
      idx = base;
      for (std::size_t c = i + 1; c < n_; ++c) idx[c] = draw(tail_hi_, c, counter(o, i, q, c));
      const double hi = eval(idx, x);
      idx[i] = draw(tail_lo_, i, counter(o, i, q, i));
      const double lo = eval(idx, x);
      out[q] = hi - lo;
    }
  }

  [[nodiscard]] const MCConfig& config() const noexcept { return cfg_; }

 private:
  const IndependentSequence& seq_;
  const Functional& f_;
  MCConfig cfg_;
  Affine affine_;
  std::size_t n_;
  CounterRng outer_;
  CounterRng replace_;
  CounterRng tail_hi_;
  CounterRng tail_lo_;
};

[[nodiscard]] inline double mean_of(const std::vector<double>& v, std::size_t count) {
  return pairwise_sum(0, count, [&](std::size_t k) { return v[k]; }) / static_cast<double>(count);
}

/// Mean and standard error of per-sample values.
[[nodiscard]] inline MCEstimate sample_mean(const std::vector<double>& y) {
  const std::size_t n = y.size();
  const double m = pairwise_sum(0, n, [&](std::size_t k) { return y[k]; }) / static_cast<double>(n);
  const double ss = pairwise_sum(0, n, [&](std::size_t k) { return (y[k] - m) * (y[k] - m); });
  const double var = ss / static_cast<double>(n - 1);
  return MCEstimate{m, std::sqrt(var / static_cast<double>(n)), false, 0.0};
}

/// Plug-in variance of samples and the standard error of that variance,
/// sqrt((m4 - s^4) / N) with central moments m4, s^2.
[[nodiscard]] inline MCEstimate sample_variance(const std::vector<double>& y) {
  const std::size_t n = y.size();
  const double nd = static_cast<double>(n);
  const double m = pairwise_sum(0, n, [&](std::size_t k) { return y[k]; }) / nd;
  const double m2 = pairwise_sum(0, n, [&](std::size_t k) { return (y[k] - m) * (y[k] - m); }) / nd;
  const double m4 = pairwise_sum(0, n, [&](std::size_t k) {
                      const double c = (y[k] - m) * (y[k] - m);
                      return c * c;
                    }) / nd;
  const double var = m2 * nd / (nd - 1.0);
  return MCEstimate{var, std::sqrt(std::max(0.0, m4 - m2 * m2) / nd), false, 0.0};
}

/// Runs fn(o) for every outer sample and collects one or more values.
template <class Fn>
void for_each_outer(std::size_t outer, Fn&& fn) {
  const std::size_t blocks = (outer + 63) / 64;
  parallel_for(blocks, [&](std::size_t b) {
    for (std::size_t o = b * 64; o < std::min(outer, (b + 1) * 64); ++o) fn(o);
  });
}

[[nodiscard]] inline double richardson_allowance(double full, double half) { return 2.5 * std::abs(full - half); }

}  // namespace detail

/// Component ids that keep the random streams of different estimates
/// independent of one another.
enum class McComponent : std::uint64_t { moments = 1, z_statistic = 2, lyapunov_base = 16 };

/// L_r(F) = sum_i E|D_i F|^r.
[[nodiscard]] inline MCEstimate mc_lyapunov(const IndependentSequence& seq, const Functional& f, double r,
                                            const MCConfig& cfg, Affine affine = {},
                                            std::optional<std::uint64_t> component = std::nullopt) {
  cfg.validate();
  if (!(r > 0.0)) throw Error(ErrorCode::invalid_argument, "Lyapunov order must be positive");
  const std::uint64_t comp =
      component.value_or(static_cast<std::uint64_t>(McComponent::lyapunov_base) + static_cast<std::uint64_t>(r * 16.0));
  const detail::McSampler s(seq, f, cfg, comp, affine);
  const std::size_t n = s.dims();
  const std::size_t inner = cfg.inner_samples;
  const std::size_t half = inner / 2;
  std::vector<double> full(cfg.outer_samples), halfv(cfg.outer_samples);
  detail::for_each_outer(cfg.outer_samples, [&](std::size_t o) {
    std::vector<std::size_t> idx;
    std::vector<double> x, diffs;
    s.draw_outer(o, idx);
    const double fx = s.eval(idx, x);
    double acc_full = 0.0;
    double acc_half = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s.replacement_diffs(o, i, idx, x, fx, diffs);
      // D_i F = F - E_i F = -mean(F(x^{i<-x'}) - F(x)).
      const double d_half = -detail::mean_of(diffs, half);
      const double d_full = -detail::mean_of(diffs, inner);
      acc_full += std::pow(std::abs(d_full), r);
      acc_half += std::pow(std::abs(d_half), r);
    }
    full[o] = acc_full;
    halfv[o] = acc_half;
  });
  MCEstimate e = detail::sample_mean(full);
  const MCEstimate h = detail::sample_mean(halfv);
  e.biased = true;
  e.bias_allowance = detail::richardson_allowance(e.value, h.value);
  return e;
}

/// Per-outer estimates of Z = sum_i D_i F * P_i, full and half inner budget.
struct ZSamples {
  std::vector<double> full;
  std::vector<double> half;
};

[[nodiscard]] inline ZSamples mc_z_samples(const IndependentSequence& seq, const Functional& f, const MCConfig& cfg,
                                           Affine affine = {},
                                           std::uint64_t component = static_cast<std::uint64_t>(McComponent::z_statistic)) {
  cfg.validate();
  const detail::McSampler s(seq, f, cfg, component, affine);
  const std::size_t n = s.dims();
  const std::size_t inner = cfg.inner_samples;
  const std::size_t half = inner / 2;
  ZSamples out;
  out.full.resize(cfg.outer_samples);
  out.half.resize(cfg.outer_samples);
  detail::for_each_outer(cfg.outer_samples, [&](std::size_t o) {
    std::vector<std::size_t> base, idx;
    std::vector<double> x, diffs, proj;
    s.draw_outer(o, base);
    idx = base;
    const double fx = s.eval(idx, x);
    double z_full = 0.0;
    double z_half = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s.replacement_diffs(o, i, idx, x, fx, diffs);
      s.projection_terms(o, i, base, idx, x, proj);
      idx = base;
      z_full += -detail::mean_of(diffs, inner) * detail::mean_of(proj, inner);
      z_half += -detail::mean_of(diffs, half) * detail::mean_of(proj, half);
    }
    out.full[o] = z_full;
    out.half[o] = z_half;
  });
  return out;
}

/// Var(Z), plug-in over outer samples of the nested Z estimate.
[[nodiscard]] inline MCEstimate mc_z_variance(const IndependentSequence& seq, const Functional& f,
                                              const MCConfig& cfg, Affine affine = {}) {
  const ZSamples z = mc_z_samples(seq, f, cfg, affine);
  MCEstimate e = detail::sample_variance(z.full);
  const MCEstimate h = detail::sample_variance(z.half);
  e.biased = true;
  e.bias_allowance = detail::richardson_allowance(e.value, h.value);
  return e;
}

/// E|theta - Z| from the nested Z estimate.
[[nodiscard]] inline MCEstimate mc_e_abs_theta_minus_z(const IndependentSequence& seq, const Functional& f,
                                                       double theta, const MCConfig& cfg, Affine affine = {}) {
  const ZSamples z = mc_z_samples(seq, f, cfg, affine);
  std::vector<double> a(z.full.size()), b(z.half.size());
  for (std::size_t o = 0; o < a.size(); ++o) {
    a[o] = std::abs(theta - z.full[o]);
    b[o] = std::abs(theta - z.half[o]);
  }
  MCEstimate e = detail::sample_mean(a);
  const MCEstimate h = detail::sample_mean(b);
  e.biased = true;
  e.bias_allowance = detail::richardson_allowance(e.value, h.value);
  return e;
}

/// Plain moments of the transformed functional: mean, E[F^2] and Var(F).
struct MCMoments {
  bool natural_valued = true;  // every sampled value within 1e-9 of a natural number
  MCEstimate mean;
  MCEstimate second_moment;
  MCEstimate variance;
};

[[nodiscard]] inline MCMoments mc_moments(const IndependentSequence& seq, const Functional& f, const MCConfig& cfg,
                                          Affine affine = {}) {
  cfg.validate();
  const detail::McSampler s(seq, f, cfg, static_cast<std::uint64_t>(McComponent::moments), affine);
  std::vector<double> v(cfg.outer_samples), sq(cfg.outer_samples);
  detail::for_each_outer(cfg.outer_samples, [&](std::size_t o) {
    std::vector<std::size_t> idx;
    std::vector<double> x;
    s.draw_outer(o, idx);
    v[o] = s.eval(idx, x);
    sq[o] = v[o] * v[o];
  });
  const bool natural = std::all_of(v.begin(), v.end(), [](double x) {
    const double r = std::nearbyint(x);
    return std::abs(x - r) <= kIntegerTolerance && r >= 0.0;
  });
  return MCMoments{natural, detail::sample_mean(v), detail::sample_mean(sq), detail::sample_variance(v)};
}

/// Bound tags that can be assembled from Monte Carlo components.
enum class McBound { normal_wasserstein_relaxed, poisson_tv_relaxed, poisson_wasserstein_relaxed };

[[nodiscard]] inline McBound parse_mc_bound(const std::string& tag) {
  if (tag == "ko67d3.de2q1") return McBound::normal_wasserstein_relaxed;
  if (tag == "prove01.plo2") return McBound::poisson_tv_relaxed;
  if (tag == "prove02.relaxed") return McBound::poisson_wasserstein_relaxed;
  throw Error(ErrorCode::unsupported_bound_form,
              "'" + tag + "' is not a relaxed bound; exact forms and threshold suprema are not assembled by Monte Carlo");
}

/// sqrt(V) and its delta-method standard error, capped by sqrt(se) so a
/// variance near zero does not produce an unbounded error.
[[nodiscard]] inline MCEstimate mc_sqrt(const MCEstimate& v) {
  const double value = std::sqrt(std::max(0.0, v.value));
  double se = std::sqrt(v.std_error);
  if (value > 0.0) se = std::min(se, v.std_error / (2.0 * value));
  const double bias = std::sqrt(v.bias_allowance);
  return MCEstimate{value, se, v.biased, value > 0.0 ? std::min(bias, v.bias_allowance / (2.0 * value)) : bias};
}

struct MCBoundResult {
  MCEstimate estimate;
  BoundReport report;  // components hold the point estimates
  std::vector<std::pair<std::string, MCEstimate>> components;
};

/// Relaxed bound assembled from independent Monte Carlo components. For the
/// normal target the functional is transformed by `affine` (pass the mean
/// and standard deviation to standardize). `theta` defaults to the
/// estimated mean for Poisson targets.
[[nodiscard]] inline MCBoundResult mc_bound(const IndependentSequence& seq, const Functional& f, McBound which,
                                            const MCConfig& cfg, Affine affine = {},
                                            std::optional<double> theta = std::nullopt) {
  cfg.validate();
  MCBoundResult out;
  const MCMoments mom = mc_moments(seq, f, cfg, affine);
  const MCEstimate vz = mc_z_variance(seq, f, cfg, affine);
  const MCEstimate svz = mc_sqrt(vz);
  const MCEstimate l3 = mc_lyapunov(seq, f, 3.0, cfg, affine);
  auto rss = [](std::initializer_list<double> terms) {
    double acc = 0.0;
    for (double t : terms) acc += t * t;
    return std::sqrt(acc);
  };
  BoundReport& r = out.report;
  r.notes.push_back("Monte Carlo estimate; plug-in components are biased");
  if (which == McBound::normal_wasserstein_relaxed) {
    r.theorem = "ko67d3.de2q1";
    r.metric = "wasserstein";
    r.form = "relaxed";
    r.standardized = true;
    const double bias = std::abs(1.0 - mom.second_moment.value);
    r.add("|1-EF^2|", bias);
    r.add("sqrtVarZ", svz.value);
    r.add("L3", l3.value);
    r.value = kSqrt2OverPi * (bias + svz.value) + 2.0 * l3.value;
    out.estimate.value = r.value;
    out.estimate.std_error =
        rss({kSqrt2OverPi * mom.second_moment.std_error, kSqrt2OverPi * svz.std_error, 2.0 * l3.std_error});
    out.estimate.bias_allowance = kSqrt2OverPi * svz.bias_allowance + 2.0 * l3.bias_allowance;
    out.components = {{"E[F^2]", mom.second_moment}, {"sqrtVarZ", svz}, {"L3", l3}};
  } else {
    if (!mom.natural_valued) throw Error(ErrorCode::not_integer_valued, "sampled values leave the natural numbers");
    const MCEstimate l2 = mc_lyapunov(seq, f, 2.0, cfg, affine);
    const double th = theta.value_or(mom.mean.value);
    require_positive_theta(th);
    const double mu = mom.mean.value;
    const double s2 = mom.variance.value;
    r.target = "poisson";
    r.theta = th;
    r.add("|theta-mu|", std::abs(th - mu));
    r.add("|theta-sigma^2|", std::abs(th - s2));
    r.add("sqrtVarZ", svz.value);
    r.add("L3", l3.value);
    r.add("L2", l2.value);
    // theta fixed by the caller contributes no sampling error to |theta - mu|;
    // theta = estimated mean makes that term exactly zero.
    const double se_mu = theta ? mom.mean.std_error : 0.0;
    if (which == McBound::poisson_tv_relaxed) {
      const double fa = std::min(1.0, std::sqrt(2.0 / (std::numbers::e * th)));
      const double dfa = -std::expm1(-th) / th;
      r.theorem = "prove01.plo2";
      r.metric = "tv";
      r.form = "relaxed";
      r.value = fa * std::abs(th - mu) + dfa * (std::abs(th - s2) + svz.value + 2.0 * l3.value + l2.value);
      out.estimate.std_error =
          rss({fa * se_mu, dfa * mom.variance.std_error, dfa * svz.std_error, 2.0 * dfa * l3.std_error,
               dfa * l2.std_error});
      out.estimate.bias_allowance = dfa * (svz.bias_allowance + 2.0 * l3.bias_allowance + l2.bias_allowance);
    } else {
      const double k1 = std::min(1.0, 8.0 / (3.0 * std::sqrt(2.0 * std::numbers::e * th)));
      const double k2 = std::min(2.0 / 3.0, 1.0 / th);
      r.theorem = "prove02.relaxed";
      r.metric = "wasserstein";
      r.form = "relaxed";
      r.value = std::abs(th - mu) + k1 * (std::abs(th - s2) + svz.value) + k2 * (2.0 * l3.value + l2.value);
      out.estimate.std_error = rss({se_mu, k1 * mom.variance.std_error, k1 * svz.std_error,
                                    2.0 * k2 * l3.std_error, k2 * l2.std_error});
      out.estimate.bias_allowance = k1 * svz.bias_allowance + k2 * (2.0 * l3.bias_allowance + l2.bias_allowance);
    }
    out.estimate.value = r.value;
    out.components = {{"mean", mom.mean}, {"variance", mom.variance}, {"sqrtVarZ", svz}, {"L3", l3}, {"L2", l2}};
  }
  out.estimate.biased = true;
  return out;
}

}  // namespace steinlab
