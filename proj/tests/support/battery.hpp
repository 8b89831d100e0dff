#pragma once

// Deterministic battery of small enumerable instances covering every
// functional kind and mixed coordinate laws.

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "steinlab/functional.hpp"
#include "steinlab/prob_model.hpp"

namespace battery {

using steinlab::DiscreteDistribution;
using steinlab::Functional;
using steinlab::IndependentSequence;

struct Instance {
  std::string name;
  IndependentSequence seq;
  Functional f;
};

class Builder {
 public:
  explicit Builder(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

  DiscreteDistribution three_atom() {
    const double a = uniform(-2.0, -0.2);
    const double b = uniform(-0.1, 0.6);
    const double c = uniform(0.8, 2.5);
    double p = uniform(0.15, 0.5);
    double q = uniform(0.15, 0.5);
    if (p + q > 0.85) q = 0.85 - p;
    return DiscreteDistribution::make({{a, p}, {b, q}, {c, 1.0 - p - q}});
  }

  /// 0 Rademacher, 1 Bernoulli(p), 2 three-atom law.
  DiscreteDistribution coord(int kind) {
    switch (kind) {
      case 0: return DiscreteDistribution::rademacher();
      case 1: return DiscreteDistribution::bernoulli(uniform(0.2, 0.8));
      default: return three_atom();
    }
  }

  IndependentSequence mixed(std::size_t n, bool allow_three = true) {
    std::vector<DiscreteDistribution> c;
    for (std::size_t i = 0; i < n; ++i) c.push_back(coord(static_cast<int>(pick(allow_three ? 3 : 2))));
    return IndependentSequence(std::move(c));
  }

  IndependentSequence bernoullis(std::size_t n) {
    std::vector<DiscreteDistribution> c;
    for (std::size_t i = 0; i < n; ++i) c.push_back(DiscreteDistribution::bernoulli(uniform(0.15, 0.85)));
    return IndependentSequence(std::move(c));
  }

  std::vector<double> coeffs(std::size_t n) {
    std::vector<double> a(n);
    for (double& v : a) v = uniform(-1.5, 1.5);
    return a;
  }

  std::vector<std::vector<double>> symmetric(std::size_t n) {
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) m[i][j] = m[j][i] = uniform(-1.0, 1.0);
    }
    return m;
  }

 private:
  std::mt19937_64 rng_;
};

/// Window function tables on the reachable sums of each window.
inline Functional random_scan(Builder& b, const IndependentSequence& seq, std::size_t m) {
  return steinlab::m_scan_from(seq, m, [&b](std::size_t, double r) { return std::sin(3.0 * r) + b.uniform(-0.5, 0.5); });
}

/// The standard battery: 26 instances, n <= 10, grids of at most 1024 points.
inline std::vector<Instance> standard() {
  Builder b(20240611);
  std::vector<Instance> out;
  auto add = [&](std::string name, IndependentSequence seq, Functional f) {
    out.push_back(Instance{std::move(name), std::move(seq), std::move(f)});
  };
  // Weighted sums.
  for (std::size_t n : {2, 3, 5}) {
    auto seq = b.mixed(n);
    add("weighted_sum_n" + std::to_string(n), seq, steinlab::weighted_sum(b.coeffs(n), n % 2 == 1));
  }
  {
    auto seq = b.mixed(10, false);
    add("weighted_sum_n10", seq, steinlab::weighted_sum(b.coeffs(10), true));
  }
  // Partial sums.
  for (std::size_t n : {3, 6}) {
    auto seq = b.mixed(n);
    add("partial_sum_n" + std::to_string(n), seq, steinlab::partial_sum(seq));
  }
  // Quadratic forms.
  for (std::size_t n : {3, 4, 6}) {
    auto seq = b.mixed(n);
    add("quadratic_form_n" + std::to_string(n), seq, steinlab::quadratic_form(b.symmetric(n)));
  }
  {
    auto seq = IndependentSequence::iid(DiscreteDistribution::rademacher(), 5);
    add("quadratic_form_rademacher_n5", seq, steinlab::quadratic_form(b.symmetric(5)));
  }
  // Runs.
  {
    auto seq = b.mixed(4);
    add("m_run2_n4", seq, steinlab::m_run(b.coeffs(3), 2));
  }
  {
    auto seq = b.bernoullis(6);
    add("m_run2_bernoulli_n6", seq, steinlab::m_run(b.coeffs(5), 2));
  }
  {
    auto seq = b.mixed(5);
    add("m_run3_n5", seq, steinlab::m_run(b.coeffs(3), 3));
  }
  {
    auto seq = b.bernoullis(5);
    add("m_run2_integer_n5", seq, steinlab::m_run({1.0, 2.0, 1.0, 1.0}, 2));
  }
  // Scans.
  {
    auto seq = b.mixed(4);
    add("m_scan2_n4", seq, random_scan(b, seq, 2));
  }
  {
    auto seq = b.mixed(6, false);
    add("m_scan3_n6", seq, random_scan(b, seq, 3));
  }
  {
    auto seq = IndependentSequence::iid(DiscreteDistribution::rademacher(), 7);
    add("m_scan2_rademacher_n7", seq, random_scan(b, seq, 2));
  }
  // Exceedance counts (N-valued).
  {
    auto seq = IndependentSequence::iid(DiscreteDistribution::rademacher(), 6);
    add("exceedance_m2_n6", seq, steinlab::exceedance_count(0.0, 2, 6));
  }
  {
    auto seq = b.mixed(5);
    add("exceedance_m3_n5", seq, steinlab::exceedance_count(0.5, 3, 5));
  }
  {
    auto seq = b.bernoullis(8);
    add("exceedance_m1_n8", seq, steinlab::exceedance_count(0.5, 1, 8));
  }
  // Bernoulli count (N-valued weighted sum).
  {
    auto seq = b.bernoullis(7);
    add("bernoulli_count_n7", seq, steinlab::weighted_sum(std::vector<double>(7, 1.0)));
  }
  // Custom callbacks and tables.
  {
    auto seq = b.mixed(4);
    add("custom_max_n4", seq, steinlab::custom(4, [](std::span<const double> x) {
          double m = x[0];
          for (double v : x) m = std::max(m, v);
          return m;
        }));
  }
  {
    auto seq = b.mixed(5);
    add("custom_product_sine_n5", seq, steinlab::custom(5, [](std::span<const double> x) {
          double p = 1.0;
          double s = 0.0;
          for (double v : x) {
            p *= v;
            s += v;
          }
          return p + std::sin(s);
        }));
  }
  {
    auto seq = b.mixed(3);
    std::vector<double> values(seq.grid_size());
    for (double& v : values) v = b.uniform(-2.0, 2.0);
    add("table_real_n3", seq, steinlab::table(values, 3));
  }
  {
    auto seq = b.mixed(4, false);
    std::vector<double> values(seq.grid_size());
    for (double& v : values) v = static_cast<double>(b.pick(4));
    add("table_integer_n4", seq, steinlab::table(values, 4, true));
  }
  {
    auto seq = IndependentSequence::iid(DiscreteDistribution::rademacher(), 5);
    add("parity_n5", seq, steinlab::custom(5, [](std::span<const double> x) {
          double p = 1.0;
          for (double v : x) p *= v;
          return (1.0 - p) / 2.0;
        }, true));
  }
  return out;
}

}  // namespace battery
