#pragma once

// Product model: finitely many independent coordinates, each with a finite
// support. Provides exact enumeration of the product grid (row-major, last
// coordinate fastest) and reproducible inverse-CDF sampling.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <iterator>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "steinlab/error.hpp"
#include "steinlab/rng.hpp"

namespace steinlab {

struct Atom {
  double value;
  double prob;
};

inline constexpr double kProbSumTolerance = 1e-9;

class DiscreteDistribution {
 public:
  /// Validates, sorts by value and renormalizes. Throws NonPositiveProb,
  /// DuplicateAtom, SumNotOne, EmptyDistribution or NonFiniteValue.
  static DiscreteDistribution make(std::vector<Atom> atoms) {
    if (atoms.empty()) throw Error(ErrorCode::empty_distribution, "distribution needs at least one atom");
    double total = 0.0;
    for (const Atom& a : atoms) {
      if (!std::isfinite(a.value)) throw Error(ErrorCode::non_finite_value, "atom value is not finite");
      if (!(a.prob > 0.0) || !std::isfinite(a.prob)) {
        throw Error(ErrorCode::non_positive_prob, "atom probability " + std::to_string(a.prob) + " is not positive");
      }
      total += a.prob;
    }
    if (std::abs(total - 1.0) > kProbSumTolerance) {
      throw Error(ErrorCode::sum_not_one, "probabilities sum to " + std::to_string(total));
    }
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.value < b.value; });
    for (std::size_t j = 1; j < atoms.size(); ++j) {
      if (atoms[j].value == atoms[j - 1].value) {
        throw Error(ErrorCode::duplicate_atom, "value " + std::to_string(atoms[j].value) + " appears twice");
      }
    }
    for (Atom& a : atoms) a.prob /= total;
    return DiscreteDistribution(std::move(atoms));
  }

  static DiscreteDistribution rademacher() { return make({{-1.0, 0.5}, {1.0, 0.5}}); }

  /// Bernoulli(p); p = 0 or p = 1 give the degenerate single-atom law.
  static DiscreteDistribution bernoulli(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::non_positive_prob, "Bernoulli parameter " + std::to_string(p) + " outside [0, 1]");
    }
    if (p == 0.0) return make({{0.0, 1.0}});
    if (p == 1.0) return make({{1.0, 1.0}});
    return make({{0.0, 1.0 - p}, {1.0, p}});
  }

  [[nodiscard]] std::span<const Atom> atoms() const noexcept { return atoms_; }
  [[nodiscard]] std::size_t size() const noexcept { return atoms_.size(); }
  [[nodiscard]] double value(std::size_t j) const { return atoms_[j].value; }
  [[nodiscard]] double prob(std::size_t j) const { return atoms_[j].prob; }
  [[nodiscard]] double mean() const noexcept { return mean_; }
  [[nodiscard]] double variance() const { return moment(2.0, true); }

  /// Sum_j p_j |v_j - c|^r with c = mean if centered, else 0.
  [[nodiscard]] double moment(double r, bool centered) const {
    if (!(r > 0.0)) throw Error(ErrorCode::invalid_argument, "moment order must be positive");
    const double c = centered ? mean_ : 0.0;
    double acc = 0.0;
    for (const Atom& a : atoms_) acc += a.prob * std::pow(std::abs(a.value - c), r);
    return acc;
  }

  /// Sum_j p_j (v_j - c)^r, keeping the sign for odd r.
  [[nodiscard]] double signed_moment(int r, bool centered) const {
    if (r <= 0) throw Error(ErrorCode::invalid_argument, "moment order must be positive");
    const double c = centered ? mean_ : 0.0;
    double acc = 0.0;
    for (const Atom& a : atoms_) {
      double term = 1.0;
      for (int k = 0; k < r; ++k) term *= a.value - c;
      acc += a.prob * term;
    }
    return acc;
  }

  /// Inverse CDF: smallest j with u < F(v_j). u must lie in [0, 1).
  [[nodiscard]] std::size_t index_for_uniform(double u) const {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), atoms_.size() - 1);
  }

  friend bool operator==(const DiscreteDistribution& a, const DiscreteDistribution& b) {
    if (a.atoms_.size() != b.atoms_.size()) return false;
    for (std::size_t j = 0; j < a.atoms_.size(); ++j) {
      if (a.atoms_[j].value != b.atoms_[j].value || a.atoms_[j].prob != b.atoms_[j].prob) return false;
    }
    return true;
  }

 private:
  explicit DiscreteDistribution(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    cdf_.resize(atoms_.size());
    double run = 0.0;
    mean_ = 0.0;
    for (std::size_t j = 0; j < atoms_.size(); ++j) {
      run += atoms_[j].prob;
      cdf_[j] = run;
      mean_ += atoms_[j].prob * atoms_[j].value;
    }
    cdf_.back() = 1.0;
  }

  std::vector<Atom> atoms_;
  std::vector<double> cdf_;
  double mean_ = 0.0;
};

/// Enumeration cap: 2^24 unless STEINLAB_GRID_CAP holds a positive integer.
[[nodiscard]] inline std::uint64_t default_grid_cap() {
  constexpr std::uint64_t kDefault = std::uint64_t{1} << 24;
  if (const char* env = std::getenv("STEINLAB_GRID_CAP")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && v > 0) return v;
  }
  return kDefault;
}

class IndependentSequence {
 public:
  explicit IndependentSequence(std::vector<DiscreteDistribution> coords) : coords_(std::move(coords)) {
    if (coords_.empty()) throw Error(ErrorCode::bad_arity, "a sequence needs at least one coordinate");
    grid_size_ = 1;
    for (const auto& c : coords_) {
      if (grid_size_ > std::numeric_limits<std::uint64_t>::max() / c.size()) {
        grid_size_ = std::numeric_limits<std::uint64_t>::max();
        break;
      }
      grid_size_ *= c.size();
    }
  }

  static IndependentSequence iid(const DiscreteDistribution& d, std::size_t n) {
    return IndependentSequence(std::vector<DiscreteDistribution>(n, d));
  }

  [[nodiscard]] std::size_t size() const noexcept { return coords_.size(); }
  [[nodiscard]] const DiscreteDistribution& operator[](std::size_t i) const { return coords_[i]; }
  [[nodiscard]] std::span<const DiscreteDistribution> coords() const noexcept { return coords_; }

  /// Product of support sizes; saturates at UINT64_MAX.
  [[nodiscard]] std::uint64_t grid_size() const noexcept { return grid_size_; }

  [[nodiscard]] std::vector<std::size_t> axes() const {
    std::vector<std::size_t> out;
    out.reserve(coords_.size());
    for (const auto& c : coords_) out.push_back(c.size());
    return out;
  }

  void require_enumerable(std::uint64_t cap = default_grid_cap()) const {
    if (grid_size_ > cap) {
      throw Error(ErrorCode::grid_too_large,
                  "grid size " + std::to_string(grid_size_) + " exceeds enumeration cap " + std::to_string(cap));
    }
  }

  [[nodiscard]] bool identically_distributed() const {
    return std::all_of(coords_.begin(), coords_.end(), [&](const auto& c) { return c == coords_.front(); });
  }

  friend bool operator==(const IndependentSequence& a, const IndependentSequence& b) {
    return a.coords_ == b.coords_;
  }

 private:
  std::vector<DiscreteDistribution> coords_;
  std::uint64_t grid_size_ = 1;
};

struct Outcome {
  std::vector<std::size_t> indices;

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

inline void outcome_values(const IndependentSequence& seq, const Outcome& o, std::span<double> out) {
  for (std::size_t i = 0; i < seq.size(); ++i) out[i] = seq[i].value(o.indices[i]);
}

/// One enumerated grid point.
struct GridPoint {
  Outcome outcome;
  double weight = 0.0;
  std::size_t flat = 0;
};

/// Input range over the product grid in row-major order. Weights are the
/// left-to-right product p_1 * p_2 * ... * p_n of coordinate probabilities.
class OutcomeRange {
 public:
  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = GridPoint;
    using difference_type = std::ptrdiff_t;
    using pointer = const GridPoint*;
    using reference = const GridPoint&;

    iterator() = default;
    iterator(const IndependentSequence* seq, bool at_end) : seq_(seq), done_(at_end) {
      if (done_) return;
      const std::size_t n = seq_->size();
      point_.outcome.indices.assign(n, 0);
      prefix_.assign(n + 1, 1.0);
      refresh_from(0);
    }

    reference operator*() const { return point_; }
    pointer operator->() const { return &point_; }

    iterator& operator++() {
      const std::size_t n = seq_->size();
      auto& idx = point_.outcome.indices;
      std::size_t pos = n;
      while (pos > 0) {
        --pos;
        if (++idx[pos] < (*seq_)[pos].size()) {
          ++point_.flat;
          refresh_from(pos);
          return *this;
        }
        idx[pos] = 0;
      }
      done_ = true;
      return *this;
    }
    void operator++(int) { ++*this; }

    friend bool operator==(const iterator& a, const iterator& b) { return a.done_ == b.done_; }

   private:
    void refresh_from(std::size_t pos) {
      const auto& idx = point_.outcome.indices;
      for (std::size_t i = pos; i < seq_->size(); ++i) prefix_[i + 1] = prefix_[i] * (*seq_)[i].prob(idx[i]);
      point_.weight = prefix_.back();
    }

    const IndependentSequence* seq_ = nullptr;
    GridPoint point_;
    std::vector<double> prefix_;
    bool done_ = true;
  };

  OutcomeRange(const IndependentSequence& seq, std::uint64_t cap) : seq_(&seq) { seq.require_enumerable(cap); }

  [[nodiscard]] iterator begin() const { return iterator(seq_, false); }
  [[nodiscard]] iterator end() const { return iterator(seq_, true); }

 private:
  const IndependentSequence* seq_;
};

/// Streams every outcome exactly once with its probability weight. Throws
/// GridTooLarge when the grid exceeds `cap`.
[[nodiscard]] inline OutcomeRange enumerate(const IndependentSequence& seq, std::uint64_t cap = default_grid_cap()) {
  return OutcomeRange(seq, cap);
}

/// `count` i.i.d. outcomes. Outcome k, coordinate i uses counter k*n + i of
/// CounterRng(seed, 0) and inverse-CDF sampling.
[[nodiscard]] inline std::vector<Outcome> sample(const IndependentSequence& seq, std::uint64_t seed,
                                                 std::size_t count) {
  if (count == 0) throw Error(ErrorCode::invalid_argument, "sample count must be at least 1");
  const CounterRng rng(seed, 0);
  const std::size_t n = seq.size();
  std::vector<Outcome> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    out[k].indices.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[k].indices[i] = seq[i].index_for_uniform(rng.uniform(k * n + i));
  }
  return out;
}

}  // namespace steinlab
