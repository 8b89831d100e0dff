#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "steinlab/diff_profile.hpp"
#include "steinlab/eval_tensor.hpp"
#include "steinlab/functional.hpp"
#include "support/battery.hpp"
#include "support/oracle.hpp"

using namespace steinlab;

namespace {

const DiscreteDistribution kRad = DiscreteDistribution::rademacher();

std::vector<double> vec(const EvalTensor& t) { return {t.values().begin(), t.values().end()}; }

void expect_all(const EvalTensor& t, const std::vector<double>& expect, double tol = 1e-15) {
  ASSERT_EQ(t.size(), expect.size());
  for (std::size_t k = 0; k < t.size(); ++k) EXPECT_NEAR(t[k], expect[k], tol) << "k=" << k;
}

void expect_const(const EvalTensor& t, double c, double tol = 1e-15) {
  for (std::size_t k = 0; k < t.size(); ++k) EXPECT_NEAR(t[k], c, tol) << "k=" << k;
}

EvalTensor tensor_of(const IndependentSequence& seq, const Functional& f) { return build_eval_tensor(seq, f); }

Functional product2() {
  return custom(2, [](std::span<const double> x) { return x[0] * x[1]; });
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no steinlab::Error thrown";
  return ErrorCode::invalid_argument;
}

}  // namespace

// ---------------------------------------------------------------- examples

TEST(BuildEvalTensor, Examples) {
  const auto seq = IndependentSequence::iid(kRad, 2);
  const double a = 1.0 / std::sqrt(2.0);
  expect_all(tensor_of(seq, weighted_sum({a, a})), {-std::sqrt(2.0), 0.0, 0.0, std::sqrt(2.0)}, 1e-15);
  expect_all(tensor_of(seq, quadratic_form({{0, 1}, {1, 0}})), {1, -1, -1, 1});
  expect_const(tensor_of(seq, custom(2, [](std::span<const double>) { return 3.5; })), 3.5, 0.0);
}

TEST(BuildEvalTensor, GridTooLarge) {
  const auto seq = IndependentSequence::iid(kRad, 6);
  EXPECT_EQ(code_of([&] { (void)build_eval_tensor(seq, weighted_sum(std::vector<double>(6, 1.0)), 32); }),
            ErrorCode::grid_too_large);
}

TEST(EvalTensor, ForwardAndReversedExpectationAgree) {
  for (const auto& inst : battery::standard()) {
    const EvalTensor t = tensor_of(inst.seq, inst.f);
    EXPECT_NEAR(expectation(t), expectation_reversed(t), 1e-12 * t.scale()) << inst.name;
  }
}

TEST(MarginalExpectation, Examples) {
  const auto seq = IndependentSequence::iid(kRad, 2);
  expect_const(marginal_expectation(tensor_of(seq, product2()), 0), 0.0);
  expect_const(marginal_expectation(tensor_of(seq, weighted_sum({0, 0})), 1), 0.0);
  // E_1 of e1 + e2 equals e2: row-major values e2 = (-1, 1, -1, 1).
  expect_all(marginal_expectation(tensor_of(seq, weighted_sum({1, 1})), 0), {-1, 1, -1, 1});
  EXPECT_EQ(code_of([&] { (void)marginal_expectation(tensor_of(seq, product2()), 2); }), ErrorCode::axis_out_of_range);
}

TEST(Difference, Examples) {
  const IndependentSequence seq({DiscreteDistribution::bernoulli(0.3), DiscreteDistribution::make({{0, 0.3}, {1, 0.3}, {2, 0.4}})});
  double total = 0.0;
  for (const auto& c : seq.coords()) total += c.variance();
  const EvalTensor s = tensor_of(seq, partial_sum(seq));
  for (std::size_t i = 0; i < 2; ++i) {
    const EvalTensor d = difference(s, i);
    for (std::size_t k = 0; k < d.size(); ++k) {
      const double x = seq[i].value(s.grid().coordinate(k, i));
      EXPECT_NEAR(d[k], (x - seq[i].mean()) / std::sqrt(total), 1e-15);
    }
  }
  // F depends on X_1 only: D_2 F vanishes.
  expect_const(difference(tensor_of(seq, weighted_sum({2.0, 0.0})), 1), 0.0);
  const auto rad = IndependentSequence::iid(kRad, 2);
  expect_all(difference(tensor_of(rad, product2()), 0), {1, -1, -1, 1});
}

TEST(SmallDSquared, Examples) {
  const auto seq = IndependentSequence::iid(kRad, 3);
  const std::vector<double> a{0.3, -0.9, 1.7};
  const EvalTensor t = tensor_of(seq, weighted_sum(a, true));
  for (std::size_t i = 0; i < 3; ++i) expect_const(small_d_squared(t, i), a[i] * a[i], 1e-15);
  expect_const(small_d_squared(tensor_of(seq, weighted_sum({0, 0, 0})), 1), 0.0);

  // Normalized series of centered coordinates: (X_i^2 + s_i^2) / (2 S).
  const IndependentSequence c({DiscreteDistribution::make({{-1, 0.5}, {1, 0.5}}),
                               DiscreteDistribution::make({{-2, 0.25}, {0, 0.5}, {2, 0.25}})});
  const double big = 1.0 + 2.0;
  const EvalTensor s = tensor_of(c, partial_sum(c));
  for (std::size_t i = 0; i < 2; ++i) {
    const EvalTensor dsq = small_d_squared(s, i);
    for (std::size_t k = 0; k < s.size(); ++k) {
      const double x = c[i].value(s.grid().coordinate(k, i));
      EXPECT_NEAR(dsq[k], (x * x + c[i].variance()) / (2.0 * big), 1e-15);
    }
  }
}

TEST(PrefixConditional, Examples) {
  const auto seq = IndependentSequence::iid(kRad, 2);
  const EvalTensor t = tensor_of(seq, product2());
  expect_const(prefix_conditional(t, 0), 0.0);
  expect_const(prefix_conditional(t, 1), 0.0);
  expect_all(prefix_conditional(t, 2), vec(t), 0.0);
  EXPECT_EQ(code_of([&] { (void)prefix_conditional(t, 3); }), ErrorCode::axis_out_of_range);
}

TEST(ProjectedDifference, WeightedRademacherAndQuadratic) {
  const auto seq = IndependentSequence::iid(kRad, 4);
  const std::vector<double> a{0.5, -0.5, 0.5, 0.5};
  const EvalTensor ws = tensor_of(seq, weighted_sum(a));
  const std::vector<std::vector<double>> m{{0, 0.2, -0.7, 1.1}, {0.2, 0, 0.4, -0.3}, {-0.7, 0.4, 0, 0.9}, {1.1, -0.3, 0.9, 0}};
  const EvalTensor qf = tensor_of(seq, quadratic_form(m));
  for (std::size_t i = 0; i < 4; ++i) {
    const EvalTensor p = projected_difference(ws, i);
    const EvalTensor q = projected_difference(qf, i);
    for (std::size_t k = 0; k < ws.size(); ++k) {
      auto eps = [&](std::size_t j) { return seq[j].value(ws.grid().coordinate(k, j)); };
      EXPECT_NEAR(p[k], a[i] * eps(i), 1e-15);
      double s = 0.0;
      for (std::size_t j = 0; j < i; ++j) s += m[i][j] * eps(j);
      EXPECT_NEAR(q[k], eps(i) * s, 1e-14);
    }
  }
  expect_const(projected_difference(tensor_of(seq, weighted_sum({1, 0, 0, 0})), 2), 0.0);
}

TEST(ZStatistics, Examples) {
  const auto seq = IndependentSequence::iid(kRad, 2);
  const double a = 1.0 / std::sqrt(2.0);
  const DiffProfile p(tensor_of(seq, weighted_sum({a, a})));
  expect_const(p.z(), 1.0, 1e-15);
  EXPECT_NEAR(p.var_z(), 0.0, 1e-15);
  EXPECT_NEAR(p.var_zbar(), 2.0, 1e-14);
  EXPECT_NEAR(p.e_abs_one_minus_z(), 0.0, 1e-15);

  const DiffProfile q(tensor_of(seq, product2()));
  expect_const(q.z(), 1.0, 1e-15);
  EXPECT_NEAR(q.var_z(), 0.0, 1e-15);
}

TEST(ZStatistics, WeightedRademacherClosedForm) {
  const std::vector<double> raw{0.9, -0.3, 0.5, 1.2, -0.7};
  double ss = 0.0;
  for (double v : raw) ss += v * v;
  std::vector<double> a;
  double s4 = 0.0;
  for (double v : raw) {
    a.push_back(v / std::sqrt(ss));
    s4 += std::pow(a.back(), 4);
  }
  const DiffProfile p(tensor_of(IndependentSequence::iid(kRad, 5), weighted_sum(a)));
  expect_const(p.z(), 1.0, 1e-14);
  EXPECT_NEAR(p.var_zbar(), 4.0 * s4, 1e-13);
}

TEST(Lyapunov, Examples) {
  const auto seq = IndependentSequence::iid(kRad, 2);
  const double a = 1.0 / std::sqrt(2.0);
  const DiffProfile p(tensor_of(seq, weighted_sum({a, a})));
  EXPECT_NEAR(p.lyapunov(3.0), 2.0 * std::pow(2.0, -1.5), 1e-15);
  EXPECT_NEAR(p.lyapunov(3.0), 0.70711, 1e-5);
  const DiffProfile c(tensor_of(seq, weighted_sum({0, 0})));
  EXPECT_EQ(c.lyapunov(2.5), 0.0);
  EXPECT_THROW((void)p.lyapunov(0.0), Error);

  // Centered sums: classical Lyapunov ratio, non-cached orders included.
  const IndependentSequence mixed({DiscreteDistribution::bernoulli(0.2), DiscreteDistribution::make({{0, 0.3}, {1, 0.3}, {2, 0.4}}), kRad});
  double big = 0.0;
  for (const auto& d : mixed.coords()) big += d.variance();
  const DiffProfile s(tensor_of(mixed, partial_sum(mixed)));
  for (double r : {1.0, 2.0, 2.5, 3.0, 4.0, 5.0}) {
    double classical = 0.0;
    for (const auto& d : mixed.coords()) classical += d.moment(r, true);
    classical /= std::pow(big, r / 2.0);
    EXPECT_NEAR(s.lyapunov(r), classical, 1e-14) << "r=" << r;
  }
}

TEST(SecondOrderDifference, Examples) {
  const auto seq = IndependentSequence::iid(kRad, 3);
  const EvalTensor ws = tensor_of(seq, weighted_sum({0.4, 1.0, -2.0}));
  expect_const(second_order_difference(ws, 0, 2), 0.0);
  expect_all(second_order_difference(ws, 1, 1), vec(difference(ws, 1)), 0.0);
  const auto two = IndependentSequence::iid(kRad, 2);
  expect_all(second_order_difference(tensor_of(two, product2()), 0, 1), {1, -1, -1, 1});
}

TEST(DependencySets, Examples) {
  const auto seq = IndependentSequence::iid(DiscreteDistribution::bernoulli(0.4), 5);
  const auto ws = dependency_sets(tensor_of(seq, weighted_sum({1, 2, 3, 4, 5})));
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(ws[k], std::vector<std::size_t>{k});
  const auto run = dependency_sets(tensor_of(seq, m_run({1, 1, 1, 1}, 2)));
  for (std::size_t k = 0; k < 5; ++k) {
    for (std::size_t i : run[k]) EXPECT_LE(i > k ? i - k : k - i, 1u);
    EXPECT_FALSE(run[k].empty());
  }
  for (const auto& s : dependency_sets(tensor_of(seq, weighted_sum({0, 0, 0, 0, 0})))) EXPECT_TRUE(s.empty());
}

TEST(CovarianceFormula, Examples) {
  const auto seq = IndependentSequence::iid(kRad, 2);
  EXPECT_NEAR(covariance_formula(tensor_of(seq, weighted_sum({1, 1})), tensor_of(seq, product2())), 0.0, 1e-15);
  const IndependentSequence mixed({DiscreteDistribution::bernoulli(0.2), DiscreteDistribution::make({{0, 0.3}, {1, 0.3}, {2, 0.4}})});
  const std::vector<double> a{1.5, -0.5};
  const EvalTensor t = tensor_of(mixed, weighted_sum(a, true));
  const double expect = a[0] * a[0] * mixed[0].variance() + a[1] * a[1] * mixed[1].variance();
  EXPECT_NEAR(covariance_formula(t, t), expect, 1e-14);
  const EvalTensor other = tensor_of(IndependentSequence::iid(kRad, 3), weighted_sum({1, 1, 1}));
  EXPECT_EQ(code_of([&] { (void)covariance_formula(t, other); }), ErrorCode::shape_mismatch);
}

// ---------------------------------------------------------------- identities on the battery

class OperatorIdentities : public ::testing::TestWithParam<std::size_t> {
 protected:
  static const std::vector<battery::Instance>& instances() {
    static const std::vector<battery::Instance> all = battery::standard();
    return all;
  }
};

TEST_P(OperatorIdentities, EngineMatchesBruteForceAndIdentitiesHold) {
  const auto& inst = instances()[GetParam()];
  SCOPED_TRACE(inst.name);
  const oracle::Space sp(inst.seq);
  const oracle::Table f = sp.evaluate(inst.f);
  const EvalTensor t = tensor_of(inst.seq, inst.f);
  const double scale = std::max(1.0, oracle::max_abs(f));
  const double tol = 1e-10 * scale;
  const double tol2 = 1e-10 * scale * scale;
  ASSERT_LE(oracle::max_abs_diff(sp.from_engine(t.values()), f), 0.0);

  // A second functional on the same grid for the bilinear identities.
  const oracle::Table g = sp.map(f, [](double v) { return std::sin(v) + 0.25 * v * v; });
  const DiffProfile prof(t);
  const double var = sp.variance(f);

  for (std::size_t i = 0; i < sp.dims(); ++i) {
    SCOPED_TRACE("axis " + std::to_string(i));
    const oracle::Table d = sp.d_i(f, i);
    const oracle::Table dg = sp.d_i(g, i);
    EXPECT_LE(oracle::max_abs_diff(sp.from_engine(difference(t, i).values()), d), tol);

    // (i)
    EXPECT_NEAR(sp.expect(d), 0.0, tol);
    // (ii): D_i E[F|F_i] = E[F|F_i] - E[F|F_{i-1}] = E[D_i F|F_i].
    const oracle::Table cond = sp.prefix(f, i + 1);
    const oracle::Table lhs = sp.d_i(cond, i);
    const oracle::Table mid = sp.zip(cond, sp.prefix(f, i), [](double x, double y) { return x - y; });
    const oracle::Table rhs = sp.p_i(f, i);
    EXPECT_LE(oracle::max_abs_diff(lhs, mid), tol);
    EXPECT_LE(oracle::max_abs_diff(mid, rhs), tol);
    EXPECT_LE(oracle::max_abs_diff(sp.from_engine(projected_difference(t, i).values()), rhs), tol);
    // (iii)
    const double e1 = sp.expect(sp.zip(d, g, [](double x, double y) { return x * y; }));
    const double e2 = sp.expect(sp.zip(dg, f, [](double x, double y) { return x * y; }));
    const double e3 = sp.expect(sp.zip(d, dg, [](double x, double y) { return x * y; }));
    const double gscale = std::max(1.0, oracle::max_abs(g));
    EXPECT_NEAR(e1, e2, 1e-10 * scale * gscale);
    EXPECT_NEAR(e2, e3, 1e-10 * scale * gscale);
    // (iv): definition by resampling versus the identity, and the engine.
    const oracle::Table dsq = sp.dsq_i(f, i);
    const oracle::Table d2 = sp.map(d, [](double v) { return v * v; });
    const oracle::Table ed2 = sp.e_i(d2, i);
    const oracle::Table iv = sp.zip(d2, ed2, [](double x, double y) { return 0.5 * (x + y); });
    EXPECT_LE(oracle::max_abs_diff(dsq, iv), tol2);
    EXPECT_LE(oracle::max_abs_diff(sp.from_engine(small_d_squared(t, i).values()), dsq), tol2);
    for (double v : sp.from_engine(small_d_squared(t, i).values())) EXPECT_GE(v, 0.0);
    // (v)
    const oracle::Table fg = sp.zip(f, g, [](double x, double y) { return x * y; });
    const oracle::Table dfdg = sp.zip(d, dg, [](double x, double y) { return x * y; });
    const oracle::Table edfdg = sp.e_i(dfdg, i);
    const oracle::Table dprod = sp.d_i(fg, i);
    for (std::size_t k = 0; k < sp.size(); ++k) {
      const double rule = f[k] * dg[k] + g[k] * d[k] - dfdg[k] - edfdg[k];
      EXPECT_NEAR(dprod[k], rule, 1e-10 * scale * gscale);
    }
    // (vi)
    for (double p : {1.0, 2.0, 3.0, 4.0}) {
      const double lhs_p = sp.axis_moment(f, i, p);
      const double rhs_p = std::pow(2.0, p) * sp.expect(sp.map(f, [p](double v) { return std::pow(std::abs(v), p); }));
      EXPECT_LE(lhs_p, rhs_p * (1.0 + 1e-10) + 1e-300);
    }
    // Cached absolute moments and the P_i^2 summary.
    for (int r : kCachedOrders) {
      const double ref = sp.axis_moment(f, i, r);
      EXPECT_NEAR(prof.axis(i).moment(r), ref, 1e-10 * std::max(ref, std::pow(scale, r) * 1e-6));
    }
    const double psq = sp.expect(sp.map(rhs, [](double v) { return v * v; }));
    EXPECT_NEAR(prof.axis(i).p_squared, psq, tol2);
    // Second-order differences: symmetric, and against the oracle.
    for (std::size_t k = 0; k < sp.dims(); ++k) {
      const oracle::Table ref = sp.d_ki(f, k, i);
      EXPECT_LE(oracle::max_abs_diff(sp.from_engine(second_order_difference(t, k, i).values()), ref), tol);
      EXPECT_LE(oracle::max_abs_diff(sp.from_engine(second_order_difference(t, i, k).values()), ref), tol);
    }
  }

  // Covariance formula, both orders, against the enumerated covariance.
  const double mf = sp.expect(f);
  const double mg = sp.expect(g);
  const double cov = sp.expect(sp.zip(f, g, [&](double x, double y) { return (x - mf) * (y - mg); }));
  const double gscale = std::max(1.0, oracle::max_abs(g));
  const EvalTensor tg = EvalTensor(t.grid_ptr(), [&] {
    std::vector<double> v(sp.size());
    for (std::size_t k = 0; k < sp.size(); ++k) v[sp.engine_index(k)] = g[k];
    return v;
  }());
  EXPECT_NEAR(sp.covariance_formula(f, g), cov, 1e-10 * scale * gscale);
  EXPECT_NEAR(covariance_formula(t, tg), cov, 1e-10 * scale * gscale);
  EXPECT_NEAR(covariance_formula(tg, t), cov, 1e-10 * scale * gscale);

  // Variance identity: Var F = E Z = sum_i E P_i^2; Efron-Stein.
  const oracle::Table z = sp.z(f);
  EXPECT_NEAR(sp.expect(z), var, tol2);
  EXPECT_NEAR(prof.mean_z(), var, tol2);
  EXPECT_NEAR(prof.variance(), var, tol2);
  double sum_p2 = 0.0;
  for (std::size_t i = 0; i < sp.dims(); ++i) sum_p2 += sp.expect(sp.map(sp.p_i(f, i), [](double v) { return v * v; }));
  EXPECT_NEAR(sum_p2, var, tol2);
  EXPECT_LE(var, sp.lyapunov(f, 2.0) + tol2);
  EXPECT_LE(prof.variance(), prof.lyapunov(2.0) + tol2);

  // Z and Zbar tensors.
  EXPECT_LE(oracle::max_abs_diff(sp.from_engine(prof.z().values()), z), tol2);
  EXPECT_LE(oracle::max_abs_diff(sp.from_engine(prof.zbar().values()), sp.zbar(f)), tol2);
  EXPECT_NEAR(prof.mean_zbar(), 0.0, tol2);
  EXPECT_NEAR(prof.var_z(), sp.variance(z), 1e-10 * std::pow(scale, 4));
  EXPECT_NEAR(prof.var_zbar(), sp.variance(sp.zbar(f)), 1e-10 * std::pow(scale, 4));
  for (double r : {1.0, 1.5, 2.0, 3.0, 4.0}) {
    const double ref = sp.lyapunov(f, r);
    EXPECT_NEAR(prof.lyapunov(r), ref, 1e-10 * std::max(1.0, ref)) << "r=" << r;
  }

  // Fourth-moment bound for the centered functional.
  const oracle::Table c = sp.map(f, [mf](double v) { return v - mf; });
  const double lhs4 = std::sqrt(sp.expect(sp.map(c, [](double v) { return v * v * v * v; })));
  double rhs4 = 0.0;
  for (std::size_t i = 0; i < sp.dims(); ++i) rhs4 += std::sqrt(sp.axis_moment(c, i, 4.0));
  EXPECT_LE(lhs4, (9.0 + 2.0 * std::numbers::sqrt2) * rhs4 + 1e-10 * scale * scale);

  // Dependency sets.
  EXPECT_EQ(dependency_sets(t), sp.dependency_sets(f));
}

INSTANTIATE_TEST_SUITE_P(Battery, OperatorIdentities, ::testing::Range<std::size_t>(0, 26),
                         [](const ::testing::TestParamInfo<std::size_t>& info) {
                           static const auto all = battery::standard();
                           return all[info.param].name;
                         });

// ---------------------------------------------------------------- chain rules

TEST(ChainRule, SmoothRemainderBound) {
  struct Smooth {
    const char* name;
    double (*f)(double);
    double (*fp)(double);
    double f2_sup;
  };
  const Smooth fns[] = {
      {"sin", [](double x) { return std::sin(x); }, [](double x) { return std::cos(x); }, 1.0},
      {"cos2x", [](double x) { return std::cos(2.0 * x); }, [](double x) { return -2.0 * std::sin(2.0 * x); }, 4.0},
      {"half_square", [](double x) { return 0.5 * x * x; }, [](double x) { return x; }, 1.0},
      {"arctan", [](double x) { return std::atan(x); }, [](double x) { return 1.0 / (1.0 + x * x); },
       3.0 * std::sqrt(3.0) / 8.0},
  };
  for (const auto& inst : battery::standard()) {
    const oracle::Space sp(inst.seq);
    const oracle::Table f = sp.evaluate(inst.f);
    const double scale = std::max(1.0, oracle::max_abs(f));
    for (const auto& s : fns) {
      const oracle::Table ff = sp.map(f, s.f);
      const oracle::Table fp = sp.map(f, s.fp);
      for (std::size_t i = 0; i < sp.dims(); ++i) {
        const oracle::Table dff = sp.d_i(ff, i);
        const oracle::Table d = sp.d_i(f, i);
        const oracle::Table dsq = sp.dsq_i(f, i);
        for (std::size_t k = 0; k < sp.size(); ++k) {
          const double rem = std::abs(dff[k] - fp[k] * d[k]);
          EXPECT_LE(rem, s.f2_sup * dsq[k] + 1e-10 * scale * scale) << inst.name << " " << s.name << " i=" << i;
        }
      }
    }
  }
}

TEST(ChainRule, DiscreteRemainderBound) {
  struct Discrete {
    const char* name;
    double (*f)(double);
    double d2_sup;
  };
  const Discrete fns[] = {
      {"square", [](double k) { return k * k; }, 2.0},
      {"cos", [](double k) { return std::cos(k); }, 2.0 * (1.0 - std::cos(1.0))},
      {"sqrt1p", [](double k) { return std::sqrt(1.0 + k); }, 2.0 * std::sqrt(2.0) - 1.0 - std::sqrt(3.0)},
  };
  std::size_t checked = 0;
  for (const auto& inst : battery::standard()) {
    const oracle::Space sp(inst.seq);
    const oracle::Table f = sp.evaluate(inst.f);
    const bool natural = std::all_of(f.begin(), f.end(), [](double v) { return v >= 0.0 && v == std::nearbyint(v); });
    if (!natural) continue;
    ++checked;
    const double scale = std::max(1.0, oracle::max_abs(f));
    for (const auto& s : fns) {
      const oracle::Table ff = sp.map(f, s.f);
      const oracle::Table delta = sp.map(f, [&](double k) { return s.f(k + 1.0) - s.f(k); });
      for (std::size_t i = 0; i < sp.dims(); ++i) {
        const oracle::Table dff = sp.d_i(ff, i);
        const oracle::Table d = sp.d_i(f, i);
        const oracle::Table dsq = sp.dsq_i(f, i);
        for (std::size_t k = 0; k < sp.size(); ++k) {
          const double rem = std::abs(dff[k] - delta[k] * d[k]);
          const double bound = 0.5 * s.d2_sup * (2.0 * dsq[k] + d[k]);
          EXPECT_LE(rem, bound + 1e-10 * scale * scale) << inst.name << " " << s.name << " i=" << i;
        }
      }
    }
  }
  EXPECT_GE(checked, 5u);
}
