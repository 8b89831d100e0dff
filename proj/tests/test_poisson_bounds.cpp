#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "steinlab/diff_profile.hpp"
#include "steinlab/distance.hpp"
#include "steinlab/poisson_bounds.hpp"
#include "support/battery.hpp"
#include "support/oracle.hpp"

using namespace steinlab;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no steinlab::Error thrown";
  return ErrorCode::invalid_argument;
}

DiffProfile binomial2() {
  const auto seq = IndependentSequence::iid(DiscreteDistribution::bernoulli(0.5), 2);
  return DiffProfile(build_eval_tensor(seq, weighted_sum({1.0, 1.0})));
}

bool natural(const oracle::Table& f) {
  return std::all_of(f.begin(), f.end(), [](double v) { return v >= 0.0 && std::abs(v - std::nearbyint(v)) <= 1e-9; });
}

}  // namespace

TEST(ChenSteinConstants, Examples) {
  const auto c = chen_stein_constants(1.0);
  EXPECT_NEAR(c.delta_f_a, 1.0 - std::exp(-1.0), 1e-15);
  EXPECT_NEAR(c.delta_f_a, 0.632121, 1e-6);
  EXPECT_NEAR(c.delta2_f_h, 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(c.f_a, std::min(1.0, std::sqrt(2.0 / std::numbers::e)), 1e-15);
  EXPECT_EQ(c.delta_f_h, 1.0);  // 8 / (3 sqrt(2e)) > 1
  EXPECT_NEAR(chen_stein_constants(1e-9).delta_f_a, 1.0, 1e-8);
  const auto big = chen_stein_constants(100.0);
  EXPECT_NEAR(big.delta_f_h, 8.0 / (3.0 * std::sqrt(200.0 * std::numbers::e)), 1e-15);
  EXPECT_NEAR(big.delta2_f_h, 0.02, 1e-15);
  EXPECT_EQ(code_of([] { (void)chen_stein_constants(0.0); }), ErrorCode::non_positive_theta);
  EXPECT_EQ(code_of([] { (void)chen_stein_constants(-1.0); }), ErrorCode::non_positive_theta);
}

TEST(TvBound, BinomialRelaxedHandValue) {
  const BoundReport r = tv_bound(binomial2(), 1.0, PoissonForm::relaxed);
  EXPECT_NEAR(r.component("|theta-mu|"), 0.0, 1e-15);
  EXPECT_NEAR(r.component("|theta-sigma^2|"), 0.5, 1e-15);
  EXPECT_NEAR(r.component("sqrtVarZ"), 0.0, 1e-15);
  EXPECT_NEAR(r.component("L3"), 0.25, 1e-15);
  EXPECT_NEAR(r.component("L2"), 0.5, 1e-15);
  EXPECT_NEAR(r.value, (1.0 - std::exp(-1.0)) * 1.5, 1e-15);
  EXPECT_NEAR(r.value, 0.948181, 1e-6);
  EXPECT_EQ(r.theorem, "prove01.plo2");
  EXPECT_EQ(r.target, "poisson");
  EXPECT_EQ(r.theta, std::optional<double>(1.0));
}

TEST(WassersteinBound, BinomialRelaxedHandValue) {
  const BoundReport r = wasserstein_bound(binomial2(), 1.0, PoissonForm::relaxed);
  EXPECT_NEAR(r.value, 0.5 + (2.0 / 3.0) * 1.0, 1e-15);
  EXPECT_NEAR(r.value, 1.16667, 1e-5);
  EXPECT_EQ(r.theorem, "prove02.relaxed");
}

TEST(Bounds, ThetaAtMeanZerosLeadingTerm) {
  battery::Builder b(9);
  const IndependentSequence seq = b.bernoullis(6);
  double theta = 0.0;
  for (const auto& c : seq.coords()) theta += c.mean();
  const DiffProfile p(build_eval_tensor(seq, weighted_sum(std::vector<double>(6, 1.0))));
  for (auto form : {PoissonForm::exact, PoissonForm::relaxed}) {
    EXPECT_NEAR(tv_bound(p, theta, form).component("|theta-mu|"), 0.0, 1e-14);
    EXPECT_NEAR(wasserstein_bound(p, theta, form).component("|theta-mu|"), 0.0, 1e-14);
  }
}

TEST(Bounds, PrefactorsDecayWithTheta) {
  const DiffProfile p = binomial2();
  // The relaxed d_W bound minus its |theta - mu| term divided by the theta
  // dependent factors stays bounded as theta grows.
  for (double theta : {50.0, 200.0, 800.0}) {
    const auto c = chen_stein_constants(theta);
    EXPECT_NEAR(c.f_a * std::sqrt(theta), std::sqrt(2.0 / std::numbers::e), 1e-12);
    EXPECT_NEAR(c.delta2_f_h * theta, 2.0, 1e-12);
    const BoundReport r = wasserstein_bound(p, theta, PoissonForm::relaxed);
    EXPECT_GE(r.value, std::abs(theta - 1.0));
  }
}

TEST(Bounds, Rejections) {
  const auto seq = IndependentSequence::iid(DiscreteDistribution::rademacher(), 2);
  const DiffProfile neg(build_eval_tensor(seq, weighted_sum({1.0, 1.0})));
  EXPECT_EQ(code_of([&] { (void)tv_bound(neg, 1.0, PoissonForm::exact); }), ErrorCode::not_integer_valued);
  const DiffProfile half(build_eval_tensor(IndependentSequence::iid(DiscreteDistribution::bernoulli(0.5), 2),
                                           weighted_sum({0.5, 1.0})));
  EXPECT_EQ(code_of([&] { (void)wasserstein_bound(half, 1.0, PoissonForm::relaxed); }), ErrorCode::not_integer_valued);
  EXPECT_EQ(code_of([&] { (void)tv_bound(binomial2(), 0.0, PoissonForm::relaxed); }), ErrorCode::non_positive_theta);
}

TEST(Bounds, BatteryOracleExactLeRelaxedAndDominance) {
  std::size_t checked = 0;
  for (const auto& inst : battery::standard()) {
    const oracle::Space sp(inst.seq);
    const oracle::Table f = sp.evaluate(inst.f);
    if (!natural(f)) continue;
    SCOPED_TRACE(inst.name);
    const EvalTensor t = build_eval_tensor(inst.seq, inst.f);
    const DiffProfile p(t);
    const double mu = sp.expect(f);
    if (!(mu > 0.0)) continue;
    ++checked;
    // Oracle ingredients.
    const oracle::Table z = sp.z(f);
    double remainder = 0.0;
    for (std::size_t i = 0; i < sp.dims(); ++i) {
      const oracle::Table d = sp.d_i(f, i);
      const oracle::Table dsq = sp.dsq_i(f, i);
      const oracle::Table pi = sp.p_i(f, i);
      for (std::size_t k = 0; k < sp.size(); ++k) remainder += sp.prob(k) * (2.0 * dsq[k] + d[k]) * std::abs(pi[k]);
    }
    const FiniteLaw law = law_of(t);
    for (double theta : {mu, 0.5 * mu, mu + 1.0}) {
      const auto c = chen_stein_constants(theta);
      const double e_theta_z = sp.expect(sp.map(z, [theta](double v) { return std::abs(theta - v); }));
      const BoundReport tv_exact = tv_bound(p, theta, PoissonForm::exact);
      const BoundReport tv_relaxed = tv_bound(p, theta, PoissonForm::relaxed);
      const BoundReport w_exact = wasserstein_bound(p, theta, PoissonForm::exact);
      const BoundReport w_relaxed = wasserstein_bound(p, theta, PoissonForm::relaxed);
      const double tol = 1e-10 * std::max(1.0, mu * mu);
      EXPECT_NEAR(tv_exact.component("E|theta-Z|"), e_theta_z, tol);
      EXPECT_NEAR(tv_exact.component("remainder_term"), remainder, tol);
      EXPECT_NEAR(tv_exact.value, c.f_a * std::abs(theta - mu) + c.delta_f_a * (e_theta_z + remainder), tol);
      EXPECT_NEAR(w_exact.value, std::abs(theta - mu) + c.delta_f_h * e_theta_z + 0.5 * c.delta2_f_h * remainder, tol);

      EXPECT_LE(tv_exact.value, tv_relaxed.value + 1e-10);
      EXPECT_LE(w_exact.value, w_relaxed.value + 1e-10);
      for (const BoundReport* r : {&tv_exact, &tv_relaxed, &w_exact, &w_relaxed}) EXPECT_GE(r->value, 0.0);

      const double dtv = dtv_vs_poisson(law, theta).value;
      const double dw = dw_vs_poisson(law, theta).value;
      EXPECT_GE(tv_exact.value - dtv, -1e-9 * std::max(1.0, dtv)) << "theta=" << theta;
      EXPECT_GE(tv_relaxed.value - dtv, -1e-9 * std::max(1.0, dtv)) << "theta=" << theta;
      EXPECT_GE(w_exact.value - dw, -1e-9 * std::max(1.0, dw)) << "theta=" << theta;
      EXPECT_GE(w_relaxed.value - dw, -1e-9 * std::max(1.0, dw)) << "theta=" << theta;
    }
  }
  EXPECT_GE(checked, 5u);
}
