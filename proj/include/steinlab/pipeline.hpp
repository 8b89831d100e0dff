#pragma once

// End-to-end evaluation of a model: exact profiles, bound dispatch by
// (target, metric, form), exact distances, the comparison suite, and the
// Monte Carlo path for relaxed forms.

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "steinlab/diff_profile.hpp"
#include "steinlab/distance.hpp"
#include "steinlab/error.hpp"
#include "steinlab/eval_tensor.hpp"
#include "steinlab/mc.hpp"
#include "steinlab/model_io.hpp"
#include "steinlab/normal_bounds.hpp"
#include "steinlab/poisson_bounds.hpp"
#include "steinlab/report.hpp"

namespace steinlab {

enum class Target { normal, poisson };
enum class MetricKind { wasserstein, kolmogorov, tv };

[[nodiscard]] inline Target parse_target(const std::string& s) {
  if (s == "normal") return Target::normal;
  if (s == "poisson") return Target::poisson;
  throw Error(ErrorCode::invalid_argument, "unknown target '" + s + "'");
}

[[nodiscard]] inline MetricKind parse_metric(const std::string& s) {
  if (s == "wasserstein") return MetricKind::wasserstein;
  if (s == "kolmogorov") return MetricKind::kolmogorov;
  if (s == "tv") return MetricKind::tv;
  throw Error(ErrorCode::invalid_argument, "unknown metric '" + s + "'");
}

[[nodiscard]] inline const char* to_string(Target t) noexcept { return t == Target::normal ? "normal" : "poisson"; }

[[nodiscard]] inline const char* to_string(MetricKind m) noexcept {
  switch (m) {
    case MetricKind::wasserstein: return "wasserstein";
    case MetricKind::kolmogorov: return "kolmogorov";
    case MetricKind::tv: return "tv";
  }
  return "wasserstein";
}

/// Rejects target/metric pairs without an implemented theorem.
inline void check_combination(Target target, MetricKind metric) {
  if (target == Target::normal && metric == MetricKind::tv) {
    throw Error(ErrorCode::invalid_argument, "total variation is only available against the Poisson target");
  }
  if (target == Target::poisson && metric == MetricKind::kolmogorov) {
    throw Error(ErrorCode::invalid_argument, "Kolmogorov bounds are only available against the normal target");
  }
}

/// Exact-path state for one model. Profiles are built on first use.
class Analysis {
 public:
  explicit Analysis(Model model, std::uint64_t cap = default_grid_cap())
      : model_(std::move(model)),
        raw_(build_eval_tensor(make_grid(model_.sequence, cap), model_.functional)) {
    mean_ = expectation(raw_);
    const double m = mean_;
    variance_ = expectation(map_tensor(raw_, [m](double v) { return (v - m) * (v - m); }));
  }

  [[nodiscard]] const Model& model() const noexcept { return model_; }
  [[nodiscard]] const EvalTensor& raw_tensor() const noexcept { return raw_; }
  [[nodiscard]] double mean() const noexcept { return mean_; }
  [[nodiscard]] double variance() const noexcept { return variance_; }

  /// (F - E F) / sd(F); DegenerateVariance when sd(F) vanishes.
  [[nodiscard]] Affine standardization() const {
    require_nondegenerate(variance_, raw_.scale());
    return Affine{mean_, std::sqrt(variance_)};
  }

  [[nodiscard]] const DiffProfile& standardized() const {
    if (!standardized_) {
      const Affine a = standardization();
      standardized_ = std::make_unique<DiffProfile>(map_tensor(raw_, a));
    }
    return *standardized_;
  }

  [[nodiscard]] const DiffProfile& raw() const {
    if (!raw_profile_) raw_profile_ = std::make_unique<DiffProfile>(raw_);
    return *raw_profile_;
  }

  [[nodiscard]] bool natural_valued() const { return law_of(raw_).natural_valued(); }

  void require_natural_valued() const {
    if (!natural_valued()) throw Error(ErrorCode::not_integer_valued, "F takes values outside the natural numbers");
  }

 private:
  Model model_;
  EvalTensor raw_;
  double mean_ = 0.0;
  double variance_ = 0.0;
  mutable std::unique_ptr<DiffProfile> standardized_;
  mutable std::unique_ptr<DiffProfile> raw_profile_;
};

struct BoundRequest {
  Target target = Target::normal;
  MetricKind metric = MetricKind::wasserstein;
  std::string form = "relaxed";
  std::optional<double> theta;  // Poisson only; defaults to E F
  std::optional<double> x0;     // 2-run moment bound
};

[[nodiscard]] inline double resolve_theta(const Analysis& a, const BoundRequest& req) {
  const double theta = req.theta.value_or(a.mean());
  require_positive_theta(theta);
  return theta;
}

[[nodiscard]] inline PoissonForm parse_poisson_form(const std::string& form) {
  if (form == "exact") return PoissonForm::exact;
  if (form == "relaxed") return PoissonForm::relaxed;
  throw Error(ErrorCode::unsupported_bound_form, "Poisson bounds come in exact and relaxed forms, not '" + form + "'");
}

[[nodiscard]] inline BoundReport run_reports_for(const Analysis& a, MetricKind metric, std::optional<double> x0) {
  const auto* run = std::get_if<MRunParams>(&a.model().functional.params());
  if (!run) throw Error(ErrorCode::not_a_two_run, "functional is not an m-run");
  const RunBoundReports r = run_bound_explicit(a.model().sequence, *run, a.variance(), x0);
  return metric == MetricKind::wasserstein ? r.wasserstein : r.kolmogorov;
}

[[nodiscard]] inline std::optional<std::vector<std::vector<std::size_t>>> stated_sets_for(const Analysis& a) {
  const auto& params = a.model().functional.params();
  std::size_t m = 0;
  if (const auto* sc = std::get_if<MScanParams>(&params)) m = sc->m;
  if (const auto* ex = std::get_if<ExceedanceParams>(&params)) m = ex->m;
  if (m == 0) return std::nullopt;
  return stated_scan_sets(a.model().sequence.size(), m);
}

/// Dispatches one bound on the exact path. Normal-target bounds are
/// evaluated on the standardized functional; Poisson bounds on F itself.
[[nodiscard]] inline BoundReport compute_bound(const Analysis& a, const BoundRequest& req) {
  check_combination(req.target, req.metric);
  const std::string& form = req.form;
  if (req.target == Target::poisson) {
    a.require_natural_valued();
    const double theta = resolve_theta(a, req);
    const PoissonForm pf = parse_poisson_form(form);
    return req.metric == MetricKind::tv ? tv_bound(a.raw(), theta, pf) : wasserstein_bound(a.raw(), theta, pf);
  }
  if (form == "structural") {
    return structural_closed_forms(a.model().functional, a.model().sequence, a.variance());
  }
  if (form == "run") return run_reports_for(a, req.metric, req.x0);
  const DiffProfile& p = a.standardized();
  BoundReport r;
  if (req.metric == MetricKind::wasserstein) {
    if (form == "exact") {
      r = wasserstein_exact_form(p);
    } else if (form == "relaxed") {
      r = wasserstein_relaxed(p);
    } else if (form == "sum") {
      r = wasserstein_sum_bound(p, a.model().functional.kind());
    } else if (form == "local") {
      r = local_dependence_bounds(p, stated_sets_for(a)).wasserstein;
    } else {
      throw Error(ErrorCode::unsupported_bound_form, "no Wasserstein form '" + form + "' for the normal target");
    }
  } else {
    if (form == "exact") {
      r = kolmogorov_exact_form(p);
    } else if (form == "oold1") {
      r = kolmogorov_corollary(p, CorollaryVariant::oold1);
    } else if (form == "oold1b") {
      r = kolmogorov_corollary(p, CorollaryVariant::oold1b);
    } else if (form == "o7old1q") {
      r = kolmogorov_corollary(p, CorollaryVariant::o7old1q);
    } else if (form == "local") {
      r = local_dependence_bounds(p, stated_sets_for(a)).kolmogorov;
    } else {
      throw Error(ErrorCode::unsupported_bound_form, "no Kolmogorov form '" + form + "' for the normal target");
    }
  }
  r.standardized = true;
  return r;
}

/// Exact distance matching a bound request: the standardized law against
/// N(0,1), or the law of F against Pn(theta). A constant F has no
/// standardization; its centered law, the point mass at 0, is used.
[[nodiscard]] inline DistanceResult compute_distance(const Analysis& a, Target target, MetricKind metric,
                                                     std::optional<double> theta = std::nullopt) {
  check_combination(target, metric);
  if (target == Target::normal) {
    const bool degenerate = !(a.variance() > 1e-24 * a.raw_tensor().scale() * a.raw_tensor().scale());
    const FiniteLaw law = degenerate ? FiniteLaw::from_atoms({{0.0, 1.0}}) : law_of(a.standardized().tensor());
    return metric == MetricKind::kolmogorov ? dk_vs_normal(law) : dw_vs_normal(law);
  }
  a.require_natural_valued();
  BoundRequest req;
  req.theta = theta;
  const double th = resolve_theta(a, req);
  const FiniteLaw law = law_of(a.raw_tensor());
  return metric == MetricKind::tv ? dtv_vs_poisson(law, th) : dw_vs_poisson(law, th);
}

struct CompareRow {
  BoundReport report;
  DistanceResult distance;
  double slack = 0.0;
  bool dominated = true;  // bound >= distance within tolerance
};

/// Slack tolerance of the dominance gate.
[[nodiscard]] inline bool dominates(double bound, double distance) {
  return bound - distance >= -1e-9 * std::max(1.0, std::abs(distance));
}

/// Every rigorous form applicable to the model. Normal rows need Var(F) > 0;
/// Poisson rows need an N-valued functional.
[[nodiscard]] inline std::vector<BoundRequest> default_suite(const Analysis& a, std::optional<double> theta) {
  std::vector<BoundRequest> out;
  auto add = [&](Target t, MetricKind m, const char* form) {
    BoundRequest r;
    r.target = t;
    r.metric = m;
    r.form = form;
    r.theta = theta;
    out.push_back(r);
  };
  const FunctionalKind kind = a.model().functional.kind();
  const auto* run = std::get_if<MRunParams>(&a.model().functional.params());
  const bool two_run = run && run->m == 2;
  if (a.variance() > 1e-24 * a.raw_tensor().scale() * a.raw_tensor().scale()) {
    for (const char* f : {"exact", "relaxed"}) add(Target::normal, MetricKind::wasserstein, f);
    if (kind == FunctionalKind::weighted_sum || kind == FunctionalKind::partial_sum) {
      add(Target::normal, MetricKind::wasserstein, "sum");
    }
    add(Target::normal, MetricKind::wasserstein, "local");
    if (two_run) add(Target::normal, MetricKind::wasserstein, "run");
    for (const char* f : {"exact", "oold1", "oold1b", "o7old1q", "local"}) add(Target::normal, MetricKind::kolmogorov, f);
    if (two_run) add(Target::normal, MetricKind::kolmogorov, "run");
  }
  if (a.natural_valued() && theta.value_or(a.mean()) > 0.0) {
    for (MetricKind m : {MetricKind::tv, MetricKind::wasserstein}) {
      for (const char* f : {"exact", "relaxed"}) add(Target::poisson, m, f);
    }
  }
  return out;
}

[[nodiscard]] inline std::vector<CompareRow> compare(const Analysis& a, const std::string& suite = "default",
                                                     std::optional<double> theta = std::nullopt) {
  if (suite != "default") throw Error(ErrorCode::invalid_argument, "unknown suite '" + suite + "'");
  std::vector<CompareRow> rows;
  for (const BoundRequest& req : default_suite(a, theta)) {
    CompareRow row;
    row.report = compute_bound(a, req);
    row.distance = compute_distance(a, req.target, req.metric, req.theta);
    row.slack = row.report.value - row.distance.value;
    row.dominated = dominates(row.report.value, row.distance.value);
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Relaxed bounds by Monte Carlo, for grids beyond the enumeration cap. The
/// normal target is standardized with a pilot moment estimate drawn from a
/// stream independent of the bound components.
[[nodiscard]] inline MCBoundResult compute_mc_bound(const Model& model, const BoundRequest& req, const MCConfig& cfg) {
  check_combination(req.target, req.metric);
  if (req.form != "relaxed") {
    throw Error(ErrorCode::unsupported_bound_form,
                "Monte Carlo mode assembles relaxed forms only, not '" + req.form + "'");
  }
  if (req.target == Target::normal) {
    if (req.metric != MetricKind::wasserstein) {
      throw Error(ErrorCode::unsupported_bound_form, "Kolmogorov bounds involve a threshold supremum");
    }
    MCConfig pilot = cfg;
    pilot.seed = cfg.seed ^ 0x5DEECE66DULL;
    const MCMoments mom = mc_moments(model.sequence, model.functional, pilot);
    const double scale = std::max(1.0, std::abs(mom.mean.value));
    require_nondegenerate(mom.variance.value, scale);
    const Affine affine{mom.mean.value, std::sqrt(mom.variance.value)};
    MCBoundResult r = mc_bound(model.sequence, model.functional, McBound::normal_wasserstein_relaxed, cfg, affine);
    r.report.notes.push_back("standardized with pilot estimates mean " + std::to_string(affine.shift) + ", sd " +
                             std::to_string(affine.scale));
    return r;
  }
  const McBound which =
      req.metric == MetricKind::tv ? McBound::poisson_tv_relaxed : McBound::poisson_wasserstein_relaxed;
  return mc_bound(model.sequence, model.functional, which, cfg, Affine{}, req.theta);
}

}  // namespace steinlab
