// steinlab: bounds, exact distances and bound-vs-distance tables for a
// model file.
//
// Exit codes: 0 ok, 2 usage or schema error, 3 failed precondition,
// 4 dominance violation in `compare`.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "steinlab/steinlab.hpp"

namespace {

enum Exit : int { kOk = 0, kInternal = 1, kUsage = 2, kPrecondition = 3, kDominance = 4 };

struct Options {
  std::string model;
  std::string target = "normal";
  std::string metric = "wasserstein";
  std::string form = "relaxed";
  std::optional<double> theta;
  std::optional<double> x0;
  std::string mode = "exact";
  std::string output = "json";
  std::string out_path;
  std::string suite = "default";
  std::uint64_t seed = 1;
  std::size_t mc_outer = 2000;
  std::size_t mc_inner = 64;
};

void add_common(CLI::App& cmd, Options& o) {
  cmd.add_option("--model", o.model, "model JSON file")->required();
  cmd.add_option("--target", o.target, "normal | poisson")->check(CLI::IsMember({"normal", "poisson"}));
  cmd.add_option("--metric", o.metric, "wasserstein | kolmogorov | tv")
      ->check(CLI::IsMember({"wasserstein", "kolmogorov", "tv"}));
  cmd.add_option("--theta", o.theta, "Poisson parameter (default: E F)");
  cmd.add_option("--mode", o.mode, "exact | mc")->check(CLI::IsMember({"exact", "mc"}));
  cmd.add_option("--output", o.output, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  cmd.add_option("--out", o.out_path, "write the report here instead of stdout");
  cmd.add_option("--seed", o.seed, "Monte Carlo seed");
  cmd.add_option("--mc-outer", o.mc_outer, "Monte Carlo outer samples");
  cmd.add_option("--mc-inner", o.mc_inner, "Monte Carlo inner samples per conditional expectation");
}

void emit(const Options& o, const std::string& text) {
  if (o.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out_path, std::ios::binary);
  if (!f) throw steinlab::Error(steinlab::ErrorCode::invalid_argument, "cannot write " + o.out_path);
  f << text;
}

std::string render(const Options& o, const steinlab::ordered_json& j, const std::string& csv) {
  return o.output == "json" ? j.dump(2) + "\n" : csv;
}

steinlab::BoundRequest request_of(const Options& o) {
  steinlab::BoundRequest r;
  r.target = steinlab::parse_target(o.target);
  r.metric = steinlab::parse_metric(o.metric);
  r.form = o.form;
  r.theta = o.theta;
  r.x0 = o.x0;
  return r;
}

steinlab::MCConfig mc_config(const Options& o) {
  steinlab::MCConfig c;
  c.outer_samples = o.mc_outer;
  c.inner_samples = o.mc_inner;
  c.seed = o.seed;
  c.validate();
  return c;
}

int cmd_bound(const Options& o) {
  const steinlab::BoundRequest req = request_of(o);
  steinlab::Model model = steinlab::load_model(o.model);
  if (o.mode == "mc") {
    const auto r = steinlab::compute_mc_bound(model, req, mc_config(o));
    emit(o, render(o, steinlab::to_json(r), steinlab::to_csv(r)));
    return kOk;
  }
  const steinlab::Analysis a(std::move(model));
  const auto r = steinlab::compute_bound(a, req);
  emit(o, render(o, steinlab::to_json(r), steinlab::to_csv(r)));
  return kOk;
}

int cmd_distance(const Options& o) {
  if (o.mode != "exact") throw steinlab::Error(steinlab::ErrorCode::invalid_argument, "distances are exact only");
  const steinlab::Analysis a(steinlab::load_model(o.model));
  const auto d =
      steinlab::compute_distance(a, steinlab::parse_target(o.target), steinlab::parse_metric(o.metric), o.theta);
  emit(o, render(o, steinlab::to_json(d), steinlab::to_csv(d)));
  return kOk;
}

int cmd_compare(const Options& o) {
  if (o.mode != "exact") throw steinlab::Error(steinlab::ErrorCode::invalid_argument, "compare runs in exact mode");
  const steinlab::Analysis a(steinlab::load_model(o.model));
  const auto rows = steinlab::compare(a, o.suite, o.theta);
  emit(o, render(o, steinlab::to_json(rows), steinlab::to_csv(rows)));
  for (const auto& row : rows) {
    if (!row.dominated) {
      std::cerr << "dominance violation: " << row.report.theorem << " bound " << row.report.value << " < distance "
                << row.distance.value << "\n";
      return kDominance;
    }
  }
  return kOk;
}

int exit_code_for(steinlab::ErrorCode c) {
  using steinlab::ErrorCode;
  switch (c) {
    case ErrorCode::schema_error:
    case ErrorCode::invalid_argument:
    case ErrorCode::invalid_config:
    case ErrorCode::unsupported_bound_form:
      return kUsage;
    default:
      return kPrecondition;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stein-method bounds and exact distances for functionals of independent discrete variables"};
  app.require_subcommand(1);
  Options o;

  auto* bound = app.add_subcommand("bound", "assemble one bound report");
  add_common(*bound, o);
  bound->add_option("--form", o.form, "exact | relaxed | sum | local | run | oold1 | oold1b | o7old1q | structural");
  bound->add_option("--x0", o.x0, "fourth-moment bound for the 2-run forms");

  auto* distance = app.add_subcommand("distance", "exact distance to the target law");
  add_common(*distance, o);

  auto* cmp = app.add_subcommand("compare", "every applicable bound against the exact distance");
  add_common(*cmp, o);
  cmp->add_option("--suite", o.suite, "bound suite")->check(CLI::IsMember({"default"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    (void)app.exit(e);
    return kUsage;
  }

  try {
    if (*bound) return cmd_bound(o);
    if (*distance) return cmd_distance(o);
    return cmd_compare(o);
  } catch (const steinlab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}
