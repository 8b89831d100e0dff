#pragma once

// JSON and CSV renderings of reports. JSON numbers use the shortest
// representation that round-trips; CSV uses %.17g. Key order is fixed, so
// identical inputs give byte-identical output.

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "steinlab/distance.hpp"
#include "steinlab/mc.hpp"
#include "steinlab/pipeline.hpp"
#include "steinlab/report.hpp"

namespace steinlab {

using ordered_json = nlohmann::ordered_json;

[[nodiscard]] inline ordered_json to_json(const BoundReport& r) {
  ordered_json j;
  j["theorem"] = r.theorem;
  j["target"] = r.target;
  if (r.theta) j["theta"] = *r.theta;
  j["metric"] = r.metric;
  j["form"] = r.form;
  ordered_json comps = ordered_json::object();
  for (const auto& [k, v] : r.components) comps[k] = v;
  j["components"] = comps;
  j["value"] = r.value;
  j["standardized"] = r.standardized;
  if (r.structural) j["structural"] = true;
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j;
}

[[nodiscard]] inline ordered_json to_json(const DistanceResult& d) {
  ordered_json j;
  j["metric"] = std::string(to_string(d.metric));
  j["value"] = d.value;
  j["numerical_error"] = d.numerical_error;
  return j;
}

[[nodiscard]] inline ordered_json to_json(const MCEstimate& e) {
  ordered_json j;
  j["value"] = e.value;
  j["std_error"] = e.std_error;
  j["biased"] = e.biased;
  j["bias_allowance"] = e.bias_allowance;
  return j;
}

[[nodiscard]] inline ordered_json to_json(const MCBoundResult& r) {
  ordered_json j = to_json(r.report);
  j["mode"] = "mc";
  j["std_error"] = r.estimate.std_error;
  j["bias_allowance"] = r.estimate.bias_allowance;
  j["biased"] = r.estimate.biased;
  ordered_json comps = ordered_json::object();
  for (const auto& [k, v] : r.components) comps[k] = to_json(v);
  j["mc_components"] = comps;
  return j;
}

[[nodiscard]] inline ordered_json to_json(const std::vector<CompareRow>& rows) {
  ordered_json arr = ordered_json::array();
  for (const CompareRow& row : rows) {
    ordered_json j;
    j["theorem"] = row.report.theorem;
    j["target"] = row.report.target;
    j["metric"] = row.report.metric;
    j["form"] = row.report.form;
    j["bound"] = row.report.value;
    j["distance"] = row.distance.value;
    j["numerical_error"] = row.distance.numerical_error;
    j["slack"] = row.slack;
    j["dominated"] = row.dominated;
    arr.push_back(j);
  }
  ordered_json out;
  out["rows"] = arr;
  return out;
}

[[nodiscard]] inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Quotes a CSV field when it contains a separator, quote or newline.
[[nodiscard]] inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// One row per component plus the assembled value: theorem,target,metric,form,name,value.
[[nodiscard]] inline std::string to_csv(const BoundReport& r) {
  std::string out = "theorem,target,metric,form,name,value\n";
  auto line = [&](const std::string& name, double v) {
    out += csv_field(r.theorem) + "," + r.target + "," + r.metric + "," + csv_field(r.form) + "," + csv_field(name) +
           "," + format_number(v) + "\n";
  };
  if (r.theta) line("theta", *r.theta);
  for (const auto& [k, v] : r.components) line(k, v);
  line("value", r.value);
  return out;
}

[[nodiscard]] inline std::string to_csv(const MCBoundResult& r) {
  std::string out = to_csv(r.report);
  out += csv_field(r.report.theorem) + "," + r.report.target + "," + r.report.metric + "," + r.report.form +
         ",std_error," + format_number(r.estimate.std_error) + "\n";
  out += csv_field(r.report.theorem) + "," + r.report.target + "," + r.report.metric + "," + r.report.form +
         ",bias_allowance," + format_number(r.estimate.bias_allowance) + "\n";
  return out;
}

[[nodiscard]] inline std::string to_csv(const DistanceResult& d) {
  return "metric,value,numerical_error\n" + std::string(to_string(d.metric)) + "," + format_number(d.value) + "," +
         format_number(d.numerical_error) + "\n";
}

[[nodiscard]] inline std::string to_csv(const std::vector<CompareRow>& rows) {
  std::string out = "theorem,target,metric,form,bound,distance,numerical_error,slack,dominated\n";
  for (const CompareRow& row : rows) {
    out += csv_field(row.report.theorem) + "," + row.report.target + "," + row.report.metric + "," +
           csv_field(row.report.form) + "," + format_number(row.report.value) + "," +
           format_number(row.distance.value) + "," + format_number(row.distance.numerical_error) + "," +
           format_number(row.slack) + "," + (row.dominated ? "true" : "false") + "\n";
  }
  return out;
}

}  // namespace steinlab
