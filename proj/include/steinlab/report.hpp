#pragma once

// Itemized bound reports shared by the normal and Poisson assemblers.

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "steinlab/error.hpp"

namespace steinlab {

struct BoundReport {
  std::string theorem;
  std::string target = "normal";
  std::string metric;  // "wasserstein", "kolmogorov" or "tv"
  std::string form;    // "exact", "relaxed", or the variant name
  std::vector<std::pair<std::string, double>> components;
  double value = 0.0;
  bool standardized = false;
  bool structural = false;
  std::optional<double> theta;
  std::vector<std::string> notes;

  void add(std::string name, double v) { components.emplace_back(std::move(name), v); }

  [[nodiscard]] bool has(const std::string& name) const {
    for (const auto& [k, v] : components) {
      if (k == name) return true;
    }
    return false;
  }

  [[nodiscard]] double component(const std::string& name) const {
    for (const auto& [k, v] : components) {
      if (k == name) return v;
    }
    throw Error(ErrorCode::invalid_argument, "report " + theorem + " has no component '" + name + "'");
  }
};

[[nodiscard]] inline BoundReport make_report(std::string theorem, std::string metric, std::string form) {
  BoundReport r;
  r.theorem = std::move(theorem);
  r.metric = std::move(metric);
  r.form = std::move(form);
  return r;
}

}  // namespace steinlab
