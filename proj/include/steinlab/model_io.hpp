#pragma once

// Model files: the coordinate laws plus one functional.
//
//   {"coordinates": [{"atoms": [[v, p], ...]}, ...],   or
//    "rademacher": n,  or  "bernoulli": [p1, ...],  or
//    "iid": {"atoms": [[v, p], ...], "n": n},
//    "functional": {"kind": "...", ...}}
//
// Malformed JSON and missing or mistyped fields raise SchemaError; domain
// violations (bad probabilities, nonzero diagonal, ...) keep their own codes.

#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "steinlab/error.hpp"
#include "steinlab/functional.hpp"
#include "steinlab/prob_model.hpp"

namespace steinlab {

struct Model {
  IndependentSequence sequence;
  Functional functional;
};

namespace detail {

using json = nlohmann::json;

[[noreturn]] inline void schema_fail(const std::string& what) { throw Error(ErrorCode::schema_error, what); }

inline const json& require_field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) schema_fail(where + ": missing \"" + key + "\"");
  return obj.at(key);
}

[[nodiscard]] inline double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) schema_fail(where + ": expected a number");
  return v.get<double>();
}

[[nodiscard]] inline std::size_t as_count(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0) schema_fail(where + ": expected a non-negative integer");
  return v.get<std::size_t>();
}

[[nodiscard]] inline std::vector<double> as_numbers(const json& v, const std::string& where) {
  if (!v.is_array()) schema_fail(where + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(as_number(v[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

[[nodiscard]] inline DiscreteDistribution parse_atoms(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) schema_fail(where + ": expected a non-empty array of [value, prob] pairs");
  std::vector<Atom> atoms;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const std::string at = where + "[" + std::to_string(k) + "]";
    if (!v[k].is_array() || v[k].size() != 2) schema_fail(at + ": expected [value, prob]");
    atoms.push_back({as_number(v[k][0], at), as_number(v[k][1], at)});
  }
  return DiscreteDistribution::make(std::move(atoms));
}

[[nodiscard]] inline IndependentSequence parse_sequence(const json& doc) {
  std::vector<DiscreteDistribution> coords;
  int forms = 0;
  if (doc.contains("coordinates")) {
    ++forms;
    const json& c = doc.at("coordinates");
    if (!c.is_array() || c.empty()) schema_fail("coordinates: expected a non-empty array");
    for (std::size_t i = 0; i < c.size(); ++i) {
      const std::string where = "coordinates[" + std::to_string(i) + "]";
      coords.push_back(parse_atoms(require_field(c[i], "atoms", where), where + ".atoms"));
    }
  }
  if (doc.contains("rademacher")) {
    ++forms;
    const std::size_t n = as_count(doc.at("rademacher"), "rademacher");
    coords.assign(n, DiscreteDistribution::rademacher());
  }
  if (doc.contains("bernoulli")) {
    ++forms;
    for (double p : as_numbers(doc.at("bernoulli"), "bernoulli")) coords.push_back(DiscreteDistribution::bernoulli(p));
  }
  if (doc.contains("iid")) {
    ++forms;
    const json& d = doc.at("iid");
    const auto law = parse_atoms(require_field(d, "atoms", "iid"), "iid.atoms");
    coords.assign(as_count(require_field(d, "n", "iid"), "iid.n"), law);
  }
  if (forms != 1) schema_fail("model needs exactly one of coordinates, rademacher, bernoulli, iid");
  if (coords.empty()) schema_fail("model has no coordinates");
  return IndependentSequence(std::move(coords));
}

[[nodiscard]] inline std::optional<bool> optional_flag(const json& f, const char* key) {
  if (!f.contains(key)) return std::nullopt;
  if (!f.at(key).is_boolean()) schema_fail(std::string("functional.") + key + ": expected true or false");
  return f.at(key).get<bool>();
}

[[nodiscard]] inline Functional parse_functional(const json& f, const IndependentSequence& seq) {
  if (!f.is_object()) schema_fail("functional: expected an object");
  const json& kind_v = require_field(f, "kind", "functional");
  if (!kind_v.is_string()) schema_fail("functional.kind: expected a string");
  const std::string kind = kind_v.get<std::string>();
  const std::size_t n = seq.size();

  if (kind == "weighted_sum") {
    auto a = as_numbers(require_field(f, "coeffs", "functional"), "functional.coeffs");
    return weighted_sum(std::move(a), optional_flag(f, "center").value_or(false));
  }
  if (kind == "partial_sum") return partial_sum(seq);
  if (kind == "quadratic_form") {
    const json& m = require_field(f, "matrix", "functional");
    if (!m.is_array()) schema_fail("functional.matrix: expected an array of rows");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < m.size(); ++i) {
      rows.push_back(as_numbers(m[i], "functional.matrix[" + std::to_string(i) + "]"));
    }
    return quadratic_form(rows);
  }
  if (kind == "m_run") {
    auto c = as_numbers(require_field(f, "coeffs", "functional"), "functional.coeffs");
    return m_run(std::move(c), as_count(require_field(f, "m", "functional"), "functional.m"));
  }
  if (kind == "m_scan") {
    const std::size_t m = as_count(require_field(f, "m", "functional"), "functional.m");
    const json& w = require_field(f, "windows", "functional");
    if (!w.is_array()) schema_fail("functional.windows: expected an array");
    std::vector<WindowTable> tables;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const std::string where = "functional.windows[" + std::to_string(i) + "]";
      WindowTable t;
      t.sums = as_numbers(require_field(w[i], "sums", where), where + ".sums");
      t.values = as_numbers(require_field(w[i], "values", where), where + ".values");
      tables.push_back(std::move(t));
    }
    return m_scan(m, std::move(tables), n);
  }
  if (kind == "exceedance_count") {
    return exceedance_count(as_number(require_field(f, "a", "functional"), "functional.a"),
                            as_count(require_field(f, "m", "functional"), "functional.m"), n);
  }
  if (kind == "table") {
    auto values = as_numbers(require_field(f, "values", "functional"), "functional.values");
    if (values.size() != seq.grid_size()) {
      schema_fail("functional.values: " + std::to_string(values.size()) + " entries for a grid of " +
                  std::to_string(seq.grid_size()));
    }
    return table(std::move(values), n, optional_flag(f, "integer_valued"));
  }
  schema_fail("functional.kind: unknown kind \"" + kind + "\"");
}

}  // namespace detail

[[nodiscard]] inline Model parse_model(const nlohmann::json& doc) {
  if (!doc.is_object()) detail::schema_fail("model: expected a JSON object");
  IndependentSequence seq = detail::parse_sequence(doc);
  Functional f = detail::parse_functional(detail::require_field(doc, "functional", "model"), seq);
  f.check_arity(seq);
  return Model{std::move(seq), std::move(f)};
}

[[nodiscard]] inline Model parse_model_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    detail::schema_fail(std::string("malformed JSON: ") + e.what());
  }
  return parse_model(doc);
}

[[nodiscard]] inline Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::schema_error, "cannot read model file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model_text(buf.str());
}

}  // namespace steinlab
