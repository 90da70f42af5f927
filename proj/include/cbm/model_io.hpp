#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "csv.hpp"
#include "error.hpp"
#include "json.hpp"
#include "neural.hpp"

namespace cbm {

/// A trained estimator with the risk margin added at decision time.
struct StoredModel {
  MlpModel model;
  double risk_margin = 0;
};

/*!
 * JSON layout (weights row-major):
 *   input_dim, hidden, activation ("tanh" | "sigmoid"),
 *   w1 [hidden x 1], b1 [hidden], w2 [1 x hidden], b2 (scalar),
 *   in_min, in_max, out_min, out_max, risk_margin
 */
inline nlohmann::json model_to_json(const MlpModel& m, double margin) {
  m.validate();
  nlohmann::json j;
  j["input_dim"] = MlpModel::input_dim;
  j["hidden"] = m.hidden_size();
  j["activation"] = std::string(to_string(m.hidden_activation));
  j["w1"] = m.hidden_weights;
  j["b1"] = m.hidden_biases;
  j["w2"] = m.output_weights;
  j["b2"] = m.output_bias;
  j["in_min"] = m.in_min;
  j["in_max"] = m.in_max;
  j["out_min"] = m.out_min;
  j["out_max"] = m.out_max;
  j["risk_margin"] = margin;
  return j;
}

namespace detail {

inline const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw FormatError(key, "missing");
  return *it;
}

inline double number_field(const nlohmann::json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number()) throw FormatError(key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw FormatError(key, "not finite");
  return d;
}

inline std::vector<double> vector_field(const nlohmann::json& j, const char* key,
                                        std::size_t expected) {
  const auto& v = field(j, key);
  if (!v.is_array()) throw FormatError(key, "expected an array");
  if (v.size() != expected)
    throw FormatError(key, "expected " + std::to_string(expected) + " entries, found " +
                               std::to_string(v.size()));
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& e : v) {
    if (!e.is_number()) throw FormatError(key, "non-numeric entry");
    out.push_back(e.get<double>());
    if (!std::isfinite(out.back())) throw FormatError(key, "non-finite entry");
  }
  return out;
}

}  // namespace detail

inline StoredModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("", "model file must be a JSON object");
  const auto& in_dim = detail::field(j, "input_dim");
  if (!in_dim.is_number_integer() || in_dim.get<long long>() != 1)
    throw FormatError("input_dim", "must be 1");
  const auto& hidden = detail::field(j, "hidden");
  if (!hidden.is_number_integer() || hidden.get<long long>() < 1)
    throw FormatError("hidden", "must be a positive integer");
  const auto h = static_cast<std::size_t>(hidden.get<long long>());
  const auto& act = detail::field(j, "activation");
  if (!act.is_string()) throw FormatError("activation", "expected a string");

  StoredModel out;
  MlpModel& m = out.model;
  try {
    m.hidden_activation = parse_activation(act.get<std::string>());
  } catch (const ParameterError& e) {
    throw FormatError("activation", e.what());
  }
  m.hidden_weights = detail::vector_field(j, "w1", h);
  m.hidden_biases = detail::vector_field(j, "b1", h);
  m.output_weights = detail::vector_field(j, "w2", h);
  m.output_bias = detail::number_field(j, "b2");
  m.in_min = detail::number_field(j, "in_min");
  m.in_max = detail::number_field(j, "in_max");
  m.out_min = detail::number_field(j, "out_min");
  m.out_max = detail::number_field(j, "out_max");
  out.risk_margin = detail::number_field(j, "risk_margin");
  if (!(m.in_min < m.in_max)) throw FormatError("in_min", "must be < in_max");
  if (!(m.out_min < m.out_max)) throw FormatError("out_min", "must be < out_max");
  return out;
}

inline void save_model(const MlpModel& model, double margin,
                       const std::filesystem::path& path) {
  const std::string text = model_to_json(model, margin).dump(2) + "\n";
  write_file_atomic(path, [&](std::ostream& os) { os << text; });
}

inline StoredModel load_model(const std::filesystem::path& path) {
  std::ifstream is = open_input(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("", std::string("invalid JSON: ") + e.what());
  }
  return model_from_json(j);
}

}  // namespace cbm
