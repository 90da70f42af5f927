#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include "csv.hpp"
#include "error.hpp"
#include "json.hpp"
#include "simulation.hpp"
#include "sweep.hpp"
#include "training.hpp"

namespace cbm {

/*!
 * Every tunable of the pipeline. Defaults:
 * T = 50, C_I = 0.1, C_P = 1, C_F = 10, x_pc = 2, x_fc = 3.09, a = 10/9,
 * b = 100/9, K = 2, N = 5000, T_I swept over 0.5:0.1:50.
 */
struct RunConfig {
  GammaProcess proc;
  CostParams costs;
  Thresholds thresholds;
  double t_horizon = 50.0;
  double t_i = 25.0;  // single-run inspection interval
  int k_checks = 2;
  bool deterministic = false;
  bool path_consistent = false;
  NcbmSemantics ncbm_semantics = NcbmSemantics::Code;

  SweepGrid grid;
  std::size_t n_reps = 5000;
  std::uint64_t seed = 20170101;
  std::size_t workers = 0;
  double ema_alpha = 0.1;

  double sample_interval = 0.1;
  TrainingConfig training;

  PolicyConfig policy() const {
    PolicyConfig p;
    p.horizon = t_horizon;
    p.inspection_interval = t_i;
    p.mid_checks = k_checks;
    p.proc = proc;
    p.costs = costs;
    p.thresholds = thresholds;
    p.deterministic = deterministic;
    p.path_consistent = path_consistent;
    p.ncbm_semantics = ncbm_semantics;
    return p;
  }

  SweepOptions sweep_options() const { return {n_reps, seed, workers, ema_alpha}; }

  void validate() const {
    policy().validate();
    grid.validate();
    detail::require(n_reps >= 2, "config: n_reps must be >= 2");
    detail::require(ema_alpha > 0 && ema_alpha <= 1, "config: ema_alpha must be in (0, 1]");
    detail::require(sample_interval > 0 && sample_interval < t_horizon,
                    "config: need 0 < sample_interval < t_horizon");
    detail::require(training.hidden_size >= 1, "config: hidden_size must be >= 1");
    detail::require(training.learning_rate > 0, "config: learning_rate must be > 0");
    detail::require(training.patience >= 1, "config: patience must be >= 1");
  }
};

enum class Preset { Desk, Full };

inline Preset parse_preset(std::string_view name) {
  if (name == "desk") return Preset::Desk;
  if (name == "full") return Preset::Full;
  throw ParameterError("unknown preset: " + std::string(name));
}

/// desk: step 0.5, N = 1000. full: step 0.1, N = 5000.
inline void apply_preset(RunConfig& cfg, Preset preset) {
  cfg.grid.step = preset == Preset::Desk ? 0.5 : 0.1;
  cfg.n_reps = preset == Preset::Desk ? 1000 : 5000;
}

namespace detail {

template <class T>
T get_as(const nlohmann::json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError(key, "wrong type");
  }
}

inline double get_number(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number()) throw FormatError(key, "expected a number");
  return v.get<double>();
}

inline std::uint64_t get_count(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw FormatError(key, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

inline bool get_bool(const nlohmann::json& v, const std::string& key) {
  if (!v.is_boolean()) throw FormatError(key, "expected true or false");
  return v.get<bool>();
}

inline std::string get_string(const nlohmann::json& v, const std::string& key) {
  if (!v.is_string()) throw FormatError(key, "expected a string");
  return v.get<std::string>();
}

}  // namespace detail

/// Overlay the flat keys of a JSON object onto `cfg`. Unknown keys are rejected.
inline void apply_json(RunConfig& cfg, const nlohmann::json& j) {
  using namespace detail;
  if (!j.is_object()) throw FormatError("", "config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "a") cfg.proc.a = get_number(v, key);
    else if (key == "b") cfg.proc.b = get_number(v, key);
    else if (key == "c_inspect") cfg.costs.c_inspect = get_number(v, key);
    else if (key == "c_prevent") cfg.costs.c_prevent = get_number(v, key);
    else if (key == "c_fail") cfg.costs.c_fail = get_number(v, key);
    else if (key == "discount_rate") cfg.costs.discount_rate = get_number(v, key);
    else if (key == "x_pc") cfg.thresholds.x_pc = get_number(v, key);
    else if (key == "x_fc") cfg.thresholds.x_fc = get_number(v, key);
    else if (key == "t_horizon") cfg.t_horizon = get_number(v, key);
    else if (key == "t_i") cfg.t_i = get_number(v, key);
    else if (key == "k_checks") cfg.k_checks = static_cast<int>(get_count(v, key));
    else if (key == "deterministic") cfg.deterministic = get_bool(v, key);
    else if (key == "path_consistent") cfg.path_consistent = get_bool(v, key);
    else if (key == "ncbm_semantics") {
      try {
        cfg.ncbm_semantics = parse_semantics(get_string(v, key));
      } catch (const ParameterError& e) {
        throw FormatError(key, e.what());
      }
    }
    else if (key == "grid_start") cfg.grid.start = get_number(v, key);
    else if (key == "grid_step") cfg.grid.step = get_number(v, key);
    else if (key == "grid_end") cfg.grid.end = get_number(v, key);
    else if (key == "n_reps") cfg.n_reps = get_count(v, key);
    else if (key == "seed") cfg.seed = get_count(v, key);
    else if (key == "workers") cfg.workers = get_count(v, key);
    else if (key == "ema_alpha") cfg.ema_alpha = get_number(v, key);
    else if (key == "sample_interval") cfg.sample_interval = get_number(v, key);
    else if (key == "hidden_size") cfg.training.hidden_size = get_count(v, key);
    else if (key == "learning_rate") cfg.training.learning_rate = get_number(v, key);
    else if (key == "max_epochs") cfg.training.max_epochs = get_count(v, key);
    else if (key == "patience") cfg.training.patience = get_count(v, key);
    else if (key == "activation") {
      try {
        cfg.training.activation = parse_activation(get_string(v, key));
      } catch (const ParameterError& e) {
        throw FormatError(key, e.what());
      }
    }
    else if (key == "init") {
      const std::string s = get_string(v, key);
      if (s == "nguyen-widrow") cfg.training.init = InitScheme::NguyenWidrow;
      else if (s == "uniform") cfg.training.init = InitScheme::Uniform;
      else throw FormatError(key, "expected 'nguyen-widrow' or 'uniform'");
    }
    else throw FormatError(key, "unknown config key");
  }
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is = open_input(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("", std::string("invalid JSON: ") + e.what());
  }
  RunConfig cfg;
  apply_json(cfg, j);
  return cfg;
}

}  // namespace cbm
