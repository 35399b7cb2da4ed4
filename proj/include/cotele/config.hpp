#pragma once

// JSON run configuration. Recognized keys:
//   n            integer or list of integers (N values)
//   d_values     list of densities
//   splitting    "half" | "orthogonal"
//   phase_matrix optional N x N matrix; entries are numbers or [re, im]
//   input        "random" | {"weights": [...], "coeffs": N x N matrix}
//   seed         integer
//   samples_A    number of sampled contractions per outcome
//   tolerances   {"identity", "oracle", "slope"}
//   output_dir   string
// Anything else is rejected.

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cotele/verify.hpp"

namespace cotele {

struct Tolerances {
  double identity = kIdentityTol;
  double oracle = 1e-6;
  double slope = 0.25;
};

struct RunConfig {
  std::vector<int> n_values{2};
  std::vector<double> d_values{1.0, 4.0};
  SplittingKind splitting = SplittingKind::half;
  CMatrix phase_matrix;
  bool random_input = true;
  InputState input;
  std::uint64_t seed = 7;
  int samples_a = 20;
  Tolerances tol;
  std::string output_dir;
  bool allow_large_n = false;

  SweepSpec sweep_spec() const {
    SweepSpec s;
    s.n_values = n_values;
    s.d_values = d_values;
    s.splitting = splitting;
    s.seed = seed;
    s.samples_a = samples_a;
    s.phase_matrix = phase_matrix;
    s.tol = tol.identity;
    s.allow_large_n = allow_large_n;
    if (!random_input) s.inputs.push_back(input);
    return s;
  }

  InputState input_for(int n_dim) const { return sweep_spec().input_for(n_dim); }

  ModelConfig model_config(int n_dim, double d) const {
    ModelConfig c;
    c.n_dim = n_dim;
    c.density = d;
    c.splitting = splitting;
    c.phase_matrix = phase_matrix;
    c.allow_large_n = allow_large_n;
    return c;
  }

  /// Cross-field checks; every failure is a ConfigError.
  void validate() const {
    if (n_values.empty()) throw ConfigError("'n' must not be empty");
    if (d_values.empty()) throw ConfigError("'d_values' must not be empty");
    for (int n : n_values) {
      if (n < 2) throw ConfigError("N must be >= 2");
      if (n > kMaxDimension && !allow_large_n)
        throw ConfigError("N = " + std::to_string(n) + " exceeds the cap of " + std::to_string(kMaxDimension) +
                          " (use --allow-large-n)");
    }
    for (double d : d_values)
      if (!(d >= kMinDensity) || !std::isfinite(d)) throw ConfigError("densities must be finite and >= 0.05");
    if (samples_a < 1) throw ConfigError("'samples_A' must be positive");
    if (!(tol.identity > 0.0) || !(tol.oracle > 0.0) || !(tol.slope > 0.0))
      throw ConfigError("tolerances must be positive");
    try {
      if (!random_input) {
        if (n_values.size() != 1) throw ConfigError("an explicit input fixes N; give a single 'n'");
        input.validate(n_values.front());
      }
      if (phase_matrix.size() != 0)
        for (int n : n_values) model_config(n, d_values.front()).validate();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
};

namespace detail {

inline Complex parse_complex(const nlohmann::json& v) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw ConfigError("complex entries must be numbers or [re, im] pairs");
}

inline CMatrix parse_matrix(const nlohmann::json& v, const std::string& what) {
  if (!v.is_array() || v.empty()) throw ConfigError("'" + what + "' must be a non-empty list of rows");
  const auto rows = static_cast<Index>(v.size());
  if (!v[0].is_array()) throw ConfigError("'" + what + "' rows must be lists");
  const auto cols = static_cast<Index>(v[0].size());
  CMatrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto& row = v[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) throw ConfigError("'" + what + "' is ragged");
    for (Index c = 0; c < cols; ++c) m(r, c) = parse_complex(row[static_cast<std::size_t>(c)]);
  }
  return m;
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  static const std::set<std::string> known{"n",     "d_values",  "splitting",  "phase_matrix", "input",
                                           "seed",  "samples_A", "tolerances", "output_dir"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("unknown configuration key '" + key + "'");

  RunConfig c;
  try {
    if (j.contains("n")) {
      const auto& n = j["n"];
      c.n_values.clear();
      if (n.is_number_integer()) {
        c.n_values.push_back(n.get<int>());
      } else if (n.is_array()) {
        for (const auto& x : n) {
          if (!x.is_number_integer()) throw ConfigError("'n' entries must be integers");
          c.n_values.push_back(x.get<int>());
        }
      } else {
        throw ConfigError("'n' must be an integer or a list of integers");
      }
    }
    if (j.contains("d_values")) {
      if (!j["d_values"].is_array()) throw ConfigError("'d_values' must be a list");
      c.d_values.clear();
      for (const auto& x : j["d_values"]) {
        if (!x.is_number()) throw ConfigError("'d_values' entries must be numbers");
        c.d_values.push_back(x.get<double>());
      }
    }
    if (j.contains("splitting")) {
      if (!j["splitting"].is_string()) throw ConfigError("'splitting' must be a string");
      c.splitting = splitting_from_string(j["splitting"].get<std::string>());
    }
    if (j.contains("phase_matrix")) c.phase_matrix = detail::parse_matrix(j["phase_matrix"], "phase_matrix");
    if (j.contains("input")) {
      const auto& in = j["input"];
      if (in.is_string()) {
        if (in.get<std::string>() != "random") throw ConfigError("'input' string must be \"random\"");
      } else if (in.is_object()) {
        for (const auto& [key, _] : in.items())
          if (key != "weights" && key != "coeffs") throw ConfigError("unknown input key '" + key + "'");
        if (!in.contains("weights") || !in.contains("coeffs"))
          throw ConfigError("'input' needs both 'weights' and 'coeffs'");
        c.random_input = false;
        for (const auto& w : in["weights"]) {
          if (!w.is_number()) throw ConfigError("input weights must be numbers");
          c.input.weights.push_back(w.get<double>());
        }
        c.input.coeffs = detail::parse_matrix(in["coeffs"], "coeffs");
      } else {
        throw ConfigError("'input' must be \"random\" or an object");
      }
    }
    if (j.contains("seed")) {
      if (!j["seed"].is_number_integer()) throw ConfigError("'seed' must be an integer");
      c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("samples_A")) {
      if (!j["samples_A"].is_number_integer()) throw ConfigError("'samples_A' must be an integer");
      c.samples_a = j["samples_A"].get<int>();
    }
    if (j.contains("tolerances")) {
      const auto& t = j["tolerances"];
      if (!t.is_object()) throw ConfigError("'tolerances' must be an object");
      for (const auto& [key, v] : t.items()) {
        if (!v.is_number()) throw ConfigError("tolerance '" + key + "' must be a number");
        if (key == "identity")
          c.tol.identity = v.get<double>();
        else if (key == "oracle")
          c.tol.oracle = v.get<double>();
        else if (key == "slope")
          c.tol.slope = v.get<double>();
        else
          throw ConfigError("unknown tolerance '" + key + "'");
      }
    }
    if (j.contains("output_dir")) {
      if (!j["output_dir"].is_string()) throw ConfigError("'output_dir' must be a string");
      c.output_dir = j["output_dir"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(e.what());
  }
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  return parse_config(j);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open configuration file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace cotele
