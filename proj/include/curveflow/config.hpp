#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "curveflow/errors.hpp"
#include "curveflow/ergodicity.hpp"
#include "curveflow/integrator.hpp"
#include "curveflow/noise.hpp"

namespace curveflow {

/// Initial condition: a named preset or explicit (k, c_k) pairs.
struct InitialSpec {
  std::string preset;  // "e1", "zero", "bump"; empty when `basis` is used
  std::vector<std::pair<std::size_t, double>> basis;

  /// Galerkin coefficients in dimension n.
  SpectralField field(std::size_t n) const;
  std::string id() const;
};

nlohmann::json to_json(const InitialSpec& s);
/// `path` is the JSON pointer of the block, used in diagnostics.
InitialSpec initial_from_json(const nlohmann::json& j, const std::string& path);

inline const std::vector<std::string> experiment_types = {"simulate", "decay",    "ergodic",
                                                          "coupling", "truncation", "verify"};

struct ExperimentConfig {
  SolverConfig solver;
  nlohmann::json noise = {{"type", "additive"}, {"beta", 1.0}, {"scale", 1.0}};
  InitialSpec initial{"e1", {}};
  std::string type = "verify";
  nlohmann::json parameters = nlohmann::json::object();  // defaults filled in
  std::string output_directory = "curveflow-out";
  std::vector<std::string> formats = {"csv", "bin"};
  bool seed_generated = false;

  NoiseModel noise_model() const { return noise_from_json(noise, solver.n); }
  template <class T>
  T param(const std::string& key) const {
    return parameters.at(key).get<T>();
  }
  bool wants(const std::string& format) const;
};

/// Parameter defaults for an experiment type, with one-line descriptions.
struct ParameterSpec {
  std::string name;
  nlohmann::json value;
  std::string help;
};
const std::vector<ParameterSpec>& parameter_specs(const std::string& type);

/// Strict parse: unknown keys, wrong types and inadmissible values raise
/// ConfigError with a JSON pointer. Syntax errors raise ConfigError with
/// field "" and the parser's line and column. A missing /solver/seed is
/// drawn from std::random_device and flagged in seed_generated.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical form with every default spelled out.
nlohmann::json emit_config(const ExperimentConfig& cfg);

/// Line of the member named by a JSON pointer, found by scanning `text`.
std::optional<std::size_t> locate_line(const std::string& text, const std::string& pointer);

/// "line L: /pointer: message" when the line is known.
std::string describe(const ConfigError& e, const std::string& text);

/// Annotated defaults for every block and experiment type.
std::string explain_defaults();

/// Library observable by name: clipped_norm, clipped_coordinate:<k>,
/// smoothed_ball:<radius>:<width>, constant:<value>.
Observable observable_from_name(const std::string& name, const std::string& path);

}  // namespace curveflow
