#include "curveflow/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "curveflow/io.hpp"

namespace curveflow {

namespace {

void require_object(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
}

void require_known(const nlohmann::json& j, const std::set<std::string>& known,
                   const std::string& path) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.contains(it.key())) throw ConfigError(path + "/" + it.key(), "unknown field");
  }
}

SpectralField bump_field(std::size_t n) {
  return project([](double x) { return 16.0 * x * x * (1.0 - x) * (1.0 - x); }, SpectralBasis(n));
}

// Checks a parameter value against the type of its default.
void check_parameter(const nlohmann::json& value, const nlohmann::json& def,
                     const std::string& path) {
  if (def.is_number_unsigned()) {
    if (!value.is_number_unsigned()) throw ConfigError(path, "expected a non-negative integer");
  } else if (def.is_number()) {
    if (!value.is_number()) throw ConfigError(path, "expected a number");
  } else if (def.is_string()) {
    if (!value.is_string()) throw ConfigError(path, "expected a string");
  } else if (def.is_boolean()) {
    if (!value.is_boolean()) throw ConfigError(path, "expected true or false");
  } else if (def.is_array()) {
    if (!value.is_array() || value.empty()) throw ConfigError(path, "expected a non-empty array");
    for (std::size_t i = 0; i < value.size(); ++i) {
      check_parameter(value[i], def.front(), path + "/" + std::to_string(i));
    }
  } else if (def.is_object()) {
    initial_from_json(value, path);
  }
}

const std::map<std::string, std::vector<ParameterSpec>>& all_specs() {
  static const std::map<std::string, std::vector<ParameterSpec>> specs = {
      {"simulate", {{"ensemble", 1u, "number of trajectories; member m uses stream m"}}},
      {"decay", {{"tolerance", 1e-3, "relative slack on e^{-2 k_min t} ||v0||^2"}}},
      {"ergodic",
       {{"ensemble", 64u, "members per estimate"},
        {"delta", 0.5, "ball radius for occupation estimates"},
        {"horizons", {5.0, 10.0, 20.0}, "horizons T for occupation and agreement"},
        {"observable", "clipped_norm", "observable for the agreement test"},
        {"compare_with", {{"basis", {{2u, 2.0}}}}, "second initial condition y"}}},
      {"coupling",
       {{"ensemble", 100u, "coupled pairs"},
        {"other", {{"basis", {{1u, -1.0}}}}, "second initial condition y"},
        {"observable", "clipped_coordinate:1", "observable for the e-property gap"}}},
      {"truncation",
       {{"ensemble", 100u, "members per truncation level"},
        {"levels", {2u, 4u, 8u}, "increasing truncation levels K"}}},
      {"verify",
       {{"samples", 200u, "random probe fields per static check"},
        {"ensemble", 16u, "members per stochastic check"},
        {"coupling_T", 1.0, "horizon of the coupling check"},
        {"decay_T", 5.0, "horizon of the deterministic decay check"},
        {"certificate_T", 5.0, "horizon of the Lyapunov certificate"},
        {"eprop_T", 1.0, "horizon of the e-property check"},
        {"agreement_horizons", {2.0, 4.0, 8.0}, "horizons of the agreement check"}}},
  };
  return specs;
}

std::uint64_t fresh_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

}  // namespace

SpectralField InitialSpec::field(std::size_t n) const {
  if (preset == "e1") return SpectralField::basis(1, n);
  if (preset == "zero") return SpectralField(n);
  if (preset == "bump") return bump_field(n);
  SpectralField u(n);
  for (const auto& [k, c] : basis) {
    if (k >= 1 && k <= n) u[k - 1] = c;
  }
  return u;
}

std::string InitialSpec::id() const {
  if (!preset.empty()) return preset;
  std::ostringstream out;
  out << "basis";
  for (const auto& [k, c] : basis) out << '_' << k << ':' << c;
  return out.str();
}

nlohmann::json to_json(const InitialSpec& s) {
  if (!s.preset.empty()) return {{"preset", s.preset}};
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [k, c] : s.basis) pairs.push_back({k, c});
  return {{"basis", pairs}};
}

InitialSpec initial_from_json(const nlohmann::json& j, const std::string& path) {
  require_object(j, path);
  require_known(j, {"preset", "basis"}, path);
  if (j.contains("preset") == j.contains("basis")) {
    throw ConfigError(path, "give exactly one of \"preset\" or \"basis\"");
  }
  InitialSpec s;
  if (j.contains("preset")) {
    const auto& p = j.at("preset");
    if (!p.is_string()) throw ConfigError(path + "/preset", "expected a string");
    s.preset = p.get<std::string>();
    if (s.preset != "e1" && s.preset != "zero" && s.preset != "bump") {
      throw ConfigError(path + "/preset", "unknown preset \"" + s.preset +
                                              "\" (expected e1, zero or bump)");
    }
    return s;
  }
  const auto& b = j.at("basis");
  if (!b.is_array() || b.empty()) throw ConfigError(path + "/basis", "expected [[k, c], ...]");
  std::set<std::size_t> seen;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const std::string item = path + "/basis/" + std::to_string(i);
    const auto& e = b[i];
    if (!e.is_array() || e.size() != 2) throw ConfigError(item, "expected a pair [k, c]");
    if (!e[0].is_number_unsigned() || e[0].get<std::size_t>() == 0) {
      throw ConfigError(item + "/0", "mode index must be an integer >= 1");
    }
    if (!e[1].is_number()) throw ConfigError(item + "/1", "coefficient must be a number");
    const std::size_t k = e[0].get<std::size_t>();
    if (!seen.insert(k).second) throw ConfigError(item + "/0", "duplicate mode index");
    s.basis.emplace_back(k, e[1].get<double>());
  }
  return s;
}

bool ExperimentConfig::wants(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

const std::vector<ParameterSpec>& parameter_specs(const std::string& type) {
  const auto& specs = all_specs();
  const auto it = specs.find(type);
  if (it == specs.end()) throw ConfigError("/experiment/type", "unknown experiment type");
  return it->second;
}

ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  require_object(j, "");
  require_known(j, {"solver", "noise", "initial", "experiment", "output"}, "");

  ExperimentConfig cfg;
  const nlohmann::json solver = j.value("solver", nlohmann::json::object());
  cfg.solver = solver_from_json(solver);
  if (!solver.contains("seed")) {
    cfg.solver.seed = fresh_seed();
    cfg.seed_generated = true;
  }

  if (j.contains("noise")) {
    cfg.noise = j.at("noise");
  }
  // Validates the block; the canonical form fills in defaults.
  cfg.noise = to_json(noise_from_json(cfg.noise, cfg.solver.n));

  if (j.contains("initial")) cfg.initial = initial_from_json(j.at("initial"), "/initial");
  for (const auto& [k, c] : cfg.initial.basis) {
    (void)c;
    if (k > cfg.solver.n) {
      throw ConfigError("/initial/basis", "mode " + std::to_string(k) +
                                              " exceeds the Galerkin dimension n = " +
                                              std::to_string(cfg.solver.n));
    }
  }

  const nlohmann::json exp = j.value("experiment", nlohmann::json::object());
  require_object(exp, "/experiment");
  require_known(exp, {"type", "parameters"}, "/experiment");
  if (exp.contains("type")) {
    if (!exp.at("type").is_string()) throw ConfigError("/experiment/type", "expected a string");
    cfg.type = exp.at("type").get<std::string>();
  }
  if (std::find(experiment_types.begin(), experiment_types.end(), cfg.type) ==
      experiment_types.end()) {
    throw ConfigError("/experiment/type",
                      "unknown experiment \"" + cfg.type +
                          "\" (expected simulate, verify, decay, ergodic, coupling or truncation)");
  }
  const nlohmann::json params = exp.value("parameters", nlohmann::json::object());
  require_object(params, "/experiment/parameters");
  const auto& specs = parameter_specs(cfg.type);
  std::set<std::string> known;
  for (const auto& s : specs) known.insert(s.name);
  require_known(params, known, "/experiment/parameters");
  cfg.parameters = nlohmann::json::object();
  for (const auto& s : specs) {
    const std::string path = "/experiment/parameters/" + s.name;
    if (params.contains(s.name)) {
      check_parameter(params.at(s.name), s.value, path);
      cfg.parameters[s.name] = params.at(s.name);
    } else {
      cfg.parameters[s.name] = s.value;
    }
  }
  if (cfg.parameters.contains("observable")) {
    observable_from_name(cfg.parameters["observable"].get<std::string>(),
                         "/experiment/parameters/observable");
  }
  for (const char* key : {"ensemble"}) {
    if (cfg.parameters.contains(key) && cfg.parameters[key].get<std::size_t>() == 0) {
      throw ConfigError(std::string("/experiment/parameters/") + key, "must be >= 1");
    }
  }
  if (cfg.type == "truncation") {
    if (cfg.noise.at("type") != "multiplicative") {
      throw ConfigError("/noise/type", "truncation experiments need multiplicative noise");
    }
    const auto levels = cfg.parameters["levels"].get<std::vector<std::size_t>>();
    const auto members = cfg.noise.at("members").get<std::size_t>();
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const std::string path = "/experiment/parameters/levels/" + std::to_string(i);
      if (levels[i] == 0 || levels[i] > members) {
        throw ConfigError(path, "level must lie in [1, noise members]");
      }
      if (i > 0 && levels[i] <= levels[i - 1]) throw ConfigError(path, "levels must increase");
    }
  }

  const nlohmann::json out = j.value("output", nlohmann::json::object());
  require_object(out, "/output");
  require_known(out, {"directory", "formats"}, "/output");
  if (out.contains("directory")) {
    if (!out.at("directory").is_string() || out.at("directory").get<std::string>().empty()) {
      throw ConfigError("/output/directory", "expected a non-empty string");
    }
    cfg.output_directory = out.at("directory").get<std::string>();
  }
  if (out.contains("formats")) {
    const auto& f = out.at("formats");
    if (!f.is_array()) throw ConfigError("/output/formats", "expected an array");
    cfg.formats.clear();
    for (std::size_t i = 0; i < f.size(); ++i) {
      const std::string path = "/output/formats/" + std::to_string(i);
      if (!f[i].is_string()) throw ConfigError(path, "expected a string");
      const auto name = f[i].get<std::string>();
      if (name != "csv" && name != "json" && name != "bin") {
        throw ConfigError(path, "unknown format \"" + name + "\" (expected csv, json or bin)");
      }
      cfg.formats.push_back(name);
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError("", e.what());
  }
  return parse_config(text);
}

nlohmann::json emit_config(const ExperimentConfig& cfg) {
  return {{"solver", to_json(cfg.solver)},
          {"noise", cfg.noise},
          {"initial", to_json(cfg.initial)},
          {"experiment", {{"type", cfg.type}, {"parameters", cfg.parameters}}},
          {"output", {{"directory", cfg.output_directory}, {"formats", cfg.formats}}}};
}

std::optional<std::size_t> locate_line(const std::string& text, const std::string& pointer) {
  if (pointer.empty() || pointer.front() != '/') return std::nullopt;
  std::size_t pos = 0;
  bool found = false;
  std::size_t start = 1;
  while (start <= pointer.size()) {
    const std::size_t end = std::min(pointer.find('/', start), pointer.size());
    const std::string token = pointer.substr(start, end - start);
    start = end + 1;
    if (!token.empty() && std::all_of(token.begin(), token.end(), ::isdigit)) continue;
    const std::size_t hit = text.find("\"" + token + "\"", pos);
    if (hit == std::string::npos) break;
    pos = hit;
    found = true;
  }
  if (!found) return std::nullopt;
  return static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(pos),
                                             '\n')) +
         1;
}

std::string describe(const ConfigError& e, const std::string& text) {
  if (const auto line = locate_line(text, e.field())) {
    return "line " + std::to_string(*line) + ": " + e.what();
  }
  return e.what();
}

std::string explain_defaults() {
  std::ostringstream out;
  const SolverConfig s;
  out << "Experiment configuration (strict JSON; unknown keys are rejected)\n\n"
      << "solver\n"
      << "  n             " << s.n << "\tGalerkin dimension\n"
      << "  dt            " << s.dt << "\ttime step\n"
      << "  T             " << s.T << "\thorizon\n"
      << "  scheme        \"" << to_string(s.scheme)
      << "\"\texplicit (dt <= 0.5/lambda_n) or semi_implicit\n"
      << "  quad_panels   " << s.quad_panels << "\tGauss-Legendre panels, 0 selects 8n\n"
      << "  seed          (generated)\t64-bit master seed; recorded in manifest.json\n"
      << "  record_every  " << s.record_every << "\tsteps between recorded states\n"
      << "  max_iter      " << s.max_iter << "\tfixed-point iterations per implicit step\n"
      << "  tol           " << s.tol << "\timplicit residual tolerance, relative to max(1,|u|)\n"
      << "  damping       " << s.damping << "\tfixed-point damping in (0,1]\n\n"
      << "noise\n"
      << "  {\"type\": \"additive\", \"beta\": 1, \"scale\": 1}\tQ = scale (-Delta)^{-beta}, beta > 3/4\n"
      << "  {\"type\": \"multiplicative\", \"members\": 8, \"decay\": 0.5, \"scale\": 1}\n"
      << "      phi_i(x,y) = scale decay^i sin(i pi x) / sqrt(1 + y^2)\n"
      << "  {\"type\": \"none\"}\n\n"
      << "initial\n"
      << "  {\"preset\": \"e1\"}\tone of e1, zero, bump (16 x^2 (1-x)^2)\n"
      << "  {\"basis\": [[k, c], ...]}\texplicit coefficients\n\n"
      << "output\n"
      << "  directory     \"curveflow-out\"\n"
      << "  formats       [\"csv\", \"bin\"]\tany of csv, json, bin\n\n"
      << "experiment.type and experiment.parameters\n";
  for (const auto& type : experiment_types) {
    out << "  " << type << "\n";
    for (const auto& p : parameter_specs(type)) {
      out << "    " << p.name << " = " << p.value.dump() << "\t" << p.help << "\n";
    }
  }
  return out.str();
}

Observable observable_from_name(const std::string& name, const std::string& path) {
  std::vector<std::string> parts;
  std::stringstream ss(name);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  try {
    if (parts.size() == 1 && parts[0] == "clipped_norm") return clipped_norm();
    if (parts.size() == 2 && parts[0] == "clipped_coordinate") {
      return clipped_coordinate(std::stoul(parts[1]));
    }
    if (parts.size() == 3 && parts[0] == "smoothed_ball") {
      return smoothed_ball(std::stod(parts[1]), std::stod(parts[2]));
    }
    if (parts.size() == 2 && parts[0] == "constant") return constant_observable(std::stod(parts[1]));
  } catch (const std::exception&) {
  }
  throw ConfigError(path, "unknown observable \"" + name +
                              "\" (expected clipped_norm, clipped_coordinate:<k>, "
                              "smoothed_ball:<r>:<w> or constant:<v>)");
}

}  // namespace curveflow
