// curveflow: run simulations, the verification suite and ergodicity studies
// from a JSON experiment configuration.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "curveflow/config.hpp"
#include "curveflow/errors.hpp"
#include "curveflow/experiments.hpp"
#include "curveflow/io.hpp"

namespace {

// The subcommand fixes experiment.type; a conflicting type in the file is an error.
std::string with_type(const std::string& text, const std::string& type) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    return text;  // parse_config reports the syntax error with its position
  }
  if (!j.is_object()) return text;
  auto& exp = j["experiment"];
  if (exp.is_null()) exp = nlohmann::json::object();
  if (!exp.is_object()) return j.dump();
  if (exp.contains("type") && exp["type"] != type) {
    throw curveflow::ConfigError("/experiment/type",
                                 "config declares \"" + exp["type"].dump() +
                                     "\" but the subcommand is \"" + type + "\"");
  }
  exp["type"] = type;
  return j.dump();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral Galerkin simulation of the stochastic curve shortening flow"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::string output_dir;
  int workers = 0;
  std::string only;
  std::optional<std::uint64_t> seed;
  bool explain = false;
  app.add_flag("--explain", explain, "print annotated configuration defaults and exit");

  for (const auto& type : curveflow::experiment_types) {
    auto* sub = app.add_subcommand(type, "run a " + type + " experiment");
    sub->add_option("--config", config_path, "experiment configuration (JSON)")
        ->check(CLI::ExistingFile);
    sub->add_option("--workers", workers, "worker threads (default: CURVEFLOW_WORKERS or all)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", seed, "override the master seed");
    sub->add_option("--output", output_dir, "override output.directory");
    sub->add_flag("--explain", explain, "print annotated configuration defaults and exit");
    if (type == "verify") sub->add_option("--only", only, "run a single check by id");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (explain) {
    std::cout << curveflow::explain_defaults();
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 2;
  }
  const std::string type = app.get_subcommands().front()->get_name();

  std::string text = "{}";
  try {
    if (!config_path.empty()) text = curveflow::io::read_file(config_path);
    auto cfg = curveflow::parse_config(with_type(text, type));
    if (seed) {
      cfg.solver.seed = *seed;
      cfg.seed_generated = false;
    }
    if (!output_dir.empty()) cfg.output_directory = output_dir;

    curveflow::RunOptions opts;
    opts.workers = workers;
    if (!only.empty()) opts.only = only;
    const auto outcome = curveflow::run_experiment(cfg, opts);
    if (cfg.type == "verify") {
      for (const auto& c : outcome.report.at("checks")) {
        std::cout << (c.at("pass").get<bool>() ? "PASS " : "FAIL ")
                  << c.at("id").get<std::string>() << '\n';
      }
    }
    std::cout << outcome.summary << " (seed " << cfg.solver.seed << ", output "
              << cfg.output_directory << ")\n";
    return outcome.exit_code;
  } catch (const curveflow::ConfigError& e) {
    std::cerr << "config error: " << curveflow::describe(e, text) << '\n';
    return 2;
  } catch (const curveflow::StepFailure& e) {
    std::cerr << "step failure at t = " << e.time() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
