#pragma once

#include <optional>
#include <string>
#include <vector>

#include "curveflow/config.hpp"

namespace curveflow {

struct RunOptions {
  int workers = 0;  // 0: CURVEFLOW_WORKERS or the OpenMP default
  std::optional<std::string> only;
};

struct CheckResult {
  std::string id;
  std::string inequality;  // the statement being checked
  bool pass = false;
  nlohmann::json values;   // raw numbers behind the verdict
};

nlohmann::json to_json(const CheckResult& c);

/// Check ids in execution order.
const std::vector<std::string>& verify_check_ids();

struct VerifyReport {
  std::vector<CheckResult> checks;
  nlohmann::json constants;
  bool pass = false;
};

nlohmann::json to_json(const VerifyReport& r);

/// Runs the property suite (or the single check named by opts.only). The
/// report holds no timestamps or worker counts, so reruns with the same
/// seed serialize identically.
VerifyReport verify_suite(const ExperimentConfig& cfg, const RunOptions& opts);

struct RunOutcome {
  int exit_code = 0;  // 0 success, 1 failed verdict or step failure
  nlohmann::json report;
  std::vector<std::string> artifacts;  // paths relative to the output directory
  std::string summary;
};

/// Runs cfg.type and writes manifest.json, report.json and data files
/// under cfg.output_directory. StepFailure propagates to the caller.
RunOutcome run_experiment(const ExperimentConfig& cfg, const RunOptions& opts);

/// Build and library versions recorded in manifests.
nlohmann::json version_info();

}  // namespace curveflow
