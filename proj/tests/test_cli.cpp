#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "curveflow/experiments.hpp"
#include "curveflow/io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path scratch = fs::temp_directory_path() / "curveflow_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string(CURVEFLOW_CLI) + " " + args + " > " +
                          (scratch / "stdout.txt").string() + " 2> " +
                          (scratch / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string write_config(const std::string& name, const std::string& text) {
  fs::create_directories(scratch);
  const auto p = scratch / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string err() { return curveflow::io::read_file(scratch / "stderr.txt"); }

}  // namespace

TEST_CASE("exit code 2 for configuration errors") {
  fs::create_directories(scratch);
  CHECK(run("simulate --config " + write_config("bad.json", R"({"noise": {"type": "additive", "beta": 0.5}})")) == 2);
  CHECK(err().find("/noise/beta") != std::string::npos);
  CHECK(err().find("beta > 3/4") != std::string::npos);
  CHECK(run("simulate --config " + write_config("syntax.json", "{\n\"solver\":")) == 2);
  CHECK(run("simulate --config " + write_config("type.json", R"({"experiment": {"type": "decay"}})")) == 2);
  CHECK(run("verify --only no.such.check --output " + (scratch / "o").string()) == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("") == 2);
}

TEST_CASE("exit code 1 with the failure time for a step failure") {
  const auto cfg = write_config("fail.json", R"({"solver": {"n": 4, "T": 0.01, "tol": 1e-300, "seed": 1},
                                                "initial": {"basis": [[1, 3.0]]}})");
  CHECK(run("simulate --config " + cfg + " --output " + (scratch / "f").string()) == 1);
  CHECK(err().find("step failure at t = 0") != std::string::npos);
}

TEST_CASE("a one-step simulation writes two CSV rows and a manifest") {
  const auto out = scratch / "sim";
  fs::remove_all(out);
  const auto cfg = write_config("sim.json", R"({"solver": {"n": 4, "dt": 0.001, "T": 0.001, "seed": 2}})");
  REQUIRE(run("simulate --config " + cfg + " --output " + out.string()) == 0);
  const auto csv = curveflow::io::read_file(out / "trajectories" / "member_0.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  const auto manifest = nlohmann::json::parse(curveflow::io::read_file(out / "manifest.json"));
  CHECK(manifest.at("seed") == 2);
  CHECK(manifest.at("exit_code") == 0);
  CHECK(manifest.contains("versions"));
  CHECK(fs::exists(out / "states" / "member_0.bin"));
}

TEST_CASE("verify --only runs a single check") {
  const auto out = scratch / "only";
  REQUIRE(run("verify --only spectral.parseval --seed 3 --output " + out.string()) == 0);
  const auto report = nlohmann::json::parse(curveflow::io::read_file(out / "report.json"));
  REQUIRE(report.at("checks").size() == 1);
  CHECK(report["checks"][0]["id"] == "spectral.parseval");
  CHECK(curveflow::io::read_file(scratch / "stdout.txt").rfind("PASS spectral.parseval", 0) == 0);
}

TEST_CASE("seeded reports are byte-identical across worker counts") {
  const auto cfg = write_config("erg.json", R"({"solver": {"n": 4, "dt": 0.002, "T": 1, "seed": 4},
      "experiment": {"type": "ergodic", "parameters": {"ensemble": 8, "horizons": [0.5, 1]}}})");
  REQUIRE(run("ergodic --config " + cfg + " --workers 1 --output " + (scratch / "w1").string()) != 2);
  REQUIRE(run("ergodic --config " + cfg + " --workers 3 --output " + (scratch / "w3").string()) != 2);
  CHECK(curveflow::io::read_file(scratch / "w1" / "report.json") ==
        curveflow::io::read_file(scratch / "w3" / "report.json"));
  CHECK(curveflow::io::read_file(scratch / "w1" / "tables" / "occupation.csv") ==
        curveflow::io::read_file(scratch / "w3" / "tables" / "occupation.csv"));
}

TEST_CASE("--explain prints defaults") {
  CHECK(run("--explain") == 0);
  CHECK(curveflow::io::read_file(scratch / "stdout.txt").find("verify") != std::string::npos);
}

TEST_CASE("every verify id is reachable") {
  CHECK(curveflow::verify_check_ids().size() == 14);
}
