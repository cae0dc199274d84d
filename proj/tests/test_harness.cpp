#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "qpnls/harness.hpp"
#include "qpnls/trajectories.hpp"

using namespace qpnls;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qpnls_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json tiny_evolve_config(double t_end = 0.5) {
  json cfg;
  cfg["kind"] = "evolve";
  cfg["potential"] = {{"omega", {1.0}}, {"delta", {1}}};
  cfg["grid"] = {{"points", {64}}, {"extents", {8.0}}};
  cfg["initial"] = {{"type", "gaussian"}};
  cfg["solver"] = {{"dt", 0.01},
                   {"t_end", t_end},
                   {"lambda", -1.0},
                   {"output_every", 5}};
  return cfg;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("evolve run produces a manifest that indexes real outputs") {
  const fs::path dir = fresh_dir("evolve");
  const RunOutcome outcome =
      run_experiment_text(tiny_evolve_config().dump(), dir.string(), 7, false);
  CHECK(outcome.exit_code == 0);
  CHECK_FALSE(outcome.resumed);
  CHECK(outcome.kind == "evolve");
  CHECK(outcome.error_path.empty());
  REQUIRE(fs::exists(outcome.manifest_path));

  const json manifest = json::parse(slurp(outcome.manifest_path));
  CHECK(manifest.at("kind") == "evolve");
  CHECK(manifest.at("seed") == 7);
  CHECK(manifest.at("config_sha256").get<std::string>().size() == 64);
  CHECK(manifest.at("resolved_config").at("seed") == 7);
  CHECK(manifest.at("versions").contains("qpnls"));

  const json& summary = manifest.at("summary");
  CHECK(summary.at("termination") == "completed");
  CHECK(summary.at("termination_code") == 0);
  CHECK(summary.at("mass_drift").get<double>() < 1e-10);
  CHECK(summary.at("handoff_time").get<double>() == -1.0);

  const json& entries = manifest.at("outputs");
  REQUIRE(!entries.empty());
  for (const json& entry : entries) {
    const fs::path p = dir / entry.at("path").get<std::string>();
    REQUIRE(fs::exists(p));
    CHECK(entry.at("bytes").get<std::uintmax_t>() == fs::file_size(p));
    CHECK(entry.at("sha256").get<std::string>().size() == 64);
  }
  const auto& listed = outcome.outputs;
  for (const char* expected :
       {"record.csv", "record.json", "initial.qpwf", "final.qpwf"}) {
    CHECK(std::find(listed.begin(), listed.end(), expected) != listed.end());
  }
}

TEST_CASE("identical config and seed give byte-identical records") {
  const fs::path a = fresh_dir("det_a");
  const fs::path b = fresh_dir("det_b");
  const std::string text = tiny_evolve_config().dump();
  REQUIRE(run_experiment_text(text, a.string(), 42, false).exit_code == 0);
  REQUIRE(run_experiment_text(text, b.string(), 42, false).exit_code == 0);
  CHECK(slurp(a / "record.csv") == slurp(b / "record.csv"));

  const json ma = json::parse(slurp(a / "manifest.json"));
  const json mb = json::parse(slurp(b / "manifest.json"));
  auto hash_of = [](const json& m, const std::string& name) {
    for (const json& e : m.at("outputs"))
      if (e.at("path") == name) return e.at("sha256").get<std::string>();
    return std::string();
  };
  CHECK(hash_of(ma, "record.csv") == hash_of(mb, "record.csv"));
  CHECK(ma.at("config_sha256") == mb.at("config_sha256"));
}

TEST_CASE("resume reuses a matching manifest and reruns a changed one") {
  const fs::path dir = fresh_dir("resume");
  const std::string text = tiny_evolve_config().dump();
  REQUIRE(run_experiment_text(text, dir.string(), 9, false).exit_code == 0);

  const RunOutcome again = run_experiment_text(text, dir.string(), 9, true);
  CHECK(again.exit_code == 0);
  CHECK(again.resumed);
  CHECK(!again.outputs.empty());

  // different seed hashes differently: a real rerun happens
  const RunOutcome other = run_experiment_text(text, dir.string(), 10, true);
  CHECK(other.exit_code == 0);
  CHECK_FALSE(other.resumed);
}

TEST_CASE("failures land in error.json with a typed reason") {
  const fs::path dir = fresh_dir("bad_kind");
  json cfg = tiny_evolve_config();
  cfg["kind"] = "bogus";
  const RunOutcome outcome =
      run_experiment_text(cfg.dump(), dir.string(), 1, false);
  CHECK(outcome.exit_code == 1);
  CHECK(outcome.manifest_path.empty());
  REQUIRE(fs::exists(outcome.error_path));
  const json err = json::parse(slurp(outcome.error_path));
  CHECK(err.at("error_type") == "InvalidArgument");
  CHECK(err.at("message").get<std::string>().find("unknown kind") !=
        std::string::npos);

  const fs::path dir2 = fresh_dir("missing_block");
  json broken = tiny_evolve_config();
  broken.erase("potential");
  const RunOutcome missing =
      run_experiment_text(broken.dump(), dir2.string(), 1, false);
  CHECK(missing.exit_code == 1);
  const json err2 = json::parse(slurp(missing.error_path));
  CHECK(err2.at("error_type") == "InvalidArgument");

  const RunOutcome nofile =
      run_experiment("/nonexistent/config.json", fresh_dir("nofile").string(),
                     1, false);
  CHECK(nofile.exit_code == 1);
}

TEST_CASE("config file variant matches the text variant") {
  const fs::path dir = fresh_dir("from_file");
  fs::create_directories(dir);
  const fs::path cfg_path = dir / "config.json";
  std::ofstream(cfg_path) << tiny_evolve_config().dump(2);
  const RunOutcome outcome =
      run_experiment(cfg_path.string(), (dir / "out").string(), 3, false);
  CHECK(outcome.exit_code == 0);
  CHECK(fs::exists(dir / "out" / "record.csv"));
}

TEST_CASE("condition check reports the threshold comparison") {
  auto run = [](double omega_rep) {
    json cfg;
    cfg["kind"] = "check-condition";
    cfg["potential"] = {{"omega", {omega_rep, 1.0}}, {"delta", {-1, 1}}};
    cfg["check_condition"] = {{"Lambda", 1.0}, {"sigma", 1.0}};
    const fs::path dir =
        fresh_dir("cond_" + std::to_string(static_cast<int>(omega_rep)));
    const RunOutcome outcome =
        run_experiment_text(cfg.dump(), dir.string(), 0, false);
    REQUIRE(outcome.exit_code == 0);
    return json::parse(slurp(outcome.manifest_path)).at("summary");
  };

  const json strong = run(4.0);
  const double expected = domin_threshold(2, 1.0, 1.0, 1.0);
  CHECK(strong.at("threshold").get<double>() ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(strong.at("omega_repulsive_min") == 4.0);
  CHECK(strong.at("satisfied") == true);
  CHECK(run(3.0).at("satisfied") == false);  // 3 < 2 + 2 ln 2 + ...
}

TEST_CASE("sweep fans out points and collects a summary table") {
  json cfg;
  cfg["kind"] = "sweep";
  cfg["sweep"] = {
      {"base", tiny_evolve_config(0.2)},
      {"axis",
       {{"pointer", "/solver/lambda"}, {"values", {-0.5, 0.0, 0.5}}}},
      {"max_concurrent", 2}};
  const fs::path dir = fresh_dir("sweep");
  const RunOutcome outcome =
      run_experiment_text(cfg.dump(), dir.string(), 5, false);
  REQUIRE(outcome.exit_code == 0);

  const json manifest = json::parse(slurp(outcome.manifest_path));
  CHECK(manifest.at("summary").at("points") == 3);
  CHECK(manifest.at("summary").at("completed") == 3);

  for (const char* point : {"point_000", "point_001", "point_002"}) {
    CHECK(fs::exists(dir / point / "manifest.json"));
    CHECK(fs::exists(dir / point / "record.csv"));
  }

  const std::string table = slurp(dir / "summary.csv");
  REQUIRE(table.rfind("index,axis_0,exit_code,dir", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 4);
  CHECK(table.find("point_002") != std::string::npos);
  CHECK(table.find("mass_drift") != std::string::npos);
}

TEST_CASE("linear test kind measures order and invariants") {
  json cfg;
  cfg["kind"] = "linear-test";
  cfg["potential"] = {{"omega", {1.0}}, {"delta", {1}}};
  cfg["grid"] = {{"points", {128}}, {"extents", {10.0}}};
  cfg["initial"] = {{"type", "gaussian"}};
  cfg["linear_test"] = {{"t", 0.4}};
  const fs::path dir = fresh_dir("linear_test");
  const RunOutcome outcome =
      run_experiment_text(cfg.dump(), dir.string(), 0, false);
  REQUIRE(outcome.exit_code == 0);
  const json summary = json::parse(slurp(outcome.manifest_path)).at("summary");
  CHECK(summary.at("order").get<double>() > 1.5);
  CHECK(summary.at("order").get<double>() < 2.5);
  CHECK(summary.at("group_law_error").get<double>() < 1e-9);
  CHECK(summary.at("roundtrip_error").get<double>() < 1e-9);
  CHECK(summary.at("unitarity_drift").get<double>() < 1e-12);
  CHECK(fs::exists(dir / "linear_test.csv"));
}

}  // TEST_SUITE
