#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>
#include <sys/wait.h>

#include "obslab/obslab.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = OBSLAB_CLI_PATH;
const fs::path kData = OBSLAB_DATA_DIR;

struct RunOutput {
  int exit_code;
  std::string stdout_text;
};

RunOutput run_cli(const std::string& args) {
  std::string cmd = kCli + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("C API: load, run, inspect, determinism") {
  const std::string path = (kData / "two_waves_cancel.json").string();
  obslab_scenario* sc = nullptr;
  REQUIRE(obslab_scenario_load(path.c_str(), &sc) == OBSLAB_OK);

  obslab_result* r1 = nullptr;
  REQUIRE(obslab_run(sc, "obsconst", "", &r1) == OBSLAB_OK);
  json rep = json::parse(obslab_result_report_json(r1));
  CHECK(rep["results"]["sigma_min"].get<double>() == 0.0);
  CHECK(rep["results"]["c_obs"] == "inf");

  obslab_result* r2 = nullptr;
  REQUIRE(obslab_run(sc, "obsconst", "", &r2) == OBSLAB_OK);
  CHECK(std::string(obslab_result_report_json(r1)) ==
        std::string(obslab_result_report_json(r2)));

  obslab_result_free(r1);
  obslab_result_free(r2);
  obslab_scenario_free(sc);
}

TEST_CASE("C API: error reporting carries the stable error name") {
  obslab_scenario* sc = nullptr;
  CHECK(obslab_scenario_parse("{\"domain\": {}}", &sc) == OBSLAB_ERR_VALIDATION);
  CHECK(sc == nullptr);
  CHECK(std::string(obslab_last_error_name()) == "SchemaError");
  CHECK(std::string(obslab_last_error()).find("domain.length") != std::string::npos);

  CHECK(obslab_scenario_parse("not json", &sc) == OBSLAB_ERR_VALIDATION);

  obslab_scenario* good = nullptr;
  const std::string path = (kData / "two_waves_cancel.json").string();
  REQUIRE(obslab_scenario_load(path.c_str(), &good) == OBSLAB_OK);
  obslab_result* res = nullptr;
  CHECK(obslab_run(good, "bogus", "", &res) == OBSLAB_ERR_VALIDATION);
  CHECK(res == nullptr);
  obslab_scenario_free(good);

  CHECK(obslab_version() == std::string("0.1.0"));
}

TEST_CASE("C API: csv attachments are exposed by name") {
  const std::string path = (kData / "wave_e1_averaged.json").string();
  obslab_scenario* sc = nullptr;
  REQUIRE(obslab_scenario_load(path.c_str(), &sc) == OBSLAB_OK);
  obslab_result* res = nullptr;
  REQUIRE(obslab_run(sc, "sweep", "{\"m0_lo\":1,\"m0_hi\":10}", &res) == OBSLAB_OK);
  REQUIRE(obslab_result_csv_count(res) == 1);
  CHECK(std::string(obslab_result_csv_name(res, 0)) == "sweep.csv");
  const std::string csv = obslab_result_csv_data(res, 0);
  CHECK(csv.rfind("m0,sigma_min,C_obs\n", 0) == 0);
  obslab_result_free(res);
  obslab_scenario_free(sc);
}

TEST_CASE("CLI: obsconst runs, writes the report, exits 0, deterministic bytes") {
  const fs::path tmp = fs::temp_directory_path() / "obslab_cli_test";
  fs::create_directories(tmp);
  const std::string config = (kData / "two_waves_cancel.json").string();

  RunOutput a = run_cli("obsconst --config " + config + " --out " + (tmp / "rep.json").string());
  CHECK(a.exit_code == 0);
  json rep = json::parse(a.stdout_text);
  CHECK(rep["results"]["c_obs"] == "inf");
  CHECK(slurp(tmp / "rep.json") == a.stdout_text);

  RunOutput b = run_cli("obsconst --config " + config);
  CHECK(b.stdout_text == a.stdout_text);
  fs::remove_all(tmp);
}

TEST_CASE("CLI: sweep writes the CSV table into --csv-dir") {
  const fs::path tmp = fs::temp_directory_path() / "obslab_cli_sweep";
  fs::create_directories(tmp);
  const std::string config = (kData / "wave_e1_averaged.json").string();
  RunOutput r = run_cli("sweep --config " + config + " --m0 1..10 --csv-dir " + tmp.string());
  CHECK(r.exit_code == 0);
  const std::string csv = slurp(tmp / "sweep.csv");
  CHECK(csv.rfind("m0,sigma_min,C_obs\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
  fs::remove_all(tmp);
}

TEST_CASE("CLI: every command runs end to end on a suitable scenario") {
  const fs::path tmp = fs::temp_directory_path() / "obslab_cli_smoke";
  fs::create_directories(tmp);
  const std::string averaged = (kData / "wave_e1_averaged.json").string();
  const std::string independent = (kData / "simul_wave_k2.json").string();
  const std::string super_cfg = (kData / "super_three_waves.json").string();

  const std::pair<std::string, std::string> runs[] = {
      {"modes", averaged},
      {"solve", averaged},
      {"symbols", averaged},
      {"gramian", averaged},
      {"obsconst", averaged},
      {"sweep --m0 1..5", averaged},
      {"simul", independent},
      {"kernel", independent},
      {"super --truncations 1,2,3", super_cfg},
      {"hmeasure --bins 48", averaged},
      {"hmeasure --family-modes 4,8 --scaling parabolic", averaged},
      {"symbols --scaling parabolic", averaged},
  };
  for (const auto& [args, cfg] : runs) {
    RunOutput r = run_cli(args + " --config " + cfg + " --csv-dir " + tmp.string());
    CAPTURE(args);
    CHECK(r.exit_code == 0);
    CHECK_NOTHROW(json::parse(r.stdout_text));
  }
  CHECK(fs::exists(tmp / "modes.csv"));
  CHECK(fs::exists(tmp / "super.csv"));
  CHECK(fs::exists(tmp / "hmeasure_bins.csv"));
  CHECK(fs::exists(tmp / "hmeasure_bins_n2.csv"));
  fs::remove_all(tmp);
}

TEST_CASE("CLI: OBSLAB_THREADS fan-out does not change the bytes") {
  const std::string config = (kData / "wave_e1_averaged.json").string();
  RunOutput serial = run_cli("sweep --config " + config + " --m0 1..8");
  FILE* pipe = popen(("OBSLAB_THREADS=4 " + kCli + " sweep --config " + config +
                      " --m0 1..8 2>/dev/null")
                         .c_str(),
                     "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  pclose(pipe);
  CHECK(out == serial.stdout_text);
}

TEST_CASE("CLI: exit codes follow the error taxonomy") {
  RunOutput unknown = run_cli("frobnicate --config " +
                              (kData / "two_waves_cancel.json").string());
  CHECK(unknown.exit_code == 2);
  json payload = json::parse(unknown.stdout_text);
  CHECK(payload["error"]["code"] == 2);

  RunOutput missing = run_cli("obsconst --config /nonexistent/file.json");
  CHECK(missing.exit_code == 2);
}
