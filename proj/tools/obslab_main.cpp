// obslab command line front end. Talks to the shared library exclusively
// through the C API in obslab/obslab.h.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "obslab/obslab.h"

namespace {

namespace fs = std::filesystem;

void write_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
  }
  fs::rename(tmp, path);
}

void print_error_payload(obslab_status status) {
  std::printf(
      "{\n  \"error\": {\n    \"code\": %d,\n    \"message\": \"%s\",\n    \"name\": "
      "\"%s\"\n  }\n}\n",
      static_cast<int>(status), obslab_last_error(), obslab_last_error_name());
}

int status_to_exit(obslab_status status) {
  switch (status) {
    case OBSLAB_OK: return 0;
    case OBSLAB_ERR_NUMERIC: return 3;
    default: return 2;  // validation, IO, internal
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"obslab — observability constants, symbol separation and "
               "microlocal densities for coupled 1D evolution systems"};
  app.footer("commands: modes solve symbols gramian obsconst sweep simul super kernel hmeasure");

  std::string command, config, out_path, csv_dir, m0_range, scaling;
  int bins = 0;
  double tol = -1.0;
  std::string truncations, family_modes;

  app.add_option("command", command, "command to run")->required();
  app.add_option("--config", config, "scenario JSON file")->required();
  app.add_option("--out", out_path, "write the JSON report here");
  app.add_option("--csv-dir", csv_dir, "write CSV attachments into this directory");
  app.add_option("--m0", m0_range, "mode range A..B (or a single A) for obsconst/sweep");
  app.add_option("--bins", bins, "angular bins for hmeasure");
  app.add_option("--scaling", scaling, "classical|parabolic override");
  app.add_option("--tol", tol, "near-kernel threshold for kernel");
  app.add_option("--truncations", truncations, "comma list of truncations for super");
  app.add_option("--family-modes", family_modes, "comma list of family modes for hmeasure");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  // assemble the options JSON understood by obslab_run
  std::string options = "{";
  bool first = true;
  auto add = [&](const std::string& key, const std::string& value) {
    if (!first) options += ",";
    options += "\"" + key + "\":" + value;
    first = false;
  };
  if (!m0_range.empty()) {
    const auto dots = m0_range.find("..");
    if (dots == std::string::npos) {
      add("m0_lo", m0_range);
    } else {
      add("m0_lo", m0_range.substr(0, dots));
      add("m0_hi", m0_range.substr(dots + 2));
    }
  }
  if (bins > 0) add("bins", std::to_string(bins));
  if (tol >= 0.0) add("tol", std::to_string(tol));
  if (!scaling.empty()) add("scaling", "\"" + scaling + "\"");
  auto add_list = [&](const std::string& key, const std::string& csv) {
    std::string arr = "[";
    for (std::size_t i = 0; i < csv.size();) {
      std::size_t j = csv.find(',', i);
      if (j == std::string::npos) j = csv.size();
      if (arr.size() > 1) arr += ",";
      arr += csv.substr(i, j - i);
      i = j + 1;
    }
    add(key, arr + "]");
  };
  if (!truncations.empty()) add_list("truncations", truncations);
  if (!family_modes.empty()) add_list("family_modes", family_modes);
  options += "}";

  const auto t0 = std::chrono::steady_clock::now();

  obslab_scenario* scenario = nullptr;
  obslab_status status = obslab_scenario_load(config.c_str(), &scenario);
  if (status != OBSLAB_OK) {
    print_error_payload(status);
    return status_to_exit(status);
  }

  obslab_result* result = nullptr;
  status = obslab_run(scenario, command.c_str(), options.c_str(), &result);
  obslab_scenario_free(scenario);
  if (status != OBSLAB_OK) {
    print_error_payload(status);
    return status_to_exit(status);
  }

  const std::string report = obslab_result_report_json(result);
  std::fputs(report.c_str(), stdout);

  try {
    if (!out_path.empty()) write_atomic(out_path, report);
    if (!csv_dir.empty()) {
      for (int i = 0; i < obslab_result_csv_count(result); ++i)
        write_atomic(fs::path(csv_dir) / obslab_result_csv_name(result, i),
                     obslab_result_csv_data(result, i));
    }
  } catch (const std::exception& e) {
    obslab_result_free(result);
    std::fprintf(stderr, "obslab: %s\n", e.what());
    return 2;
  }
  obslab_result_free(result);

  const auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0);
  std::fprintf(stderr, "obslab: %s finished in %.3f s\n", command.c_str(), dt.count());
  return 0;
}
