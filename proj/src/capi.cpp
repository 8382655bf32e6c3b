#include "obslab/obslab.h"

#include <nlohmann/json.hpp>
#include <string>

#include "core/dispatch.hpp"
#include "core/errors.hpp"
#include "core/scenario_io.hpp"

struct obslab_scenario {
  obslab::Scenario scenario;
};

struct obslab_result {
  obslab::RunResult result;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_error_name;

obslab_status record_error(const std::exception& e) {
  g_last_error = e.what();
  if (const auto* err = dynamic_cast<const obslab::Error*>(&e)) {
    g_last_error_name = err->name();
    return err->kind() == obslab::ErrorKind::Numeric ? OBSLAB_ERR_NUMERIC
                                                     : OBSLAB_ERR_VALIDATION;
  }
  g_last_error_name = "InternalError";
  return OBSLAB_ERR_INTERNAL;
}

void clear_error() {
  g_last_error.clear();
  g_last_error_name.clear();
}

}  // namespace

extern "C" {

const char* obslab_version(void) { return obslab::kVersion; }

const char* obslab_last_error(void) { return g_last_error.c_str(); }

const char* obslab_last_error_name(void) { return g_last_error_name.c_str(); }

obslab_status obslab_scenario_load(const char* path, obslab_scenario** out) {
  if (!path || !out) return OBSLAB_ERR_VALIDATION;
  *out = nullptr;
  clear_error();
  try {
    auto* handle = new obslab_scenario{obslab::load_scenario(path)};
    *out = handle;
    return OBSLAB_OK;
  } catch (const std::exception& e) {
    return record_error(e);
  }
}

obslab_status obslab_scenario_parse(const char* json_text, obslab_scenario** out) {
  if (!json_text || !out) return OBSLAB_ERR_VALIDATION;
  *out = nullptr;
  clear_error();
  try {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
      obslab::throw_validation("SchemaError", std::string("scenario: ") + e.what());
    }
    auto* handle = new obslab_scenario{obslab::parse_scenario(doc)};
    *out = handle;
    return OBSLAB_OK;
  } catch (const std::exception& e) {
    return record_error(e);
  }
}

void obslab_scenario_free(obslab_scenario* scenario) { delete scenario; }

obslab_status obslab_run(const obslab_scenario* scenario, const char* command,
                         const char* options_json, obslab_result** out) {
  if (!scenario || !command || !out) return OBSLAB_ERR_VALIDATION;
  *out = nullptr;
  clear_error();
  try {
    obslab::RunOptions opt =
        obslab::parse_options(options_json ? std::string(options_json) : std::string());
    auto* handle = new obslab_result{obslab::dispatch(command, scenario->scenario, opt)};
    *out = handle;
    return OBSLAB_OK;
  } catch (const std::exception& e) {
    return record_error(e);
  }
}

const char* obslab_result_report_json(const obslab_result* result) {
  return result ? result->result.report_json.c_str() : "";
}

int obslab_result_csv_count(const obslab_result* result) {
  return result ? static_cast<int>(result->result.csvs.size()) : 0;
}

const char* obslab_result_csv_name(const obslab_result* result, int index) {
  if (!result || index < 0 || index >= obslab_result_csv_count(result)) return "";
  return result->result.csvs[index].first.c_str();
}

const char* obslab_result_csv_data(const obslab_result* result, int index) {
  if (!result || index < 0 || index >= obslab_result_csv_count(result)) return "";
  return result->result.csvs[index].second.c_str();
}

void obslab_result_free(obslab_result* result) { delete result; }

}  // extern "C"
