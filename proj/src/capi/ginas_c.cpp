// Copyright 2026 The ginas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ginas/ginas.h"

#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "core/error.hpp"
#include "harness/experiment.hpp"

struct ginas_config {
  ginas::ExperimentConfig config;
  std::string scratch;
};

struct ginas_report {
  ginas::Report report;
  std::string text;
};

namespace {

thread_local std::string g_last_error;

ginas_status FromCode(ginas::ErrorCode code) {
  switch (code) {
    case ginas::ErrorCode::kInvalidArgument: return GINAS_ERR_INVALID_ARGUMENT;
    case ginas::ErrorCode::kShapeMismatch: return GINAS_ERR_SHAPE_MISMATCH;
    case ginas::ErrorCode::kDomain: return GINAS_ERR_DOMAIN;
    case ginas::ErrorCode::kIo: return GINAS_ERR_IO;
    case ginas::ErrorCode::kNumerical: return GINAS_ERR_NUMERICAL;
    case ginas::ErrorCode::kOutOfRange: return GINAS_ERR_OUT_OF_RANGE;
  }
  return GINAS_ERR_INTERNAL;
}

template <typename F>
ginas_status Guard(F&& f) {
  g_last_error.clear();
  try {
    return f();
  } catch (const ginas::Error& e) {
    g_last_error = e.what();
    return FromCode(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return GINAS_ERR_INTERNAL;
}

ginas_status NullArg(const char* what) {
  g_last_error = std::string(what) + " must not be NULL";
  return GINAS_ERR_INVALID_ARGUMENT;
}

ginas_report* Wrap(ginas::Report report) {
  auto* r = new ginas_report{std::move(report), {}};
  r->text = r->report.ToText();
  return r;
}

}  // namespace

extern "C" {

const char* ginas_version(void) { return "0.1.0"; }

const char* ginas_status_name(ginas_status status) {
  switch (status) {
    case GINAS_OK: return "ok";
    case GINAS_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case GINAS_ERR_SHAPE_MISMATCH: return "shape_mismatch";
    case GINAS_ERR_DOMAIN: return "domain";
    case GINAS_ERR_IO: return "io";
    case GINAS_ERR_NUMERICAL: return "numerical";
    case GINAS_ERR_OUT_OF_RANGE: return "out_of_range";
    case GINAS_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* ginas_last_error(void) { return g_last_error.c_str(); }

ginas_status ginas_config_create(ginas_config** out) {
  if (out == nullptr) return NullArg("out");
  return Guard([&] {
    *out = new ginas_config();
    return GINAS_OK;
  });
}

void ginas_config_destroy(ginas_config* config) { delete config; }

ginas_status ginas_config_set(ginas_config* config, const char* key, const char* value) {
  if (config == nullptr || key == nullptr || value == nullptr) return NullArg("config, key and value");
  return Guard([&] {
    config->config.Set(key, value);
    return GINAS_OK;
  });
}

ginas_status ginas_config_get(const ginas_config* config, const char* key, const char** value) {
  if (config == nullptr || key == nullptr || value == nullptr) return NullArg("config, key and value");
  return Guard([&] {
    auto* mut = const_cast<ginas_config*>(config);
    mut->scratch = config->config.Get(key);
    *value = mut->scratch.c_str();
    return GINAS_OK;
  });
}

ginas_status ginas_config_load_report(ginas_config* config, const char* path) {
  if (config == nullptr || path == nullptr) return NullArg("config and path");
  return Guard([&] {
    std::ifstream in(path);
    ginas::Require(static_cast<bool>(in), ginas::ErrorCode::kIo, std::string("cannot open ") + path);
    std::stringstream ss;
    ss << in.rdbuf();
    config->config = ginas::ExperimentConfig::FromReport(ss.str());
    return GINAS_OK;
  });
}

size_t ginas_config_key_count(void) { return ginas::ExperimentConfig::Keys().size(); }

const char* ginas_config_key_name(size_t index) {
  const auto& keys = ginas::ExperimentConfig::Keys();
  return index < keys.size() ? keys[index].key : nullptr;
}

const char* ginas_config_key_help(size_t index) {
  const auto& keys = ginas::ExperimentConfig::Keys();
  return index < keys.size() ? keys[index].help : nullptr;
}

ginas_status ginas_run_attack(const ginas_config* config, ginas_report** out) {
  if (config == nullptr || out == nullptr) return NullArg("config and out");
  *out = nullptr;
  return Guard([&] {
    ginas::AttackOutcome r = ginas::RunAttack(config->config);
    *out = Wrap(std::move(r.report));
    if (r.ok) return GINAS_OK;
    g_last_error = (*out)->report.Get("error.message").value_or("attack failed");
    return FromCode(r.error_code);
  });
}

ginas_status ginas_run_search_diag(const ginas_config* config, ginas_report** out) {
  if (config == nullptr || out == nullptr) return NullArg("config and out");
  *out = nullptr;
  return Guard([&] {
    ginas::DiagnosticOutcome r = ginas::RunSearchDiagnostic(config->config);
    *out = Wrap(std::move(r.report));
    if (r.ok) return GINAS_OK;
    g_last_error = (*out)->report.Get("error.message").value_or("search diagnostic failed");
    return FromCode(r.error_code);
  });
}

ginas_status ginas_run_gradcheck(uint64_t seed, int instances, ginas_report** out) {
  if (out == nullptr) return NullArg("out");
  *out = nullptr;
  return Guard([&] {
    ginas::GradcheckOutcome r = ginas::RunGradcheck(seed, instances);
    const bool pass = r.first_order_max < 1e-6 && r.second_order_max < 1e-4;
    *out = Wrap(std::move(r.report));
    if (pass) return GINAS_OK;
    g_last_error = "gradient check exceeded tolerance";
    return GINAS_ERR_NUMERICAL;
  });
}

void ginas_report_destroy(ginas_report* report) { delete report; }

size_t ginas_report_size(const ginas_report* report) {
  return report == nullptr ? 0 : report->report.entries().size();
}

const char* ginas_report_key(const ginas_report* report, size_t index) {
  if (report == nullptr || index >= report->report.entries().size()) return nullptr;
  return report->report.entries()[index].first.c_str();
}

const char* ginas_report_value(const ginas_report* report, size_t index) {
  if (report == nullptr || index >= report->report.entries().size()) return nullptr;
  return report->report.entries()[index].second.c_str();
}

const char* ginas_report_get(const ginas_report* report, const char* key) {
  if (report == nullptr || key == nullptr) return nullptr;
  for (const auto& [k, v] : report->report.entries())
    if (k == key) return v.c_str();
  return nullptr;
}

ginas_status ginas_report_get_double(const ginas_report* report, const char* key, double* value) {
  if (report == nullptr || key == nullptr || value == nullptr) return NullArg("report, key and value");
  return Guard([&] {
    *value = report->report.GetDouble(key);
    return GINAS_OK;
  });
}

const char* ginas_report_text(const ginas_report* report) {
  return report == nullptr ? nullptr : report->text.c_str();
}

}  // extern "C"
