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

// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <map>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "ginas/ginas.h"

namespace {

struct ConfigDeleter {
  void operator()(ginas_config* c) const { ginas_config_destroy(c); }
};
struct ReportDeleter {
  void operator()(ginas_report* r) const { ginas_report_destroy(r); }
};
using ConfigPtr = std::unique_ptr<ginas_config, ConfigDeleter>;
using ReportPtr = std::unique_ptr<ginas_report, ReportDeleter>;

std::string FlagName(const char* key) {
  std::string s = key;
  for (char& c : s)
    if (c == '_') c = '-';
  return "--" + s;
}

// One flag per configuration key, documented with its default.
std::map<std::string, std::string>& AddConfigFlags(CLI::App* app,
                                                   std::map<std::string, std::string>& values,
                                                   std::map<std::string, CLI::Option*>& opts) {
  ginas_config* defaults = nullptr;
  ginas_config_create(&defaults);
  ConfigPtr guard(defaults);
  for (size_t i = 0; i < ginas_config_key_count(); ++i) {
    const char* key = ginas_config_key_name(i);
    const char* def = "";
    ginas_config_get(defaults, key, &def);
    std::string help = ginas_config_key_help(i);
    if (*def != '\0') help += " [default: " + std::string(def) + "]";
    opts[key] = app->add_option(FlagName(key), values[key], help);
  }
  return values;
}

int Fail(const char* what, ginas_status s) {
  std::fprintf(stderr, "%s failed (%s): %s\n", what, ginas_status_name(s), ginas_last_error());
  return 1;
}

int RunPipeline(bool diag, const std::string& from_report,
                const std::map<std::string, std::string>& values,
                const std::map<std::string, CLI::Option*>& opts) {
  ginas_config* raw = nullptr;
  ginas_status s = ginas_config_create(&raw);
  if (s != GINAS_OK) return Fail("config", s);
  ConfigPtr config(raw);
  if (!from_report.empty()) {
    s = ginas_config_load_report(config.get(), from_report.c_str());
    if (s != GINAS_OK) return Fail("loading report", s);
  }
  for (const auto& [key, opt] : opts) {
    if (opt->count() == 0) continue;
    s = ginas_config_set(config.get(), key.c_str(), values.at(key).c_str());
    if (s != GINAS_OK) return Fail(("option " + FlagName(key.c_str())).c_str(), s);
  }
  ginas_report* rep = nullptr;
  s = diag ? ginas_run_search_diag(config.get(), &rep) : ginas_run_attack(config.get(), &rep);
  ReportPtr report(rep);
  if (report) std::fputs(ginas_report_text(report.get()), stdout);
  if (s != GINAS_OK) return Fail(diag ? "search-diag" : "attack", s);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient inversion with training-free decoder architecture search"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ginas_version());

  std::map<std::string, std::string> attack_values, diag_values;
  std::map<std::string, CLI::Option*> attack_opts, diag_opts;
  std::string attack_report, diag_report;

  CLI::App* attack = app.add_subcommand(
      "attack", "Reconstruct a private batch from its (optionally defended) gradients");
  AddConfigFlags(attack, attack_values, attack_opts);
  attack->add_option("--from-report", attack_report,
                     "Start from the config echoed in a report.txt; other flags override it")
      ->check(CLI::ExistingFile);

  CLI::App* diag = app.add_subcommand(
      "search-diag",
      "Recover every candidate and relate initial loss to final PSNR (Kendall tau)");
  AddConfigFlags(diag, diag_values, diag_opts);
  diag->add_option("--from-report", diag_report, "Start from the config echoed in a report.txt")
      ->check(CLI::ExistingFile);

  uint64_t gc_seed = 0;
  int gc_instances = 20;
  CLI::App* gradcheck = app.add_subcommand(
      "gradcheck", "Finite-difference checks of first- and second-order gradients");
  gradcheck->add_option("--seed", gc_seed, "Master seed")->capture_default_str();
  gradcheck->add_option("--instances", gc_instances, "Random instances")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  if (attack->parsed()) return RunPipeline(false, attack_report, attack_values, attack_opts);
  if (diag->parsed()) return RunPipeline(true, diag_report, diag_values, diag_opts);
  if (gradcheck->parsed()) {
    ginas_report* rep = nullptr;
    const ginas_status s = ginas_run_gradcheck(gc_seed, gc_instances, &rep);
    ReportPtr report(rep);
    if (report) std::fputs(ginas_report_text(report.get()), stdout);
    if (s != GINAS_OK) return Fail("gradcheck", s);
  }
  return 0;
}
