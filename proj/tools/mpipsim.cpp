// Copyright 2026 The mpipsim Authors
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


// mpipsim: run MPIP scenarios from the command line.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mpip/mpip.h"

namespace {

int report(mpip_status st, const std::string& what) {
  std::fprintf(stderr, "mpipsim: %s: %s\n", what.c_str(), mpip_last_error());
  return st == MPIP_ERR_PARSE ? 2 : 1;
}

mpip_status load(const std::string& file, bool canned, mpip_scenario** out) {
  return canned ? mpip_scenario_load_canned(file.c_str(), out)
                : mpip_scenario_load_file(file.c_str(), out);
}

int cmd_run(const std::string& file, bool canned, std::optional<std::uint64_t> seed,
            const std::string& out_dir, bool quiet) {
  mpip_scenario* scn = nullptr;
  if (auto st = load(file, canned, &scn); st != MPIP_OK) return report(st, file);
  mpip_run* run = nullptr;
  auto st = mpip_run_scenario(scn, seed.has_value(), seed.value_or(0), &run);
  mpip_scenario_free(scn);
  if (st != MPIP_OK) return report(st, file);

  int rc = 0;
  if (!out_dir.empty()) {
    if (auto w = mpip_run_write_csv(run, out_dir.c_str()); w != MPIP_OK) rc = report(w, out_dir);
  }
  if (rc == 0 && !quiet) {
    char* summary = nullptr;
    if (auto s = mpip_run_summary(run, &summary); s != MPIP_OK) {
      rc = report(s, "summary");
    } else {
      std::printf("%s\n", summary);
      mpip_string_free(summary);
    }
  }
  mpip_run_free(run);
  return rc;
}

int cmd_validate(const std::string& file, bool canned) {
  mpip_scenario* scn = nullptr;
  if (auto st = load(file, canned, &scn); st != MPIP_OK) return report(st, file);
  mpip_scenario_free(scn);
  std::printf("%s: ok\n", file.c_str());
  return 0;
}

int cmd_list() {
  for (std::size_t i = 0; i < mpip_canned_count(); ++i) std::printf("%s\n", mpip_canned_name(i));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Userspace MPIP multipath simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mpip_version());

  std::string file;
  bool canned = false;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Run a scenario and print a JSON summary");
  run->add_option("scenario", file, "Scenario file, or canned name with --canned")->required();
  run->add_flag("--canned", canned, "Treat the argument as a built-in scenario name");
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--out", out_dir, "Write metrics.csv and events.csv here");
  run->add_flag("-q,--quiet", quiet, "Do not print the summary");

  auto* validate = app.add_subcommand("validate", "Parse and check a scenario");
  validate->add_option("scenario", file, "Scenario file, or canned name with --canned")
      ->required();
  validate->add_flag("--canned", canned, "Treat the argument as a built-in scenario name");

  app.add_subcommand("list-scenarios", "List built-in scenarios");

  CLI11_PARSE(app, argc, argv);

  if (app.got_subcommand("run")) return cmd_run(file, canned, seed, out_dir, quiet);
  if (app.got_subcommand("validate")) return cmd_validate(file, canned);
  return cmd_list();
}
