/*
 * Copyright 2026 The shapeopt authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * Batch front end over the shared-library C API. Exit codes: 0 success,
 * 1 check/run failure, 2 usage or config parse error.
 */
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shapeopt/shapeopt_c.h"

namespace {

constexpr int kMsgLen = 1024;

int exit_code_of(int status) {
  switch (status) {
    case SOPT_OK:
      return 0;
    case SOPT_ERR_PARSE:
    case SOPT_ERR_USAGE:
      return 2;
    default:
      return 1;
  }
}

int cmd_run(const std::string& config_path) {
  char msg[kMsgLen] = {0};
  sopt_run* run = nullptr;
  int status = sopt_run_create(config_path.c_str(), &run, msg, kMsgLen);
  if (status != SOPT_OK) {
    std::fprintf(stderr, "config error: %s\n", msg);
    return exit_code_of(status);
  }
  status = sopt_run_execute(run, msg, kMsgLen);
  if (status != SOPT_OK) {
    std::fprintf(stderr, "run failed: %s\n", msg);
    sopt_run_destroy(run);
    return exit_code_of(status);
  }
  char outdir[kMsgLen] = {0};
  sopt_run_output_dir(run, outdir, kMsgLen);
  double objective = 0.0;
  int iterations = 0;
  sopt_run_final_objective(run, &objective);
  sopt_run_iterations(run, &iterations);
  std::printf("run complete: %d steps, final objective %.9e, artifacts in %s\n", iterations,
              objective, outdir);
  sopt_run_destroy(run);
  return 0;
}

int cmd_verify(const std::string& level, unsigned long long seed, const std::string& report_path) {
  char msg[kMsgLen] = {0};
  const int status = sopt_verify(level.c_str(), seed,
                                 report_path.empty() ? nullptr : report_path.c_str(), msg, kMsgLen);
  if (!report_path.empty()) std::printf("report written to %s\n", report_path.c_str());
  if (status == SOPT_OK) {
    std::printf("verify %s: all checks passed\n", level.c_str());
    return 0;
  }
  std::fprintf(stderr, "verify %s: %s\n", level.c_str(), msg);
  return exit_code_of(status);
}

int cmd_report(const std::vector<std::string>& files, double baseline_time, long baseline_iters,
               const std::string& out_csv, const std::string& out_text) {
  char msg[kMsgLen] = {0};
  std::vector<const char*> paths;
  for (const auto& f : files) paths.push_back(f.c_str());
  const int status =
      sopt_report(paths.data(), static_cast<int>(paths.size()), baseline_time, baseline_iters,
                  out_csv.empty() ? nullptr : out_csv.c_str(),
                  out_text.empty() ? nullptr : out_text.c_str(), msg, kMsgLen);
  if (status != SOPT_OK) {
    std::fprintf(stderr, "report failed: %s\n", msg);
    return exit_code_of(status);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shapeopt: parameterized shape optimization with Sobolev-smoothed Hessians"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "execute a configured optimization");
  run->add_option("config", config_path, "config file (INI-style text or JSON)")->required();

  std::string level;
  std::string report_path = "verify_report.txt";
  unsigned long long seed = 42;
  auto* verify = app.add_subcommand("verify", "run the derivative and operator check suites");
  verify->add_option("level", level, "gradient | hessian | operators | all")->required();
  verify->add_option("--seed", seed, "seed for random test vectors");
  verify->add_option("--report", report_path, "text report path (default verify_report.txt)");

  std::vector<std::string> files;
  double baseline_time = 0.0;
  long baseline_iters = 0;
  std::string out_csv = "report.csv", out_text;
  auto* report = app.add_subcommand("report", "summarize history files with retardation factors");
  report->add_option("files", files, "history CSV files")->required()->expected(-1);
  report->add_option("--baseline-time", baseline_time, "single state-solve wall time in seconds")
      ->required();
  report->add_option("--baseline-iters", baseline_iters, "single state-solve iteration count")
      ->required();
  report->add_option("--out-csv", out_csv, "CSV table path (default report.csv)");
  report->add_option("--out-text", out_text, "write the aligned text table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (run->parsed()) return cmd_run(config_path);
  if (verify->parsed()) return cmd_verify(level, seed, report_path);
  if (report->parsed()) return cmd_report(files, baseline_time, baseline_iters, out_csv, out_text);
  return 2;
}
