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
 */
#include "shapeopt/shapeopt_c.h"

#include <cstring>
#include <fstream>
#include <iostream>

#include "shapeopt/runner.hpp"

struct sopt_run {
  shapeopt::RunConfig config;
  std::optional<shapeopt::RunArtifacts> artifacts;
};

namespace {

void put_message(char* errmsg, int errmsg_len, const std::string& text) {
  if (errmsg == nullptr || errmsg_len <= 0) return;
  const int n = std::min<int>(errmsg_len - 1, static_cast<int>(text.size()));
  std::memcpy(errmsg, text.data(), n);
  errmsg[n] = '\0';
}

int status_of(const shapeopt::Error& e) {
  return e.code() == shapeopt::errc::config ? SOPT_ERR_PARSE : SOPT_ERR_RUNTIME;
}

template <typename Fn>
int guarded(char* errmsg, int errmsg_len, Fn&& fn) {
  try {
    return fn();
  } catch (const shapeopt::Error& e) {
    put_message(errmsg, errmsg_len, e.what());
    return status_of(e);
  } catch (const std::exception& e) {
    put_message(errmsg, errmsg_len, e.what());
    return SOPT_ERR_RUNTIME;
  } catch (...) {
    put_message(errmsg, errmsg_len, "unknown error");
    return SOPT_ERR_RUNTIME;
  }
}

}  // namespace

extern "C" {

const char* sopt_version(void) { return "0.1.0"; }

int sopt_run_create(const char* config_path, sopt_run** out, char* errmsg, int errmsg_len) {
  if (config_path == nullptr || out == nullptr) {
    put_message(errmsg, errmsg_len, "config_path and out must be non-NULL");
    return SOPT_ERR_USAGE;
  }
  *out = nullptr;
  return guarded(errmsg, errmsg_len, [&] {
    auto run = std::make_unique<sopt_run>();
    run->config = shapeopt::parse_config_file(config_path);
    *out = run.release();
    return SOPT_OK;
  });
}

int sopt_run_create_from_string(const char* config_text, sopt_run** out, char* errmsg,
                                int errmsg_len) {
  if (config_text == nullptr || out == nullptr) {
    put_message(errmsg, errmsg_len, "config_text and out must be non-NULL");
    return SOPT_ERR_USAGE;
  }
  *out = nullptr;
  return guarded(errmsg, errmsg_len, [&] {
    auto run = std::make_unique<sopt_run>();
    run->config = shapeopt::parse_config_text(config_text);
    *out = run.release();
    return SOPT_OK;
  });
}

int sopt_run_execute(sopt_run* run, char* errmsg, int errmsg_len) {
  if (run == nullptr) {
    put_message(errmsg, errmsg_len, "run handle must be non-NULL");
    return SOPT_ERR_USAGE;
  }
  return guarded(errmsg, errmsg_len, [&] {
    run->artifacts = shapeopt::execute_run(run->config);
    return SOPT_OK;
  });
}

int sopt_run_output_dir(const sopt_run* run, char* buf, int buf_len) {
  if (run == nullptr || buf == nullptr || buf_len <= 0) return SOPT_ERR_USAGE;
  put_message(buf, buf_len, run->config.output.directory);
  return SOPT_OK;
}

int sopt_run_final_objective(const sopt_run* run, double* out) {
  if (run == nullptr || out == nullptr || !run->artifacts ||
      run->artifacts->history.rows.empty())
    return SOPT_ERR_USAGE;
  *out = run->artifacts->history.last().objective;
  return SOPT_OK;
}

int sopt_run_iterations(const sopt_run* run, int* out) {
  if (run == nullptr || out == nullptr || !run->artifacts) return SOPT_ERR_USAGE;
  *out = run->artifacts->history.steps_taken();
  return SOPT_OK;
}

void sopt_run_destroy(sopt_run* run) { delete run; }

int sopt_verify(const char* level, unsigned long long seed, const char* report_path, char* errmsg,
                int errmsg_len) {
  if (level == nullptr) {
    put_message(errmsg, errmsg_len, "level must be non-NULL");
    return SOPT_ERR_USAGE;
  }
  return guarded(errmsg, errmsg_len, [&]() -> int {
    const auto lvl = shapeopt::parse_verify_level(level);
    const auto report = shapeopt::run_verification(lvl, seed);
    if (report_path != nullptr) {
      std::ofstream os(report_path);
      if (!os) throw shapeopt::Error(shapeopt::errc::io,
                                     std::string("cannot write report to ") + report_path);
      shapeopt::write_verify_report(os, report);
    }
    if (!report.all_pass()) {
      std::string failing;
      for (const auto& c : report.checks)
        if (!c.pass) failing += (failing.empty() ? "" : ", ") + c.id;
      put_message(errmsg, errmsg_len, "failed checks: " + failing);
      return SOPT_ERR_CHECK;
    }
    return SOPT_OK;
  });
}

int sopt_report(const char* const* history_paths, int n_paths, double baseline_time_s,
                long baseline_iters, const char* out_csv, const char* out_text, char* errmsg,
                int errmsg_len) {
  if (history_paths == nullptr || n_paths < 1) {
    put_message(errmsg, errmsg_len, "at least one history path is required");
    return SOPT_ERR_USAGE;
  }
  return guarded(errmsg, errmsg_len, [&] {
    std::vector<std::filesystem::path> paths;
    for (int i = 0; i < n_paths; ++i) {
      if (history_paths[i] == nullptr)
        throw shapeopt::Error(shapeopt::errc::domain, "history path must be non-NULL");
      paths.emplace_back(history_paths[i]);
    }
    const auto rows = shapeopt::build_report(paths, baseline_time_s, baseline_iters);
    if (out_csv != nullptr) {
      std::ofstream os(out_csv);
      if (!os)
        throw shapeopt::Error(shapeopt::errc::io, std::string("cannot write ") + out_csv);
      shapeopt::write_report_csv(os, rows);
    }
    if (out_text != nullptr) {
      std::ofstream os(out_text);
      if (!os)
        throw shapeopt::Error(shapeopt::errc::io, std::string("cannot write ") + out_text);
      shapeopt::write_report_text(os, rows);
    } else {
      shapeopt::write_report_text(std::cout, rows);
    }
    return SOPT_OK;
  });
}

}  // extern "C"
