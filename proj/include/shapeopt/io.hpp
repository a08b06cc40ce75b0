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
#pragma once

#include <filesystem>

#include "shapeopt/oneshot.hpp"

namespace shapeopt {

/// History CSV schema: iter,objective,E_max,C_min,grad_norm,step_norm,step_scale,time_s.
/// With deterministic_time the time column is written as 0 so that repeated
/// runs of the same config produce byte-identical files; wall times always
/// live in the summary JSON.
void write_history_csv(std::ostream& os, const OptHistory& history, bool deterministic_time);

struct HistorySummary {
  std::vector<HistoryRow> rows;
  double total_time_s = 0.0;  // from the adjacent summary JSON when present
  long total_inner_iterations = 0;
  std::string termination;
};

HistorySummary read_history_csv(const std::filesystem::path& csv_path);

void write_summary_json(std::ostream& os, const OptHistory& history, const std::string& algorithm,
                        uint64_t seed);

void write_piggyback_csv(std::ostream& os, const std::vector<PiggybackTraceRow>& trace);

struct ReportRow {
  std::string label;
  double final_objective = 0.0;
  double e_max = 0.0;
  double c_min = 0.0;
  int iterations = 0;
  double time_s = 0.0;
  long inner_iterations = 0;
  double time_retardation = 0.0;
  double iter_retardation = 0.0;
};

/// Per-run terminal values and retardation factors against a baseline
/// single-solve cost.
std::vector<ReportRow> build_report(const std::vector<std::filesystem::path>& history_paths,
                                    double baseline_time_s, long baseline_iters);

void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows);
void write_report_text(std::ostream& os, const std::vector<ReportRow>& rows);

}  // namespace shapeopt
