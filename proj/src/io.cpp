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
#include "shapeopt/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace shapeopt {

void write_history_csv(std::ostream& os, const OptHistory& history, bool deterministic_time) {
  os << "iter,objective,E_max,C_min,grad_norm,step_norm,step_scale,time_s\n";
  char buf[256];
  for (const auto& row : history.rows) {
    const double t = deterministic_time ? 0.0 : row.time_s;
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.6f\n", row.iter,
                  row.objective, row.e_max(), row.c_min, row.grad_norm, row.step_norm,
                  row.step_scale, t);
    os << buf;
  }
}

HistorySummary read_history_csv(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw Error(errc::io, "cannot open history file " + csv_path.string());
  HistorySummary summary;
  std::string line;
  if (!std::getline(in, line) || line.rfind("iter,", 0) != 0)
    throw Error(errc::io, "missing history header in " + csv_path.string());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8) throw Error(errc::io, "malformed history row in " + csv_path.string());
    HistoryRow row;
    row.iter = std::stoi(cells[0]);
    row.objective = std::stod(cells[1]);
    row.e_values = {std::stod(cells[2])};
    row.c_min = std::stod(cells[3]);
    row.grad_norm = std::stod(cells[4]);
    row.step_norm = std::stod(cells[5]);
    row.step_scale = std::stod(cells[6]);
    row.time_s = std::stod(cells[7]);
    summary.rows.push_back(std::move(row));
  }
  if (summary.rows.empty()) throw Error(errc::io, "empty history file " + csv_path.string());

  summary.total_time_s = summary.rows.back().time_s;
  summary.total_inner_iterations = 0;
  const auto sidecar = csv_path.parent_path() / "summary.json";
  if (std::filesystem::exists(sidecar)) {
    std::ifstream js(sidecar);
    nlohmann::json j;
    js >> j;
    summary.total_time_s = j.value("total_time_s", summary.total_time_s);
    summary.total_inner_iterations = j.value("total_inner_iterations", 0L);
    summary.termination = j.value("termination", std::string());
  }
  return summary;
}

void write_summary_json(std::ostream& os, const OptHistory& history, const std::string& algorithm,
                        uint64_t seed) {
  nlohmann::json j;
  j["algorithm"] = algorithm;
  j["seed"] = seed;
  j["iterations"] = history.steps_taken();
  j["termination"] = history.termination;
  j["total_time_s"] = history.total_time_s;
  j["total_inner_iterations"] = history.total_inner_iterations;
  if (!history.rows.empty()) {
    const auto& last = history.last();
    j["final_objective"] = last.objective;
    j["final_e_max"] = last.e_max();
    j["final_c_min"] = last.c_min;
    j["final_grad_norm"] = last.grad_norm;
    j["initial_objective"] = history.rows.front().objective;
  }
  j["final_p"] = std::vector<double>(history.final_p.begin(), history.final_p.end());
  os << j.dump(2) << "\n";
}

void write_piggyback_csv(std::ostream& os, const std::vector<PiggybackTraceRow>& trace) {
  os << "outer,inner,primal_residual,adjoint_residual\n";
  char buf[160];
  for (const auto& row : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g\n", row.outer, row.inner,
                  row.primal_residual, row.adjoint_residual);
    os << buf;
  }
}

std::vector<ReportRow> build_report(const std::vector<std::filesystem::path>& history_paths,
                                    double baseline_time_s, long baseline_iters) {
  if (history_paths.empty()) throw Error(errc::domain, "report needs at least one history file");
  std::vector<ReportRow> rows;
  for (const auto& path : history_paths) {
    const HistorySummary summary = read_history_csv(path);
    ReportRow row;
    row.label = path.parent_path().filename().empty() ? path.string()
                                                      : path.parent_path().filename().string();
    const auto& last = summary.rows.back();
    row.final_objective = last.objective;
    row.e_max = last.e_max();
    row.c_min = last.c_min;
    row.iterations = static_cast<int>(summary.rows.size()) - 1;
    row.time_s = summary.total_time_s;
    row.inner_iterations = summary.total_inner_iterations;
    const auto ret = retardation(std::max(row.time_s, 0.0), baseline_time_s,
                                 std::max(row.inner_iterations, 0L), baseline_iters);
    row.time_retardation = ret.time_factor;
    row.iter_retardation = ret.iter_factor;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows) {
  os << "run,final_objective,E_max,C_min,iterations,time_s,inner_iterations,"
        "time_retardation,iter_retardation\n";
  char buf[320];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%d,%.6f,%ld,%.6f,%.6f\n",
                  r.label.c_str(), r.final_objective, r.e_max, r.c_min, r.iterations, r.time_s,
                  r.inner_iterations, r.time_retardation, r.iter_retardation);
    os << buf;
  }
}

void write_report_text(std::ostream& os, const std::vector<ReportRow>& rows) {
  char buf[320];
  std::snprintf(buf, sizeof(buf), "%-24s %14s %10s %10s %6s %12s %10s %10s\n", "run", "objective",
                "E_max", "C_min", "iters", "time_s", "ret_time", "ret_iter");
  os << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-24s %14.6e %10.2e %10.2e %6d %12.3f %10.2f %10.2f\n",
                  r.label.c_str(), r.final_objective, r.e_max, r.c_min, r.iterations, r.time_s,
                  r.time_retardation, r.iter_retardation);
    os << buf;
  }
}

}  // namespace shapeopt
