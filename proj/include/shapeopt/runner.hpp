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

#include "shapeopt/config.hpp"
#include "shapeopt/io.hpp"

namespace shapeopt {

/// Everything a configured scenario needs: meshes, maps, and the problem.
struct Setup {
  SurfaceMesh surface;
  VolumeMesh volume;
  std::unique_ptr<RadialBlendDeformer> deformer;
  std::unique_ptr<Parameterization> param;
  std::unique_ptr<AnnulusBenchmark> problem;
  Eigen::VectorXd p0;
};

Setup build_setup(const RunConfig& config);

struct RunArtifacts {
  std::filesystem::path history_csv;
  std::filesystem::path summary_json;
  std::filesystem::path final_surface_csv;
  std::optional<std::filesystem::path> piggyback_csv;
  OptHistory history;
};

/// Runs the configured optimizer and writes the artifacts into the output
/// directory. Deterministic for a fixed config and seed.
RunArtifacts execute_run(const RunConfig& config);

enum class VerifyLevel { gradient, hessian, operators, all };

VerifyLevel parse_verify_level(const std::string& level);

struct VerifyCheck {
  std::string id;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  std::string appendix;  // serialized Hessian comparisons and operator dumps
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

/// Finite-difference-vs-adjoint, chained-Hessian, and operator-identity
/// suites on the built-in benchmark. Random test vectors are drawn from
/// the given seed.
VerifyReport run_verification(VerifyLevel level, uint64_t seed);

void write_verify_report(std::ostream& os, const VerifyReport& report);

}  // namespace shapeopt
