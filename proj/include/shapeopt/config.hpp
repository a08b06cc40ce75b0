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
#include <optional>

#include "shapeopt/qp.hpp"
#include "shapeopt/sobolev.hpp"

namespace shapeopt {

struct ProblemConfig {
  int n_s = 32;
  int layers = 4;
  double outer_radius = 3.0;
  double gamma = 1e-2;
  Vec2 source = Vec2(0.5, 0.3);
  double source_width = 0.8;
  int n_targets = 8;          // tracking points, evenly spread over the surface
  double target_scale = 1.1;  // u_target = scale * u_baseline + offset
  double target_offset = 0.05;
  std::optional<double> area_target;  // unset: baseline area
  std::optional<double> min_radius;   // unset: no radius constraints
  int radius_stride = 1;
  std::optional<double> omega;  // unset: row-sum bound
};

enum class ParamKind { hicks_henne, ffd, nonlinear_radial };

struct ParamConfig {
  ParamKind kind = ParamKind::hicks_henne;
  // hicks_henne: either a bump count (peaks spread evenly, both sides) or
  // an explicit peak list (each peak paired upper/lower)
  int n_bumps = 12;
  std::vector<double> peaks;
  double exponent = 3.0;
  // ffd: lattice over the inflated baseline bounding box, or explicit extents
  int ffd_nx = 4;
  int ffd_ny = 4;
  double ffd_margin = 0.3;
  std::vector<double> ffd_box;  // x_min x_max y_min y_max when given
  int ffd_axis = 1;
  // nonlinear_radial
  int n_basis = 8;
  double alpha = 0.0;
  int first_harmonic = 1;
};

struct SmoothingConfig {
  double eps1 = 1.0;
  double eps2 = 0.0625;
  double eps3 = 0.0;
  SmoothingFormulation formulation = SmoothingFormulation::surface;
  bool identity_as_matrix = false;
};

enum class Algorithm { sqp_eq, sqp_mixed, grad_desc, oneshot, oneshot_constrained };

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::sqp_mixed;
  double tol = 1e-8;
  int max_iter = 100;
  double solve_tol = 1e-12;
  int solve_max_iter = 200000;
  double step = 0.05;  // grad_desc
  int inner_steps = 10;
  double max_design_update = 5e-3;
  bool adjoint_carryover = true;
  double step_cap = std::numeric_limits<double>::infinity();
  RegularizeMode reg_mode = RegularizeMode::fixed;
  double reg_c = 0.0;
};

struct OutputConfig {
  std::string directory = "out";
  bool dump_mesh = true;
  bool dump_operators = false;
  bool deterministic_time = true;
};

struct RunConfig {
  ProblemConfig problem;
  ParamConfig parameterization;
  SmoothingConfig smoothing;
  OptimizerConfig optimizer;
  OutputConfig output;
  uint64_t seed = 42;
  std::vector<double> p0;  // empty: zero start
  std::string preset;
};

/// Built-in presets. Unknown names raise a ConfigError on field "preset".
std::vector<std::string> preset_names();
RunConfig preset_config(const std::string& name);

/// Parses INI-style key/value text with [sections], or JSON when the first
/// non-space character is '{'. Unknown keys and malformed values raise
/// ConfigError carrying the dotted field path. The SHAPEOPT_OUTPUT_DIR
/// environment variable overrides output.directory.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::filesystem::path& path);

}  // namespace shapeopt
