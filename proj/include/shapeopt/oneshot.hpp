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

#include "shapeopt/sqp.hpp"

namespace shapeopt {

struct OneShotConfig {
  int inner_steps = 10;         // piggyback steps per design update
  double max_design_update = std::numeric_limits<double>::infinity();  // |v|_inf bound
  int outer_iters = 200;
  double eps1 = 1.0, eps2 = 0.0625, eps3 = 0.0;
  bool adjoint_carryover = true;  // keep (u, lambda) across design updates
  double tol = 0.0;               // > 0 enables early termination on the KKT error
  double divergence_factor = 10.0;
  SmoothingFormulation formulation = SmoothingFormulation::surface;
};

struct PiggybackTraceRow {
  int outer = 0;
  int inner = 0;
  double primal_residual = 0.0;
  double adjoint_residual = 0.0;
};

struct OneShotResult {
  OptHistory history;
  std::vector<PiggybackTraceRow> trace;
};

/// Unconstrained multistep One Shot: J piggyback steps, inexact reduced
/// gradient, preconditioned update B v = -dp, step limiter.
OneShotResult oneshot_multistep(const ModelProblem& problem, const Parameterization& param,
                                const MeshDeformer& deformer, const Eigen::VectorXd& p0,
                                const OneShotConfig& config, const BBuilder* b_override = nullptr);

/// Constrained variant: the piggyback advances one adjoint per functional
/// and the design update solves the mixed QP.
OneShotResult oneshot_constrained(const ModelProblem& problem, const Parameterization& param,
                                  const MeshDeformer& deformer, const Eigen::VectorXd& p0,
                                  const OneShotConfig& config, const BBuilder* b_override = nullptr);

/// v scaled to the infinity-norm bound; direction preserved.
Eigen::VectorXd limit_step(const Eigen::VectorXd& v, double max_design_update);

struct RetardationReport {
  double time_optimization = 0.0;
  double time_single_solve = 0.0;
  double time_factor = 0.0;
  long iter_optimization = 0;
  long iter_single_solve = 0;
  double iter_factor = 0.0;
};

RetardationReport retardation(double time_optimization, double time_single_solve,
                              long iter_optimization, long iter_single_solve);

}  // namespace shapeopt
