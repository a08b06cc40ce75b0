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

#include <functional>
#include <limits>

#include "shapeopt/hessian.hpp"
#include "shapeopt/qp.hpp"

namespace shapeopt {

struct HistoryRow {
  int iter = 0;
  double objective = 0.0;
  std::vector<double> e_values;
  double c_min = std::numeric_limits<double>::infinity();
  double grad_norm = 0.0;  // |D_p L|_inf with the current multiplier estimates
  double step_norm = 0.0;  // |v|_inf before scaling
  double step_scale = 1.0;
  double time_s = 0.0;

  double e_max() const {
    double m = 0.0;
    for (double e : e_values) m = std::max(m, std::abs(e));
    return m;
  }
};

struct OptHistory {
  std::vector<HistoryRow> rows;
  std::string termination;  // "tol", "max_iter"
  Eigen::VectorXd final_p;
  double total_time_s = 0.0;
  long total_inner_iterations = 0;  // primal + adjoint fixed-point steps

  int steps_taken() const { return rows.empty() ? 0 : static_cast<int>(rows.size()) - 1; }
  const HistoryRow& last() const { return rows.back(); }
};

/// Builds the QP Hessian approximation at the current design.
using BBuilder = std::function<Eigen::MatrixXd(const Eigen::VectorXd& p)>;

struct SqpOptions {
  double tol = 1e-8;
  int max_iter = 200;
  double solve_tol = 1e-12;        // inner fixed-point tolerance
  int solve_max_iter = 200000;
  double step_cap = std::numeric_limits<double>::infinity();  // |v|_inf cap
  RegularizeMode reg_mode = RegularizeMode::fixed;
  double reg_c = 0.0;
  double qp_tol = kQpTol;
};

/// Hybrid-operator builder over the current deformed surface; the result
/// is cached when the parameterization is linear (constant Jacobian).
BBuilder make_hybrid_b_builder(const Parameterization& param, const MeshDeformer& deformer,
                               double eps1, double eps2, double eps3,
                               SmoothingFormulation formulation, bool identity_as_matrix = false,
                               const VolumeMesh* volume_template = nullptr);

BBuilder make_identity_b_builder(int n_params, double scale = 1.0);

OptHistory sqp_equality(const ModelProblem& problem, const Parameterization& param,
                        const MeshDeformer& deformer, const Eigen::VectorXd& p0,
                        const BBuilder& b_builder, const SqpOptions& options);

OptHistory sqp_mixed(const ModelProblem& problem, const Parameterization& param,
                     const MeshDeformer& deformer, const Eigen::VectorXd& p0,
                     const BBuilder& b_builder, const SqpOptions& options);

/// B = (1/step) I pathway through the mixed SQP machinery; the projection
/// to the linearized constraints is realized by the QP.
OptHistory gradient_descent_projected(const ModelProblem& problem, const Parameterization& param,
                                      const MeshDeformer& deformer, const Eigen::VectorXd& p0,
                                      double step, const SqpOptions& options);

/// Reduced constraint data at a solved state: values and Jacobian rows of
/// every equality and inequality functional.
struct ReducedConstraints {
  Eigen::VectorXd e;
  Eigen::MatrixXd je;
  Eigen::VectorXd c;
  Eigen::MatrixXd jc;
};

/// Rows are computed exactly like the reduced objective gradient, one
/// adjoint solve per state-dependent functional (geometric functionals
/// have zero adjoints and skip the solve).
ReducedConstraints constraint_values_and_jacobians(const ModelProblem& problem,
                                                   const Parameterization& param,
                                                   const MeshDeformer& deformer,
                                                   const Eigen::VectorXd& p, const Field& m,
                                                   const Eigen::VectorXd& u, double solve_tol,
                                                   int solve_max_iter);

}  // namespace shapeopt
