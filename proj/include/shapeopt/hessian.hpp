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

#include "shapeopt/sobolev.hpp"

namespace shapeopt {

struct FdHessian {
  Eigen::MatrixXd h;              // symmetrized
  double symmetry_defect = 0.0;   // max |h - h^T| before symmetrization
};

struct FdSettings {
  double step = 1e-4;
  double solve_tol = 1e-12;
  int max_iter = 200000;
};

/// Central differences of the reduced gradient over the parameters.
FdHessian reduced_hessian_fd(const ModelProblem& problem, const Parameterization& param,
                             const MeshDeformer& deformer, const Eigen::VectorXd& p,
                             const FdSettings& fd = {});

/// Fully reduced objective value F~(p) (state solved internally).
double reduced_objective(const ModelProblem& problem, const Parameterization& param,
                         const MeshDeformer& deformer, const Eigen::VectorXd& p,
                         double solve_tol = 1e-12, int max_iter = 200000);

/// Reduced gradient of the objective with state and adjoint solved
/// internally to solve_tol.
Eigen::VectorXd reduced_objective_gradient(const ModelProblem& problem,
                                           const Parameterization& param,
                                           const MeshDeformer& deformer, const Eigen::VectorXd& p,
                                           double solve_tol = 1e-12, int max_iter = 200000);

/// D_m L at the fully solved (u*, lambda*) for the given mesh coordinates.
Field reduced_mesh_covector(const ModelProblem& problem, const Field& m, double solve_tol = 1e-12,
                            int max_iter = 200000);

/// Central differences of the fully reduced free-node covector D_m L over
/// the mesh coordinates (adjoint re-solved per perturbation); symmetrized.
/// Guarded to small meshes (2 n_m <= 400).
FdHessian mesh_level_hessian_fd(const ModelProblem& problem, const Field& m,
                                const FdSettings& fd = {});

/// Chained second derivative of F~ = L(M(p)):
///   term1 = J_M^T H_mm J_M
///   term2 = sum-of-products second-derivative terms, reduced with
///           D_ss V from the deformer and D_pp S from the parameterization.
/// term2 is exactly zero for linear parameterizations over affine deformers.
struct FaaDiBrunoResult {
  Eigen::MatrixXd h;
  Eigen::MatrixXd term1;
  Eigen::MatrixXd term2;
};

FaaDiBrunoResult faa_di_bruno_assemble(const Parameterization& param, const MeshDeformer& deformer,
                                       const Eigen::VectorXd& p, const Eigen::MatrixXd& h_mm,
                                       const Field& w);

struct HessianReport {
  Eigen::MatrixXd h_fd;
  Eigen::MatrixXd h_fdb;
  double term1_norm = 0.0;
  double term2_norm = 0.0;
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;
  double symmetry_defect = 0.0;  // of the FD Hessian, before symmetrization
};

/// Runs both routes (FD oracle and chained assembly) and compares.
HessianReport hessian_report(const ModelProblem& problem, const Parameterization& param,
                             const MeshDeformer& deformer, const Eigen::VectorXd& p,
                             const FdSettings& fd = {});

void write_hessian_report(std::ostream& os, const HessianReport& report);

}  // namespace shapeopt
