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
#include "shapeopt/hessian.hpp"

#include <cmath>
#include <cstdio>

namespace shapeopt {

double reduced_objective(const ModelProblem& problem, const Parameterization& param,
                         const MeshDeformer& deformer, const Eigen::VectorXd& p, double solve_tol,
                         int max_iter) {
  const Field m = apply_full(param, deformer, p);
  const auto state = solve_state(problem, m, solve_tol, max_iter);
  return problem.objective().value(state.u, m);
}

Eigen::VectorXd reduced_objective_gradient(const ModelProblem& problem,
                                           const Parameterization& param,
                                           const MeshDeformer& deformer, const Eigen::VectorXd& p,
                                           double solve_tol, int max_iter) {
  const Field m = apply_full(param, deformer, p);
  const auto state = solve_state(problem, m, solve_tol, max_iter);
  const auto adjoint =
      solve_adjoint(problem, problem.objective(), state.u, m, solve_tol, max_iter);
  return reduced_row(problem, param, deformer, p, m, problem.objective(), state.u, adjoint.lambda);
}

FdHessian reduced_hessian_fd(const ModelProblem& problem, const Parameterization& param,
                             const MeshDeformer& deformer, const Eigen::VectorXd& p,
                             const FdSettings& fd) {
  if (fd.step <= 0.0) throw Error(errc::domain, "FD step must be positive");
  const int np = param.n_params();
  Eigen::MatrixXd h(np, np);
  Eigen::VectorXd q = p;
  for (int j = 0; j < np; ++j) {
    q[j] = p[j] + fd.step;
    const Eigen::VectorXd gp =
        reduced_objective_gradient(problem, param, deformer, q, fd.solve_tol, fd.max_iter);
    q[j] = p[j] - fd.step;
    const Eigen::VectorXd gm =
        reduced_objective_gradient(problem, param, deformer, q, fd.solve_tol, fd.max_iter);
    q[j] = p[j];
    h.col(j) = (gp - gm) / (2.0 * fd.step);
  }
  FdHessian out;
  out.symmetry_defect = (h - h.transpose()).cwiseAbs().maxCoeff();
  out.h = 0.5 * (h + h.transpose());
  return out;
}

Field reduced_mesh_covector(const ModelProblem& problem, const Field& m, double solve_tol,
                            int max_iter) {
  const auto state = solve_state(problem, m, solve_tol, max_iter);
  const auto adjoint =
      solve_adjoint(problem, problem.objective(), state.u, m, solve_tol, max_iter);
  return mesh_lagrangian_covector(problem, problem.objective(), state.u, m, adjoint.lambda);
}

FdHessian mesh_level_hessian_fd(const ModelProblem& problem, const Field& m, const FdSettings& fd) {
  const int dofs = 2 * static_cast<int>(m.size());
  if (dofs > 400)
    throw Error(errc::size_guard, "mesh-level FD Hessian is limited to 2 n_m <= 400, got " +
                                      std::to_string(dofs));
  Eigen::MatrixXd h(dofs, dofs);
  Field q = m;
  for (int j = 0; j < dofs; ++j) {
    const int node = j / 2, comp = j % 2;
    q[node][comp] = m[node][comp] + fd.step;
    const Eigen::VectorXd gp = flatten(reduced_mesh_covector(problem, q, fd.solve_tol, fd.max_iter));
    q[node][comp] = m[node][comp] - fd.step;
    const Eigen::VectorXd gm = flatten(reduced_mesh_covector(problem, q, fd.solve_tol, fd.max_iter));
    q[node][comp] = m[node][comp];
    h.col(j) = (gp - gm) / (2.0 * fd.step);
  }
  FdHessian out;
  out.symmetry_defect = (h - h.transpose()).cwiseAbs().maxCoeff();
  out.h = 0.5 * (h + h.transpose());
  return out;
}

FaaDiBrunoResult faa_di_bruno_assemble(const Parameterization& param, const MeshDeformer& deformer,
                                       const Eigen::VectorXd& p, const Eigen::MatrixXd& h_mm,
                                       const Field& w) {
  const int np = param.n_params();
  if (h_mm.rows() != 2 * deformer.n_volume() || h_mm.cols() != h_mm.rows())
    throw Error(errc::dimension_mismatch, "mesh Hessian size mismatch");
  if (static_cast<int>(w.size()) != deformer.n_volume())
    throw Error(errc::dimension_mismatch, "mesh covector size mismatch");

  const Eigen::MatrixXd js = param.surface_jacobian(p);
  const Eigen::MatrixXd jm = full_jacobian(param, deformer, p);

  FaaDiBrunoResult res;
  res.term1 = jm.transpose() * h_mm * jm;
  // sum_k w_k D_pp M_k = (pullback of w to the surface) against D_pp S
  //                      + sum_k w_k J_S^T D_ss V_k J_S.
  const Field ws = deformer.vjp(w);
  res.term2 = param.second_derivative_contraction(p, ws) + deformer.cross_hessian_contraction(w, js);
  res.h = res.term1 + res.term2;
  res.h = 0.5 * (res.h + res.h.transpose());
  if (np != res.h.rows()) throw Error(errc::internal, "parameter dimension mismatch");
  return res;
}

HessianReport hessian_report(const ModelProblem& problem, const Parameterization& param,
                             const MeshDeformer& deformer, const Eigen::VectorXd& p,
                             const FdSettings& fd) {
  const Field m = apply_full(param, deformer, p);
  const FdHessian h_fd = reduced_hessian_fd(problem, param, deformer, p, fd);
  const FdHessian h_mm = mesh_level_hessian_fd(problem, m, fd);
  const Field w = reduced_mesh_covector(problem, m, fd.solve_tol, fd.max_iter);
  const FaaDiBrunoResult fdb = faa_di_bruno_assemble(param, deformer, p, h_mm.h, w);

  HessianReport rep;
  rep.h_fd = h_fd.h;
  rep.h_fdb = fdb.h;
  rep.term1_norm = fdb.term1.cwiseAbs().maxCoeff();
  rep.term2_norm = fdb.term2.cwiseAbs().maxCoeff();
  rep.max_abs_error = (rep.h_fdb - rep.h_fd).cwiseAbs().maxCoeff();
  const double scale = std::max(rep.h_fd.cwiseAbs().maxCoeff(), 1e-300);
  rep.max_rel_error = rep.max_abs_error / scale;
  rep.symmetry_defect = h_fd.symmetry_defect;
  return rep;
}

void write_hessian_report(std::ostream& os, const HessianReport& report) {
  char buf[160];
  os << "hessian comparison report\n";
  std::snprintf(buf, sizeof(buf), "  dim            %ld x %ld\n", long(report.h_fd.rows()),
                long(report.h_fd.cols()));
  os << buf;
  std::snprintf(buf, sizeof(buf), "  term1 max      %.6e\n", report.term1_norm);
  os << buf;
  std::snprintf(buf, sizeof(buf), "  term2 max      %.6e\n", report.term2_norm);
  os << buf;
  std::snprintf(buf, sizeof(buf), "  max abs error  %.6e\n", report.max_abs_error);
  os << buf;
  std::snprintf(buf, sizeof(buf), "  max rel error  %.6e\n", report.max_rel_error);
  os << buf;
  std::snprintf(buf, sizeof(buf), "  fd symmetry    %.6e\n", report.symmetry_defect);
  os << buf;
}

}  // namespace shapeopt
