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
#include "shapeopt/sobolev.hpp"

#include <cmath>

namespace shapeopt {

SurfaceOperators assemble_surface_operators(const SurfaceMesh& mesh) {
  validate_mesh(mesh, /*require_ccw=*/false);
  const int n = mesh.n_nodes();
  SurfaceOperators ops;
  ops.n_nodes = n;
  ops.closed = mesh.closed;
  ops.mass = SymSparse(n);
  ops.stiffness = SymSparse(n);
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const auto [a, b] = mesh.edge(e);
    const double h = (mesh.nodes[b] - mesh.nodes[a]).norm();
    if (h <= 1e-14)
      throw Error(errc::assembly, "degenerate edge " + std::to_string(e) + " in FE assembly");
    // element mass h/6 [[2,1],[1,2]], element stiffness 1/h [[1,-1],[-1,1]]
    ops.mass.add(a, a, h / 3.0);
    ops.mass.add(b, b, h / 3.0);
    ops.mass.add(a, b, h / 6.0);
    ops.stiffness.add(a, a, 1.0 / h);
    ops.stiffness.add(b, b, 1.0 / h);
    ops.stiffness.add(a, b, -1.0 / h);
  }
  ops.mass.compress();
  ops.stiffness.compress();
  return ops;
}

namespace {

Eigen::MatrixXd smoothing_matrix(const SurfaceOperators& ops, double eps1, double eps2) {
  if (eps1 < 0.0 || eps2 < 0.0) throw Error(errc::domain, "smoothing weights must be >= 0");
  return eps1 * ops.mass.to_dense() + eps2 * ops.stiffness.to_dense();
}

}  // namespace

Eigen::VectorXd smooth_surface_field(const SurfaceOperators& ops, const Eigen::VectorXd& f,
                                     double eps1, double eps2) {
  if (eps1 <= 0.0) throw Error(errc::domain, "nodal smoothing needs eps1 > 0");
  return sym_solve(smoothing_matrix(ops, eps1, eps2), ops.mass.multiply(f));
}

Field smooth_surface_field(const SurfaceOperators& ops, const Field& f, double eps1, double eps2) {
  Eigen::VectorXd fx(ops.n_nodes), fy(ops.n_nodes);
  for (int i = 0; i < ops.n_nodes; ++i) {
    fx[i] = f[i][0];
    fy[i] = f[i][1];
  }
  const Eigen::VectorXd gx = smooth_surface_field(ops, fx, eps1, eps2);
  const Eigen::VectorXd gy = smooth_surface_field(ops, fy, eps1, eps2);
  Field g(f.size());
  for (int i = 0; i < ops.n_nodes; ++i) g[i] = Vec2(gx[i], gy[i]);
  return g;
}

Eigen::VectorXd reinterpret_gradient(const SurfaceOperators& ops, const Eigen::VectorXd& rhs,
                                     double eps1, double eps2) {
  if (eps1 <= 0.0 && eps2 <= 0.0)
    throw Error(errc::domain, "gradient reinterpretation needs eps1 > 0 or eps2 > 0");
  return sym_solve(smoothing_matrix(ops, eps1, eps2), rhs);
}

Field reinterpret_gradient(const SurfaceOperators& ops, const Field& rhs, double eps1,
                           double eps2) {
  Eigen::VectorXd rx(ops.n_nodes), ry(ops.n_nodes);
  for (int i = 0; i < ops.n_nodes; ++i) {
    rx[i] = rhs[i][0];
    ry[i] = rhs[i][1];
  }
  const Eigen::VectorXd gx = reinterpret_gradient(ops, rx, eps1, eps2);
  const Eigen::VectorXd gy = reinterpret_gradient(ops, ry, eps1, eps2);
  Field g(rhs.size());
  for (int i = 0; i < ops.n_nodes; ++i) g[i] = Vec2(gx[i], gy[i]);
  return g;
}

VolumeOperators assemble_volume_operators(const VolumeMesh& mesh) {
  const int n = mesh.n_nodes();
  const int ns = mesh.n_surface;
  const int layers = mesh.n_layers();
  SymSparse mass(n), stiffness(n);

  auto add_triangle = [&](int i0, int i1, int i2) {
    const Vec2& x0 = mesh.nodes[i0];
    const Vec2& x1 = mesh.nodes[i1];
    const Vec2& x2 = mesh.nodes[i2];
    const Vec2 e1 = x1 - x0, e2 = x2 - x0;
    const double det = e1[0] * e2[1] - e1[1] * e2[0];  // 2 * signed area
    if (det <= 1e-14) throw Error(errc::assembly, "degenerate volume cell");
    const double area = 0.5 * det;
    // P1 gradients: grad phi_a = perpendicular of the opposite edge / (2 area)
    const int idx[3] = {i0, i1, i2};
    const Vec2 x[3] = {x0, x1, x2};
    Vec2 grad[3];
    for (int a = 0; a < 3; ++a) {
      const Vec2 opp = x[(a + 2) % 3] - x[(a + 1) % 3];
      grad[a] = Vec2(-opp[1], opp[0]) / det;
    }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b <= a; ++b) {
        stiffness.add(idx[a], idx[b], area * grad[a].dot(grad[b]));
        mass.add(idx[a], idx[b], (a == b ? area / 6.0 : area / 12.0));
      }
  };

  // Annulus sector (i, k): counter-clockwise corner order is inner-i,
  // outer-i, outer-i+1, inner-i+1; split along the diagonal.
  for (int k = 0; k < layers; ++k)
    for (int i = 0; i < ns; ++i) {
      const int inner_a = mesh.node_index(i, k);
      const int outer_a = mesh.node_index(i, k + 1);
      const int outer_b = mesh.node_index((i + 1) % ns, k + 1);
      const int inner_b = mesh.node_index((i + 1) % ns, k);
      add_triangle(inner_a, outer_a, outer_b);
      add_triangle(inner_a, outer_b, inner_b);
    }
  mass.compress();
  stiffness.compress();

  VolumeOperators ops;
  ops.n_total = n;
  ops.full_mass = mass;
  ops.full_stiffness = stiffness;
  for (int i = 0; i < n; ++i)
    if (!mesh.is_outer(i)) ops.free_nodes.push_back(i);

  // Symmetric Dirichlet elimination: keep only free rows and columns.
  std::vector<int> full_to_free(n, -1);
  for (size_t r = 0; r < ops.free_nodes.size(); ++r) full_to_free[ops.free_nodes[r]] = int(r);
  const int nf = static_cast<int>(ops.free_nodes.size());
  ops.mass = SymSparse(nf);
  ops.stiffness = SymSparse(nf);
  for (const auto& t : mass.triplets()) {
    const int r = full_to_free[t.row], c = full_to_free[t.col];
    if (r >= 0 && c >= 0) ops.mass.add(r, c, t.value);
  }
  for (const auto& t : stiffness.triplets()) {
    const int r = full_to_free[t.row], c = full_to_free[t.col];
    if (r >= 0 && c >= 0) ops.stiffness.add(r, c, t.value);
  }
  ops.mass.compress();
  ops.stiffness.compress();
  return ops;
}

Eigen::VectorXd apply_componentwise(const SymSparse& op, const Eigen::VectorXd& flat_field) {
  const int n = op.dim();
  if (flat_field.size() != 2 * n)
    throw Error(errc::dimension_mismatch, "componentwise application needs a 2n vector");
  Eigen::VectorXd fx(n), fy(n);
  for (int i = 0; i < n; ++i) {
    fx[i] = flat_field[2 * i];
    fy[i] = flat_field[2 * i + 1];
  }
  const Eigen::VectorXd gx = op.multiply(fx);
  const Eigen::VectorXd gy = op.multiply(fy);
  Eigen::VectorXd out(2 * n);
  for (int i = 0; i < n; ++i) {
    out[2 * i] = gx[i];
    out[2 * i + 1] = gy[i];
  }
  return out;
}

HybridOperator assemble_hybrid_operator(const Parameterization& param, const MeshDeformer& deformer,
                                        const Eigen::VectorXd& p, const SurfaceOperators& surf_ops,
                                        double eps1, double eps2, double eps3,
                                        SmoothingFormulation formulation,
                                        const VolumeOperators* vol_ops, bool identity_as_matrix) {
  if (eps1 < 0.0 || eps2 < 0.0 || eps3 < 0.0)
    throw Error(errc::domain, "smoothing weights must be >= 0");
  if (eps1 == 0.0 && eps2 == 0.0 && eps3 == 0.0)
    throw Error(errc::domain, "at least one smoothing weight must be positive");

  const int np = param.n_params();
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(np, np);

  if (formulation == SmoothingFormulation::surface) {
    const Eigen::MatrixXd js = param.surface_jacobian(p);  // 2 n_s x n_p
    Eigen::MatrixXd smoothed(js.rows(), np);
    for (int c = 0; c < np; ++c) {
      Eigen::VectorXd col = Eigen::VectorXd::Zero(js.rows());
      if (eps1 > 0.0) {
        if (identity_as_matrix)
          col += eps1 * js.col(c);
        else
          col += eps1 * apply_componentwise(surf_ops.mass, js.col(c));
      }
      if (eps2 > 0.0) col += eps2 * apply_componentwise(surf_ops.stiffness, js.col(c));
      smoothed.col(c) = col;
    }
    b = js.transpose() * smoothed;
  } else {
    if (vol_ops == nullptr)
      throw Error(errc::domain, "volume formulation needs assembled volume operators");
    const Eigen::MatrixXd jm = full_jacobian(param, deformer, p);  // 2 n_m x n_p
    const int nf = static_cast<int>(vol_ops->free_nodes.size());
    // Restrict to non-outer nodes (zero Dirichlet rows/columns).
    Eigen::MatrixXd jr(2 * nf, np);
    for (int r = 0; r < nf; ++r) {
      jr.row(2 * r) = jm.row(2 * vol_ops->free_nodes[r]);
      jr.row(2 * r + 1) = jm.row(2 * vol_ops->free_nodes[r] + 1);
    }
    Eigen::MatrixXd smoothed(jr.rows(), np);
    for (int c = 0; c < np; ++c) {
      Eigen::VectorXd col = Eigen::VectorXd::Zero(jr.rows());
      if (eps1 > 0.0) {
        if (identity_as_matrix)
          col += eps1 * jr.col(c);
        else
          col += eps1 * apply_componentwise(vol_ops->mass, jr.col(c));
      }
      if (eps2 > 0.0) col += eps2 * apply_componentwise(vol_ops->stiffness, jr.col(c));
      smoothed.col(c) = col;
    }
    b = jr.transpose() * smoothed;
  }

  b += eps3 * Eigen::MatrixXd::Identity(np, np);
  b = 0.5 * (b + b.transpose());  // clear roundoff asymmetry

  HybridOperator op;
  op.b = std::move(b);
  op.eps1 = eps1;
  op.eps2 = eps2;
  op.eps3 = eps3;
  op.formulation = formulation;
  return op;
}

}  // namespace shapeopt
