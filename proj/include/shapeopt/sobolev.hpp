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

#include "shapeopt/model_problem.hpp"

namespace shapeopt {

/// Linear finite elements on the design polyline: consistent mass matrix
/// (2-point Gauss) and stiffness matrix of -Laplace-Beltrami. Constants lie
/// in the stiffness kernel; the mass entries sum to the perimeter.
struct SurfaceOperators {
  SymSparse mass;
  SymSparse stiffness;
  int n_nodes = 0;
  bool closed = true;
};

SurfaceOperators assemble_surface_operators(const SurfaceMesh& mesh);

/// Nodal-field smoothing: solves (eps1 M + eps2 K) g = M f.
Eigen::VectorXd smooth_surface_field(const SurfaceOperators& ops, const Eigen::VectorXd& f,
                                     double eps1, double eps2);
Field smooth_surface_field(const SurfaceOperators& ops, const Field& f, double eps1, double eps2);

/// Dual-vector smoothing: solves (eps1 M + eps2 K) g = rhs. This is the
/// pairing used in the optimization pipeline, where free-node gradients
/// arrive as assembled covectors.
Eigen::VectorXd reinterpret_gradient(const SurfaceOperators& ops, const Eigen::VectorXd& rhs,
                                     double eps1, double eps2);
Field reinterpret_gradient(const SurfaceOperators& ops, const Field& rhs, double eps1, double eps2);

/// Scalar mass/stiffness on the layered volume mesh (quad cells split into
/// linear triangles). mass/stiffness have the outer-layer degrees of
/// freedom eliminated symmetrically (zero Dirichlet); the full assemblies
/// are kept for diagnostics. free_nodes maps reduced to full indices.
struct VolumeOperators {
  SymSparse mass;
  SymSparse stiffness;
  SymSparse full_mass;
  SymSparse full_stiffness;
  std::vector<int> free_nodes;
  int n_total = 0;
};

VolumeOperators assemble_volume_operators(const VolumeMesh& mesh);

enum class SmoothingFormulation { surface, volume };

/// Parameter-space Hessian approximation
///   B = J^T (eps1 M + eps2 K) J + eps3 I_p
/// with J the surface map Jacobian (surface form) or the full mesh Jacobian
/// restricted to non-outer nodes (volume form), and M, K applied
/// componentwise. identity_as_matrix replaces the mass matrix by the
/// literal identity on the mesh degrees of freedom.
struct HybridOperator {
  Eigen::MatrixXd b;
  double eps1 = 0.0, eps2 = 0.0, eps3 = 0.0;
  SmoothingFormulation formulation = SmoothingFormulation::surface;
};

HybridOperator assemble_hybrid_operator(const Parameterization& param, const MeshDeformer& deformer,
                                        const Eigen::VectorXd& p, const SurfaceOperators& surf_ops,
                                        double eps1, double eps2, double eps3,
                                        SmoothingFormulation formulation,
                                        const VolumeOperators* vol_ops = nullptr,
                                        bool identity_as_matrix = false);

/// Componentwise application of a scalar node operator to a flattened
/// d-vector field (block duplication).
Eigen::VectorXd apply_componentwise(const SymSparse& op, const Eigen::VectorXd& flat_field);

}  // namespace shapeopt
