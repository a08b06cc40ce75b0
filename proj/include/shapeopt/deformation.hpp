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

#include "shapeopt/parameterization.hpp"

namespace shapeopt {

/// Surface-to-volume map V(s). The reduced-Hessian assembly calls
/// cross_hessian_contraction for the sum_k w_k J_S^T D_ss V_k J_S term of
/// the chained second derivative; maps that are affine in s return zero.
class MeshDeformer {
 public:
  virtual ~MeshDeformer() = default;

  virtual int n_surface() const = 0;
  virtual int n_volume() const = 0;

  virtual Field deform(const Field& surface) const = 0;
  virtual Field jvp(const Field& ds) const = 0;
  virtual Field vjp(const Field& wm) const = 0;

  virtual Eigen::MatrixXd cross_hessian_contraction(const Field& wm,
                                                    const Eigen::MatrixXd& surface_jacobian) const = 0;
};

/// Affine blend between the design surface and a fixed outer ring:
///   node(i, k) = (1 - t_k) s_i + t_k outer_i.
/// The Jacobian is constant (one diagonal block per node) and D_ss V = 0.
class RadialBlendDeformer : public MeshDeformer {
 public:
  RadialBlendDeformer(std::vector<double> layer_fractions, Field outer_nodes);

  int n_surface() const override { return static_cast<int>(outer_.size()); }
  int n_volume() const override { return n_surface() * static_cast<int>(t_.size()); }

  Field deform(const Field& surface) const override;
  Field jvp(const Field& ds) const override;
  Field vjp(const Field& wm) const override;
  Eigen::MatrixXd cross_hessian_contraction(const Field& wm,
                                            const Eigen::MatrixXd& surface_jacobian) const override;

  const std::vector<double>& layer_fractions() const { return t_; }
  const Field& outer_nodes() const { return outer_; }

 private:
  std::vector<double> t_;  // t_0 = 0 .. t_L = 1
  Field outer_;
};

/// Builds the layered annulus volume mesh over a closed surface: uniform
/// layer fractions k/L and outer nodes on the circle of outer_radius at
/// the surface baseline angles. Ring and radial edges are generated.
std::pair<VolumeMesh, RadialBlendDeformer> build_volume(const SurfaceMesh& surface, int layers,
                                                        double outer_radius);

// Composite products of M(p) = V(S(p)).
Field full_jvp(const Parameterization& param, const MeshDeformer& deformer,
               const Eigen::VectorXd& p, const Eigen::VectorXd& dp);
Eigen::VectorXd full_vjp(const Parameterization& param, const MeshDeformer& deformer,
                         const Eigen::VectorXd& p, const Field& wm);
Field apply_full(const Parameterization& param, const MeshDeformer& deformer,
                 const Eigen::VectorXd& p);
/// Dense D_p M(p) = D_s V * D_p S(p), 2 n_m x n_p.
Eigen::MatrixXd full_jacobian(const Parameterization& param, const MeshDeformer& deformer,
                              const Eigen::VectorXd& p);

}  // namespace shapeopt
