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
#include "shapeopt/deformation.hpp"

#include <cmath>

namespace shapeopt {

RadialBlendDeformer::RadialBlendDeformer(std::vector<double> layer_fractions, Field outer_nodes)
    : t_(std::move(layer_fractions)), outer_(std::move(outer_nodes)) {
  if (t_.size() < 2 || t_.front() != 0.0 || t_.back() != 1.0)
    throw Error(errc::invalid_mesh, "layer fractions must run from 0 to 1");
  for (size_t k = 1; k < t_.size(); ++k)
    if (t_[k] <= t_[k - 1])
      throw Error(errc::invalid_mesh, "layer fractions must be strictly increasing");
  if (outer_.empty()) throw Error(errc::invalid_mesh, "deformer needs outer nodes");
}

Field RadialBlendDeformer::deform(const Field& surface) const {
  if (static_cast<int>(surface.size()) != n_surface())
    throw Error(errc::dimension_mismatch, "surface size mismatch in deform");
  Field m(n_volume());
  const int ns = n_surface();
  for (size_t k = 0; k < t_.size(); ++k)
    for (int i = 0; i < ns; ++i)
      m[k * ns + i] = (1.0 - t_[k]) * surface[i] + t_[k] * outer_[i];
  return m;
}

Field RadialBlendDeformer::jvp(const Field& ds) const {
  if (static_cast<int>(ds.size()) != n_surface())
    throw Error(errc::dimension_mismatch, "surface size mismatch in deform_jvp");
  Field dm(n_volume());
  const int ns = n_surface();
  for (size_t k = 0; k < t_.size(); ++k)
    for (int i = 0; i < ns; ++i) dm[k * ns + i] = (1.0 - t_[k]) * ds[i];
  return dm;
}

Field RadialBlendDeformer::vjp(const Field& wm) const {
  if (static_cast<int>(wm.size()) != n_volume())
    throw Error(errc::dimension_mismatch, "volume covector size mismatch in deform_vjp");
  Field ws(n_surface(), Vec2::Zero());
  const int ns = n_surface();
  for (size_t k = 0; k < t_.size(); ++k)
    for (int i = 0; i < ns; ++i) ws[i] += (1.0 - t_[k]) * wm[k * ns + i];
  return ws;
}

Eigen::MatrixXd RadialBlendDeformer::cross_hessian_contraction(
    const Field& wm, const Eigen::MatrixXd& surface_jacobian) const {
  if (static_cast<int>(wm.size()) != n_volume())
    throw Error(errc::dimension_mismatch, "volume covector size mismatch");
  // Affine in s: D_ss V = 0 identically.
  const auto np = surface_jacobian.cols();
  return Eigen::MatrixXd::Zero(np, np);
}

std::pair<VolumeMesh, RadialBlendDeformer> build_volume(const SurfaceMesh& surface, int layers,
                                                        double outer_radius) {
  validate_mesh(surface, /*require_ccw=*/true);
  if (!surface.closed) throw Error(errc::invalid_mesh, "volume build needs a closed surface");
  if (layers < 1) throw Error(errc::invalid_mesh, "volume build needs at least one layer");
  const int ns = surface.n_nodes();
  double max_r = 0.0;
  for (const auto& x : surface.nodes) max_r = std::max(max_r, x.norm());
  if (outer_radius <= max_r)
    throw Error(errc::invalid_mesh, "outer radius must enclose the surface");

  std::vector<double> t(layers + 1);
  for (int k = 0; k <= layers; ++k) t[k] = static_cast<double>(k) / layers;

  Field outer(ns);
  for (int i = 0; i < ns; ++i) {
    const double theta = surface.baseline_coords[i];
    outer[i] = outer_radius * Vec2(std::cos(theta), std::sin(theta));
  }

  RadialBlendDeformer deformer(t, outer);

  VolumeMesh mesh;
  mesh.n_surface = ns;
  mesh.layer_fractions = t;
  mesh.nodes = deformer.deform(surface.nodes);
  for (int k = 0; k <= layers; ++k)
    for (int i = 0; i < ns; ++i) {
      mesh.edges.push_back({mesh.node_index(i, k), mesh.node_index((i + 1) % ns, k)});
      if (k < layers) mesh.edges.push_back({mesh.node_index(i, k), mesh.node_index(i, k + 1)});
    }
  return {std::move(mesh), std::move(deformer)};
}

Field full_jvp(const Parameterization& param, const MeshDeformer& deformer,
               const Eigen::VectorXd& p, const Eigen::VectorXd& dp) {
  return deformer.jvp(param.jvp(p, dp));
}

Eigen::VectorXd full_vjp(const Parameterization& param, const MeshDeformer& deformer,
                         const Eigen::VectorXd& p, const Field& wm) {
  return param.vjp(p, deformer.vjp(wm));
}

Field apply_full(const Parameterization& param, const MeshDeformer& deformer,
                 const Eigen::VectorXd& p) {
  return deformer.deform(param.apply(p).nodes);
}

Eigen::MatrixXd full_jacobian(const Parameterization& param, const MeshDeformer& deformer,
                              const Eigen::VectorXd& p) {
  const Eigen::MatrixXd js = param.surface_jacobian(p);
  Eigen::MatrixXd jm(2 * deformer.n_volume(), js.cols());
  for (Eigen::Index c = 0; c < js.cols(); ++c)
    jm.col(c) = flatten(deformer.jvp(unflatten(js.col(c))));
  return jm;
}

}  // namespace shapeopt
