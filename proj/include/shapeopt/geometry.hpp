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

#include <array>
#include <ostream>

#include "shapeopt/common.hpp"

namespace shapeopt {

/// Design boundary: a polyline, closed (implicit wrap edge, no duplicated
/// node) or open. Each node carries the reference coordinate used by the
/// parameterizations: angle in [0, 2pi) for closed curves, chord fraction
/// in [0, 1] for open ones. Immutable by convention after construction.
struct SurfaceMesh {
  Field nodes;
  bool closed = true;
  std::vector<double> baseline_coords;

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_edges() const { return closed ? n_nodes() : n_nodes() - 1; }
  // Endpoint node indices of edge e.
  std::array<int, 2> edge(int e) const { return {e, (e + 1) % n_nodes()}; }
};

/// Checks node count, edge lengths, and (optionally) CCW orientation.
/// Throws errc::invalid_mesh on violation.
void validate_mesh(const SurfaceMesh& mesh, bool require_ccw = true);

SurfaceMesh unit_circle_surface(int n_s, double radius);

/// Open polyline along the x axis from 0 to 1 with n nodes; chord fractions
/// stored as baseline coordinates. Baseline for open Hicks-Henne curves.
SurfaceMesh open_chord_surface(int n_nodes);

double perimeter(const SurfaceMesh& mesh);
double signed_area(const SurfaceMesh& mesh);  // shoelace; CCW positive; closed only
std::vector<double> node_radius(const SurfaceMesh& mesh, const Vec2& center);

/// Outward unit vertex normals of a closed CCW polyline (mean of the two
/// adjacent edge normals, renormalized).
Field outward_normals(const SurfaceMesh& mesh);

// Free-node derivatives of the geometric functionals. Gradients are
// covectors indexed like the node list.
Field perimeter_gradient(const SurfaceMesh& mesh);
Eigen::MatrixXd perimeter_hessian(const SurfaceMesh& mesh);  // 2n x 2n, analytic
Field signed_area_gradient(const SurfaceMesh& mesh);
Field node_radius_gradient(const SurfaceMesh& mesh, const Vec2& center, int node);

/// Layered annulus-style mesh: surface ring first, interior rings, fixed
/// outer ring last. node(i, k) = nodes[k * n_surface + i].
struct VolumeMesh {
  Field nodes;
  std::vector<double> layer_fractions;       // t_0 = 0 (surface) .. t_L = 1 (outer)
  std::vector<std::array<int, 2>> edges;     // ring + radial connectivity
  int n_surface = 0;

  int n_layers() const { return static_cast<int>(layer_fractions.size()) - 1; }
  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int node_index(int i, int k) const { return k * n_surface + i; }
  int layer_of(int node) const { return node / n_surface; }
  bool is_outer(int node) const { return layer_of(node) == n_layers(); }
};

void dump_surface_csv(std::ostream& os, const SurfaceMesh& mesh);
void dump_volume_csv(std::ostream& os, const VolumeMesh& mesh);

}  // namespace shapeopt
