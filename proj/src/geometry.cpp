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
#include "shapeopt/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace shapeopt {

namespace {
constexpr double kMinEdgeLength = 1e-14;
}

void validate_mesh(const SurfaceMesh& mesh, bool require_ccw) {
  const int n = mesh.n_nodes();
  if (mesh.closed && n < 3)
    throw Error(errc::invalid_mesh, "closed surface mesh needs at least 3 nodes, got " + std::to_string(n));
  if (!mesh.closed && n < 2)
    throw Error(errc::invalid_mesh, "open surface mesh needs at least 2 nodes, got " + std::to_string(n));
  if (!mesh.baseline_coords.empty() && static_cast<int>(mesh.baseline_coords.size()) != n)
    throw Error(errc::invalid_mesh, "baseline coordinate count does not match node count");
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const auto [a, b] = mesh.edge(e);
    if ((mesh.nodes[b] - mesh.nodes[a]).norm() <= kMinEdgeLength)
      throw Error(errc::invalid_mesh, "degenerate edge " + std::to_string(e));
  }
  if (mesh.closed && require_ccw && signed_area(mesh) <= 0.0)
    throw Error(errc::invalid_mesh, "closed surface mesh must be counter-clockwise");
}

SurfaceMesh unit_circle_surface(int n_s, double radius) {
  if (n_s < 3) throw Error(errc::invalid_mesh, "circle surface needs at least 3 nodes");
  if (radius <= 0.0) throw Error(errc::invalid_mesh, "circle radius must be positive");
  SurfaceMesh mesh;
  mesh.closed = true;
  mesh.nodes.resize(n_s);
  mesh.baseline_coords.resize(n_s);
  for (int i = 0; i < n_s; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / n_s;
    mesh.nodes[i] = radius * Vec2(std::cos(theta), std::sin(theta));
    mesh.baseline_coords[i] = theta;
  }
  return mesh;
}

SurfaceMesh open_chord_surface(int n_nodes) {
  if (n_nodes < 2) throw Error(errc::invalid_mesh, "open surface needs at least 2 nodes");
  SurfaceMesh mesh;
  mesh.closed = false;
  mesh.nodes.resize(n_nodes);
  mesh.baseline_coords.resize(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    const double x = static_cast<double>(i) / (n_nodes - 1);
    mesh.nodes[i] = Vec2(x, 0.0);
    mesh.baseline_coords[i] = x;
  }
  return mesh;
}

double perimeter(const SurfaceMesh& mesh) {
  double p = 0.0;
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const auto [a, b] = mesh.edge(e);
    p += (mesh.nodes[b] - mesh.nodes[a]).norm();
  }
  return p;
}

double signed_area(const SurfaceMesh& mesh) {
  if (!mesh.closed)
    throw Error(errc::unsupported, "signed_area is defined for closed curves only");
  double twice = 0.0;
  const int n = mesh.n_nodes();
  for (int i = 0; i < n; ++i) {
    const Vec2& a = mesh.nodes[i];
    const Vec2& b = mesh.nodes[(i + 1) % n];
    twice += a[0] * b[1] - b[0] * a[1];
  }
  return 0.5 * twice;
}

std::vector<double> node_radius(const SurfaceMesh& mesh, const Vec2& center) {
  std::vector<double> r(mesh.nodes.size());
  for (size_t i = 0; i < mesh.nodes.size(); ++i) r[i] = (mesh.nodes[i] - center).norm();
  return r;
}

Field outward_normals(const SurfaceMesh& mesh) {
  if (!mesh.closed)
    throw Error(errc::unsupported, "outward normals are defined for closed curves only");
  const int n = mesh.n_nodes();
  // Edge normals for a CCW curve: rotate the tangent by -90 degrees.
  Field edge_n(n);
  for (int e = 0; e < n; ++e) {
    const auto [a, b] = mesh.edge(e);
    const Vec2 t = (mesh.nodes[b] - mesh.nodes[a]).normalized();
    edge_n[e] = Vec2(t[1], -t[0]);
  }
  Field out(n);
  for (int i = 0; i < n; ++i) {
    const Vec2 v = edge_n[(i + n - 1) % n] + edge_n[i];
    const double len = v.norm();
    if (len <= kMinEdgeLength)
      throw Error(errc::invalid_mesh, "degenerate vertex normal at node " + std::to_string(i));
    out[i] = v / len;
  }
  return out;
}

Field perimeter_gradient(const SurfaceMesh& mesh) {
  const int n = mesh.n_nodes();
  Field g(n, Vec2::Zero());
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const auto [a, b] = mesh.edge(e);
    const Vec2 d = (mesh.nodes[b] - mesh.nodes[a]).normalized();
    g[a] -= d;
    g[b] += d;
  }
  return g;
}

Eigen::MatrixXd perimeter_hessian(const SurfaceMesh& mesh) {
  const int n = mesh.n_nodes();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const auto [a, b] = mesh.edge(e);
    const Vec2 d = mesh.nodes[b] - mesh.nodes[a];
    const double len = d.norm();
    const Vec2 u = d / len;
    // d^2 |d| / dd^2 = (I - u u^T) / |d|
    const Eigen::Matrix2d he = (Eigen::Matrix2d::Identity() - u * u.transpose()) / len;
    h.block<2, 2>(2 * a, 2 * a) += he;
    h.block<2, 2>(2 * b, 2 * b) += he;
    h.block<2, 2>(2 * a, 2 * b) -= he;
    h.block<2, 2>(2 * b, 2 * a) -= he;
  }
  return h;
}

Field signed_area_gradient(const SurfaceMesh& mesh) {
  if (!mesh.closed)
    throw Error(errc::unsupported, "signed_area is defined for closed curves only");
  const int n = mesh.n_nodes();
  Field g(n);
  for (int i = 0; i < n; ++i) {
    const Vec2& prev = mesh.nodes[(i + n - 1) % n];
    const Vec2& next = mesh.nodes[(i + 1) % n];
    g[i] = 0.5 * Vec2(next[1] - prev[1], prev[0] - next[0]);
  }
  return g;
}

Field node_radius_gradient(const SurfaceMesh& mesh, const Vec2& center, int node) {
  if (node < 0 || node >= mesh.n_nodes())
    throw Error(errc::dimension_mismatch, "node index out of range");
  Field g(mesh.nodes.size(), Vec2::Zero());
  const Vec2 d = mesh.nodes[node] - center;
  const double len = d.norm();
  if (len <= kMinEdgeLength)
    throw Error(errc::domain, "radius gradient undefined at the center");
  g[node] = d / len;
  return g;
}

void dump_surface_csv(std::ostream& os, const SurfaceMesh& mesh) {
  os << "index,x,y\n";
  char buf[96];
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", i, mesh.nodes[i][0], mesh.nodes[i][1]);
    os << buf;
  }
}

void dump_volume_csv(std::ostream& os, const VolumeMesh& mesh) {
  os << "index,x,y,layer\n";
  char buf[112];
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%d\n", i, mesh.nodes[i][0], mesh.nodes[i][1],
                  mesh.layer_of(i));
    os << buf;
  }
}

}  // namespace shapeopt
