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
#include "shapeopt/parameterization.hpp"

#include <cmath>
#include <numbers>

namespace shapeopt {

void Parameterization::check_param_dim(const Eigen::VectorXd& p) const {
  if (p.size() != n_params())
    throw Error(errc::dimension_mismatch,
                "parameter vector has size " + std::to_string(p.size()) + ", expected " +
                    std::to_string(n_params()));
}

void Parameterization::check_covector_dim(const Field& w) const {
  if (static_cast<int>(w.size()) != baseline().n_nodes())
    throw Error(errc::dimension_mismatch,
                "surface covector has " + std::to_string(w.size()) + " nodes, expected " +
                    std::to_string(baseline().n_nodes()));
}

Eigen::MatrixXd Parameterization::surface_jacobian(const Eigen::VectorXd& p) const {
  const int np = n_params();
  const int ns = baseline().n_nodes();
  Eigen::MatrixXd j(2 * ns, np);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(np);
  for (int c = 0; c < np; ++c) {
    e[c] = 1.0;
    j.col(c) = flatten(jvp(p, e));
    e[c] = 0.0;
  }
  return j;
}

double hicks_henne_bump(double x, double x_peak, double t) {
  if (!(x_peak > 0.0 && x_peak < 1.0))
    throw Error(errc::domain, "Hicks-Henne peak must lie strictly inside (0, 1)");
  if (x < 0.0 || x > 1.0)
    throw Error(errc::domain, "Hicks-Henne chord fraction must lie in [0, 1]");
  if (t < 1.0) throw Error(errc::domain, "Hicks-Henne exponent must be >= 1");
  if (x == 0.0 || x == 1.0) return 0.0;
  const double e = std::log(0.5) / std::log(x_peak);
  return std::pow(std::sin(std::numbers::pi * std::pow(x, e)), t);
}

namespace {

// Chord fraction of a closed-curve node at baseline angle theta.
double chord_of_angle(double theta) { return 0.5 * (1.0 - std::cos(theta)); }

}  // namespace

HicksHenneParam::HicksHenneParam(SurfaceMesh baseline, std::vector<HicksHenneBump> bumps,
                                 double exponent)
    : baseline_(std::move(baseline)), bumps_(std::move(bumps)), exponent_(exponent) {
  validate_mesh(baseline_, /*require_ccw=*/baseline_.closed);
  if (baseline_.baseline_coords.empty())
    throw Error(errc::invalid_mesh, "Hicks-Henne baseline needs stored reference coordinates");
  const int ns = baseline_.n_nodes();
  const int np = static_cast<int>(bumps_.size());
  if (np == 0) throw Error(errc::domain, "Hicks-Henne needs at least one bump");

  directions_.resize(ns);
  std::vector<double> chord(ns);
  std::vector<bool> upper(ns);
  if (baseline_.closed) {
    directions_ = outward_normals(baseline_);
    for (int i = 0; i < ns; ++i) {
      const double theta = baseline_.baseline_coords[i];
      chord[i] = chord_of_angle(theta);
      upper[i] = std::sin(theta) >= 0.0;
    }
  } else {
    directions_.assign(ns, Vec2(0.0, 1.0));
    for (int i = 0; i < ns; ++i) {
      chord[i] = baseline_.baseline_coords[i];
      upper[i] = true;  // unused: open curves take the side from the bump alone
    }
  }

  weights_ = Eigen::MatrixXd::Zero(ns, np);
  for (int j = 0; j < np; ++j) {
    const auto& b = bumps_[j];
    for (int i = 0; i < ns; ++i) {
      const double value = hicks_henne_bump(chord[i], b.peak, exponent_);
      if (baseline_.closed) {
        const bool on_side = (b.side == BumpSide::upper) ? upper[i] : !upper[i];
        if (on_side) weights_(i, j) = value;
      } else {
        weights_(i, j) = (b.side == BumpSide::upper) ? value : -value;
      }
    }
  }
}

SurfaceMesh HicksHenneParam::apply(const Eigen::VectorXd& p) const {
  check_param_dim(p);
  SurfaceMesh out = baseline_;
  const Eigen::VectorXd amp = weights_ * p;
  for (int i = 0; i < out.n_nodes(); ++i) out.nodes[i] += amp[i] * directions_[i];
  return out;
}

Field HicksHenneParam::jvp(const Eigen::VectorXd& p, const Eigen::VectorXd& dp) const {
  check_param_dim(p);
  check_param_dim(dp);
  const Eigen::VectorXd amp = weights_ * dp;
  Field out(baseline_.n_nodes());
  for (int i = 0; i < baseline_.n_nodes(); ++i) out[i] = amp[i] * directions_[i];
  return out;
}

Eigen::VectorXd HicksHenneParam::vjp(const Eigen::VectorXd& p, const Field& w) const {
  check_param_dim(p);
  check_covector_dim(w);
  Eigen::VectorXd a(baseline_.n_nodes());
  for (int i = 0; i < baseline_.n_nodes(); ++i) a[i] = w[i].dot(directions_[i]);
  return weights_.transpose() * a;
}

Eigen::MatrixXd HicksHenneParam::second_derivative_contraction(const Eigen::VectorXd& p,
                                                               const Field& w) const {
  check_param_dim(p);
  check_covector_dim(w);
  return Eigen::MatrixXd::Zero(n_params(), n_params());
}

std::vector<HicksHenneBump> make_symmetric_bump_set(int n_bumps) {
  if (n_bumps < 2 || n_bumps % 2 != 0)
    throw Error(errc::domain, "symmetric bump set needs an even count >= 2");
  const int half = n_bumps / 2;
  std::vector<HicksHenneBump> bumps;
  bumps.reserve(n_bumps);
  for (int k = 1; k <= half; ++k)
    bumps.push_back({static_cast<double>(k) / (half + 1), BumpSide::upper});
  for (int k = 1; k <= half; ++k)
    bumps.push_back({static_cast<double>(k) / (half + 1), BumpSide::lower});
  return bumps;
}

namespace {

double bernstein(int n, int k, double t) {
  double binom = 1.0;
  for (int i = 0; i < k; ++i) binom *= static_cast<double>(n - i) / (k - i);
  return binom * std::pow(t, k) * std::pow(1.0 - t, n - k);
}

}  // namespace

FFDParam::FFDParam(SurfaceMesh baseline, Box box, int nx, int ny, int movable_axis)
    : baseline_(std::move(baseline)), box_(box), nx_(nx), ny_(ny), axis_(movable_axis) {
  validate_mesh(baseline_, /*require_ccw=*/baseline_.closed);
  if (nx_ < 2 || ny_ < 2) throw Error(errc::domain, "FFD lattice needs at least 2x2 control points");
  if (axis_ != 0 && axis_ != 1) throw Error(errc::domain, "FFD movable axis must be 0 or 1");
  if (!(box_.x_max > box_.x_min && box_.y_max > box_.y_min))
    throw Error(errc::domain, "FFD box extents must be positive");

  const int ns = baseline_.n_nodes();
  weights_ = Eigen::MatrixXd::Zero(ns, nx_ * ny_);
  for (int i = 0; i < ns; ++i) {
    const double xi = (baseline_.nodes[i][0] - box_.x_min) / (box_.x_max - box_.x_min);
    const double eta = (baseline_.nodes[i][1] - box_.y_min) / (box_.y_max - box_.y_min);
    if (xi < 0.0 || xi > 1.0 || eta < 0.0 || eta > 1.0)
      throw Error(errc::domain, "baseline node " + std::to_string(i) + " lies outside the FFD box");
    for (int a = 0; a < nx_; ++a)
      for (int b = 0; b < ny_; ++b)
        weights_(i, a * ny_ + b) = bernstein(nx_ - 1, a, xi) * bernstein(ny_ - 1, b, eta);
  }
}

SurfaceMesh FFDParam::apply(const Eigen::VectorXd& p) const {
  check_param_dim(p);
  SurfaceMesh out = baseline_;
  const Eigen::VectorXd d = weights_ * p;
  for (int i = 0; i < out.n_nodes(); ++i) out.nodes[i][axis_] += d[i];
  return out;
}

Field FFDParam::jvp(const Eigen::VectorXd& p, const Eigen::VectorXd& dp) const {
  check_param_dim(p);
  check_param_dim(dp);
  const Eigen::VectorXd d = weights_ * dp;
  Field out(baseline_.n_nodes(), Vec2::Zero());
  for (int i = 0; i < baseline_.n_nodes(); ++i) out[i][axis_] = d[i];
  return out;
}

Eigen::VectorXd FFDParam::vjp(const Eigen::VectorXd& p, const Field& w) const {
  check_param_dim(p);
  check_covector_dim(w);
  Eigen::VectorXd a(baseline_.n_nodes());
  for (int i = 0; i < baseline_.n_nodes(); ++i) a[i] = w[i][axis_];
  return weights_.transpose() * a;
}

Eigen::MatrixXd FFDParam::second_derivative_contraction(const Eigen::VectorXd& p,
                                                        const Field& w) const {
  check_param_dim(p);
  check_covector_dim(w);
  return Eigen::MatrixXd::Zero(n_params(), n_params());
}

NonlinearRadialParam::NonlinearRadialParam(SurfaceMesh baseline, Vec2 center, int n_basis,
                                           double alpha, int first_harmonic)
    : baseline_(std::move(baseline)), center_(center), n_basis_(n_basis), alpha_(alpha),
      first_harmonic_(first_harmonic) {
  if (first_harmonic_ < 1) throw Error(errc::domain, "first harmonic must be >= 1");
  validate_mesh(baseline_, /*require_ccw=*/true);
  if (!baseline_.closed)
    throw Error(errc::invalid_mesh, "radial parameterization needs a closed baseline");
  if (n_basis_ < 1) throw Error(errc::domain, "radial basis needs at least one function");
  if (alpha_ < 0.0) throw Error(errc::domain, "nonlinearity knob alpha must be >= 0");

  const int ns = baseline_.n_nodes();
  r0_.resize(ns);
  radial_.resize(ns);
  phi_ = Eigen::MatrixXd(ns, n_basis_);
  for (int i = 0; i < ns; ++i) {
    const double theta = baseline_.baseline_coords[i];
    radial_[i] = Vec2(std::cos(theta), std::sin(theta));
    const Vec2 offset = baseline_.nodes[i] - center_;
    r0_[i] = offset.norm();
    if ((offset - r0_[i] * radial_[i]).norm() > 1e-9 * std::max(1.0, r0_[i]))
      throw Error(errc::invalid_mesh,
                  "baseline node " + std::to_string(i) + " is not aligned with its stored angle");
    for (int j = 0; j < n_basis_; ++j) {
      if (j == 0) {
        phi_(i, j) = 1.0;
      } else {
        const int k = first_harmonic_ + (j - 1) / 2;
        phi_(i, j) = (j % 2 == 1) ? std::cos(k * theta) : std::sin(k * theta);
      }
    }
  }
}

SurfaceMesh NonlinearRadialParam::apply(const Eigen::VectorXd& p) const {
  check_param_dim(p);
  Eigen::VectorXd q(n_basis_);
  for (int j = 0; j < n_basis_; ++j) q[j] = p[j] + alpha_ * p[j] * p[j];
  const Eigen::VectorXd dr = phi_ * q;
  SurfaceMesh out = baseline_;
  for (int i = 0; i < out.n_nodes(); ++i)
    out.nodes[i] = center_ + (r0_[i] + dr[i]) * radial_[i];
  return out;
}

Field NonlinearRadialParam::jvp(const Eigen::VectorXd& p, const Eigen::VectorXd& dp) const {
  check_param_dim(p);
  check_param_dim(dp);
  Eigen::VectorXd dq(n_basis_);
  for (int j = 0; j < n_basis_; ++j) dq[j] = (1.0 + 2.0 * alpha_ * p[j]) * dp[j];
  const Eigen::VectorXd dr = phi_ * dq;
  Field out(baseline_.n_nodes());
  for (int i = 0; i < baseline_.n_nodes(); ++i) out[i] = dr[i] * radial_[i];
  return out;
}

Eigen::VectorXd NonlinearRadialParam::vjp(const Eigen::VectorXd& p, const Field& w) const {
  check_param_dim(p);
  check_covector_dim(w);
  Eigen::VectorXd a(baseline_.n_nodes());
  for (int i = 0; i < baseline_.n_nodes(); ++i) a[i] = w[i].dot(radial_[i]);
  Eigen::VectorXd g = phi_.transpose() * a;
  for (int j = 0; j < n_basis_; ++j) g[j] *= 1.0 + 2.0 * alpha_ * p[j];
  return g;
}

Eigen::MatrixXd NonlinearRadialParam::second_derivative_contraction(const Eigen::VectorXd& p,
                                                                    const Field& w) const {
  check_param_dim(p);
  check_covector_dim(w);
  Eigen::VectorXd a(baseline_.n_nodes());
  for (int i = 0; i < baseline_.n_nodes(); ++i) a[i] = w[i].dot(radial_[i]);
  const Eigen::VectorXd s = phi_.transpose() * a;  // sum_i <w_i, e_i> phi_j(theta_i)
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n_basis_, n_basis_);
  for (int j = 0; j < n_basis_; ++j) h(j, j) = 2.0 * alpha_ * s[j];
  return h;
}

}  // namespace shapeopt
