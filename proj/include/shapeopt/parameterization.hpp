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

#include <memory>

#include "shapeopt/geometry.hpp"

namespace shapeopt {

/// Design-parameter-to-surface map S(p) with forward/reverse Jacobian
/// products and the second-derivative contraction needed by the chain rule
/// for reduced Hessians. All operations are pure; instances are immutable.
class Parameterization {
 public:
  virtual ~Parameterization() = default;

  virtual int n_params() const = 0;
  virtual const SurfaceMesh& baseline() const = 0;
  virtual bool linear() const = 0;

  /// Deformed copy of the baseline (baseline untouched).
  virtual SurfaceMesh apply(const Eigen::VectorXd& p) const = 0;

  /// Forward product dp -> D_p S(p) dp, as a per-node displacement field.
  virtual Field jvp(const Eigen::VectorXd& p, const Eigen::VectorXd& dp) const = 0;

  /// Reverse product w -> D_p S(p)^T w for a surface covector w.
  virtual Eigen::VectorXd vjp(const Eigen::VectorXd& p, const Field& w) const = 0;

  /// sum_k w_k D_pp S_k(p), a symmetric n_p x n_p matrix. Exactly zero for
  /// linear maps.
  virtual Eigen::MatrixXd second_derivative_contraction(const Eigen::VectorXd& p,
                                                        const Field& w) const = 0;

  /// Dense surface Jacobian D_p S(p), 2 n_s x n_p, assembled column by
  /// column from forward products on unit parameter vectors.
  Eigen::MatrixXd surface_jacobian(const Eigen::VectorXd& p) const;

 protected:
  void check_param_dim(const Eigen::VectorXd& p) const;
  void check_covector_dim(const Field& w) const;
};

double hicks_henne_bump(double x, double x_peak, double t);

enum class BumpSide { upper, lower };

struct HicksHenneBump {
  double peak;     // chord fraction in (0, 1)
  BumpSide side;
};

/// Hicks-Henne bumps. On closed baselines the chord fraction of a node at
/// baseline angle theta is (1 - cos theta) / 2, upper bumps act on nodes
/// with sin theta > 0, and displacements follow the baseline outward
/// normal. On open chord baselines bumps displace along +y (upper) or -y
/// (lower). Linear in the amplitude vector.
class HicksHenneParam : public Parameterization {
 public:
  HicksHenneParam(SurfaceMesh baseline, std::vector<HicksHenneBump> bumps, double exponent = 3.0);

  int n_params() const override { return static_cast<int>(bumps_.size()); }
  const SurfaceMesh& baseline() const override { return baseline_; }
  bool linear() const override { return true; }
  SurfaceMesh apply(const Eigen::VectorXd& p) const override;
  Field jvp(const Eigen::VectorXd& p, const Eigen::VectorXd& dp) const override;
  Eigen::VectorXd vjp(const Eigen::VectorXd& p, const Field& w) const override;
  Eigen::MatrixXd second_derivative_contraction(const Eigen::VectorXd& p,
                                                const Field& w) const override;

  const std::vector<HicksHenneBump>& bumps() const { return bumps_; }
  double exponent() const { return exponent_; }

 private:
  SurfaceMesh baseline_;
  std::vector<HicksHenneBump> bumps_;
  double exponent_;
  Field directions_;         // per-node displacement direction
  Eigen::MatrixXd weights_;  // n_s x n_p bump values (0 off-side)
};

/// n_bumps/2 upper and n_bumps/2 lower bumps with peaks equally spaced at
/// k / (n_bumps/2 + 1), k = 1..n_bumps/2. For 38 bumps this is the classic
/// airfoil set with peaks 0.05, 0.10, ..., 0.95.
std::vector<HicksHenneBump> make_symmetric_bump_set(int n_bumps);

/// Free-form deformation on an axis-aligned Bernstein control lattice.
/// One parameter per control point, displacing it along movable_axis; the
/// local coordinates of the baseline nodes are frozen at construction, so
/// the map is linear in the control displacements.
class FFDParam : public Parameterization {
 public:
  struct Box {
    double x_min, x_max, y_min, y_max;
  };

  FFDParam(SurfaceMesh baseline, Box box, int nx, int ny, int movable_axis);

  int n_params() const override { return nx_ * ny_; }
  const SurfaceMesh& baseline() const override { return baseline_; }
  bool linear() const override { return true; }
  SurfaceMesh apply(const Eigen::VectorXd& p) const override;
  Field jvp(const Eigen::VectorXd& p, const Eigen::VectorXd& dp) const override;
  Eigen::VectorXd vjp(const Eigen::VectorXd& p, const Field& w) const override;
  Eigen::MatrixXd second_derivative_contraction(const Eigen::VectorXd& p,
                                                const Field& w) const override;

 private:
  SurfaceMesh baseline_;
  Box box_;
  int nx_, ny_, axis_;
  Eigen::MatrixXd weights_;  // n_s x (nx*ny) Bernstein tensor products
};

/// Radial map with a quadratic amplitude reparameterization:
///   node_i = center + (r0_i + sum_j (p_j + alpha p_j^2) phi_j(theta_i)) e(theta_i)
/// where e(theta) = (cos theta, sin theta). alpha = 0 is exactly linear;
/// alpha > 0 exercises the second-derivative term of the parameterized
/// Hessian. The basis is the Fourier set 1, cos kt, sin kt, cos (k+1)t, ...
/// starting at k = first_harmonic; first_harmonic = 2 skips the
/// translation-like modes, which are flat directions of perimeter/area
/// functionals.
class NonlinearRadialParam : public Parameterization {
 public:
  NonlinearRadialParam(SurfaceMesh baseline, Vec2 center, int n_basis, double alpha,
                       int first_harmonic = 1);

  int n_params() const override { return n_basis_; }
  const SurfaceMesh& baseline() const override { return baseline_; }
  bool linear() const override { return alpha_ == 0.0; }
  SurfaceMesh apply(const Eigen::VectorXd& p) const override;
  Field jvp(const Eigen::VectorXd& p, const Eigen::VectorXd& dp) const override;
  Eigen::VectorXd vjp(const Eigen::VectorXd& p, const Field& w) const override;
  Eigen::MatrixXd second_derivative_contraction(const Eigen::VectorXd& p,
                                                const Field& w) const override;

  double alpha() const { return alpha_; }

 private:
  SurfaceMesh baseline_;
  Vec2 center_;
  int n_basis_;
  double alpha_;
  int first_harmonic_ = 1;
  std::vector<double> r0_;      // baseline radii
  Eigen::MatrixXd phi_;         // n_s x n_basis angular basis values
  Field radial_;                // unit radial directions e(theta_i)
};

}  // namespace shapeopt
