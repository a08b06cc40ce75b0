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
#include <optional>

#include "shapeopt/deformation.hpp"
#include "shapeopt/linalg.hpp"

namespace shapeopt {

/// A scalar functional X(u, m) with its partial-derivative products.
/// Covectors follow the convention du = (D_u X)^T, dm = (D_m X)^T.
class Functional {
 public:
  virtual ~Functional() = default;
  virtual std::string name() const = 0;
  virtual double value(const Eigen::VectorXd& u, const Field& m) const = 0;
  virtual Eigen::VectorXd du(const Eigen::VectorXd& u, const Field& m) const = 0;
  virtual Field dm(const Eigen::VectorXd& u, const Field& m) const = 0;
  /// Functionals with du == 0 identically skip adjoint solves.
  virtual bool state_dependent() const { return true; }
};

/// The state problem in fixed point form u = G(u, m), with objective and
/// constraint functionals. G must contract near the solution.
class ModelProblem {
 public:
  virtual ~ModelProblem() = default;

  virtual int n_state() const = 0;
  virtual int n_mesh_nodes() const = 0;

  virtual Eigen::VectorXd G(const Eigen::VectorXd& u, const Field& m) const = 0;
  /// (D_u G)^T v
  virtual Eigen::VectorXd DuG_t(const Eigen::VectorXd& u, const Field& m,
                                const Eigen::VectorXd& v) const = 0;
  /// (D_m G)^T v as a per-node covector
  virtual Field DmG_t(const Eigen::VectorXd& u, const Field& m, const Eigen::VectorXd& v) const = 0;

  virtual const Functional& objective() const = 0;
  virtual std::vector<const Functional*> equalities() const = 0;
  virtual std::vector<const Functional*> inequalities() const = 0;
};

struct StateSolveResult {
  Eigen::VectorXd u;
  double residual = 0.0;
  int iterations = 0;
};

struct AdjointSolveResult {
  Eigen::VectorXd lambda;
  double residual = 0.0;
  int iterations = 0;
  const Functional* functional = nullptr;  // the functional this adjoint belongs to
};

/// Fixed-point iteration for u = G(u, m) to the infinity-norm residual tol.
/// Throws ConvergenceError with the last residual when max_iter is reached.
StateSolveResult solve_state(const ModelProblem& problem, const Field& m, double tol, int max_iter,
                             std::optional<Eigen::VectorXd> u0 = std::nullopt);

/// Reverse-accumulation adjoint iteration at the solved state:
///   lambda <- (D_u G)^T lambda + (D_u X)^T.
AdjointSolveResult solve_adjoint(const ModelProblem& problem, const Functional& functional,
                                 const Eigen::VectorXd& u, const Field& m, double tol, int max_iter,
                                 std::optional<Eigen::VectorXd> lambda0 = std::nullopt);

/// Coupled primal/adjoint state for the piggyback iteration, one adjoint
/// per functional (objective first, then equalities, then inequalities).
struct PiggybackState {
  Eigen::VectorXd u;
  Eigen::VectorXd lambda_f;
  std::vector<Eigen::VectorXd> lambda_e;
  std::vector<Eigen::VectorXd> lambda_c;
};

PiggybackState make_piggyback_state(const ModelProblem& problem);

/// One coupled step: all adjoints advance with the pre-update u, then
/// u <- G(u, m).
PiggybackState piggyback_step(const ModelProblem& problem, const PiggybackState& state,
                              const Field& m);

struct PiggybackResiduals {
  double primal = 0.0;
  double adjoint = 0.0;  // max over all adjoint equations
};

PiggybackResiduals piggyback_residuals(const ModelProblem& problem, const PiggybackState& state,
                                       const Field& m);

/// D_m L^X = lambda^T D_m G + D_m X as a per-node covector. With converged
/// (u, lambda) this equals the shifted-Lagrangian derivative D_m N^X.
Field mesh_lagrangian_covector(const ModelProblem& problem, const Functional& functional,
                               const Eigen::VectorXd& u, const Field& m,
                               const Eigen::VectorXd& lambda);

/// Reduced gradient of a functional w.r.t. the design parameters:
///   D_p X~ = (D_p M)^T (lambda^T D_m G + D_m X)^T.
/// No consistency checks; callers with converged adjoints should prefer
/// the AdjointSolveResult overload.
Eigen::VectorXd reduced_row(const ModelProblem& problem, const Parameterization& param,
                            const MeshDeformer& deformer, const Eigen::VectorXd& p, const Field& m,
                            const Functional& functional, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& lambda);

/// Checked variant: rejects an adjoint solved for a different functional.
Eigen::VectorXd reduced_gradient(const ModelProblem& problem, const Parameterization& param,
                                 const MeshDeformer& deformer, const Eigen::VectorXd& p,
                                 const Field& m, const Functional& functional,
                                 const Eigen::VectorXd& u, const AdjointSolveResult& adjoint);

/// Estimated spectral radius of D_u G at (u, m) by power iteration.
double contraction_factor(const ModelProblem& problem, const Eigen::VectorXd& u, const Field& m,
                          double tol = 1e-8, int max_iter = 5000);

/// Model benchmark on the layered annulus. The state operator is
/// A = I + graph Laplacian of the volume connectivity (unit weights,
/// independent of m); the source b_i(m) = exp(-|m_i - src|^2 / sigma^2)
/// carries the mesh dependence:
///   G(u, m) = u - omega (A u - b(m)).
/// Objective: 0.5 |P u - u_target|^2 + gamma * perimeter(surface(m)).
/// Equality: signed_area(surface(m)) - area_target. Inequalities:
/// |m_i - center| - r_min at the selected surface nodes.
class AnnulusBenchmark : public ModelProblem {
 public:
  struct Options {
    Vec2 source_center = Vec2(0.5, 0.3);
    double source_width = 0.8;
    double gamma = 1e-2;                  // perimeter weight
    std::vector<int> target_nodes;        // surface node indices (P selector)
    Eigen::VectorXd target_values;
    std::optional<double> area_target;    // default: baseline area
    std::optional<double> min_radius;     // no radius constraints when unset
    int radius_constraint_stride = 1;
    Vec2 radius_center = Vec2(0.0, 0.0);
    std::optional<double> omega;          // default: 1 / (1 + max abs row sum of A)
    double laplacian_scale = 1.0;         // 0 turns A into the identity
  };

  AnnulusBenchmark(const VolumeMesh& mesh, Options options);

  int n_state() const override { return n_nodes_; }
  int n_mesh_nodes() const override { return n_nodes_; }
  Eigen::VectorXd G(const Eigen::VectorXd& u, const Field& m) const override;
  Eigen::VectorXd DuG_t(const Eigen::VectorXd& u, const Field& m,
                        const Eigen::VectorXd& v) const override;
  Field DmG_t(const Eigen::VectorXd& u, const Field& m, const Eigen::VectorXd& v) const override;
  const Functional& objective() const override { return *objective_; }
  std::vector<const Functional*> equalities() const override;
  std::vector<const Functional*> inequalities() const override;

  double omega() const { return omega_; }
  const SymSparse& system_matrix() const { return a_; }
  Eigen::VectorXd source(const Field& m) const;
  int n_surface() const { return n_surface_; }
  const Options& options() const { return opts_; }

  /// Surface polyline sliced out of the volume coordinates.
  SurfaceMesh surface_of(const Field& m) const;

 private:
  int n_nodes_ = 0;
  int n_surface_ = 0;
  std::vector<double> surface_baseline_coords_;
  SymSparse a_;
  double omega_ = 0.0;
  Options opts_;
  std::unique_ptr<Functional> objective_;
  std::vector<std::unique_ptr<Functional>> equalities_;
  std::vector<std::unique_ptr<Functional>> inequalities_;
};

}  // namespace shapeopt
