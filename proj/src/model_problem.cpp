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
#include "shapeopt/model_problem.hpp"

#include <cmath>
#include <cstdio>

namespace {
std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}
}  // namespace

namespace shapeopt {

StateSolveResult solve_state(const ModelProblem& problem, const Field& m, double tol, int max_iter,
                             std::optional<Eigen::VectorXd> u0) {
  if (tol <= 0.0) throw Error(errc::domain, "state solve tolerance must be positive");
  Eigen::VectorXd u = u0 ? std::move(*u0) : Eigen::VectorXd::Zero(problem.n_state());
  if (u.size() != problem.n_state())
    throw Error(errc::dimension_mismatch, "initial state size mismatch");
  double res = 0.0;
  for (int it = 0; it <= max_iter; ++it) {
    Eigen::VectorXd gu = problem.G(u, m);
    res = (gu - u).lpNorm<Eigen::Infinity>();
    if (res <= tol) return {std::move(u), res, it};
    u = std::move(gu);
  }
  throw ConvergenceError("state solve did not reach tol " + fmt(tol) + ", last residual " +
                             fmt(res),
                         res, max_iter);
}

AdjointSolveResult solve_adjoint(const ModelProblem& problem, const Functional& functional,
                                 const Eigen::VectorXd& u, const Field& m, double tol, int max_iter,
                                 std::optional<Eigen::VectorXd> lambda0) {
  if (tol <= 0.0) throw Error(errc::domain, "adjoint solve tolerance must be positive");
  Eigen::VectorXd lambda =
      lambda0 ? std::move(*lambda0) : Eigen::VectorXd::Zero(problem.n_state());
  if (lambda.size() != problem.n_state())
    throw Error(errc::dimension_mismatch, "initial adjoint size mismatch");
  const Eigen::VectorXd rhs = functional.du(u, m);
  double res = 0.0;
  for (int it = 0; it <= max_iter; ++it) {
    Eigen::VectorXd next = problem.DuG_t(u, m, lambda) + rhs;
    res = (next - lambda).lpNorm<Eigen::Infinity>();
    if (res <= tol) return {std::move(lambda), res, it, &functional};
    lambda = std::move(next);
  }
  throw ConvergenceError("adjoint solve for " + functional.name() + " did not reach tol " +
                             fmt(tol) + ", last residual " + fmt(res),
                         res, max_iter);
}

PiggybackState make_piggyback_state(const ModelProblem& problem) {
  PiggybackState s;
  s.u = Eigen::VectorXd::Zero(problem.n_state());
  s.lambda_f = Eigen::VectorXd::Zero(problem.n_state());
  s.lambda_e.assign(problem.equalities().size(), Eigen::VectorXd::Zero(problem.n_state()));
  s.lambda_c.assign(problem.inequalities().size(), Eigen::VectorXd::Zero(problem.n_state()));
  return s;
}

PiggybackState piggyback_step(const ModelProblem& problem, const PiggybackState& state,
                              const Field& m) {
  PiggybackState next;
  // All adjoints read the pre-update u: lambda' = D_u N(u, lambda, m)^T.
  next.lambda_f = problem.DuG_t(state.u, m, state.lambda_f) + problem.objective().du(state.u, m);
  const auto eqs = problem.equalities();
  const auto ineqs = problem.inequalities();
  next.lambda_e.resize(eqs.size());
  next.lambda_c.resize(ineqs.size());
  for (size_t k = 0; k < eqs.size(); ++k)
    next.lambda_e[k] = problem.DuG_t(state.u, m, state.lambda_e[k]) + eqs[k]->du(state.u, m);
  for (size_t l = 0; l < ineqs.size(); ++l)
    next.lambda_c[l] = problem.DuG_t(state.u, m, state.lambda_c[l]) + ineqs[l]->du(state.u, m);
  next.u = problem.G(state.u, m);
  return next;
}

PiggybackResiduals piggyback_residuals(const ModelProblem& problem, const PiggybackState& state,
                                       const Field& m) {
  PiggybackResiduals r;
  r.primal = (problem.G(state.u, m) - state.u).lpNorm<Eigen::Infinity>();
  auto adj_res = [&](const Eigen::VectorXd& lambda, const Functional& f) {
    return (problem.DuG_t(state.u, m, lambda) + f.du(state.u, m) - lambda)
        .lpNorm<Eigen::Infinity>();
  };
  r.adjoint = adj_res(state.lambda_f, problem.objective());
  const auto eqs = problem.equalities();
  const auto ineqs = problem.inequalities();
  for (size_t k = 0; k < eqs.size(); ++k)
    r.adjoint = std::max(r.adjoint, adj_res(state.lambda_e[k], *eqs[k]));
  for (size_t l = 0; l < ineqs.size(); ++l)
    r.adjoint = std::max(r.adjoint, adj_res(state.lambda_c[l], *ineqs[l]));
  return r;
}

Field mesh_lagrangian_covector(const ModelProblem& problem, const Functional& functional,
                               const Eigen::VectorXd& u, const Field& m,
                               const Eigen::VectorXd& lambda) {
  Field cov = problem.DmG_t(u, m, lambda);
  const Field fm = functional.dm(u, m);
  if (cov.size() != fm.size()) throw Error(errc::dimension_mismatch, "covector size mismatch");
  for (size_t i = 0; i < cov.size(); ++i) cov[i] += fm[i];
  return cov;
}

Eigen::VectorXd reduced_row(const ModelProblem& problem, const Parameterization& param,
                            const MeshDeformer& deformer, const Eigen::VectorXd& p, const Field& m,
                            const Functional& functional, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& lambda) {
  const Field cov = mesh_lagrangian_covector(problem, functional, u, m, lambda);
  return full_vjp(param, deformer, p, cov);
}

Eigen::VectorXd reduced_gradient(const ModelProblem& problem, const Parameterization& param,
                                 const MeshDeformer& deformer, const Eigen::VectorXd& p,
                                 const Field& m, const Functional& functional,
                                 const Eigen::VectorXd& u, const AdjointSolveResult& adjoint) {
  if (adjoint.functional != &functional)
    throw Error(errc::domain, "stale adjoint: solved for " +
                                  (adjoint.functional ? adjoint.functional->name() : "<none>") +
                                  ", requested " + functional.name());
  return reduced_row(problem, param, deformer, p, m, functional, u, adjoint.lambda);
}

double contraction_factor(const ModelProblem& problem, const Eigen::VectorXd& u, const Field& m,
                          double tol, int max_iter) {
  auto op = [&](const Eigen::VectorXd& v) { return problem.DuG_t(u, m, v); };
  const auto r = power_iteration(op, problem.n_state(), tol, max_iter);
  return std::abs(r.value);
}

namespace {

class TrackingPerimeterObjective : public Functional {
 public:
  TrackingPerimeterObjective(const AnnulusBenchmark& problem, std::vector<int> target_nodes,
                             Eigen::VectorXd target_values, double gamma)
      : problem_(problem),
        nodes_(std::move(target_nodes)),
        targets_(std::move(target_values)),
        gamma_(gamma) {}

  std::string name() const override { return "objective"; }

  double value(const Eigen::VectorXd& u, const Field& m) const override {
    double v = 0.0;
    for (size_t q = 0; q < nodes_.size(); ++q) {
      const double d = u[nodes_[q]] - targets_[q];
      v += 0.5 * d * d;
    }
    return v + gamma_ * perimeter(problem_.surface_of(m));
  }

  Eigen::VectorXd du(const Eigen::VectorXd& u, const Field&) const override {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(u.size());
    for (size_t q = 0; q < nodes_.size(); ++q) g[nodes_[q]] += u[nodes_[q]] - targets_[q];
    return g;
  }

  Field dm(const Eigen::VectorXd&, const Field& m) const override {
    Field g(m.size(), Vec2::Zero());
    if (gamma_ != 0.0) {
      const Field pg = perimeter_gradient(problem_.surface_of(m));
      for (int i = 0; i < problem_.n_surface(); ++i) g[i] = gamma_ * pg[i];
    }
    return g;
  }

  bool state_dependent() const override { return !nodes_.empty(); }

 private:
  const AnnulusBenchmark& problem_;
  std::vector<int> nodes_;
  Eigen::VectorXd targets_;
  double gamma_;
};

class AreaEquality : public Functional {
 public:
  AreaEquality(const AnnulusBenchmark& problem, double area_target)
      : problem_(problem), target_(area_target) {}

  std::string name() const override { return "area_equality"; }
  double value(const Eigen::VectorXd&, const Field& m) const override {
    return signed_area(problem_.surface_of(m)) - target_;
  }
  Eigen::VectorXd du(const Eigen::VectorXd& u, const Field&) const override {
    return Eigen::VectorXd::Zero(u.size());
  }
  Field dm(const Eigen::VectorXd&, const Field& m) const override {
    Field g(m.size(), Vec2::Zero());
    const Field ag = signed_area_gradient(problem_.surface_of(m));
    for (int i = 0; i < problem_.n_surface(); ++i) g[i] = ag[i];
    return g;
  }
  bool state_dependent() const override { return false; }

 private:
  const AnnulusBenchmark& problem_;
  double target_;
};

class RadiusInequality : public Functional {
 public:
  RadiusInequality(int node, Vec2 center, double r_min)
      : node_(node), center_(center), r_min_(r_min) {}

  std::string name() const override { return "radius_" + std::to_string(node_); }
  double value(const Eigen::VectorXd&, const Field& m) const override {
    return (m[node_] - center_).norm() - r_min_;
  }
  Eigen::VectorXd du(const Eigen::VectorXd& u, const Field&) const override {
    return Eigen::VectorXd::Zero(u.size());
  }
  Field dm(const Eigen::VectorXd&, const Field& m) const override {
    Field g(m.size(), Vec2::Zero());
    const Vec2 d = m[node_] - center_;
    const double len = d.norm();
    if (len <= 1e-14) throw Error(errc::domain, "radius gradient undefined at the center");
    g[node_] = d / len;
    return g;
  }
  bool state_dependent() const override { return false; }

 private:
  int node_;
  Vec2 center_;
  double r_min_;
};

}  // namespace

AnnulusBenchmark::AnnulusBenchmark(const VolumeMesh& mesh, Options options)
    : n_nodes_(mesh.n_nodes()), n_surface_(mesh.n_surface), opts_(std::move(options)) {
  if (n_surface_ < 3 || n_nodes_ < 2 * n_surface_)
    throw Error(errc::invalid_mesh, "benchmark needs a layered annulus mesh");
  surface_baseline_coords_.resize(n_surface_);
  for (int i = 0; i < n_surface_; ++i) {
    const Vec2& x = mesh.nodes[i];
    surface_baseline_coords_[i] = std::atan2(x[1], x[0]);
  }

  // A = I + scale * (D - Adjacency), assembled from the fixed connectivity.
  a_ = SymSparse(n_nodes_);
  for (int i = 0; i < n_nodes_; ++i) a_.add(i, i, 1.0);
  for (const auto& e : mesh.edges) {
    a_.add(e[0], e[0], opts_.laplacian_scale);
    a_.add(e[1], e[1], opts_.laplacian_scale);
    a_.add(e[0], e[1], -opts_.laplacian_scale);
  }
  a_.compress();

  if (opts_.omega) {
    omega_ = *opts_.omega;
  } else {
    double max_abs_row = 0.0;
    Eigen::VectorXd row_abs = Eigen::VectorXd::Zero(n_nodes_);
    for (const auto& t : a_.triplets()) {
      row_abs[t.row] += std::abs(t.value);
      if (t.row != t.col) row_abs[t.col] += std::abs(t.value);
    }
    max_abs_row = row_abs.maxCoeff();
    omega_ = 1.0 / (1.0 + max_abs_row);
  }
  if (omega_ <= 0.0) throw Error(errc::domain, "omega must be positive");

  if (static_cast<Eigen::Index>(opts_.target_nodes.size()) != opts_.target_values.size())
    throw Error(errc::dimension_mismatch, "target node and value counts differ");
  for (int q : opts_.target_nodes)
    if (q < 0 || q >= n_surface_)
      throw Error(errc::dimension_mismatch, "target node index must be a surface node");

  objective_ = std::make_unique<TrackingPerimeterObjective>(*this, opts_.target_nodes,
                                                            opts_.target_values, opts_.gamma);
  const double area0 = opts_.area_target ? *opts_.area_target : signed_area(surface_of(mesh.nodes));
  equalities_.push_back(std::make_unique<AreaEquality>(*this, area0));
  if (opts_.min_radius) {
    const int stride = std::max(1, opts_.radius_constraint_stride);
    for (int i = 0; i < n_surface_; i += stride)
      inequalities_.push_back(
          std::make_unique<RadiusInequality>(i, opts_.radius_center, *opts_.min_radius));
  }
}

SurfaceMesh AnnulusBenchmark::surface_of(const Field& m) const {
  if (static_cast<int>(m.size()) != n_nodes_)
    throw Error(errc::dimension_mismatch, "mesh coordinate size mismatch");
  SurfaceMesh s;
  s.closed = true;
  s.nodes.assign(m.begin(), m.begin() + n_surface_);
  s.baseline_coords = surface_baseline_coords_;
  return s;
}

Eigen::VectorXd AnnulusBenchmark::source(const Field& m) const {
  Eigen::VectorXd b(n_nodes_);
  const double s2 = opts_.source_width * opts_.source_width;
  for (int i = 0; i < n_nodes_; ++i)
    b[i] = std::exp(-(m[i] - opts_.source_center).squaredNorm() / s2);
  return b;
}

Eigen::VectorXd AnnulusBenchmark::G(const Eigen::VectorXd& u, const Field& m) const {
  if (u.size() != n_nodes_ || static_cast<int>(m.size()) != n_nodes_)
    throw Error(errc::dimension_mismatch, "state or mesh size mismatch in G");
  return u - omega_ * (a_.multiply(u) - source(m));
}

Eigen::VectorXd AnnulusBenchmark::DuG_t(const Eigen::VectorXd& u, const Field&,
                                        const Eigen::VectorXd& v) const {
  if (u.size() != n_nodes_ || v.size() != n_nodes_)
    throw Error(errc::dimension_mismatch, "size mismatch in DuG_t");
  // D_u G = I - omega A, symmetric.
  return v - omega_ * a_.multiply(v);
}

Field AnnulusBenchmark::DmG_t(const Eigen::VectorXd&, const Field& m,
                              const Eigen::VectorXd& v) const {
  if (v.size() != n_nodes_ || static_cast<int>(m.size()) != n_nodes_)
    throw Error(errc::dimension_mismatch, "size mismatch in DmG_t");
  // G_i depends on m through b_i(m) only; d b_i / d m_i = -2 (m_i - src) b_i / sigma^2.
  Field g(m.size());
  const double s2 = opts_.source_width * opts_.source_width;
  for (int i = 0; i < n_nodes_; ++i) {
    const Vec2 d = m[i] - opts_.source_center;
    const double bi = std::exp(-d.squaredNorm() / s2);
    g[i] = omega_ * v[i] * (-2.0 / s2) * bi * d;
  }
  return g;
}

std::vector<const Functional*> AnnulusBenchmark::equalities() const {
  std::vector<const Functional*> out;
  for (const auto& e : equalities_) out.push_back(e.get());
  return out;
}

std::vector<const Functional*> AnnulusBenchmark::inequalities() const {
  std::vector<const Functional*> out;
  for (const auto& c : inequalities_) out.push_back(c.get());
  return out;
}

}  // namespace shapeopt
