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
#include "shapeopt/sqp.hpp"

#include <chrono>
#include <memory>

namespace shapeopt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Warm-startable adjoint storage, one slot per functional.
struct AdjointCache {
  std::optional<Eigen::VectorXd> objective;
  std::vector<std::optional<Eigen::VectorXd>> eq;
  std::vector<std::optional<Eigen::VectorXd>> ineq;
};

struct KktData {
  double f = 0.0;
  Eigen::VectorXd g;
  ReducedConstraints constraints;
  long inner_iterations = 0;
};

KktData evaluate_kkt_data(const ModelProblem& problem, const Parameterization& param,
                          const MeshDeformer& deformer, const Eigen::VectorXd& p, const Field& m,
                          const Eigen::VectorXd& u, AdjointCache& cache, double solve_tol,
                          int solve_max_iter) {
  KktData data;
  data.f = problem.objective().value(u, m);

  long inner = 0;
  auto reduced_for = [&](const Functional& fn, std::optional<Eigen::VectorXd>& warm) {
    Eigen::VectorXd lambda;
    if (fn.state_dependent()) {
      auto adj = solve_adjoint(problem, fn, u, m, solve_tol, solve_max_iter, warm);
      inner += adj.iterations;
      lambda = std::move(adj.lambda);
      warm = lambda;
    } else {
      lambda = Eigen::VectorXd::Zero(problem.n_state());
    }
    return reduced_row(problem, param, deformer, p, m, fn, u, lambda);
  };

  data.g = reduced_for(problem.objective(), cache.objective);

  const auto eqs = problem.equalities();
  const auto ineqs = problem.inequalities();
  cache.eq.resize(eqs.size());
  cache.ineq.resize(ineqs.size());
  const int np = param.n_params();
  data.constraints.e.resize(eqs.size());
  data.constraints.je.resize(eqs.size(), np);
  data.constraints.c.resize(ineqs.size());
  data.constraints.jc.resize(ineqs.size(), np);
  for (size_t k = 0; k < eqs.size(); ++k) {
    data.constraints.e[k] = eqs[k]->value(u, m);
    data.constraints.je.row(k) = reduced_for(*eqs[k], cache.eq[k]).transpose();
  }
  for (size_t l = 0; l < ineqs.size(); ++l) {
    data.constraints.c[l] = ineqs[l]->value(u, m);
    data.constraints.jc.row(l) = reduced_for(*ineqs[l], cache.ineq[l]).transpose();
  }
  data.inner_iterations = inner;
  return data;
}

OptHistory run_sqp(const ModelProblem& problem, const Parameterization& param,
                   const MeshDeformer& deformer, const Eigen::VectorXd& p0,
                   const BBuilder& b_builder, const SqpOptions& options, bool mixed) {
  const auto t0 = Clock::now();
  OptHistory history;
  Eigen::VectorXd p = p0;
  AdjointCache cache;
  std::optional<Eigen::VectorXd> warm_state;

  for (int iter = 0;; ++iter) {
    const Field m = apply_full(param, deformer, p);
    KktData data;
    Eigen::MatrixXd b;
    QPResult qp;
    try {
      auto state = solve_state(problem, m, options.solve_tol, options.solve_max_iter, warm_state);
      history.total_inner_iterations += state.iterations;
      warm_state = state.u;

      data = evaluate_kkt_data(problem, param, deformer, p, m, state.u, cache,
                               options.solve_tol, options.solve_max_iter);
      history.total_inner_iterations += data.inner_iterations;

      b = regularize(b_builder(p), options.reg_mode, options.reg_c);
      if (mixed) {
        qp = solve_qp_mixed(b, data.g, data.constraints.je, data.constraints.e,
                            data.constraints.jc, data.constraints.c, options.qp_tol);
      } else {
        qp = solve_kkt_equality(b, data.g, data.constraints.je, data.constraints.e);
      }
    } catch (const Error& err) {
      throw Error(err.code(),
                  "design iteration " + std::to_string(iter) + ": " + err.what());
    }

    // KKT error with the current multiplier estimates; the loop drives it
    // (together with the feasibility defects) to zero.
    Eigen::VectorXd lag = data.g;
    if (data.constraints.e.size() > 0) lag += data.constraints.je.transpose() * qp.nu;
    if (mixed && data.constraints.c.size() > 0) lag -= data.constraints.jc.transpose() * qp.mu;
    const double grad_norm = lag.size() ? lag.lpNorm<Eigen::Infinity>() : 0.0;
    const double e_norm = data.constraints.e.size()
                              ? data.constraints.e.cwiseAbs().maxCoeff()
                              : 0.0;
    const double c_min = data.constraints.c.size()
                             ? data.constraints.c.minCoeff()
                             : std::numeric_limits<double>::infinity();
    const double c_violation = (mixed && data.constraints.c.size()) ? std::max(0.0, -c_min) : 0.0;
    const double err = std::max({grad_norm, e_norm, c_violation});

    const double vnorm = qp.v.size() ? qp.v.lpNorm<Eigen::Infinity>() : 0.0;
    const double scale = (vnorm > options.step_cap) ? options.step_cap / vnorm : 1.0;

    HistoryRow row;
    row.iter = iter;
    row.objective = data.f;
    row.e_values.assign(data.constraints.e.begin(), data.constraints.e.end());
    row.c_min = c_min;
    row.grad_norm = grad_norm;
    row.step_norm = vnorm;
    row.step_scale = scale;
    row.time_s = seconds_since(t0);
    history.rows.push_back(std::move(row));

    if (err <= options.tol) {
      history.termination = "tol";
      break;
    }
    if (iter >= options.max_iter) {
      history.termination = "max_iter";
      break;
    }
    p += scale * qp.v;
  }

  history.final_p = p;
  history.total_time_s = seconds_since(t0);
  return history;
}

}  // namespace

ReducedConstraints constraint_values_and_jacobians(const ModelProblem& problem,
                                                   const Parameterization& param,
                                                   const MeshDeformer& deformer,
                                                   const Eigen::VectorXd& p, const Field& m,
                                                   const Eigen::VectorXd& u, double solve_tol,
                                                   int solve_max_iter) {
  AdjointCache cache;
  return evaluate_kkt_data(problem, param, deformer, p, m, u, cache, solve_tol, solve_max_iter)
      .constraints;
}

BBuilder make_hybrid_b_builder(const Parameterization& param, const MeshDeformer& deformer,
                               double eps1, double eps2, double eps3,
                               SmoothingFormulation formulation, bool identity_as_matrix,
                               const VolumeMesh* volume_template) {
  auto cache = std::make_shared<std::optional<Eigen::MatrixXd>>();
  VolumeMesh vol_template;
  if (volume_template != nullptr) vol_template = *volume_template;
  const bool has_volume = volume_template != nullptr;
  return [&param, &deformer, eps1, eps2, eps3, formulation, identity_as_matrix, cache,
          vol_template = std::move(vol_template), has_volume](const Eigen::VectorXd& p) {
    if (cache->has_value()) return **cache;
    const SurfaceMesh surface = param.apply(p);
    const SurfaceOperators surf_ops = assemble_surface_operators(surface);
    Eigen::MatrixXd b;
    if (formulation == SmoothingFormulation::volume) {
      if (!has_volume)
        throw Error(errc::domain, "volume formulation needs a volume mesh template");
      VolumeMesh vol = vol_template;
      vol.nodes = deformer.deform(surface.nodes);
      const VolumeOperators vol_ops = assemble_volume_operators(vol);
      b = assemble_hybrid_operator(param, deformer, p, surf_ops, eps1, eps2, eps3, formulation,
                                   &vol_ops, identity_as_matrix)
              .b;
    } else {
      b = assemble_hybrid_operator(param, deformer, p, surf_ops, eps1, eps2, eps3, formulation,
                                   nullptr, identity_as_matrix)
              .b;
    }
    if (param.linear()) *cache = b;  // constant Jacobian: reuse across iterations
    return b;
  };
}

BBuilder make_identity_b_builder(int n_params, double scale) {
  if (scale <= 0.0) throw Error(errc::domain, "identity builder scale must be positive");
  return [n_params, scale](const Eigen::VectorXd&) {
    return Eigen::MatrixXd(scale * Eigen::MatrixXd::Identity(n_params, n_params));
  };
}

OptHistory sqp_equality(const ModelProblem& problem, const Parameterization& param,
                        const MeshDeformer& deformer, const Eigen::VectorXd& p0,
                        const BBuilder& b_builder, const SqpOptions& options) {
  return run_sqp(problem, param, deformer, p0, b_builder, options, /*mixed=*/false);
}

OptHistory sqp_mixed(const ModelProblem& problem, const Parameterization& param,
                     const MeshDeformer& deformer, const Eigen::VectorXd& p0,
                     const BBuilder& b_builder, const SqpOptions& options) {
  return run_sqp(problem, param, deformer, p0, b_builder, options, /*mixed=*/true);
}

OptHistory gradient_descent_projected(const ModelProblem& problem, const Parameterization& param,
                                      const MeshDeformer& deformer, const Eigen::VectorXd& p0,
                                      double step, const SqpOptions& options) {
  if (step <= 0.0) throw Error(errc::domain, "descent step must be positive");
  return sqp_mixed(problem, param, deformer, p0,
                   make_identity_b_builder(param.n_params(), 1.0 / step), options);
}

}  // namespace shapeopt
