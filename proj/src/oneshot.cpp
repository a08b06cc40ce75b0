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
#include "shapeopt/oneshot.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

namespace shapeopt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

OneShotResult run_oneshot(const ModelProblem& problem, const Parameterization& param,
                          const MeshDeformer& deformer, const Eigen::VectorXd& p0,
                          const OneShotConfig& config, const BBuilder* b_override,
                          bool constrained) {
  if (config.inner_steps < 1) throw Error(errc::domain, "One Shot needs at least one inner step");
  if (!(config.max_design_update > 0.0))
    throw Error(errc::domain, "max_design_update must be positive");

  const auto t0 = Clock::now();
  BBuilder builder = (b_override != nullptr)
                         ? *b_override
                         : make_hybrid_b_builder(param, deformer, config.eps1, config.eps2,
                                                 config.eps3, config.formulation);

  const auto eqs = problem.equalities();
  const auto ineqs = problem.inequalities();
  const int np = param.n_params();

  OneShotResult result;
  Eigen::VectorXd p = p0;
  PiggybackState state = make_piggyback_state(problem);

  // Geometry sanity scale: one design update moving the surface by many
  // baseline diameters means the coupled iteration has left the regime
  // where its values mean anything.
  double diameter = 0.0;
  for (const auto& x : param.baseline().nodes)
    for (const auto& y : param.baseline().nodes) diameter = std::max(diameter, (x - y).norm());
  const double displacement_bound = 10.0 * std::max(diameter, 1e-8);

  for (int outer = 0;; ++outer) {
    const Field m = apply_full(param, deformer, p);
    if (!config.adjoint_carryover && outer > 0) state = make_piggyback_state(problem);

    double start_residual = 0.0;
    for (int j = 0; j < config.inner_steps; ++j) {
      const auto res = piggyback_residuals(problem, state, m);
      if (j == 0) start_residual = std::max(res.primal, res.adjoint);
      result.trace.push_back({outer, j, res.primal, res.adjoint});
      state = piggyback_step(problem, state, m);
      result.history.total_inner_iterations += 1;
    }
    const auto end_res = piggyback_residuals(problem, state, m);
    result.trace.push_back({outer, config.inner_steps, end_res.primal, end_res.adjoint});

    // Residual growth across the inner loop: the coupled iteration is not
    // contracting at this design.
    const double end_residual = std::max(end_res.primal, end_res.adjoint);
    if (!std::isfinite(end_residual) ||
        end_residual > config.divergence_factor * std::max(start_residual, 1e-14)) {
      char diag[200];
      std::snprintf(diag, sizeof(diag),
                    "piggyback divergence at outer iteration %d: residual grew from %g to %g "
                    "over %d steps",
                    outer, start_residual, end_residual, config.inner_steps);
      throw Error(errc::divergence, diag);
    }

    // Inexact reduced gradients from the piggyback state.
    const Eigen::VectorXd g =
        reduced_row(problem, param, deformer, p, m, problem.objective(), state.u, state.lambda_f);
    Eigen::VectorXd e_vals(eqs.size());
    Eigen::MatrixXd je(eqs.size(), np);
    for (size_t k = 0; k < eqs.size(); ++k) {
      e_vals[k] = eqs[k]->value(state.u, m);
      je.row(k) =
          reduced_row(problem, param, deformer, p, m, *eqs[k], state.u, state.lambda_e[k])
              .transpose();
    }
    Eigen::VectorXd c_vals(constrained ? ineqs.size() : 0);
    Eigen::MatrixXd jc(constrained ? ineqs.size() : 0, np);
    if (constrained) {
      for (size_t l = 0; l < ineqs.size(); ++l) {
        c_vals[l] = ineqs[l]->value(state.u, m);
        jc.row(l) =
            reduced_row(problem, param, deformer, p, m, *ineqs[l], state.u, state.lambda_c[l])
                .transpose();
      }
    }

    QPResult qp;
    try {
      const Eigen::MatrixXd b = builder(p);
      if (constrained) {
        qp = solve_qp_mixed(b, g, je, e_vals, jc, c_vals);
      } else {
        // Unconstrained multistep update: solve B v = -g.
        qp.v = sym_solve(b, Eigen::VectorXd(-g));
        qp.nu = Eigen::VectorXd();
        qp.mu = Eigen::VectorXd();
      }
    } catch (const Error& err) {
      if (err.code() == errc::divergence) throw;
      throw Error(err.code(),
                  "outer iteration " + std::to_string(outer) + ": " + err.what());
    }

    Eigen::VectorXd lag = g;
    if (constrained) {
      if (eqs.size() > 0) lag += je.transpose() * qp.nu;
      if (ineqs.size() > 0) lag -= jc.transpose() * qp.mu;
    }
    const double grad_norm = lag.size() ? lag.lpNorm<Eigen::Infinity>() : 0.0;
    const double e_norm = (constrained && e_vals.size()) ? e_vals.cwiseAbs().maxCoeff() : 0.0;
    const double c_min =
        c_vals.size() ? c_vals.minCoeff() : std::numeric_limits<double>::infinity();
    const double err =
        std::max({grad_norm, e_norm, c_vals.size() ? std::max(0.0, -c_min) : 0.0});

    const Eigen::VectorXd v = limit_step(qp.v, config.max_design_update);
    const double vnorm_raw = qp.v.size() ? qp.v.lpNorm<Eigen::Infinity>() : 0.0;

    HistoryRow row;
    row.iter = outer;
    row.objective = problem.objective().value(state.u, m);
    row.e_values.assign(e_vals.begin(), e_vals.end());
    row.c_min = c_min;
    row.grad_norm = grad_norm;
    row.step_norm = vnorm_raw;
    row.step_scale = (vnorm_raw > 0.0) ? v.lpNorm<Eigen::Infinity>() / vnorm_raw : 1.0;
    row.time_s = seconds_since(t0);
    result.history.rows.push_back(std::move(row));

    if (config.tol > 0.0 && err <= config.tol) {
      result.history.termination = "tol";
      break;
    }
    if (outer >= config.outer_iters - 1) {
      result.history.termination = "max_iter";
      break;
    }

    if (!v.allFinite())
      throw Error(errc::divergence,
                  "non-finite design update at outer iteration " + std::to_string(outer));
    const Eigen::VectorXd p_next = p + v;
    const SurfaceMesh s_old = param.apply(p);
    const SurfaceMesh s_new = param.apply(p_next);
    double moved = 0.0;
    for (int i = 0; i < s_old.n_nodes(); ++i)
      moved = std::max(moved, (s_new.nodes[i] - s_old.nodes[i]).norm());
    if (!std::isfinite(moved) || moved > displacement_bound) {
      char diag[200];
      std::snprintf(diag, sizeof(diag),
                    "design update at outer iteration %d moves the surface by %g, beyond the "
                    "sanity bound %g",
                    outer, moved, displacement_bound);
      throw Error(errc::divergence, diag);
    }
    p = p_next;
  }

  result.history.final_p = p;
  result.history.total_time_s = seconds_since(t0);
  return result;
}

}  // namespace

OneShotResult oneshot_multistep(const ModelProblem& problem, const Parameterization& param,
                                const MeshDeformer& deformer, const Eigen::VectorXd& p0,
                                const OneShotConfig& config, const BBuilder* b_override) {
  return run_oneshot(problem, param, deformer, p0, config, b_override, /*constrained=*/false);
}

OneShotResult oneshot_constrained(const ModelProblem& problem, const Parameterization& param,
                                  const MeshDeformer& deformer, const Eigen::VectorXd& p0,
                                  const OneShotConfig& config, const BBuilder* b_override) {
  return run_oneshot(problem, param, deformer, p0, config, b_override, /*constrained=*/true);
}

Eigen::VectorXd limit_step(const Eigen::VectorXd& v, double max_design_update) {
  if (!(max_design_update > 0.0))
    throw Error(errc::domain, "max_design_update must be positive");
  if (v.size() == 0) return v;
  const double vnorm = v.lpNorm<Eigen::Infinity>();
  if (vnorm <= max_design_update) return v;
  return (max_design_update / vnorm) * v;
}

RetardationReport retardation(double time_optimization, double time_single_solve,
                              long iter_optimization, long iter_single_solve) {
  if (time_single_solve <= 0.0)
    throw Error(errc::domain, "single-solve time must be positive");
  if (iter_single_solve <= 0) throw Error(errc::domain, "single-solve iterations must be positive");
  RetardationReport r;
  r.time_optimization = time_optimization;
  r.time_single_solve = time_single_solve;
  r.time_factor = time_optimization / time_single_solve;
  r.iter_optimization = iter_optimization;
  r.iter_single_solve = iter_single_solve;
  r.iter_factor = static_cast<double>(iter_optimization) / static_cast<double>(iter_single_solve);
  return r;
}

}  // namespace shapeopt
