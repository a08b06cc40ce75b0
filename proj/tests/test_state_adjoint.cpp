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
#include <cmath>

#include "bench_fixture.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "shapeopt/sqp.hpp"

using namespace shapeopt;
using testing::Bench;
using testing::make_bench;
using testing::ToyLinearProblem;

TEST_SUITE_BEGIN("state_adjoint");

TEST_CASE("with the Laplacian scaled to zero and omega 1 the state solve is one step") {
  Bench b = make_bench(8, 2, 4, [] {
    AnnulusBenchmark::Options o;
    o.laplacian_scale = 0.0;  // A = I
    o.omega = 1.0;
    return o;
  }());
  const auto res = solve_state(*b.problem, b.volume.nodes, 1e-12, 10);
  CHECK(res.iterations == 1);
  const Eigen::VectorXd expect = b.problem->source(b.volume.nodes);
  CHECK((res.u - expect).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("2x2 fixed point matches the direct solve oracle") {
  Eigen::MatrixXd a(2, 2);
  a << 2, -1, -1, 2;
  Eigen::VectorXd rhs(2);
  rhs << 1, 1;
  ToyLinearProblem toy(a, rhs, Eigen::VectorXd::Zero(2), 0.25);
  const Field m(1, Vec2::Zero());
  const auto res = solve_state(toy, m, 1e-13, 10000);
  // direct solve: A u = b has u = (1, 1)
  const Eigen::VectorXd u_ref = Eigen::FullPivLU<Eigen::MatrixXd>(a).solve(rhs);
  CHECK((res.u - u_ref).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK(res.u[0] == doctest::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("fixed-point residual identity |A u - b| <= tol / omega") {
  Bench b = make_bench(16, 2, 4);
  const double tol = 1e-12;
  const auto res = solve_state(*b.problem, b.volume.nodes, tol, 200000);
  const Eigen::VectorXd au = b.problem->system_matrix().multiply(res.u);
  const Eigen::VectorXd src = b.problem->source(b.volume.nodes);
  CHECK((au - src).lpNorm<Eigen::Infinity>() <= tol / b.problem->omega() * (1.0 + 1e-12));
}

TEST_CASE("non-convergence carries the last residual") {
  Bench b = make_bench(8, 2, 4);
  try {
    solve_state(*b.problem, b.volume.nodes, 1e-15, 3);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.residual() > 0.0);
    CHECK(e.iterations() == 3);
  }
}

TEST_CASE("the contraction estimate of D_u G stays below one") {
  Bench b = make_bench(12, 3, 4);
  const auto res = solve_state(*b.problem, b.volume.nodes, 1e-12, 200000);
  const double rho = contraction_factor(*b.problem, res.u, b.volume.nodes);
  CHECK(rho < 1.0 - 1e-3);
}

TEST_CASE("zero objective seed gives a zero adjoint") {
  AnnulusBenchmark::Options opts;
  opts.gamma = 1.0;  // perimeter only: D_u F = 0
  Bench b = make_bench(10, 2, 4, opts, /*with_targets=*/false);
  const auto state = solve_state(*b.problem, b.volume.nodes, 1e-12, 200000);
  const auto adj =
      solve_adjoint(*b.problem, b.problem->objective(), state.u, b.volume.nodes, 1e-12, 1000);
  CHECK(adj.lambda.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(adj.iterations == 0);
}

TEST_CASE("equal contraction rates give matching primal and adjoint iteration counts") {
  Eigen::MatrixXd a(2, 2);
  a << 2, -1, -1, 2;
  Eigen::VectorXd rhs(2);
  rhs << 1, 1;
  // target chosen so |D_u F(u*)| matches the primal initial residual scale
  Eigen::VectorXd target(2);
  target << 0.75, 0.75;
  ToyLinearProblem toy(a, rhs, target, 0.25);
  const Field m(1, Vec2::Zero());
  const double tol = 1e-12;
  const auto state = solve_state(toy, m, tol, 100000);
  const auto adjoint = solve_adjoint(toy, toy.objective(), state.u, m, tol, 100000);
  CHECK(std::abs(state.iterations - adjoint.iterations) <= 2);
  // the adjoint equation residual contract
  const Eigen::VectorXd res = toy.DuG_t(state.u, m, adjoint.lambda) +
                              toy.objective().du(state.u, m) - adjoint.lambda;
  CHECK(res.lpNorm<Eigen::Infinity>() <= tol);
}

TEST_CASE("piggyback_step is the identity at the exact primal/adjoint fixed point") {
  Bench b = make_bench(12, 2, 6);
  const Field& m = b.volume.nodes;
  const auto state = solve_state(*b.problem, m, 1e-14, 400000);
  PiggybackState s = make_piggyback_state(*b.problem);
  s.u = state.u;
  s.lambda_f =
      solve_adjoint(*b.problem, b.problem->objective(), state.u, m, 1e-14, 400000).lambda;
  const auto eqs = b.problem->equalities();
  for (size_t k = 0; k < eqs.size(); ++k)
    s.lambda_e[k] = solve_adjoint(*b.problem, *eqs[k], state.u, m, 1e-14, 400000).lambda;
  const PiggybackState next = piggyback_step(*b.problem, s, m);
  CHECK((next.u - s.u).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK((next.lambda_f - s.lambda_f).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("piggyback from a converged u with a zero adjoint equals the truncated adjoint iteration") {
  Bench b = make_bench(10, 2, 4);
  const Field& m = b.volume.nodes;
  const auto state = solve_state(*b.problem, m, 1e-13, 200000);
  const int j_steps = 7;

  PiggybackState s = make_piggyback_state(*b.problem);
  s.u = state.u;
  for (int j = 0; j < j_steps; ++j) s = piggyback_step(*b.problem, s, m);

  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(b.problem->n_state());
  const Eigen::VectorXd du = b.problem->objective().du(state.u, m);
  for (int j = 0; j < j_steps; ++j) lambda = b.problem->DuG_t(state.u, m, lambda) + du;
  CHECK((s.lambda_f - lambda).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("piggyback contracts toward the coupled fixed point") {
  Bench b = make_bench(12, 2, 4);
  const Field& m = b.volume.nodes;
  // coupled fixed point
  const auto state = solve_state(*b.problem, m, 1e-14, 400000);
  PiggybackState fp = make_piggyback_state(*b.problem);
  fp.u = state.u;
  fp.lambda_f =
      solve_adjoint(*b.problem, b.problem->objective(), state.u, m, 1e-14, 400000).lambda;
  const auto eqs = b.problem->equalities();
  for (size_t k = 0; k < eqs.size(); ++k)
    fp.lambda_e[k] = solve_adjoint(*b.problem, *eqs[k], state.u, m, 1e-14, 400000).lambda;

  const double rho = contraction_factor(*b.problem, state.u, m);
  REQUIRE(rho < 1.0);
  const double rho_hat = std::min(0.99, rho + 0.05);

  auto gen = testing::rng(401);
  PiggybackState s = fp;
  s.u += 0.1 * testing::random_vector(gen, b.problem->n_state());
  s.lambda_f += 0.1 * testing::random_vector(gen, b.problem->n_state());
  auto distance = [&](const PiggybackState& x) {
    double d = (x.u - fp.u).norm() + (x.lambda_f - fp.lambda_f).norm();
    for (size_t k = 0; k < x.lambda_e.size(); ++k) d += (x.lambda_e[k] - fp.lambda_e[k]).norm();
    return d;
  };
  const double d0 = distance(s);
  const int steps = 20;
  for (int j = 0; j < steps; ++j) s = piggyback_step(*b.problem, s, m);
  CHECK(distance(s) <= std::pow(rho_hat, steps) * d0);
}

TEST_CASE("piggyback coupled iteration reaches the sequential fixed point") {
  AnnulusBenchmark::Options opt;
  opt.omega = 0.2;  // contraction rate ~0.8 keeps both endpoint errors within 5 tol
  Bench b = make_bench(10, 2, 4, opt);
  const Field& m = b.volume.nodes;
  const double tol = 1e-11;
  const auto state = solve_state(*b.problem, m, tol, 200000);
  const auto adj = solve_adjoint(*b.problem, b.problem->objective(), state.u, m, tol, 200000);

  PiggybackState s = make_piggyback_state(*b.problem);
  for (int j = 0; j < 200000; ++j) {
    s = piggyback_step(*b.problem, s, m);
    const auto r = piggyback_residuals(*b.problem, s, m);
    if (std::max(r.primal, r.adjoint) <= tol) break;
  }
  CHECK((s.u - state.u).lpNorm<Eigen::Infinity>() <= 10.0 * tol);
  CHECK((s.lambda_f - adj.lambda).lpNorm<Eigen::Infinity>() <= 10.0 * tol);
}

TEST_CASE("reduced gradient vanishes exactly at a perfect tracking match with gamma 0") {
  AnnulusBenchmark::Options opts;
  opts.gamma = 0.0;
  Bench probe = make_bench(12, 2, 6, opts, /*with_targets=*/false);
  auto gen = testing::rng(402);
  const Eigen::VectorXd p = testing::random_vector(gen, 6, 0.05);
  const Field m = apply_full(*probe.param, *probe.deformer, p);
  const auto state = solve_state(*probe.problem, m, 1e-13, 200000);

  // rebuild with targets equal to the solved surface values at p
  AnnulusBenchmark::Options exact = opts;
  for (int q = 0; q < 4; ++q) exact.target_nodes.push_back(q * 3);
  exact.target_values.resize(4);
  for (int q = 0; q < 4; ++q) exact.target_values[q] = state.u[exact.target_nodes[q]];
  AnnulusBenchmark matched(probe.volume, exact);

  const auto state2 = solve_state(matched, m, 1e-13, 200000, state.u);
  const auto adj = solve_adjoint(matched, matched.objective(), state2.u, m, 1e-13, 200000);
  const Eigen::VectorXd g = reduced_gradient(matched, *probe.param, *probe.deformer, p, m,
                                             matched.objective(), state2.u, adj);
  CHECK(g.lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("Lemma 1 at machine scale: directional FD oracle over 20 random pairs") {
  Bench b = make_bench(16, 2, 8);
  auto gen = testing::rng(403);
  const double h = 1e-5;
  for (int t = 0; t < 20; ++t) {
    const Eigen::VectorXd p = testing::random_vector(gen, 8, 0.05);
    const Eigen::VectorXd dp = testing::random_vector(gen, 8);
    const Eigen::VectorXd g =
        reduced_objective_gradient(*b.problem, *b.param, *b.deformer, p, 1e-13);
    auto f_of = [&](const Eigen::VectorXd& x) {
      return reduced_objective(*b.problem, *b.param, *b.deformer, x, 1e-13);
    };
    const double fd = testing::central_difference(f_of, p, dp, h);
    const double lhs = g.dot(dp);
    CHECK(std::abs(lhs - fd) <= 1e-6 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("perimeter-only objective reduces to the analytic polyline gradient pullback") {
  AnnulusBenchmark::Options opts;
  opts.gamma = 0.7;
  Bench b = make_bench(14, 3, 6, opts, /*with_targets=*/false);
  auto gen = testing::rng(404);
  const Eigen::VectorXd p = testing::random_vector(gen, 6, 0.05);
  const Field m = apply_full(*b.param, *b.deformer, p);
  const auto state = solve_state(*b.problem, m, 1e-12, 200000);
  const auto adj =
      solve_adjoint(*b.problem, b.problem->objective(), state.u, m, 1e-12, 200000);
  const Eigen::VectorXd g = reduced_gradient(*b.problem, *b.param, *b.deformer, p, m,
                                             b.problem->objective(), state.u, adj);

  // oracle: analytic perimeter gradient padded to the volume and pulled back
  const SurfaceMesh s = b.problem->surface_of(m);
  const Field pg = perimeter_gradient(s);
  Field padded(m.size(), Vec2::Zero());
  for (int i = 0; i < s.n_nodes(); ++i) padded[i] = 0.7 * pg[i];
  const Eigen::VectorXd expect = full_vjp(*b.param, *b.deformer, p, padded);
  CHECK((g - expect).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("a stale adjoint is rejected by functional identity") {
  Bench b = make_bench(10, 2, 4);
  const Field& m = b.volume.nodes;
  const auto state = solve_state(*b.problem, m, 1e-12, 200000);
  const auto adj_area =
      solve_adjoint(*b.problem, *b.problem->equalities()[0], state.u, m, 1e-12, 200000);
  CHECK_THROWS_AS(reduced_gradient(*b.problem, *b.param, *b.deformer,
                                   Eigen::VectorXd::Zero(4), m, b.problem->objective(), state.u,
                                   adj_area),
                  Error);
}

TEST_CASE("gradient error scales linearly with the fixed-point tolerance") {
  Bench b = make_bench(12, 2, 6);
  auto gen = testing::rng(405);
  const Eigen::VectorXd p = testing::random_vector(gen, 6, 0.05);
  const Eigen::VectorXd g_ref =
      reduced_objective_gradient(*b.problem, *b.param, *b.deformer, p, 1e-14, 1000000);
  std::vector<double> tols = {1e-6, 1e-9, 1e-12};
  std::vector<double> errs;
  for (double tol : tols) {
    const Eigen::VectorXd g =
        reduced_objective_gradient(*b.problem, *b.param, *b.deformer, p, tol);
    errs.push_back((g - g_ref).lpNorm<Eigen::Infinity>());
  }
  // log-log slope over the three points, least squares
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < tols.size(); ++i) {
    const double x = std::log10(tols[i]), y = std::log10(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(tols.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("constraint rows pass the FD oracle; geometric rows skip the adjoint") {
  AnnulusBenchmark::Options opts;
  opts.min_radius = 0.8;
  opts.radius_constraint_stride = 5;
  Bench b = make_bench(15, 2, 6, opts);
  auto gen = testing::rng(406);
  const Eigen::VectorXd p = testing::random_vector(gen, 6, 0.05);
  const Field m = apply_full(*b.param, *b.deformer, p);
  const auto state = solve_state(*b.problem, m, 1e-13, 200000);
  const auto rc = constraint_values_and_jacobians(*b.problem, *b.param, *b.deformer, p, m,
                                                  state.u, 1e-13, 200000);
  REQUIRE(rc.e.size() == 1);
  REQUIRE(rc.c.size() == 3);

  auto e_of = [&](const Eigen::VectorXd& x) {
    const Field mx = apply_full(*b.param, *b.deformer, x);
    return b.problem->equalities()[0]->value(Eigen::VectorXd::Zero(b.problem->n_state()), mx);
  };
  auto c_of = [&](int l) {
    return [&, l](const Eigen::VectorXd& x) {
      const Field mx = apply_full(*b.param, *b.deformer, x);
      return b.problem->inequalities()[l]->value(Eigen::VectorXd::Zero(b.problem->n_state()), mx);
    };
  };
  for (int j = 0; j < 6; ++j) {
    Eigen::VectorXd ej = Eigen::VectorXd::Zero(6);
    ej[j] = 1.0;
    CHECK(rc.je(0, j) ==
          doctest::Approx(testing::central_difference(e_of, p, ej, 1e-5)).epsilon(1e-6));
    for (int l = 0; l < 3; ++l)
      CHECK(rc.jc(l, j) ==
            doctest::Approx(testing::central_difference(c_of(l), p, ej, 1e-5)).epsilon(1e-6));
  }
}

TEST_CASE("area equality at the baseline is zero and radius rows have one-sided support") {
  AnnulusBenchmark::Options opts;
  opts.min_radius = 0.8;
  opts.radius_constraint_stride = 4;
  Bench b = make_bench(16, 2, 8, opts);
  const Field& m = b.volume.nodes;
  const auto state = solve_state(*b.problem, m, 1e-12, 200000);
  CHECK(b.problem->equalities()[0]->value(state.u, m) == doctest::Approx(0.0).epsilon(1e-14));

  const Eigen::VectorXd p0 = Eigen::VectorXd::Zero(8);
  const auto rc = constraint_values_and_jacobians(*b.problem, *b.param, *b.deformer, p0, m,
                                                  state.u, 1e-12, 200000);
  // node 0 (theta = 0) has bump value 0 on every bump: its radius row is zero;
  // node 4 (theta = pi/2, upper side) gets no support from lower bumps.
  REQUIRE(rc.c.size() == 4);
  CHECK(rc.jc.row(0).cwiseAbs().maxCoeff() <= 1e-15);
  for (int j = 4; j < 8; ++j) CHECK(rc.jc(1, j) == 0.0);  // lower bumps, upper node
}

TEST_SUITE_END();
