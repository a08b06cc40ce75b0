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
#include "shapeopt/oneshot.hpp"

using namespace shapeopt;
using testing::Bench;
using testing::make_bench;

TEST_SUITE_BEGIN("oneshot");

TEST_CASE("limit_step: inside the bound, scaled, and zero") {
  Eigen::VectorXd v(2);
  v << 0.001, -0.002;
  CHECK((limit_step(v, 0.005) - v).lpNorm<Eigen::Infinity>() == 0.0);

  v << 0.01, -0.02;
  const Eigen::VectorXd scaled = limit_step(v, 0.005);
  CHECK(scaled[0] == doctest::Approx(0.0025).epsilon(1e-15));
  CHECK(scaled[1] == doctest::Approx(-0.005).epsilon(1e-15));

  CHECK(limit_step(Eigen::VectorXd::Zero(3), 0.1).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK_THROWS_AS(limit_step(v, 0.0), Error);
}

TEST_CASE("retardation reproduces the reference ratios and guards zero denominators") {
  const RetardationReport one_shot = retardation(41280.76, 2224.1, 100, 10);
  CHECK(std::round(one_shot.time_factor * 100.0) / 100.0 == doctest::Approx(18.56));
  const RetardationReport slsqp = retardation(173046.68, 2224.1, 100, 10);
  CHECK(std::round(slsqp.time_factor * 100.0) / 100.0 == doctest::Approx(77.81));
  const RetardationReport unit = retardation(5.0, 5.0, 7, 7);
  CHECK(unit.time_factor == doctest::Approx(1.0));
  CHECK(unit.iter_factor == doctest::Approx(1.0));
  CHECK_THROWS_AS(retardation(1.0, 0.0, 1, 1), Error);
  CHECK_THROWS_AS(retardation(1.0, 1.0, 1, 0), Error);
}

TEST_CASE("exact-gradient limit: One Shot steps coincide with SQP steps") {
  const SurfaceMesh s = unit_circle_surface(10, 1.0);
  auto [vol, deformer] = build_volume(s, 2, 3.0);
  auto gen = testing::rng(1001);
  const Eigen::VectorXd target = testing::random_vector(gen, vol.n_nodes(), 0.2);
  testing::QuadraticTrackingProblem problem(vol, target);
  HicksHenneParam param(s, make_symmetric_bump_set(6));
  const BBuilder hybrid =
      make_hybrid_b_builder(param, deformer, 1.0, 0.0625, 0.0, SmoothingFormulation::surface);

  SqpOptions sqpo;
  sqpo.tol = 1e-14;
  sqpo.max_iter = 6;
  const OptHistory ref =
      sqp_equality(problem, param, deformer, Eigen::VectorXd::Zero(6), hybrid, sqpo);

  OneShotConfig cfg;
  cfg.inner_steps = 600;  // effectively converged piggyback per outer step
  cfg.outer_iters = 7;    // 6 design updates
  const OneShotResult os =
      oneshot_multistep(problem, param, deformer, Eigen::VectorXd::Zero(6), cfg, &hybrid);

  CHECK((os.history.final_p - ref.final_p).lpNorm<Eigen::Infinity>() <= 1e-8);
  REQUIRE(os.history.rows.size() == ref.rows.size());
  for (size_t i = 0; i < os.history.rows.size(); ++i)
    CHECK(os.history.rows[i].objective ==
          doctest::Approx(ref.rows[i].objective).epsilon(1e-8));
}

TEST_CASE("a One Shot run started at a KKT point stays there") {
  const SurfaceMesh s = unit_circle_surface(10, 1.0);
  auto [vol, deformer] = build_volume(s, 2, 3.0);
  auto gen = testing::rng(1002);
  const Eigen::VectorXd target = testing::random_vector(gen, vol.n_nodes(), 0.2);
  testing::QuadraticTrackingProblem problem(vol, target);
  HicksHenneParam param(s, make_symmetric_bump_set(6));
  const BBuilder hybrid =
      make_hybrid_b_builder(param, deformer, 1.0, 0.0625, 0.0, SmoothingFormulation::surface);

  SqpOptions sqpo;
  sqpo.tol = 1e-12;
  sqpo.max_iter = 20;
  const Eigen::MatrixXd h_exact = testing::analytic_quadratic_hessian(problem, param, deformer);
  const OptHistory ref = sqp_equality(problem, param, deformer, Eigen::VectorXd::Zero(6),
                                      [&](const Eigen::VectorXd&) { return h_exact; }, sqpo);
  REQUIRE(ref.termination == "tol");

  OneShotConfig cfg;
  cfg.inner_steps = 400;
  cfg.outer_iters = 3;
  const OneShotResult os = oneshot_multistep(problem, param, deformer, ref.final_p, cfg, &hybrid);
  CHECK((os.history.final_p - ref.final_p).lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK(os.history.rows.back().step_norm <= 1e-8);
}

TEST_CASE("J = 10 piggyback reaches the converged-gradient optimum of the benchmark") {
  Bench b = make_bench(16, 2, 8);
  const BBuilder hybrid = make_hybrid_b_builder(*b.param, *b.deformer, 0.1, 0.01, 0.0,
                                                SmoothingFormulation::surface);
  SqpOptions sqpo;
  sqpo.tol = 1e-10;
  sqpo.max_iter = 200;
  const OptHistory ref =
      sqp_mixed(*b.problem, *b.param, *b.deformer, Eigen::VectorXd::Zero(8), hybrid, sqpo);
  REQUIRE(ref.termination == "tol");

  OneShotConfig cfg;
  cfg.inner_steps = 10;
  cfg.outer_iters = 4000;
  cfg.tol = 1e-10;
  cfg.max_design_update = 5e-3;
  const OneShotResult os =
      oneshot_constrained(*b.problem, *b.param, *b.deformer, Eigen::VectorXd::Zero(8), cfg, &hybrid);
  CHECK(os.history.termination == "tol");
  CHECK(os.history.last().objective ==
        doctest::Approx(ref.last().objective).epsilon(1e-6));
}

TEST_CASE("without constraints the constrained driver reduces to the multistep one") {
  const SurfaceMesh s = unit_circle_surface(10, 1.0);
  auto [vol, deformer] = build_volume(s, 2, 3.0);
  auto gen = testing::rng(1003);
  const Eigen::VectorXd target = testing::random_vector(gen, vol.n_nodes(), 0.2);
  testing::QuadraticTrackingProblem problem(vol, target);
  HicksHenneParam param(s, make_symmetric_bump_set(6));
  const BBuilder hybrid =
      make_hybrid_b_builder(param, deformer, 1.0, 0.0625, 0.0, SmoothingFormulation::surface);

  OneShotConfig cfg;
  cfg.inner_steps = 10;
  cfg.outer_iters = 20;
  cfg.max_design_update = 0.05;
  const OneShotResult a =
      oneshot_multistep(problem, param, deformer, Eigen::VectorXd::Zero(6), cfg, &hybrid);
  const OneShotResult c =
      oneshot_constrained(problem, param, deformer, Eigen::VectorXd::Zero(6), cfg, &hybrid);
  CHECK((a.history.final_p - c.history.final_p).lpNorm<Eigen::Infinity>() <= 1e-13);
}

TEST_CASE("halving the step limiter slows the run but lands on the same objective") {
  Bench b = make_bench(16, 2, 8);
  const BBuilder hybrid = make_hybrid_b_builder(*b.param, *b.deformer, 0.1, 0.01, 0.0,
                                                SmoothingFormulation::surface);
  OneShotConfig cfg;
  cfg.inner_steps = 10;
  cfg.outer_iters = 4000;
  cfg.tol = 1e-10;
  cfg.max_design_update = 5e-3;
  const OneShotResult fast =
      oneshot_constrained(*b.problem, *b.param, *b.deformer, Eigen::VectorXd::Zero(8), cfg, &hybrid);
  cfg.max_design_update = 2.5e-3;
  const OneShotResult slow =
      oneshot_constrained(*b.problem, *b.param, *b.deformer, Eigen::VectorXd::Zero(8), cfg, &hybrid);
  CHECK(fast.history.termination == "tol");
  CHECK(slow.history.termination == "tol");
  CHECK(slow.history.steps_taken() >= fast.history.steps_taken());
  const double rel = std::abs(slow.history.last().objective - fast.history.last().objective) /
                     std::max(1.0, std::abs(fast.history.last().objective));
  CHECK(rel <= 1e-5);
}

TEST_CASE("piggyback trace covers every inner step and decays within an outer iteration") {
  Bench b = make_bench(12, 2, 6);
  const BBuilder hybrid = make_hybrid_b_builder(*b.param, *b.deformer, 0.1, 0.01, 0.0,
                                                SmoothingFormulation::surface);
  OneShotConfig cfg;
  cfg.inner_steps = 12;
  cfg.outer_iters = 4;
  cfg.max_design_update = 5e-3;
  const OneShotResult os =
      oneshot_constrained(*b.problem, *b.param, *b.deformer, Eigen::VectorXd::Zero(6), cfg, &hybrid);
  CHECK(os.trace.size() == 4u * 13u);
  // primal residual decays across the first inner loop
  CHECK(os.trace[12].primal_residual < os.trace[0].primal_residual);
}

TEST_CASE("adjoint carry-over keeps the restart residual small; reset does not") {
  Bench b = make_bench(12, 2, 6);
  const BBuilder hybrid = make_hybrid_b_builder(*b.param, *b.deformer, 0.1, 0.01, 0.0,
                                                SmoothingFormulation::surface);
  OneShotConfig cfg;
  cfg.inner_steps = 30;
  cfg.outer_iters = 3;
  cfg.max_design_update = 1e-3;
  const OneShotResult keep =
      oneshot_constrained(*b.problem, *b.param, *b.deformer, Eigen::VectorXd::Zero(6), cfg, &hybrid);
  cfg.adjoint_carryover = false;
  const OneShotResult reset =
      oneshot_constrained(*b.problem, *b.param, *b.deformer, Eigen::VectorXd::Zero(6), cfg, &hybrid);
  // row 31 is inner step 0 of outer iteration 1
  CHECK(keep.trace[31].primal_residual < reset.trace[31].primal_residual);
}

TEST_CASE("the preconditioned One Shot run needs no more outer iterations than B = I") {
  testing::PerimeterBench b = testing::make_perimeter_bench(32, 8);
  const BBuilder hybrid = make_hybrid_b_builder(*b.param, *b.deformer, 1.0, 1.0, 0.0,
                                                SmoothingFormulation::surface);
  const double lmax = power_iteration(hybrid(b.p0), 1e-10, 50000).value;
  const BBuilder identity = make_identity_b_builder(8, lmax / 0.9);

  OneShotConfig cfg;
  cfg.inner_steps = 10;
  cfg.max_design_update = 5e-3;
  cfg.outer_iters = 60000;
  cfg.tol = 1e-6;
  const OneShotResult sob = oneshot_constrained(*b.problem, *b.param, *b.deformer, b.p0, cfg, &hybrid);
  const OneShotResult idn = oneshot_constrained(*b.problem, *b.param, *b.deformer, b.p0, cfg, &identity);
  CHECK(sob.history.termination == "tol");
  CHECK(idn.history.termination == "tol");
  CHECK(sob.history.steps_taken() <= idn.history.steps_taken());
}

TEST_CASE("an unstable preconditioner scale is flagged divergent") {
  Bench b = make_bench(16, 2, 8);
  const BBuilder tiny = make_identity_b_builder(8, 1e-3);  // v = -1000 dp, no limiter
  OneShotConfig cfg;
  cfg.inner_steps = 10;
  cfg.outer_iters = 200;
  try {
    oneshot_multistep(*b.problem, *b.param, *b.deformer, Eigen::VectorXd::Zero(8), cfg, &tiny);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.code() == errc::divergence);
  }
}

TEST_CASE("a non-contracting state map is flagged by residual growth over the inner loop") {
  AnnulusBenchmark::Options opt;
  opt.omega = 1.0;  // way past the contraction bound for the annulus operator
  Bench b = make_bench(12, 2, 6, opt, /*with_targets=*/false);
  const BBuilder hybrid = make_hybrid_b_builder(*b.param, *b.deformer, 0.1, 0.01, 0.0,
                                                SmoothingFormulation::surface);
  OneShotConfig cfg;
  cfg.inner_steps = 10;
  cfg.outer_iters = 50;
  try {
    oneshot_multistep(*b.problem, *b.param, *b.deformer, Eigen::VectorXd::Zero(6), cfg, &hybrid);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.code() == errc::divergence);
    CHECK(std::string(e.what()).find("residual grew") != std::string::npos);
  }
}

TEST_SUITE_END();
