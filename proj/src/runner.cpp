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
#include "shapeopt/runner.hpp"

#include <cstdio>
#include <fstream>
#include <random>

namespace shapeopt {

namespace {

std::unique_ptr<Parameterization> build_parameterization(const ParamConfig& cfg,
                                                         const SurfaceMesh& baseline) {
  switch (cfg.kind) {
    case ParamKind::hicks_henne: {
      std::vector<HicksHenneBump> bumps;
      if (!cfg.peaks.empty()) {
        for (double pk : cfg.peaks) bumps.push_back({pk, BumpSide::upper});
        for (double pk : cfg.peaks) bumps.push_back({pk, BumpSide::lower});
      } else {
        bumps = make_symmetric_bump_set(cfg.n_bumps);
      }
      return std::make_unique<HicksHenneParam>(baseline, std::move(bumps), cfg.exponent);
    }
    case ParamKind::ffd: {
      FFDParam::Box box;
      if (cfg.ffd_box.size() == 4) {
        box = {cfg.ffd_box[0], cfg.ffd_box[1], cfg.ffd_box[2], cfg.ffd_box[3]};
      } else {
        double x0 = baseline.nodes[0][0], x1 = x0, y0 = baseline.nodes[0][1], y1 = y0;
        for (const auto& x : baseline.nodes) {
          x0 = std::min(x0, x[0]);
          x1 = std::max(x1, x[0]);
          y0 = std::min(y0, x[1]);
          y1 = std::max(y1, x[1]);
        }
        const double mx = cfg.ffd_margin * (x1 - x0);
        const double my = cfg.ffd_margin * (y1 - y0);
        box = {x0 - mx, x1 + mx, y0 - my, y1 + my};
      }
      return std::make_unique<FFDParam>(baseline, box, cfg.ffd_nx, cfg.ffd_ny, cfg.ffd_axis);
    }
    case ParamKind::nonlinear_radial:
      return std::make_unique<NonlinearRadialParam>(baseline, Vec2(0.0, 0.0), cfg.n_basis,
                                                    cfg.alpha, cfg.first_harmonic);
  }
  throw Error(errc::internal, "unreachable parameterization kind");
}

std::vector<int> spread_indices(int count, int total) {
  std::vector<int> idx;
  for (int q = 0; q < count; ++q) idx.push_back(static_cast<int>(q * int64_t(total) / count));
  return idx;
}

}  // namespace

Setup build_setup(const RunConfig& config) {
  Setup setup;
  setup.surface = unit_circle_surface(config.problem.n_s, 1.0);
  auto [volume, deformer] =
      build_volume(setup.surface, config.problem.layers, config.problem.outer_radius);
  setup.volume = std::move(volume);
  setup.deformer = std::make_unique<RadialBlendDeformer>(std::move(deformer));
  setup.param = build_parameterization(config.parameterization, setup.surface);

  AnnulusBenchmark::Options opts;
  opts.source_center = config.problem.source;
  opts.source_width = config.problem.source_width;
  opts.gamma = config.problem.gamma;
  opts.area_target = config.problem.area_target;
  opts.min_radius = config.problem.min_radius;
  opts.radius_constraint_stride = config.problem.radius_stride;
  opts.omega = config.problem.omega;

  if (config.problem.n_targets > 0) {
    // Targets track a scaled/offset copy of the baseline surface state, so
    // the tracking term is active but bounded.
    AnnulusBenchmark::Options probe = opts;
    probe.target_nodes.clear();
    probe.target_values = Eigen::VectorXd();
    AnnulusBenchmark baseline_problem(setup.volume, probe);
    const auto base_state = solve_state(baseline_problem, setup.volume.nodes, 1e-12, 200000);
    opts.target_nodes = spread_indices(config.problem.n_targets, config.problem.n_s);
    opts.target_values.resize(opts.target_nodes.size());
    for (size_t q = 0; q < opts.target_nodes.size(); ++q)
      opts.target_values[q] = config.problem.target_scale * base_state.u[opts.target_nodes[q]] +
                              config.problem.target_offset;
  }

  setup.problem = std::make_unique<AnnulusBenchmark>(setup.volume, opts);

  setup.p0 = Eigen::VectorXd::Zero(setup.param->n_params());
  if (!config.p0.empty()) {
    if (static_cast<int>(config.p0.size()) != setup.param->n_params())
      throw ConfigError("p0", "expected " + std::to_string(setup.param->n_params()) +
                                  " values, got " + std::to_string(config.p0.size()));
    for (size_t j = 0; j < config.p0.size(); ++j) setup.p0[j] = config.p0[j];
  }
  return setup;
}

RunArtifacts execute_run(const RunConfig& config) {
  const Setup setup = build_setup(config);
  const auto& problem = *setup.problem;
  const auto& param = *setup.param;
  const auto& deformer = *setup.deformer;

  SqpOptions sqp_opts;
  sqp_opts.tol = config.optimizer.tol;
  sqp_opts.max_iter = config.optimizer.max_iter;
  sqp_opts.solve_tol = config.optimizer.solve_tol;
  sqp_opts.solve_max_iter = config.optimizer.solve_max_iter;
  sqp_opts.step_cap = config.optimizer.step_cap;
  sqp_opts.reg_mode = config.optimizer.reg_mode;
  sqp_opts.reg_c = config.optimizer.reg_c;

  const BBuilder hybrid = make_hybrid_b_builder(
      param, deformer, config.smoothing.eps1, config.smoothing.eps2, config.smoothing.eps3,
      config.smoothing.formulation, config.smoothing.identity_as_matrix, &setup.volume);

  OptHistory history;
  std::vector<PiggybackTraceRow> trace;
  std::string algorithm;
  switch (config.optimizer.algorithm) {
    case Algorithm::sqp_eq:
      algorithm = "sqp_eq";
      history = sqp_equality(problem, param, deformer, setup.p0, hybrid, sqp_opts);
      break;
    case Algorithm::sqp_mixed:
      algorithm = "sqp_mixed";
      history = sqp_mixed(problem, param, deformer, setup.p0, hybrid, sqp_opts);
      break;
    case Algorithm::grad_desc:
      algorithm = "grad_desc";
      history = gradient_descent_projected(problem, param, deformer, setup.p0,
                                           config.optimizer.step, sqp_opts);
      break;
    case Algorithm::oneshot:
    case Algorithm::oneshot_constrained: {
      OneShotConfig os;
      os.inner_steps = config.optimizer.inner_steps;
      os.max_design_update = config.optimizer.max_design_update;
      os.outer_iters = std::max(1, config.optimizer.max_iter);
      os.eps1 = config.smoothing.eps1;
      os.eps2 = config.smoothing.eps2;
      os.eps3 = config.smoothing.eps3;
      os.adjoint_carryover = config.optimizer.adjoint_carryover;
      os.tol = config.optimizer.tol;
      os.formulation = config.smoothing.formulation;
      const BBuilder* override_b = &hybrid;
      if (config.optimizer.algorithm == Algorithm::oneshot) {
        algorithm = "oneshot";
        auto result = oneshot_multistep(problem, param, deformer, setup.p0, os, override_b);
        history = std::move(result.history);
        trace = std::move(result.trace);
      } else {
        algorithm = "oneshot_constrained";
        auto result = oneshot_constrained(problem, param, deformer, setup.p0, os, override_b);
        history = std::move(result.history);
        trace = std::move(result.trace);
      }
      break;
    }
  }

  const std::filesystem::path outdir(config.output.directory);
  std::filesystem::create_directories(outdir);

  RunArtifacts artifacts;
  artifacts.history_csv = outdir / "history.csv";
  artifacts.summary_json = outdir / "summary.json";
  artifacts.final_surface_csv = outdir / "final_surface.csv";

  {
    std::ofstream os(artifacts.history_csv);
    write_history_csv(os, history, config.output.deterministic_time);
  }
  {
    std::ofstream os(artifacts.summary_json);
    write_summary_json(os, history, algorithm, config.seed);
  }
  {
    std::ofstream os(artifacts.final_surface_csv);
    dump_surface_csv(os, param.apply(history.final_p));
  }
  if (!trace.empty()) {
    artifacts.piggyback_csv = outdir / "piggyback_residuals.csv";
    std::ofstream os(*artifacts.piggyback_csv);
    write_piggyback_csv(os, trace);
  }
  if (config.output.dump_mesh) {
    std::ofstream os(outdir / "volume_mesh.csv");
    VolumeMesh vol = setup.volume;
    vol.nodes = deformer.deform(param.apply(history.final_p).nodes);
    dump_volume_csv(os, vol);
  }
  if (config.output.dump_operators) {
    const SurfaceMesh final_surface = param.apply(history.final_p);
    const SurfaceOperators ops = assemble_surface_operators(final_surface);
    std::ofstream os(outdir / "operators.txt");
    dump_matrix(os, ops.mass, "mass");
    dump_matrix(os, ops.stiffness, "stiffness");
    const HybridOperator hybrid_op = assemble_hybrid_operator(
        param, deformer, history.final_p, ops, config.smoothing.eps1, config.smoothing.eps2,
        config.smoothing.eps3, SmoothingFormulation::surface, nullptr,
        config.smoothing.identity_as_matrix);
    dump_matrix(os, hybrid_op.b, "hybrid");
  }

  artifacts.history = std::move(history);
  return artifacts;
}

VerifyLevel parse_verify_level(const std::string& level) {
  if (level == "gradient") return VerifyLevel::gradient;
  if (level == "hessian") return VerifyLevel::hessian;
  if (level == "operators") return VerifyLevel::operators;
  if (level == "all") return VerifyLevel::all;
  throw Error(errc::config, "verify level must be one of gradient|hessian|operators|all");
}

namespace {

void check_gradient(VerifyReport& report, uint64_t seed) {
  RunConfig cfg;
  cfg.problem.n_s = 32;
  cfg.problem.layers = 4;
  cfg.parameterization.n_bumps = 12;
  cfg.problem.min_radius = std::nullopt;
  const Setup setup = build_setup(cfg);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double h = 1e-5;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd p(setup.param->n_params()), dp(setup.param->n_params());
    for (int j = 0; j < p.size(); ++j) {
      p[j] = 0.05 * normal(rng);
      dp[j] = normal(rng);
    }
    const Eigen::VectorXd g =
        reduced_objective_gradient(*setup.problem, *setup.param, *setup.deformer, p, 1e-13);
    const double fp =
        reduced_objective(*setup.problem, *setup.param, *setup.deformer, p + h * dp, 1e-13);
    const double fm =
        reduced_objective(*setup.problem, *setup.param, *setup.deformer, p - h * dp, 1e-13);
    const double fd = (fp - fm) / (2.0 * h);
    const double directional = g.dot(dp);
    const double rel = std::abs(directional - fd) / std::max(1.0, std::abs(directional));
    worst = std::max(worst, rel);
  }
  report.checks.push_back({"gradient.fd_vs_adjoint", worst, 1e-6, worst <= 1e-6,
                           "20 random (p, dp) pairs, central differences at h=1e-5"});

  // Adjoint identity of the parameterization products.
  double worst_pairing = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd p(setup.param->n_params()), dp(setup.param->n_params());
    for (int j = 0; j < p.size(); ++j) {
      p[j] = 0.05 * normal(rng);
      dp[j] = normal(rng);
    }
    Field w(setup.surface.n_nodes());
    for (auto& v : w) v = Vec2(normal(rng), normal(rng));
    const Field jv = setup.param->jvp(p, dp);
    const Eigen::VectorXd vj = setup.param->vjp(p, w);
    worst_pairing = std::max(worst_pairing, std::abs(dot(jv, w) - dp.dot(vj)));
  }
  report.checks.push_back({"gradient.adjoint_identity", worst_pairing, 1e-12,
                           worst_pairing <= 1e-12, "<jvp(dp), w> == <dp, vjp(w)>"});
}

void check_hessian(VerifyReport& report, uint64_t seed) {
  std::mt19937_64 rng(seed + 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::ostringstream appendix;

  auto run_case = [&](ParamKind kind, double alpha, const std::string& id) {
    RunConfig cfg;
    cfg.problem.n_s = 8;
    cfg.problem.layers = 2;
    cfg.problem.n_targets = 4;
    cfg.problem.min_radius = std::nullopt;
    cfg.parameterization.kind = kind;
    cfg.parameterization.n_bumps = 4;
    cfg.parameterization.ffd_nx = 2;
    cfg.parameterization.ffd_ny = 2;
    cfg.parameterization.n_basis = 3;
    cfg.parameterization.alpha = alpha;
    const Setup setup = build_setup(cfg);
    Eigen::VectorXd p(setup.param->n_params());
    for (int j = 0; j < p.size(); ++j) p[j] = 0.03 * normal(rng);
    const HessianReport rep =
        hessian_report(*setup.problem, *setup.param, *setup.deformer, p, FdSettings{});
    report.checks.push_back({"hessian." + id, rep.max_rel_error, 1e-3, rep.max_rel_error <= 1e-3,
                             "chained assembly vs FD oracle"});
    if (setup.param->linear())
      report.checks.push_back({"hessian." + id + ".term2_zero", rep.term2_norm, 0.0,
                               rep.term2_norm == 0.0, "linear map second-derivative term"});
    appendix << "--- " << id << " ---\n";
    write_hessian_report(appendix, rep);
  };

  run_case(ParamKind::hicks_henne, 0.0, "hicks_henne");
  run_case(ParamKind::ffd, 0.0, "ffd");
  run_case(ParamKind::nonlinear_radial, 0.5, "nonlinear_radial");
  report.appendix += appendix.str();
}

void check_operators(VerifyReport& report, uint64_t seed) {
  const SurfaceMesh mesh = unit_circle_surface(64, 1.0);
  const SurfaceOperators ops = assemble_surface_operators(mesh);

  const double row_sum = ops.stiffness.row_sums().cwiseAbs().maxCoeff();
  report.checks.push_back(
      {"operators.stiffness_row_sums", row_sum, 1e-12, row_sum <= 1e-12, "constants in the kernel"});

  const double mass_defect = std::abs(ops.mass.sum_entries() - perimeter(mesh));
  report.checks.push_back({"operators.mass_sum_is_perimeter", mass_defect, 1e-12,
                           mass_defect <= 1e-12, "consistent mass total"});

  // Discrete smoothing identity (eps1 M + eps2 K) g = M f.
  std::mt19937_64 rng(seed + 2);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd f(mesh.n_nodes());
  for (int i = 0; i < f.size(); ++i) f[i] = normal(rng);
  const double eps1 = 1.0, eps2 = 0.0625;
  const Eigen::VectorXd g = smooth_surface_field(ops, f, eps1, eps2);
  const Eigen::VectorXd lhs = eps1 * ops.mass.multiply(g) + eps2 * ops.stiffness.multiply(g);
  const double identity_res = (lhs - ops.mass.multiply(f)).lpNorm<Eigen::Infinity>();
  report.checks.push_back({"operators.smoothing_identity", identity_res, 1e-10,
                           identity_res <= 1e-10, "(eps1 M + eps2 K) g = M f"});

  // Fourier amplification factors against the dense generalized eigensolve.
  const auto eig = generalized_eigen(ops.stiffness.to_dense(), ops.mass.to_dense());
  double worst = 0.0;
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    const Eigen::VectorXd mode = eig.vectors.col(k);
    const Eigen::VectorXd smoothed = smooth_surface_field(ops, mode, eps1, eps2);
    const double expected = 1.0 / (eps1 + eps2 * eig.values[k]);
    const double measured = mode.dot(ops.mass.multiply(smoothed)) /
                            mode.dot(ops.mass.multiply(mode));
    worst = std::max(worst, std::abs(measured - expected));
  }
  report.checks.push_back({"operators.fourier_amplification", worst, 1e-8, worst <= 1e-8,
                           "64-gon amplification 1/(eps1 + eps2 lambda_k)"});

  // operator dumps in the shared triplet format
  std::ostringstream dumps;
  dump_matrix(dumps, ops.mass, "M_surface_64gon");
  dump_matrix(dumps, ops.stiffness, "K_surface_64gon");
  {
    auto [vol, deformer] = build_volume(mesh, 2, 3.0);
    HicksHenneParam param(mesh, make_symmetric_bump_set(12));
    const HybridOperator hy =
        assemble_hybrid_operator(param, deformer, Eigen::VectorXd::Zero(12), ops, eps1, eps2, 0.0,
                                 SmoothingFormulation::surface);
    dump_matrix(dumps, hy.b, "B_hybrid_12bumps");
  }
  report.appendix += dumps.str();
}

}  // namespace

VerifyReport run_verification(VerifyLevel level, uint64_t seed) {
  VerifyReport report;
  if (level == VerifyLevel::gradient || level == VerifyLevel::all) check_gradient(report, seed);
  if (level == VerifyLevel::hessian || level == VerifyLevel::all) check_hessian(report, seed);
  if (level == VerifyLevel::operators || level == VerifyLevel::all) check_operators(report, seed);
  return report;
}

void write_verify_report(std::ostream& os, const VerifyReport& report) {
  char buf[256];
  os << "verification report\n";
  for (const auto& c : report.checks) {
    std::snprintf(buf, sizeof(buf), "%-44s %s  measured %.3e  tolerance %.3e  (%s)\n",
                  c.id.c_str(), c.pass ? "PASS" : "FAIL", c.measured, c.tolerance,
                  c.detail.c_str());
    os << buf;
  }
  os << (report.all_pass() ? "all checks passed\n" : "some checks FAILED\n");
  if (!report.appendix.empty()) os << "\n" << report.appendix;
}

}  // namespace shapeopt
