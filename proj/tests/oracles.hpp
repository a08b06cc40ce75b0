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
 *
 * Test-only oracles, independent of the implementation paths they check.
 */
#pragma once

#include <functional>
#include <random>

#include "shapeopt/qp.hpp"

namespace shapeopt::testing {

inline std::mt19937_64 rng(uint64_t seed) { return std::mt19937_64(seed); }

inline Eigen::VectorXd random_vector(std::mt19937_64& gen, int n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * normal(gen);
  return v;
}

inline Field random_field(std::mt19937_64& gen, int n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Field f(n);
  for (auto& v : f) v = scale * Vec2(normal(gen), normal(gen));
  return f;
}

/// Central difference of a scalar function along a direction.
inline double central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, const Eigen::VectorXd& dx, double h) {
  return (f(x + h * dx) - f(x - h * dx)) / (2.0 * h);
}

/// Dense finite-difference Jacobian of a vector map, column by column.
inline Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd j(f0.size(), x.size());
  Eigen::VectorXd q = x;
  for (Eigen::Index c = 0; c < x.size(); ++c) {
    q[c] = x[c] + h;
    const Eigen::VectorXd fp = f(q);
    q[c] = x[c] - h;
    const Eigen::VectorXd fm = f(q);
    q[c] = x[c];
    j.col(c) = (fp - fm) / (2.0 * h);
  }
  return j;
}

/// Brute-force mixed-QP oracle: enumerate every active subset of the
/// inequalities, solve each equality-constrained KKT system by dense LU,
/// and keep the best feasible candidate with nonnegative multipliers.
/// Throws when no candidate is feasible.
struct QpOracleResult {
  Eigen::VectorXd v;
  double objective = 0.0;
  bool feasible = false;
};

inline QpOracleResult qp_enumeration_oracle(const Eigen::MatrixXd& b, const Eigen::VectorXd& g,
                                            const Eigen::MatrixXd& je, const Eigen::VectorXd& e,
                                            const Eigen::MatrixXd& jc, const Eigen::VectorXd& c,
                                            double tol = 1e-9) {
  const int np = static_cast<int>(b.rows());
  const int ne = static_cast<int>(je.rows());
  const int nc = static_cast<int>(jc.rows());
  QpOracleResult best;
  auto objective = [&](const Eigen::VectorXd& v) { return 0.5 * v.dot(b * v) + g.dot(v); };

  for (unsigned mask = 0; mask < (1u << nc); ++mask) {
    std::vector<int> active;
    for (int l = 0; l < nc; ++l)
      if (mask & (1u << l)) active.push_back(l);
    const int na = static_cast<int>(active.size());
    if (ne + na > np) continue;

    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(np + ne + na, np + ne + na);
    kkt.topLeftCorner(np, np) = b;
    Eigen::VectorXd rhs(np + ne + na);
    rhs.head(np) = -g;
    for (int k = 0; k < ne; ++k) {
      kkt.block(np + k, 0, 1, np) = je.row(k);
      kkt.block(0, np + k, np, 1) = je.row(k).transpose();
      rhs[np + k] = -e[k];
    }
    for (int r = 0; r < na; ++r) {
      kkt.block(np + ne + r, 0, 1, np) = jc.row(active[r]);
      kkt.block(0, np + ne + r, np, 1) = jc.row(active[r]).transpose();
      rhs[np + ne + r] = -c[active[r]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::VectorXd v = sol.head(np);

    bool ok = true;
    for (int l = 0; l < nc && ok; ++l)
      if (jc.row(l).dot(v) + c[l] < -tol) ok = false;
    for (int r = 0; r < na && ok; ++r)
      if (-sol[np + ne + r] < -tol) ok = false;  // mu = -multiplier of the active row
    if (!ok) continue;

    const double obj = objective(v);
    if (!best.feasible || obj < best.objective) {
      best.v = v;
      best.objective = obj;
      best.feasible = true;
    }
  }
  return best;
}

}  // namespace shapeopt::testing
