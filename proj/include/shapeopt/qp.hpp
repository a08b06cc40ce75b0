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

#include "shapeopt/linalg.hpp"

namespace shapeopt {

/// Solution of min 1/2 v^T B v + g^T v  s.t.  J_E v + E = 0, J_C v + C >= 0.
struct QPResult {
  Eigen::VectorXd v;
  Eigen::VectorXd nu;           // equality multipliers
  Eigen::VectorXd mu;           // inequality multipliers, >= 0
  std::vector<int> active_set;  // indices of active inequalities
  double kkt_residual = 0.0;    // |B v + g + J_E^T nu - J_C^T mu|_inf
};

constexpr double kQpTol = 1e-9;

/// Direct symmetric-indefinite solve of the saddle system
///   [B J_E^T; J_E 0] [v; nu] = [-g; -E].
/// Throws on rank-deficient J_E (naming the dependent row) or non-SPD B.
QPResult solve_kkt_equality(const Eigen::MatrixXd& b, const Eigen::VectorXd& g,
                            const Eigen::MatrixXd& je, const Eigen::VectorXd& e);

/// Primal active-set iteration: start from the equality-only solution, add
/// the most violated inequality / drop the most negative multiplier until
/// the KKT conditions hold at qp_tol. Throws errc::infeasible_qp carrying
/// the violated set, and errc::cycling when a working set repeats.
QPResult solve_qp_mixed(const Eigen::MatrixXd& b, const Eigen::VectorXd& g,
                        const Eigen::MatrixXd& je, const Eigen::VectorXd& e,
                        const Eigen::MatrixXd& jc, const Eigen::VectorXd& c,
                        double qp_tol = kQpTol);

enum class RegularizeMode { fixed, automatic };

/// B + c I. In automatic mode c is the smallest value on the ladder
/// {0, 1e-8, 1e-6, ...} (x100 steps) for which the Cholesky factorization
/// succeeds.
Eigen::MatrixXd regularize(const Eigen::MatrixXd& b, RegularizeMode mode, double c = 0.0);

}  // namespace shapeopt
