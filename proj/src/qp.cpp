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
#include "shapeopt/qp.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <set>
#include <sstream>

namespace shapeopt {

namespace {

void check_rank(const Eigen::MatrixXd& je) {
  if (je.rows() == 0) return;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(je.transpose());
  qr.setThreshold(1e-12);
  if (qr.rank() < je.rows()) {
    // Identify a dependent row: the one whose removal does not lower the rank.
    for (Eigen::Index r = 0; r < je.rows(); ++r) {
      Eigen::MatrixXd rest(je.rows() - 1, je.cols());
      rest << je.topRows(r), je.bottomRows(je.rows() - r - 1);
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr2(rest.transpose());
      qr2.setThreshold(1e-12);
      if (qr2.rank() == qr.rank())
        throw Error(errc::singular_matrix,
                    "equality constraint row " + std::to_string(r) + " is linearly dependent");
    }
    throw Error(errc::singular_matrix, "equality constraint Jacobian is rank deficient");
  }
}

QPResult solve_saddle(const Eigen::MatrixXd& b, const Eigen::VectorXd& g,
                      const Eigen::MatrixXd& je, const Eigen::VectorXd& e) {
  const Eigen::Index np = b.rows();
  const Eigen::Index ne = je.rows();
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(np + ne, np + ne);
  kkt.topLeftCorner(np, np) = b;
  if (ne > 0) {
    kkt.topRightCorner(np, ne) = je.transpose();
    kkt.bottomLeftCorner(ne, np) = je;
  }
  Eigen::VectorXd rhs(np + ne);
  rhs.head(np) = -g;
  rhs.tail(ne) = -e;
  const Eigen::VectorXd sol = sym_solve(kkt, rhs);
  QPResult res;
  res.v = sol.head(np);
  res.nu = sol.tail(ne);
  res.mu = Eigen::VectorXd();
  Eigen::VectorXd stat = b * res.v + g;
  if (ne > 0) stat += je.transpose() * res.nu;
  res.kkt_residual = stat.size() ? stat.lpNorm<Eigen::Infinity>() : 0.0;
  return res;
}

}  // namespace

QPResult solve_kkt_equality(const Eigen::MatrixXd& b, const Eigen::VectorXd& g,
                            const Eigen::MatrixXd& je, const Eigen::VectorXd& e) {
  if (b.rows() != b.cols() || b.rows() != g.size())
    throw Error(errc::dimension_mismatch, "B and g sizes do not agree");
  if (je.rows() != e.size() || (je.rows() > 0 && je.cols() != b.rows()))
    throw Error(errc::dimension_mismatch, "equality constraint sizes do not agree");
  if (!is_spd(b)) throw Error(errc::domain, "B must be symmetric positive definite");
  check_rank(je);
  return solve_saddle(b, g, je, e);
}

namespace {

// Primal active-set iteration (feasible iterates, blocking-constraint step
// control) for min 1/2 v^T B v + g^T v with J_E v + E = 0 treated as a
// permanent working set and J_C v + C >= 0 entering/leaving. x0 must be
// feasible.
QPResult primal_active_set(const Eigen::MatrixXd& b, const Eigen::VectorXd& g,
                           const Eigen::MatrixXd& je, const Eigen::VectorXd& e,
                           const Eigen::MatrixXd& jc, const Eigen::VectorXd& c,
                           const Eigen::VectorXd& x0, double qp_tol) {
  const Eigen::Index np = b.rows();
  const Eigen::Index ne = je.rows();
  const Eigen::Index nc = jc.rows();
  Eigen::VectorXd x = x0;

  auto stack_rows = [&](const std::vector<int>& w) {
    Eigen::MatrixXd rows(ne + w.size(), np);
    if (ne > 0) rows.topRows(ne) = je;
    for (size_t r = 0; r < w.size(); ++r) rows.row(ne + r) = jc.row(w[r]);
    return rows;
  };
  auto independent_if_added = [&](const std::vector<int>& w, int candidate) {
    std::vector<int> grown = w;
    grown.push_back(candidate);
    const Eigen::MatrixXd rows = stack_rows(grown);
    if (rows.rows() > np) return false;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(rows.transpose());
    qr.setThreshold(1e-12);
    return qr.rank() == rows.rows();
  };

  // Working set: inequalities active at x0, kept linearly independent.
  std::vector<int> working;
  for (int l = 0; l < nc; ++l)
    if (jc.row(l).dot(x) + c[l] <= qp_tol && independent_if_added(working, l))
      working.push_back(l);

  const int max_rounds = 100 * static_cast<int>(np + nc + 2);
  for (int round = 0; round < max_rounds; ++round) {
    const Eigen::Index nw = static_cast<Eigen::Index>(working.size());
    // EQP for the step p: min 1/2 p^T B p + (B x + g)^T p over the working
    // rows; the right-hand side carries their residuals at x, which keeps
    // roundoff from accumulating along the active faces.
    const Eigen::MatrixXd rows = stack_rows(working);
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(np + rows.rows(), np + rows.rows());
    kkt.topLeftCorner(np, np) = b;
    if (rows.rows() > 0) {
      kkt.topRightCorner(np, rows.rows()) = rows.transpose();
      kkt.bottomLeftCorner(rows.rows(), np) = rows;
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(np + rows.rows());
    rhs.head(np) = -(b * x + g);
    if (ne > 0) rhs.segment(np, ne) = -(je * x + e);
    for (Eigen::Index r = 0; r < nw; ++r)
      rhs[np + ne + r] = -(jc.row(working[r]).dot(x) + c[working[r]]);
    const Eigen::VectorXd sol = sym_solve(kkt, rhs);
    const Eigen::VectorXd p = sol.head(np);
    const Eigen::VectorXd mult = sol.tail(rows.rows());

    // Stationarity on the working face: B p + (B x + g) + rows^T mult = 0,
    // so |B p| is the KKT residual at x. Testing |p| instead would never
    // trigger on near-singular B, where flat directions carry large p at
    // negligible residual.
    if ((b * p).lpNorm<Eigen::Infinity>() <= qp_tol) {
      // Stationary on the working set; mu = -multiplier for inequality rows.
      int drop = -1;
      double most_negative = -qp_tol;
      for (Eigen::Index r = 0; r < nw; ++r) {
        const double mu_r = -mult[ne + r];
        if (mu_r < most_negative) {
          most_negative = mu_r;
          drop = static_cast<int>(r);
        }
      }
      if (drop < 0) {
        QPResult res;
        res.v = x;
        res.nu = mult.head(ne);
        res.mu = Eigen::VectorXd::Zero(nc);
        for (Eigen::Index r = 0; r < nw; ++r) res.mu[working[r]] = -mult[ne + r];
        res.active_set = working;
        std::sort(res.active_set.begin(), res.active_set.end());
        Eigen::VectorXd stat = b * res.v + g;
        if (ne > 0) stat += je.transpose() * res.nu;
        if (nc > 0) stat -= jc.transpose() * res.mu;
        res.kkt_residual = stat.size() ? stat.lpNorm<Eigen::Infinity>() : 0.0;
        return res;
      }
      working.erase(working.begin() + drop);
      continue;
    }

    // Step length to the nearest blocking constraint.
    double alpha = 1.0;
    int blocker = -1;
    for (int l = 0; l < nc; ++l) {
      if (std::find(working.begin(), working.end(), l) != working.end()) continue;
      const double dir = jc.row(l).dot(p);
      if (dir >= -1e-14) continue;  // moving away from or along the boundary
      const double slack = jc.row(l).dot(x) + c[l];
      const double step = std::max(0.0, slack) / (-dir);
      if (step < alpha - 1e-14) {
        alpha = step;
        blocker = l;
      }
    }
    x += alpha * p;
    if (blocker >= 0) {
      if (independent_if_added(working, blocker)) {
        working.insert(std::lower_bound(working.begin(), working.end(), blocker), blocker);
      } else {
        // Degenerate blocker: exchange it against the most negative
        // multiplier to keep the working set independent.
        int drop = -1;
        double most_negative = 0.0;
        for (Eigen::Index r = 0; r < nw; ++r) {
          const double mu_r = -mult[ne + r];
          if (mu_r < most_negative) {
            most_negative = mu_r;
            drop = static_cast<int>(r);
          }
        }
        if (drop < 0)
          throw Error(errc::cycling, "degenerate working set without a droppable multiplier");
        working.erase(working.begin() + drop);
        if (independent_if_added(working, blocker))
          working.insert(std::lower_bound(working.begin(), working.end(), blocker), blocker);
      }
    }
  }
  throw Error(errc::cycling, "active-set iteration exceeded its round limit");
}

}  // namespace

QPResult solve_qp_mixed(const Eigen::MatrixXd& b, const Eigen::VectorXd& g,
                        const Eigen::MatrixXd& je, const Eigen::VectorXd& e,
                        const Eigen::MatrixXd& jc, const Eigen::VectorXd& c, double qp_tol) {
  if (jc.rows() != c.size() || (jc.rows() > 0 && jc.cols() != b.rows()))
    throw Error(errc::dimension_mismatch, "inequality constraint sizes do not agree");
  const Eigen::Index np = b.rows();
  const Eigen::Index ne = je.rows();
  const Eigen::Index nc = jc.rows();
  if (!is_spd(b)) throw Error(errc::domain, "B must be symmetric positive definite");
  check_rank(je);

  // Equality-only seed.
  const QPResult eq = solve_saddle(b, g, je, e);
  if (nc == 0) return eq;
  double worst = 0.0;
  for (Eigen::Index l = 0; l < nc; ++l)
    worst = std::min(worst, jc.row(l).dot(eq.v) + c[l]);
  if (worst >= -qp_tol) {
    // Feasible seed: run the active-set iteration directly.
    return primal_active_set(b, g, je, e, jc, c, eq.v, qp_tol);
  }

  // Infeasible seed: exact-penalty phase with elastic slacks,
  //   min 1/2 v^T B v + g^T v + 1/2 s^T s + M 1^T s
  //   s.t. J_E v + E = 0,  J_C v + C + s >= 0,  s >= 0,
  // started from the trivially feasible (v_eq, max(0, -slack)). For M above
  // the multiplier scale the penalty is exact and s* = 0 recovers the
  // original solution; a persistently positive s* certifies infeasibility.
  const Eigen::Index nx = np + nc;
  Eigen::MatrixXd bx = Eigen::MatrixXd::Identity(nx, nx);
  bx.topLeftCorner(np, np) = b;
  Eigen::MatrixXd jex = Eigen::MatrixXd::Zero(ne, nx);
  if (ne > 0) jex.leftCols(np) = je;
  Eigen::MatrixXd jcx = Eigen::MatrixXd::Zero(2 * nc, nx);
  Eigen::VectorXd cx(2 * nc);
  jcx.topLeftCorner(nc, np) = jc;
  jcx.topRightCorner(nc, nc) = Eigen::MatrixXd::Identity(nc, nc);
  cx.head(nc) = c;
  jcx.bottomRightCorner(nc, nc) = Eigen::MatrixXd::Identity(nc, nc);
  cx.tail(nc) = Eigen::VectorXd::Zero(nc);

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(nx);
  x0.head(np) = eq.v;
  for (Eigen::Index l = 0; l < nc; ++l)
    x0[np + l] = std::max(0.0, -(jc.row(l).dot(eq.v) + c[l]));

  double penalty = 1e3 * std::max(1.0, g.lpNorm<Eigen::Infinity>());
  for (int escalation = 0; escalation < 4; ++escalation) {
    Eigen::VectorXd gx(nx);
    gx.head(np) = g;
    gx.tail(nc) = penalty * Eigen::VectorXd::Ones(nc);
    const QPResult ext = primal_active_set(bx, gx, jex, e, jcx, cx, x0, qp_tol);
    const double slack_norm = ext.v.tail(nc).lpNorm<Eigen::Infinity>();
    if (slack_norm <= qp_tol) {
      // Polish on the original variables from the now-feasible point.
      return primal_active_set(b, g, je, e, jc, c, ext.v.head(np), qp_tol);
    }
    x0 = ext.v;
    penalty *= 100.0;
  }
  std::ostringstream msg;
  msg << "QP subproblem infeasible; violated set {";
  bool first = true;
  for (Eigen::Index l = 0; l < nc; ++l) {
    if (x0[np + l] > qp_tol) {
      msg << (first ? "" : ",") << l;
      first = false;
    }
  }
  msg << "}";
  throw Error(errc::infeasible_qp, msg.str());
}

Eigen::MatrixXd regularize(const Eigen::MatrixXd& b, RegularizeMode mode, double c) {
  if (b.rows() != b.cols()) throw Error(errc::dimension_mismatch, "B must be square");
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(b.rows(), b.cols());
  if (mode == RegularizeMode::fixed) {
    if (c < 0.0) throw Error(errc::domain, "regularization constant must be >= 0");
    return b + c * eye;
  }
  // Ladder 0, 1e-8, 1e-6, ... (x100 steps).
  double ladder = 1e-8;
  for (int step = 0; step < 12; ++step) {
    const double trial = (step == 0) ? 0.0 : ladder;
    if (step >= 2) ladder *= 100.0;
    const Eigen::MatrixXd candidate = b + trial * eye;
    if (is_spd(candidate)) return candidate;
  }
  throw Error(errc::domain, "regularization ladder exhausted without reaching SPD");
}

}  // namespace shapeopt
